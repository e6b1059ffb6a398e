from setuptools import setup


CLASSIFIERS = [
    "Development Status :: 4 - Beta",
    "Natural Language :: English",
    "License :: OSI Approved :: BSD License",
    "Operating System :: OS Independent",
    "Programming Language :: Python",
    "Programming Language :: Python :: 3.7",
    "Topic :: Scientific/Engineering :: Artificial Intelligence",
]

install_requires = [
    'numpy>=1.17,<2',
    'requests>=2.20.0,<3',
    'setuptools_scm>=3.1.0,<4',
]

extras_require = {
    'test': [
        'black==19.3b0',
        'flake8==3.7.7',
        'mock>=2.0.0',
        'requests_mock>=1.4.0',
        'pre-commit==1.14.4',
        'pytest-cov>=2.5.1',
        'pytest>=3.6.3',
        'pytest-timeout>=1.3.1',
    ]
}

setup(
    name='psig-tools',
    use_scm_version=True,
    setup_requires=['setuptools_scm'],
    description='Path-sampled integrated gradients: attribution estimators and their experiments',
    classifiers=CLASSIFIERS,
    license='BSD 3-clause "New" or "Revised" License',
    packages=['psig_tools', 'psig_tools.diag'],
    package_data={'psig_tools': ['data/*.cfg']},
    python_requires='>=3.7',
    install_requires=install_requires,
    extras_require=extras_require,
    entry_points={'console_scripts': ['psig-tools = psig_tools.cli:main']},
    include_package_data=True,
)
