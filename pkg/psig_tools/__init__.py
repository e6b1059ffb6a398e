"""
The pkg_resources module will try to get the right version through the setuptools_scm, which will try to
detect the version of psig_tools package from any git tags, commit hash codes. This works if this Python package
is either installed from PyPI or installed via git directly.
"""

from pkg_resources import get_distribution, DistributionNotFound

try:
    __version__ = get_distribution('psig-tools').version
except DistributionNotFound:
    # package is not installed
    __version__ = "Unknown Ver."

# By using the below import statement when you call import psig_tools you get:
# psig_tools.toolkit.attribute
# psig_tools.toolkit.variance
# psig_tools.toolkit.convergence
# ...
from psig_tools.toolkit import PsigToolkit as toolkit  # noqa
