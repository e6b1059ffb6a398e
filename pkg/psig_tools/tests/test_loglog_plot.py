import os
import xml.etree.ElementTree as ET

import pytest

from psig_tools import exceptions
from psig_tools.diag import loglog_plot


SVG = '{%s}' % loglog_plot.SVG_NAMESPACE
BUDGETS = [10, 100, 1000, 10000]


@pytest.fixture
def series():
    return [
        ('deterministic', [(b, 1.0 / b ** 2) for b in BUDGETS]),
        ('monte carlo', [(b, 1.0 / b) for b in BUDGETS]),
    ]


def test_writes_one_polyline_per_series(tmpdir, series):
    path = str(tmpdir.join('convergence.svg'))
    loglog_plot.emit_svg_loglog(series, path)
    root = ET.parse(path).getroot()
    assert root.tag == SVG + 'svg'
    polylines = root.findall(SVG + 'polyline')
    assert len(polylines) == 2
    assert all(len(p.get('points').split()) == len(BUDGETS) for p in polylines)
    labels = [t.text for t in root.iter(SVG + 'text')]
    assert 'deterministic' in labels and 'monte carlo' in labels


def test_x_ticks_sit_on_decades(tmpdir):
    path = str(tmpdir.join('decades.svg'))
    exponents = loglog_plot.emit_svg_loglog([('one', [(1, 1.0), (10000, 0.5)])], path)
    assert exponents == [0, 1, 2, 3, 4]
    ticks = [
        line for line in ET.parse(path).getroot().iter(SVG + 'line') if line.get('class') == 'x-tick'
    ]
    assert len(ticks) == 5
    positions = [float(tick.get('x1')) for tick in ticks]
    assert positions == sorted(positions)


def test_decades_widen_a_single_decade():
    assert loglog_plot.decades(20, 50) == [1, 2]
    assert loglog_plot.decades(0.002, 0.5) == [-3, -2, -1, 0]


@pytest.mark.parametrize(
    'bad_series',
    [[], [('empty', [])], [('zero', [(10, 0.0), (100, 0.1)])], [('negative', [(-1, 1.0)])]],
)
def test_bad_series_are_refused_without_writing(tmpdir, bad_series):
    path = str(tmpdir.join('bad.svg'))
    with pytest.raises(exceptions.ValidationError):
        loglog_plot.emit_svg_loglog(bad_series, path)
    assert not os.path.exists(path)
