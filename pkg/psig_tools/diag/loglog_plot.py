import logging
import math
import xml.etree.ElementTree as ET
from typing import List, Sequence, Tuple

from psig_tools import exceptions


logger = logging.getLogger(__name__)

WIDTH = 640
HEIGHT = 420
MARGIN_LEFT = 70
MARGIN_RIGHT = 170
MARGIN_TOP = 30
MARGIN_BOTTOM = 50
TICK_LENGTH = 6
SERIES_COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd']
SVG_NAMESPACE = 'http://www.w3.org/2000/svg'

Series = Tuple[str, Sequence[Tuple[float, float]]]


def decades(low, high):
    """Integer exponents k with 10^k covering [low, high]."""
    first = math.floor(math.log10(low))
    last = math.ceil(math.log10(high))
    if first == last:
        last += 1
    return list(range(first, last + 1))


def check_series(series):
    if not series:
        raise exceptions.ValidationError('At least one series is required to plot.')
    for label, points in series:
        if len(points) == 0:
            raise exceptions.ValidationError('Series {!r} is empty.'.format(label))
        for x, y in points:
            if not (x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)):
                raise exceptions.ValidationError(
                    'Series {!r} has a non-positive point ({}, {}); '
                    'log-log axes need positive values.'.format(label, x, y)
                )


class _Axes(object):
    def __init__(self, x_decades, y_decades):
        self.x_decades = x_decades
        self.y_decades = y_decades
        self.plot_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
        self.plot_height = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def x(self, value):
        low, high = self.x_decades[0], self.x_decades[-1]
        return MARGIN_LEFT + (math.log10(value) - low) / (high - low) * self.plot_width

    def y(self, value):
        low, high = self.y_decades[0], self.y_decades[-1]
        return MARGIN_TOP + (high - math.log10(value)) / (high - low) * self.plot_height


def _fmt(value):
    return '{:.2f}'.format(value)


def _decade_label(parent, x, y, exponent, anchor):
    text = ET.SubElement(
        parent,
        'text',
        {'x': _fmt(x), 'y': _fmt(y), 'text-anchor': anchor, 'font-size': '12'},
    )
    text.text = '10'
    power = ET.SubElement(text, 'tspan', {'dy': '-6', 'font-size': '9'})
    power.text = str(exponent)


def render_svg_loglog(
    series: Sequence[Series],
    x_label: str = 'gradient evaluations',
    y_label: str = 'MSE',
) -> str:
    check_series(series)
    xs = [x for _, points in series for x, _ in points]
    ys = [y for _, points in series for _, y in points]
    axes = _Axes(decades(min(xs), max(xs)), decades(min(ys), max(ys)))

    svg = ET.Element(
        'svg',
        {
            'xmlns': SVG_NAMESPACE,
            'width': str(WIDTH),
            'height': str(HEIGHT),
            'viewBox': '0 0 {} {}'.format(WIDTH, HEIGHT),
        },
    )
    ET.SubElement(
        svg, 'rect', {'width': str(WIDTH), 'height': str(HEIGHT), 'fill': 'white'}
    )
    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
    frame = ET.SubElement(svg, 'g', {'class': 'axes', 'stroke': 'black'})
    ET.SubElement(
        frame,
        'line',
        {'x1': str(left), 'y1': str(bottom), 'x2': str(right), 'y2': str(bottom)},
    )
    ET.SubElement(
        frame, 'line', {'x1': str(left), 'y1': str(top), 'x2': str(left), 'y2': str(bottom)}
    )

    for exponent in axes.x_decades:
        x = axes.x(10.0 ** exponent)
        ET.SubElement(
            svg,
            'line',
            {
                'class': 'x-tick',
                'x1': _fmt(x),
                'y1': str(bottom),
                'x2': _fmt(x),
                'y2': str(bottom + TICK_LENGTH),
                'stroke': 'black',
            },
        )
        _decade_label(svg, x, bottom + TICK_LENGTH + 16, exponent, 'middle')
    for exponent in axes.y_decades:
        y = axes.y(10.0 ** exponent)
        ET.SubElement(
            svg,
            'line',
            {
                'class': 'y-tick',
                'x1': str(left - TICK_LENGTH),
                'y1': _fmt(y),
                'x2': str(left),
                'y2': _fmt(y),
                'stroke': 'black',
            },
        )
        _decade_label(svg, left - TICK_LENGTH - 4, y + 4, exponent, 'end')

    x_title = ET.SubElement(
        svg,
        'text',
        {'x': _fmt((left + right) / 2), 'y': str(HEIGHT - 8), 'text-anchor': 'middle'},
    )
    x_title.text = x_label
    y_title = ET.SubElement(
        svg,
        'text',
        {
            'x': '16',
            'y': _fmt((top + bottom) / 2),
            'text-anchor': 'middle',
            'transform': 'rotate(-90 16 {})'.format(_fmt((top + bottom) / 2)),
        },
    )
    y_title.text = y_label

    legend = ET.SubElement(svg, 'g', {'class': 'legend'})
    for index, (label, points) in enumerate(series):
        color = SERIES_COLORS[index % len(SERIES_COLORS)]
        coords = ' '.join(
            '{},{}'.format(_fmt(axes.x(x)), _fmt(axes.y(y))) for x, y in sorted(points)
        )
        ET.SubElement(
            svg,
            'polyline',
            {
                'class': 'series',
                'points': coords,
                'fill': 'none',
                'stroke': color,
                'stroke-width': '2',
            },
        )
        entry_y = top + 20 * index + 10
        ET.SubElement(
            legend,
            'line',
            {
                'x1': str(right + 15),
                'y1': str(entry_y),
                'x2': str(right + 40),
                'y2': str(entry_y),
                'stroke': color,
                'stroke-width': '2',
            },
        )
        text = ET.SubElement(
            legend, 'text', {'x': str(right + 46), 'y': str(entry_y + 4), 'font-size': '12'}
        )
        text.text = label

    return ET.tostring(svg, encoding='unicode')


def emit_svg_loglog(
    series: Sequence[Series],
    path: str,
    x_label: str = 'gradient evaluations',
    y_label: str = 'MSE',
) -> List[int]:
    """Write a standalone log-log SVG with one polyline per labeled series.

    Args:
        series: ``(label, [(budget, mse), ...])`` pairs, typically the deterministic and the Monte
            Carlo estimator.
        path: Destination file.

    Returns:
        The decade exponents used for the x axis ticks.

    Raises:
        ValidationError: If there is no series, a series is empty or a value is not positive. No file
            is written in that case.
        OSError: If the path is not writable.
    """
    document = render_svg_loglog(series, x_label, y_label)
    with open(path, 'w') as f:
        f.write('<?xml version="1.0" encoding="UTF-8"?>\n')
        f.write(document)
        f.write('\n')
    logger.info('Wrote %s', path)
    xs = [x for _, points in series for x, _ in points]
    return decades(min(xs), max(xs))
