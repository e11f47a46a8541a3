#!/usr/bin/env python3
"""
Plain SVG plots of run artifacts: accuracy per factor, per-class heat grid,
time/accuracy Pareto scatter and feature-space trajectories.

Output is text only, with fixed number formatting and no timestamps, so the
same data always renders to the same bytes.
"""

import logging
import math
from xml.sax.saxutils import escape, quoteattr

from ..utils.errors import EmptyResultError

logger = logging.getLogger(__name__)

PALETTE = {
    'Decimate': '#1f77b4',
    'MinMax': '#ff7f0e',
    'M4': '#2ca02c',
    'LTTB': '#d62728',
    'MinMaxLTTB': '#9467bd',
    'Original': '#333333',
}
FALLBACK_COLOR = '#7f7f7f'


def _num(value):
    return f"{value:.2f}"


def color_for(algorithm):
    return PALETTE.get(algorithm, FALLBACK_COLOR)


class Canvas:
    """Plot area with linear or log10 axes mapped onto SVG pixels."""

    def __init__(self, width=640, height=420, margin=(40, 150, 60, 70),
                 x_range=(0.0, 1.0), y_range=(0.0, 1.0), log_x=False):
        self.width, self.height = width, height
        self.top, self.right, self.bottom, self.left = margin
        self.log_x = log_x
        self.x_range = tuple(self._tx(v) for v in x_range)
        self.y_range = y_range
        if self.x_range[0] == self.x_range[1]:
            self.x_range = (self.x_range[0] - 0.5, self.x_range[1] + 0.5)
        if self.y_range[0] == self.y_range[1]:
            self.y_range = (self.y_range[0] - 0.5, self.y_range[1] + 0.5)
        self.elements = []

    def _tx(self, value):
        return math.log10(value) if self.log_x else float(value)

    def x(self, value):
        lo, hi = self.x_range
        span = self.width - self.left - self.right
        return self.left + (self._tx(value) - lo) / (hi - lo) * span

    def y(self, value):
        lo, hi = self.y_range
        span = self.height - self.top - self.bottom
        return self.height - self.bottom - (value - lo) / (hi - lo) * span

    def add(self, element):
        self.elements.append(element)

    def text(self, x, y, content, anchor='middle', size=12, css=None):
        cls = f' class="{css}"' if css else ''
        self.add(f'<text x="{_num(x)}" y="{_num(y)}" font-size="{size}" '
                 f'text-anchor="{anchor}"{cls}>{escape(str(content))}</text>')

    def line(self, x1, y1, x2, y2, stroke='#000000', dash=None, css=None, width=1):
        extra = f' stroke-dasharray="{dash}"' if dash else ''
        cls = f' class="{css}"' if css else ''
        self.add(f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" '
                 f'stroke="{stroke}" stroke-width="{width}"{extra}{cls}/>')

    def polyline(self, points, stroke, css=None, data=None):
        coords = ' '.join(f"{_num(px)},{_num(py)}" for px, py in points)
        cls = f' class="{css}"' if css else ''
        attrs = ''.join(f' data-{k}={quoteattr(str(v))}' for k, v in (data or {}).items())
        self.add(f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
                 f'stroke-width="1.5"{cls}{attrs}/>')

    def circle(self, cx, cy, fill, css, r=4, stroke=None, title=None):
        outline = f' stroke="{stroke}" stroke-width="1.5"' if stroke else ''
        inner = f'<title>{escape(title)}</title>' if title else ''
        self.add(f'<circle cx="{_num(cx)}" cy="{_num(cy)}" r="{r}" fill="{fill}"{outline} '
                 f'class="{css}">{inner}</circle>')

    def star(self, cx, cy, fill, css, size=9):
        points = []
        for i in range(10):
            radius = size if i % 2 == 0 else size * 0.45
            angle = math.pi / 2 + i * math.pi / 5
            points.append(f"{_num(cx + radius * math.cos(angle))},{_num(cy - radius * math.sin(angle))}")
        self.add(f'<polygon points="{" ".join(points)}" fill="{fill}" stroke="#000000" '
                 f'stroke-width="0.5" class="{css}"/>')

    def axes(self, x_label, y_label, x_ticks, y_ticks, title=None):
        x0, x1 = self.left, self.width - self.right
        y0, y1 = self.height - self.bottom, self.top
        self.line(x0, y0, x1, y0, css='axis')
        self.line(x0, y0, x0, y1, css='axis')
        for value in x_ticks:
            px = self.x(value)
            self.line(px, y0, px, y0 + 4)
            self.text(px, y0 + 18, _tick_label(value), size=10)
        for value in y_ticks:
            py = self.y(value)
            self.line(x0 - 4, py, x0, py)
            self.text(x0 - 8, py + 4, _tick_label(value), anchor='end', size=10)
        self.text((x0 + x1) / 2, self.height - 15, x_label)
        self.add(f'<text x="15" y="{_num((y0 + y1) / 2)}" font-size="12" text-anchor="middle" '
                 f'transform="rotate(-90 15 {_num((y0 + y1) / 2)})">{escape(y_label)}</text>')
        if title:
            self.text(self.width / 2, 22, title, size=14, css='title')

    def legend(self, entries):
        x = self.width - self.right + 15
        for i, (label, color) in enumerate(entries):
            y = self.top + 10 + 18 * i
            self.line(x, y, x + 18, y, stroke=color, width=2, css='legend-key')
            self.text(x + 24, y + 4, label, anchor='start', size=11)

    def render(self):
        body = '\n'.join(self.elements)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
                f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
                f'<rect width="100%" height="100%" fill="#ffffff"/>\n{body}\n</svg>\n')


def _tick_label(value):
    if float(value).is_integer():
        return str(int(value))
    return f"{value:g}"


def _linear_ticks(lo, hi, count=5):
    if hi == lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [round(lo + i * step, 6) for i in range(count)]


def _decade_ticks(lo, hi):
    first, last = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
    return [10.0 ** e for e in range(first, last + 1)]


def accuracy_plot(rows, critical_factors=None, title='Accuracy by downsampling factor'):
    """Mean accuracy per factor and algorithm.

    ``rows`` are dicts with algorithm, factor, mean_accuracy and
    std_accuracy; the Original row draws a dashed reference line inside a
    ±1 std band. Critical factors are starred.
    """
    rows = list(rows)
    original = [r for r in rows if r['algorithm'] == 'Original']
    grid = [r for r in rows if r['algorithm'] != 'Original']
    if not grid:
        raise EmptyResultError("accuracy plot needs >= 1 downsampled configuration")
    critical_factors = critical_factors or {}

    factors = [r['factor'] for r in grid]
    values = [r['mean_accuracy'] for r in rows]
    canvas = Canvas(x_range=(min(factors), max(factors)), log_x=min(factors) > 0,
                    y_range=(max(0.0, min(values) - 0.05), min(1.0, max(values) + 0.05)))
    canvas.axes('Downsampling factor', 'Mean accuracy',
                sorted(set(factors)) if len(set(factors)) <= 8 else _decade_ticks(min(factors), max(factors)),
                _linear_ticks(*canvas.y_range), title)

    if original:
        ref = original[0]
        lo = max(canvas.y_range[0], ref['mean_accuracy'] - ref['std_accuracy'])
        hi = min(canvas.y_range[1], ref['mean_accuracy'] + ref['std_accuracy'])
        x0, x1 = canvas.left, canvas.width - canvas.right
        canvas.add(f'<rect x="{_num(x0)}" y="{_num(canvas.y(hi))}" width="{_num(x1 - x0)}" '
                   f'height="{_num(canvas.y(lo) - canvas.y(hi))}" fill="#cccccc" '
                   f'fill-opacity="0.4" class="original-band"/>')
        py = canvas.y(ref['mean_accuracy'])
        canvas.line(x0, py, x1, py, stroke=color_for('Original'), dash='6,4',
                    css='original-reference')

    algorithms = sorted({r['algorithm'] for r in grid})
    for algorithm in algorithms:
        series = sorted((r for r in grid if r['algorithm'] == algorithm), key=lambda r: r['factor'])
        color = color_for(algorithm)
        canvas.polyline([(canvas.x(r['factor']), canvas.y(r['mean_accuracy'])) for r in series],
                        color, css='accuracy-line', data={'algorithm': algorithm})
        for r in series:
            canvas.circle(canvas.x(r['factor']), canvas.y(r['mean_accuracy']), color, 'accuracy-point',
                          r=3, title=f"{algorithm}({r['factor']}): {r['mean_accuracy']:.3f}")
        critical = critical_factors.get(algorithm)
        hit = [r for r in series if r['factor'] == critical]
        if hit:
            canvas.star(canvas.x(critical), canvas.y(hit[0]['mean_accuracy']), color, 'critical-factor')

    canvas.legend([(a, color_for(a)) for a in algorithms]
                  + ([('Original', color_for('Original'))] if original else []))
    return canvas.render()


def _heat_color(value):
    # White (0) to dark blue (1)
    value = min(1.0, max(0.0, value))
    r = int(round(255 - value * (255 - 8)))
    g = int(round(255 - value * (255 - 48)))
    b = int(round(255 - value * (255 - 107)))
    return f"#{r:02x}{g:02x}{b:02x}"


def per_class_heatmap(cells, row_labels, class_names, title='Per-class sensitivity'):
    """Grid of configurations (rows) by classes (columns).

    ``cells`` maps (row_label, class_name) -> value in [0, 1].
    """
    if not row_labels or not class_names:
        raise EmptyResultError("heat grid needs >= 1 row and >= 1 class")
    cell_w, cell_h = 70, 18
    left, top = 140, 50
    width = left + cell_w * len(class_names) + 20
    height = top + cell_h * len(row_labels) + 30
    canvas = Canvas(width=width, height=height)
    canvas.text(width / 2, 22, title, size=14, css='title')
    for j, name in enumerate(class_names):
        canvas.text(left + cell_w * (j + 0.5), top - 8, name, size=11)
    for i, label in enumerate(row_labels):
        y = top + cell_h * i
        canvas.text(left - 8, y + cell_h * 0.7, label, anchor='end', size=10)
        for j, name in enumerate(class_names):
            value = cells.get((label, name))
            fill = _heat_color(value) if value is not None else '#eeeeee'
            shown = f"{value:.2f}" if value is not None else 'n/a'
            canvas.add(f'<rect x="{left + cell_w * j}" y="{y}" width="{cell_w}" height="{cell_h}" '
                       f'fill="{fill}" stroke="#ffffff" class="cell">'
                       f'<title>{escape(f"{label} / {name}: {shown}")}</title></rect>')
    return canvas.render()


def pareto_plot(points, title='Extraction time vs accuracy'):
    """Scatter on a log10 time axis; non-dominated points are filled and
    joined by the front line, dominated points are hollow."""
    points = list(points)
    if not points:
        raise EmptyResultError("Pareto plot needs >= 1 point")
    times = [p.extraction_time_s for p in points]
    accs = [p.mean_accuracy for p in points]
    canvas = Canvas(x_range=(min(times) / 1.5, max(times) * 1.5), log_x=True,
                    y_range=(max(0.0, min(accs) - 0.05), min(1.0, max(accs) + 0.05)))
    canvas.axes('Feature extraction time [s] (log scale)', 'Mean accuracy',
                _decade_ticks(min(times) / 1.5, max(times) * 1.5), _linear_ticks(*canvas.y_range),
                title)

    front = sorted((p for p in points if not p.dominated), key=lambda p: p.extraction_time_s)
    if len(front) > 1:
        canvas.polyline([(canvas.x(p.extraction_time_s), canvas.y(p.mean_accuracy)) for p in front],
                        '#000000', css='pareto-front')
    for p in sorted(points, key=lambda p: p.config.sort_key()):
        color = color_for(p.config.algorithm.value)
        label = f"{p.config.label}: {p.mean_accuracy:.3f} @ {p.extraction_time_s:.4g}s"
        if p.dominated:
            canvas.circle(canvas.x(p.extraction_time_s), canvas.y(p.mean_accuracy), '#ffffff',
                          'pareto-point dominated', stroke=color, title=label)
        else:
            canvas.circle(canvas.x(p.extraction_time_s), canvas.y(p.mean_accuracy), color,
                          'pareto-point non-dominated', r=6, stroke='#000000', title=label)
    algorithms = sorted({p.config.algorithm.value for p in points})
    canvas.legend([(a, color_for(a)) for a in algorithms])
    return canvas.render()


def trajectory_plot(trajectories, title='Feature-space trajectories'):
    """First two embedding coordinates of every trajectory, Original marked."""
    trajectories = list(trajectories)
    if not trajectories:
        raise EmptyResultError("trajectory plot needs >= 1 trajectory")
    xs = [v[0] for t in trajectories for v in t['vertices']]
    ys = [v[1] for t in trajectories for v in t['vertices']]
    pad_x = (max(xs) - min(xs)) * 0.05 or 0.5
    pad_y = (max(ys) - min(ys)) * 0.05 or 0.5
    canvas = Canvas(x_range=(min(xs) - pad_x, max(xs) + pad_x),
                    y_range=(min(ys) - pad_y, max(ys) + pad_y))
    canvas.axes('Dimension 1', 'Dimension 2', _linear_ticks(*canvas.x_range),
                _linear_ticks(*canvas.y_range), title)

    for t in trajectories:
        color = color_for(t['algorithm'])
        fold = '' if t.get('fold') is None else t['fold']
        coords = [(canvas.x(v[0]), canvas.y(v[1])) for v in t['vertices']]
        canvas.polyline(coords, color, css='trajectory',
                        data={'algorithm': t['algorithm'], 'fold': fold})
        start = t['vertices'][0]
        canvas.circle(canvas.x(start[0]), canvas.y(start[1]), color_for('Original'),
                      'trajectory-start', r=3)
    algorithms = sorted({t['algorithm'] for t in trajectories})
    canvas.legend([(a, color_for(a)) for a in algorithms])
    return canvas.render()
