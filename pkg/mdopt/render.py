# -*- coding: utf-8 -*-

"""
Rendering
=========
Static SVG pictures of two-item objects: canonical partitions, menu
regions on a grid and transport plans. Output is deterministic: the
viewport is fixed at 800x800 and every coordinate is printed with three
decimals.
"""

__author__ = "mdopt developers"
__all__ = ["render_partition", "render_menu_regions", "render_transport",
           "write_svg", ]

import xml.etree.ElementTree as ET

import numpy as np

from .utils import UnsupportedDimensionError, get_logger

logger = get_logger(__name__)

SIZE = 800
MARGIN = 60
SVG_NS = 'http://www.w3.org/2000/svg'

REGION_COLOURS = {'Z': '#f2f2f2', 'A': '#9ecae1', 'B': '#a1d99b',
                  'W': '#fdae6b'}
MENU_PALETTE = ['#f2f2f2', '#9ecae1', '#a1d99b', '#fdae6b', '#bcbddc',
                '#fc9272', '#c7e9c0', '#fdd0a2']


def _fmt(value):
    return f"{float(value):.3f}"


class _Canvas(object):
    """Maps type-box coordinates onto the fixed SVG viewport"""

    def __init__(self, box, title=None):
        if box.ndim != 2:
            msg = f"Error: Only two-item objects can be drawn. Got a "\
                  f"{box.ndim}-d box"
            raise UnsupportedDimensionError(msg)
        self.box = box
        self.root = ET.Element('svg', {
            'xmlns': SVG_NS, 'width': str(SIZE), 'height': str(SIZE),
            'viewBox': f"0 0 {SIZE} {SIZE}"})
        ET.SubElement(self.root, 'rect', {'x': '0', 'y': '0',
                                          'width': str(SIZE),
                                          'height': str(SIZE),
                                          'fill': 'white'})
        if title:
            text = ET.SubElement(self.root, 'text', {
                'x': _fmt(SIZE / 2), 'y': _fmt(MARGIN / 2),
                'text-anchor': 'middle', 'font-family': 'sans-serif',
                'font-size': '18'})
            text.text = title

    def xy(self, x, y):
        lows, widths = self.box.lows, self.box.widths
        span = SIZE - 2 * MARGIN
        px = MARGIN + (np.asarray(x) - lows[0]) / widths[0] * span
        py = SIZE - MARGIN - (np.asarray(y) - lows[1]) / widths[1] * span
        return px, py

    def polygon(self, xs, ys, fill, stroke='none'):
        px, py = self.xy(xs, ys)
        points = ' '.join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
        ET.SubElement(self.root, 'polygon', {'points': points, 'fill': fill,
                                             'stroke': stroke})

    def polyline(self, xs, ys, stroke='black', width=2.0):
        px, py = self.xy(xs, ys)
        points = ' '.join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
        ET.SubElement(self.root, 'polyline', {
            'points': points, 'fill': 'none', 'stroke': stroke,
            'stroke-width': _fmt(width)})

    def line(self, p, q, stroke='black', width=1.0, opacity=1.0):
        (x0, x1), (y0, y1) = self.xy([p[0], q[0]], [p[1], q[1]])
        ET.SubElement(self.root, 'line', {
            'x1': _fmt(x0), 'y1': _fmt(y0), 'x2': _fmt(x1), 'y2': _fmt(y1),
            'stroke': stroke, 'stroke-width': _fmt(width),
            'stroke-opacity': _fmt(opacity)})

    def frame(self):
        lows, highs = self.box.lows, self.box.highs
        self.polygon([lows[0], highs[0], highs[0], lows[0]],
                     [lows[1], lows[1], highs[1], highs[1]], fill='none',
                     stroke='black')
        for axis, (lo, hi) in enumerate(zip(lows, highs)):
            for value in (lo, hi):
                if axis == 0:
                    px, py = self.xy(value, lows[1])
                    attrs = {'x': _fmt(px), 'y': _fmt(py + 20),
                             'text-anchor': 'middle'}
                else:
                    px, py = self.xy(lows[0], value)
                    attrs = {'x': _fmt(px - 10), 'y': _fmt(py + 5),
                             'text-anchor': 'end'}
                attrs.update({'font-family': 'sans-serif',
                              'font-size': '14'})
                text = ET.SubElement(self.root, 'text', attrs)
                text.text = f"{value:g}"

    def tostring(self):
        if hasattr(ET, "indent"):
            ET.indent(self.root)
        return ET.tostring(self.root, encoding='unicode')


def write_svg(svg, fname):
    """Writes an SVG string into ``fname``"""
    with open(fname, 'w') as f:
        f.write(svg)
        f.write('\n')
    logger.info(f"Wrote '{fname}'")


def render_partition(cp, fname=None, title=None, samples=200):
    """
    Draws a canonical partition: region fills, the outer boundaries
    ``s1`` and ``s2`` and the critical-price diagonal

    Returns
    -------

    svg: string

    """
    Z = cp.exclusion
    canvas = _Canvas(Z.box, title=title)
    lows, highs = Z.box.lows, Z.box.highs
    x_crit, y_crit = cp.critical_point
    P = cp.price

    canvas.polygon([lows[0], highs[0], highs[0], lows[0]],
                   [lows[1], lows[1], highs[1], highs[1]],
                   fill=REGION_COLOURS['W'])
    if x_crit > lows[0]:
        xs = np.linspace(lows[0], x_crit, samples)
        top = Z.s1(xs)
        canvas.polygon(np.concatenate([xs, [x_crit, lows[0]]]),
                       np.concatenate([top, [highs[1], highs[1]]]),
                       fill=REGION_COLOURS['A'])
    if y_crit > lows[1]:
        ys = np.linspace(lows[1], y_crit, samples)
        right = Z.s2(ys)
        canvas.polygon(np.concatenate([right, [highs[0], highs[0]]]),
                       np.concatenate([ys, [y_crit, lows[1]]]),
                       fill=REGION_COLOURS['B'])

    xs = np.linspace(lows[0], Z.x_max, 2 * samples)
    ys = Z.upper(xs)
    keep = ~np.isnan(ys)
    xs, ys = xs[keep], ys[keep]
    canvas.polygon(np.concatenate([[lows[0]], xs, [xs[-1]]]),
                   np.concatenate([[lows[1]], ys, [lows[1]]]),
                   fill=REGION_COLOURS['Z'], stroke='black')

    if x_crit > lows[0]:
        xs = np.linspace(lows[0], x_crit, samples)
        canvas.polyline(xs, Z.s1(xs), stroke='#08519c')
    if y_crit > lows[1]:
        ys = np.linspace(lows[1], y_crit, samples)
        canvas.polyline(Z.s2(ys), ys, stroke='#006d2c')
    canvas.line((x_crit, P - x_crit), (P - y_crit, y_crit),
                stroke='#a63603', width=3.0)
    canvas.frame()
    svg = canvas.tostring()
    if fname is not None:
        write_svg(svg, fname)
    return svg


def render_menu_regions(partition, fname=None, title=None):
    """One cell per grid node, coloured by the chosen option"""
    grid = partition.grid
    canvas = _Canvas(grid.box, title=title)
    coords = grid.coords()
    labels = np.asarray(partition.labels).ravel()
    ties = np.asarray(partition.ties).ravel()
    half = 0.5 * grid.spacing
    lows, highs = grid.box.lows, grid.box.highs
    for (x, y), label, tie in zip(coords, labels, ties):
        x0, x1 = max(x - half[0], lows[0]), min(x + half[0], highs[0])
        y0, y1 = max(y - half[1], lows[1]), min(y + half[1], highs[1])
        fill = '#636363' if tie else MENU_PALETTE[label % len(MENU_PALETTE)]
        canvas.polygon([x0, x1, x1, x0], [y0, y0, y1, y1], fill=fill)
    canvas.frame()
    svg = canvas.tostring()
    if fname is not None:
        write_svg(svg, fname)
    return svg


def render_transport(cert, fname=None, title=None, max_arrows=200):
    """
    Draws the heaviest ``max_arrows`` moves of a transport plan, with
    opacity proportional to their mass
    """
    grid = cert.grid
    canvas = _Canvas(grid.box, title=title)
    coords = grid.coords()
    order = np.lexsort((cert.sinks, cert.sources, -cert.masses))
    order = order[:max_arrows]
    if order.size:
        scale = float(cert.masses[order].max())
        for k in order:
            src, dst = coords[cert.sources[k]], coords[cert.sinks[k]]
            if np.allclose(src, dst):
                continue
            canvas.line(src, dst, stroke='#3182bd', width=1.5,
                        opacity=max(cert.masses[k] / scale, 0.1))
    canvas.frame()
    svg = canvas.tostring()
    if fname is not None:
        write_svg(svg, fname)
    return svg
