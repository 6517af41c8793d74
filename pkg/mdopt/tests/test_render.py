#!/usr/bin/env python

__author__ = "mdopt developers"

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from mdopt.distributions import Box
from mdopt.duality import DualCertificate
from mdopt.instances import load_instance
from mdopt.lattice import GridMeasure, GridSpec
from mdopt.mechanisms.menus import menu_regions
from mdopt.mechanisms.partitions import canonical_partition
from mdopt.render import (render_menu_regions, render_partition,
                          render_transport)
from mdopt.utils import UnsupportedDimensionError

SVG = '{http://www.w3.org/2000/svg}'


def test_partition_svg(tmp_path):
    inst = load_instance('uniform-4-16-4-7')
    cp = canonical_partition(inst.exclusion_set())
    fname = str(tmp_path / 'partition.svg')
    svg = render_partition(cp, fname=fname, title=inst.name)
    msg = "Rendering is deterministic"
    assert svg == render_partition(cp, title=inst.name), msg
    with open(fname, 'r') as f:
        assert f.read().strip() == svg

    root = ET.fromstring(svg)
    assert root.get('width') == '800' and root.get('viewBox') == \
        '0 0 800 800'
    fills = {p.get('fill') for p in root.iter(f"{SVG}polygon")}
    msg = "Z, A and W are drawn; B is empty when y_crit is the lowest type"
    assert {'#f2f2f2', '#9ecae1', '#fdae6b'} <= fills, msg
    assert '#a1d99b' not in fills, msg
    assert any(t.text == inst.name for t in root.iter(f"{SVG}text"))


def test_menu_and_transport_svg():
    inst = load_instance('mv')
    partition = menu_regions(inst.menu, GridSpec(inst.box, 5))
    root = ET.fromstring(render_menu_regions(partition))
    cells = [p for p in root.iter(f"{SVG}polygon")
             if p.get('stroke') == 'none' and p.get('fill') != 'none']
    assert len(cells) == 25

    grid = GridSpec(Box([0, 0], [1, 1]), 3)
    alpha = GridMeasure(grid, np.zeros(grid.shape))
    cert = DualCertificate(grid, np.array([8, 4, 5]), np.array([0, 0, 5]),
                           np.array([0.5, 0.25, 1.0]), alpha)
    root = ET.fromstring(render_transport(cert, max_arrows=1))
    lines = list(root.iter(f"{SVG}line"))
    msg = "The heaviest move stays in place and is not drawn"
    assert len(lines) == 0, msg
    root = ET.fromstring(render_transport(cert))
    lines = list(root.iter(f"{SVG}line"))
    assert len(lines) == 2
    assert lines[0].get('stroke-opacity') == '0.500'
    assert lines[1].get('stroke-opacity') == '0.250'


def test_only_two_items():
    grid = GridSpec(Box([0], [1]), 5)
    cert = DualCertificate(grid, np.array([4]), np.array([0]),
                           np.array([1.0]), GridMeasure(grid, np.zeros(5)))
    with pytest.raises(UnsupportedDimensionError):
        render_transport(cert)
