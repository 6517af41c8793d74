#!/usr/bin/env python

__author__ = "mdopt developers"

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mdopt.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, main
from mdopt.distributions import Box
from mdopt.instances import (builtin_instances, compare_golden,
                             exponential_instance, hypercube_instance,
                             instance_from_dict, load_golden, load_instance,
                             mv_instance, run_instance)
from mdopt.lattice import GridMeasure, GridSpec
from mdopt.utils import SchemaError

SHIPPED = ['beta-1-2', 'exponential-1-1', 'exponential-2-1',
           'hypercube-2-1', 'hypercube-3-0', 'mv', 'powerlaw-6-7',
           'single-item', 'uniform-4-16-4-7']


def _square(**extra):
    d = {'distribution': {'marginals': [
        {'family': 'uniform', 'a': 0, 'b': 1},
        {'family': 'uniform', 'a': 0, 'b': 1}]}}
    d.update(extra)
    return d


def test_shipped_instances_load():
    assert builtin_instances() == SHIPPED
    for name in SHIPPED:
        inst = load_instance(name)
        assert inst.name == name
        assert inst.grid().ndim == len(inst.box.lows)
        assert load_golden(name)['name'] == name

    inst = load_instance('hypercube-3-0')
    assert inst.hypercube.n == 3 and inst.bundle_price == 1.0
    msg = "The builder and the shipped file describe the same instance"
    assert_allclose(mv_instance().menu.prices,
                    load_instance('mv').menu.prices, err_msg=msg)
    assert hypercube_instance(2, 1.0).bundle_price == 'critical'


def test_instance_schema_errors(tmp_path):
    bad = [{'name': 'x'},
           _square(colour='blue'),
           _square(grid={'scheme': 'cubic'}),
           _square(menu={'items': [{'p': [1.5, 0], 't': 1}]}),
           _square(bundle_price='cheap'),
           {'hypercube': {'n': 0, 'c': 1}},
           {'hypercube': {'n': 3, 'c': 0}, 'exclusion': {'top': 0.5}},
           [1, 2, 3]]
    for d in bad:
        with pytest.raises(SchemaError):
            instance_from_dict(d)

    inst = instance_from_dict(_square(exclusion={'top': [[0, 1, 2]]}))
    with pytest.raises(SchemaError):
        inst.exclusion_set()
    inst = instance_from_dict(_square(exclusion={'top': {'slope': 1}}))
    with pytest.raises(SchemaError):
        inst.exclusion_set()

    with pytest.raises(SchemaError):
        exponential_instance(1.0, 2.0)

    fname = tmp_path / 'broken.json'
    fname.write_text('{"name": ')
    with pytest.raises(SchemaError):
        load_instance(str(fname))
    with pytest.raises(OSError):
        load_instance(str(tmp_path / 'missing.json'))


def test_compare_golden():
    golden = {'expected': {'price': 0.5, 'ok': True, 'point': [1.0, 2.0],
                           'item': {'p': [1.0, 0.5], 't': 1.0}},
              'tolerances': {'price': 1e-3}, 'default_tolerance': 1e-6}
    report = {'price': 0.5004, 'ok': True, 'point': [1.0, 2.0],
              'item': {'p': [1.0, 0.5], 't': 1.0}}
    assert compare_golden(report, golden) == []

    report.update({'ok': False, 'point': [1.0, 2.1]})
    msg = "Booleans compare exactly; lists element-wise"
    assert [k for k, _, _ in compare_golden(report, golden)] == \
        ['ok', 'point'], msg
    assert [k for k, _, _ in compare_golden({}, golden)] == \
        ['price', 'ok', 'point', 'item']


@pytest.mark.parametrize('name', SHIPPED)
def test_goldens(name):
    report = run_instance(load_instance(name))
    mismatches = compare_golden(report, load_golden(name))
    assert mismatches == [], f"{name} differs from its golden: {mismatches}"


def test_cli_exit_codes(tmp_path, capsys):
    assert main(['hypercube', 'bound', '--n', '3', '--c', '0']) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report['notbundling'] is True
    assert_allclose(report['negative_mass'], 2.0 / 3, rtol=1e-10)

    out = str(tmp_path / 'phi.json')
    assert main(['--seed', '3', '-o', out, 'hypercube', 'phi', '--n', '3',
                 '--rho', '2']) == EXIT_OK
    with open(out, 'r') as f:
        assert json.load(f)['dominated']

    broken = tmp_path / 'broken.json'
    broken.write_text('not json')
    assert main(['check', str(broken)]) == EXIT_INPUT
    assert main(['check', str(tmp_path / 'missing.json')]) == EXIT_INPUT
    assert main(['partition', 'hypercube-2-1']) == EXIT_INPUT
    assert main(['render', 'partition', 'hypercube-3-0',
                 str(tmp_path / 'z.svg')]) == EXIT_INPUT

    msg = "Grand bundling of three uniform [0, 1] items at 1 is not optimal"
    assert main(['check', 'hypercube-3-0']) == EXIT_FAILED, msg


def test_cli_dominance(tmp_path):
    grid = GridSpec(Box([0, 0], [1, 1]), 3)
    high = GridMeasure.point_masses(grid, [[1, 1]], [1.0])
    low = GridMeasure.point_masses(grid, [[0, 0]], [1.0])
    files = {}
    for label, m in (('high', high), ('low', low)):
        files[label] = str(tmp_path / f"{label}.json")
        with open(files[label], 'w') as f:
            json.dump(m.to_dict(), f)
    out = str(tmp_path / 'verdict.json')
    assert main(['-o', out, 'dominance', files['high'], files['low'],
                 '--relation', 'fo']) == EXIT_OK
    with open(out, 'r') as f:
        assert json.load(f)['verdict'] == 'dominates'
    assert main(['dominance', files['low'], files['high'],
                 '--relation', 'fo']) == EXIT_FAILED
    assert main(['dominance', files['high'], files['low'], '--v', '-1',
                 '-1']) == EXIT_FAILED


def test_cli_solve_verify_render(tmp_path):
    cert = str(tmp_path / 'cert.json')
    util = str(tmp_path / 'u.json')
    h5 = str(tmp_path / 'cert.h5')
    assert main(['-o', str(tmp_path / 'solve.json'), 'solve',
                 'single-item', '--certificate', cert, '--utility', util,
                 '--h5', h5]) == EXIT_OK
    assert main(['-o', str(tmp_path / 'verify.json'), 'verify',
                 'single-item', '--utility', util,
                 '--certificate', cert]) == EXIT_OK

    with open(util, 'r') as f:
        tampered = json.load(f)
    tampered['value'] = (-np.asarray(tampered['value'])).tolist()
    with open(util, 'w') as f:
        json.dump(tampered, f)
    assert main(['-o', str(tmp_path / 'verify.json'), 'verify',
                 'single-item', '--utility', util,
                 '--certificate', cert]) == EXIT_FAILED

    svg = str(tmp_path / 'menu.svg')
    assert main(['render', 'menu', 'mv', svg]) == EXIT_OK
    with open(svg, 'r') as f:
        assert f.read().startswith('<svg')

    out = str(tmp_path / 'dump.json')
    assert main(['-o', out, 'measure', 'dump', 'mv', '--nodes', '3']) == \
        EXIT_OK
    with open(out, 'r') as f:
        assert len(json.load(f)['interior']['density']) == 9
