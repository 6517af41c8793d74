# -*- coding: utf-8 -*-

"""
Command line
============
``mdopt <command> ...``; every command is a thin composition of the
package operations. Reports are printed as JSON on stdout (or written to
``--output``) with floats rounded to 12 significant digits.

Exit codes: 0 success or optimal, 1 checked and failed, 2 input error,
3 internal or accuracy error.
"""

__author__ = "mdopt developers"
__all__ = ["main", "build_parser", ]

import argparse
import json
import logging
import sys

import numpy as np

from .dominance import (DOMINATES, FAILS, convex_dominates,
                        first_order_dominates, second_order_dominates)
from .duality import (DualCertificate, extract_dual, solve_primal,
                      verify_certificate)
from .instances import builtin_instances, load_instance, run_examples
from .lattice import GridFunction, GridMeasure, discretize_measure
from .measure import measure_to_dict
from .mechanisms import (canonical_partition, check_grand_bundling,
                         check_optimal_menu, check_well_formed,
                         essential_form, hypercube_negative_mass,
                         hypercube_phi, matching_epsilon_bound,
                         mechanism_from_partition, menu_from_utility,
                         menu_regions, menu_revenue, notbundling_bound,
                         sample_set_a)
from .render import render_menu_regions, render_partition, render_transport
from .utils import (DomainError, PreconditionError, SchemaError,
                    UnsupportedDimensionError, get_logger, round_significant)

logger = get_logger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
INPUT_ERRORS = (SchemaError, DomainError, PreconditionError,
                UnsupportedDimensionError, OSError)


def _emit(report, output=None):
    text = json.dumps(round_significant(report), indent=2)
    if output is None:
        print(text)
    else:
        with open(output, 'w') as f:
            f.write(text)
            f.write('\n')
        logger.info(f"Wrote '{output}'")


def _write_json(obj, fname):
    with open(fname, 'w') as f:
        json.dump(obj, f)
        f.write('\n')
    logger.info(f"Wrote '{fname}'")


def _read_json(fname):
    with open(fname, 'r') as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as err:
            msg = f"Error: '{fname}' is not valid JSON: {err}"
            raise SchemaError(msg) from err


def _discretized(inst):
    return discretize_measure(inst.measure(), inst.grid(),
                              scheme=inst.scheme)


def cmd_solve(args):
    inst = load_instance(args.instance)
    m = _discretized(inst)
    method = (inst.solver or {}).get('method', args.method)
    sol = solve_primal(m, radius=inst.radius, method=method)
    cert = extract_dual(sol, m)
    check = verify_certificate(sol.u, cert, m, radius=inst.radius)
    menu, shares = menu_from_utility(sol.u)
    report = {'name': inst.name, 'backend': sol.backend,
              'verification': check.to_dict(),
              'recovered_menu': menu.to_dict()['items'],
              'shares': shares}
    if args.certificate:
        _write_json(cert.to_dict(), args.certificate)
    if args.utility:
        _write_json(sol.u.to_dict(), args.utility)
    if args.h5:
        cert.write_h5(args.h5)
    if args.svg:
        render_transport(cert, fname=args.svg, title=inst.name)
    _emit(report, args.output)
    return EXIT_OK if check.passed else EXIT_FAILED


def cmd_verify(args):
    inst = load_instance(args.instance)
    m = _discretized(inst)
    u = GridFunction.from_dict(_read_json(args.utility))
    cert = DualCertificate.from_dict(_read_json(args.certificate))
    check = verify_certificate(u, cert, m, radius=inst.radius)
    _emit({'name': inst.name, 'verification': check.to_dict()},
          args.output)
    return EXIT_OK if check.passed else EXIT_FAILED


def cmd_check(args):
    inst = load_instance(args.instance)
    if inst.menu is None and inst.bundle_price is None and \
       inst.exclusion is None:
        msg = f"Error: Instance '{inst.name}' has no menu, bundle price or "\
              "exclusion set to check"
        raise PreconditionError(msg)
    mu, grid = inst.measure(), inst.grid()
    tol = inst.tolerances.get('dominance')
    mass_tol = inst.tolerances.get('mass')
    report, passed = {'name': inst.name}, True
    if inst.menu is not None:
        menu = essential_form(inst.menu, inst.density)
        check = check_optimal_menu(menu, mu, grid, scheme=inst.scheme,
                                   refine=inst.refine, tol=tol,
                                   mass_tol=mass_tol)
        report['menu'] = check.to_dict()
        report['menu_revenue'] = menu_revenue(menu, inst.density)
        passed &= check.passed
    if inst.bundle_price is not None:
        price = inst.resolved_bundle_price(mu)
        check = check_grand_bundling(price, mu, grid, scheme=inst.scheme,
                                     refine=inst.refine, tol=tol,
                                     mass_tol=mass_tol)
        report['grand_bundling'] = check.to_dict()
        if inst.hypercube is not None:
            hc = inst.hypercube
            report['negative_mass'] = hypercube_negative_mass(hc.n, hc.c)
            report['notbundling'] = notbundling_bound(hc.n, hc.c)
        passed &= check.passed
    if inst.exclusion is not None:
        cp = canonical_partition(inst.exclusion_set(mu))
        check = check_well_formed(cp, mu, grid=grid, density=inst.density,
                                  tol=mass_tol, scheme=inst.scheme)
        report['well_formed'] = check.to_dict()
        passed &= check.passed
    _emit(report, args.output)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_dominance(args):
    a = GridMeasure.from_dict(_read_json(args.first))
    b = GridMeasure.from_dict(_read_json(args.second))
    if args.relation == 'fo':
        res = first_order_dominates(a, b)
    elif args.relation == 'so':
        res = second_order_dominates(a, b, radius=args.radius)
    else:
        v = None if args.v is None else [int(s) for s in args.v]
        res = convex_dominates(a, b, v=v, radius=args.radius)
    _emit(res.to_dict(), args.output)
    return {DOMINATES: EXIT_OK, FAILS: EXIT_FAILED}.get(res.verdict,
                                                        EXIT_INPUT)


def cmd_partition(args):
    inst = load_instance(args.instance)
    if inst.exclusion is None:
        msg = f"Error: Instance '{inst.name}' has no exclusion set"
        raise PreconditionError(msg)
    mu = inst.measure()
    cp = canonical_partition(inst.exclusion_set(mu))
    mech = mechanism_from_partition(cp)
    report = {'name': inst.name, 'partition': cp.to_dict(),
              'revenue': mech.revenue(inst.density)}
    passed = True
    if args.check:
        check = check_well_formed(cp, mu, grid=inst.grid(),
                                  density=inst.density,
                                  tol=inst.tolerances.get('mass'),
                                  scheme=inst.scheme)
        report['well_formed'] = check.to_dict()
        passed = check.passed
    _emit(report, args.output)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_hypercube(args):
    if args.action == 'bound':
        report = {'n': args.n, 'c': args.c,
                  'negative_mass': hypercube_negative_mass(args.n, args.c),
                  'notbundling': notbundling_bound(args.n, args.c)}
        _emit(report, args.output)
        return EXIT_OK
    rng = np.random.default_rng(args.seed)
    x = sample_set_a(args.n, args.rho, args.samples, rng=rng)
    y = hypercube_phi(x, args.rho)
    report = {'n': args.n, 'rho': args.rho,
              'dominated': bool(np.all(y <= x + 1e-12)),
              'epsilon_bound': matching_epsilon_bound(args.eps, args.rho,
                                                      args.n),
              'points': x.tolist(), 'images': y.tolist()}
    _emit(report, args.output)
    return EXIT_OK if report['dominated'] else EXIT_FAILED


def cmd_render(args):
    if args.what == 'transport':
        cert = DualCertificate.from_dict(_read_json(args.source))
        render_transport(cert, fname=args.svg, title=args.title,
                         max_arrows=args.max_arrows)
        return EXIT_OK
    inst = load_instance(args.source)
    title = inst.name if args.title is None else args.title
    if args.what == 'partition':
        if inst.exclusion is None:
            msg = f"Error: Instance '{inst.name}' has no exclusion set"
            raise PreconditionError(msg)
        cp = canonical_partition(inst.exclusion_set())
        render_partition(cp, fname=args.svg, title=title)
    else:
        if inst.menu is None:
            msg = f"Error: Instance '{inst.name}' has no menu"
            raise PreconditionError(msg)
        partition = menu_regions(inst.menu, inst.grid())
        render_menu_regions(partition, fname=args.svg, title=title)
    return EXIT_OK


def cmd_measure_dump(args):
    inst = load_instance(args.instance)
    _emit(measure_to_dict(inst.measure(), nodes=args.nodes), args.output)
    return EXIT_OK


def cmd_examples_run(args):
    names = args.names or None
    results = run_examples(names, show_progressbar=args.progressbar)
    report, failed = {}, False
    for name, (res, mismatches) in results.items():
        report[name] = {'report': res,
                        'mismatches': [{'key': k, 'expected': e, 'got': g}
                                       for k, e, g in mismatches]}
        failed |= bool(mismatches)
    _emit(report, args.output)
    return EXIT_FAILED if failed else EXIT_OK


def build_parser():
    descr = "Optimal multi-item mechanisms: grid LP solves, dual "\
            "certificates and stochastic-dominance optimality checks"
    parser = argparse.ArgumentParser(prog='mdopt', description=descr)
    parser.add_argument('-v', '--verbose', action='store_true',
                        help="log progress at the info level")
    parser.add_argument('--seed', type=int, default=0,
                        help="seed for the Monte Carlo steps (default: 0)")
    parser.add_argument('-o', '--output', metavar='<file>', default=None,
                        help="write the JSON report here instead of stdout")
    sub = parser.add_subparsers(dest='command', metavar='<command>')
    sub.required = True
    instance_help = "instance JSON file, or the name of a shipped one "\
                    f"({', '.join(builtin_instances())})"

    p = sub.add_parser('solve', help="solve the grid LP and certify it")
    p.add_argument('instance', help=instance_help)
    p.add_argument('--method', choices=['auto', 'highs', 'simplex'],
                   default='auto')
    p.add_argument('--certificate', metavar='<file>',
                   help="write the certificate JSON")
    p.add_argument('--utility', metavar='<file>',
                   help="write the optimal grid utility JSON")
    p.add_argument('--h5', metavar='<file>',
                   help="write the certificate arrays to HDF5")
    p.add_argument('--svg', metavar='<file>',
                   help="draw the transport plan (two items only)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser('verify', help="verify a saved certificate")
    p.add_argument('instance', help=instance_help)
    p.add_argument('--utility', metavar='<file>', required=True)
    p.add_argument('--certificate', metavar='<file>', required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser('check', help="check a menu, a bundle price or an "
                                     "exclusion set")
    p.add_argument('instance', help=instance_help)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser('dominance', help="decide dominance between two "
                                         "grid measures")
    p.add_argument('first', metavar='<measure a>')
    p.add_argument('second', metavar='<measure b>')
    p.add_argument('--relation', choices=['fo', 'so', 'cvx'], default='cvx')
    p.add_argument('--v', nargs='+', choices=['-1', '0', '1'],
                   default=None, help="monotonicity signs for 'cvx'")
    p.add_argument('--radius', type=int, default=2)
    p.set_defaults(func=cmd_dominance)

    p = sub.add_parser('partition', help="build the canonical partition")
    p.add_argument('instance', help=instance_help)
    p.add_argument('--check', action='store_true',
                   help="also check well-formedness")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser('hypercube', help="hypercube bound and matching map")
    p.add_argument('action', choices=['phi', 'bound'])
    p.add_argument('--n', type=int, default=2)
    p.add_argument('--c', type=float, default=0.0)
    p.add_argument('--rho', type=float, default=2.0)
    p.add_argument('--eps', type=float, default=0.1)
    p.add_argument('--samples', type=int, default=5)
    p.set_defaults(func=cmd_hypercube)

    p = sub.add_parser('render', help="draw a two-item object as SVG")
    p.add_argument('what', choices=['partition', 'menu', 'transport'])
    p.add_argument('source', help="instance (partition, menu) or "
                                  "certificate JSON (transport)")
    p.add_argument('svg', metavar='<svg file>')
    p.add_argument('--title', default=None)
    p.add_argument('--max-arrows', dest='max_arrows', type=int, default=200)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser('measure', help="measure utilities")
    msub = p.add_subparsers(dest='action', metavar='<action>')
    msub.required = True
    q = msub.add_parser('dump', help="dump the transformed measure")
    q.add_argument('instance', help=instance_help)
    q.add_argument('--nodes', type=int, default=11)
    q.set_defaults(func=cmd_measure_dump)

    p = sub.add_parser('examples', help="shipped examples")
    esub = p.add_subparsers(dest='action', metavar='<action>')
    esub.required = True
    q = esub.add_parser('run', help="replay examples against the goldens")
    q.add_argument('names', nargs='*', metavar='<name>')
    prog_group = q.add_mutually_exclusive_group()
    prog_group.add_argument("-p", "--progressbar", dest='progressbar',
                            action="store_true", default=True,
                            help="display a progressbar")
    prog_group.add_argument("-np", "--no-progressbar", dest='progressbar',
                            action='store_false',
                            help="disable the progressbar")
    q.set_defaults(func=cmd_examples_run)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        get_logger(level=logging.INFO)
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except INPUT_ERRORS as err:
        logger.error(str(err))
        return EXIT_INPUT
    except Exception as err:
        logger.error(f"Error: {type(err).__name__}: {err}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
