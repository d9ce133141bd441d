#!/usr/bin/env python3
"""dominion - domination numbers of 2-designs.

Constructs block designs, computes exact domination numbers of their
incidence graphs and checks the known bounds against them.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / 'src'))

from src import __version__
from src.app_controller import AppController
from src.core.bounds import BoundNotApplicableError
from src.core.designs import DesignValidationError, encode, load_design, save_design
from src.core.finite_field import FieldError
from src.core.incidence import incidence_graph
from src.core.solver import BudgetExceededError, SolverError, epn_certified_mds
from src.utils.config_manager import ConfigManager
from src.utils.logging_setup import setup_logging

logger = logging.getLogger('dominion')

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_BUDGET = 4
EXIT_CHECK_FAILED = 5


def parse_base(text: str) -> List[int]:
    """Parse a comma-separated base block such as '1,3,4,5,9'."""
    try:
        return [int(tok) for tok in text.split(',') if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid base block: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='dominion',
        description='Domination numbers of 2-designs',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--config', default='config.yaml', help='Configuration file (YAML)')
    parser.add_argument('--threads', type=int, default=None, help='Solver worker threads')
    parser.add_argument('--node-budget', type=int, default=None,
                        help='Maximum search nodes per solver call')
    parser.add_argument('--log-level', default=None, help='Logging level (e.g. INFO, DEBUG)')
    sub = parser.add_subparsers(dest='command', required=True)

    construct = sub.add_parser('construct', help='Build a design and write it in the text format')
    construct.add_argument('kind', choices=['pg', 'ag', 'cyclic', 'complement', 'residual', 'dual'])
    construct.add_argument('param', nargs='?', type=int,
                           help='Order q for pg/ag, modulus v for cyclic')
    construct.add_argument('--base', action='append', type=parse_base, default=[],
                           help='Base block for cyclic designs (repeatable)')
    construct.add_argument('--input', help='Source design file for complement/residual/dual')
    construct.add_argument('--block', type=int, default=0, help='Block removed by residual')
    construct.add_argument('--out', help='Output file (stdout when omitted)')

    gamma = sub.add_parser('gamma', help='Domination number of a design file')
    gamma.add_argument('design', help='Design file')
    gamma.add_argument('--enumerate', action='store_true',
                       help='List every minimum dominating set')
    gamma.add_argument('--neat', action='store_true', help='Classify neatness')
    gamma.add_argument('--epn', action='store_true',
                       help='Find a minimum dominating set with external private neighbours')

    bounds = sub.add_parser('bounds', help='Evaluate every applicable bound on a design file')
    bounds.add_argument('design', help='Design file')
    bounds.add_argument('--json', action='store_true', help='Print the report as JSON')

    verify = sub.add_parser('verify-paper', help='Run the full verification suite')
    verify.add_argument('--max-q', type=int, default=None, help='Largest plane order')
    verify.add_argument('--json', dest='json_out', help='Write the JSON report to this file')
    verify.add_argument('--design', action='append', default=[],
                        help='Extra design file to include (repeatable)')
    return parser


def cmd_construct(controller: AppController, args) -> int:
    if args.kind in ('pg', 'ag', 'cyclic') and args.param is None:
        print(f"error: '{args.kind}' needs a parameter", file=sys.stderr)
        return EXIT_USAGE
    if args.kind == 'cyclic' and not args.base:
        print("error: 'cyclic' needs at least one --base", file=sys.stderr)
        return EXIT_USAGE
    if args.kind in ('complement', 'residual', 'dual') and not args.input:
        print(f"error: '{args.kind}' needs --input", file=sys.stderr)
        return EXIT_USAGE

    source = load_design(args.input) if args.input else None
    d = controller.construct(args.kind, q=args.param, v=args.param, bases=args.base,
                             source=source, block=args.block)
    if args.out:
        save_design(d, args.out)
        logger.info("Wrote %s", args.out)
        print(d.params)
    else:
        # stdout must stay a loadable design file
        sys.stdout.write(f"# {d.params}\n" + encode(d))
    return EXIT_OK


def cmd_gamma(controller: AppController, args) -> int:
    d = load_design(args.design)
    result = controller.gamma(d)
    if not result.complete:
        print(f"gamma <= {result.gamma} (budget exhausted, gamma >= {result.root_bound})")
        print(f"witness: {' '.join(result.witness.labels())}")
        return EXIT_BUDGET

    print(f"gamma = {result.gamma}")
    print(f"witness: {' '.join(result.witness.labels())}")
    if args.enumerate:
        sets = controller.minimum_sets(d, result.gamma)
        print(f"minimum dominating sets: {len(sets)}")
        for S in sets:
            print('  ' + ' '.join(S.labels()))
    if args.neat:
        report = controller.neatness(d, result.gamma)
        print(f"neat sets: {report.count_neat}/{report.count_mds}")
        print(f"neat: {str(report.is_neat_design).lower()}")
        print(f"super-neat: {str(report.is_super_neat).lower()}")
    if args.epn:
        S = epn_certified_mds(incidence_graph(d), result.gamma, controller.node_budget,
                              controller.threads)
        print(f"private-neighbour set: {' '.join(S.labels())}")
    return EXIT_OK


def cmd_bounds(controller: AppController, args) -> int:
    d = load_design(args.design)
    result = controller.gamma(d)
    report = controller.bounds_for(d, d.name, result)
    if args.json:
        out = {'id': report.design_id, 'params': d.params.to_dict(), 'gamma': report.gamma,
               'bounds': report.to_dict()}
        print(json.dumps(out, indent=2))
    else:
        print(f"design: {d.params}")
        print(f"gamma: {report.gamma if report.gamma is not None else 'unknown'}")
        print(f"general lower bound: {report.lb_general}")
        if report.bracket is not None:
            print(f"non-symmetric bracket: [{report.bracket[0]}, {report.bracket[1]}]")
        if report.biplane_lb is not None:
            print(f"biplane lower bound: {report.biplane_lb}")
        print(f"super-neat threshold: {report.superneat_threshold}")
        if report.superneat_sufficient is not None:
            print(f"super-neat by threshold: {str(report.superneat_sufficient).lower()}")
        for name, status in report.status.items():
            print(f"  {name}: {status.value}")
    if not result.complete:
        return EXIT_BUDGET
    return EXIT_CHECK_FAILED if report.violated() else EXIT_OK


def cmd_verify_paper(controller: AppController, args) -> int:
    report = controller.verify_paper(args.max_q, args.design)
    for check in report.checks:
        print(f"[{check.status}] {check.name}")
    for record in report.designs:
        for check in record.checks:
            print(f"[{check.status}] {record.id} {check.name}")
    counts = report.summary()
    print(', '.join(f"{n} {status}" for status, n in counts.items()))
    if args.json_out:
        Path(args.json_out).write_text(report.to_json(), encoding='utf-8')
    for check in report.failed():
        print(f"FAILED {check.name}: {check.detail}", file=sys.stderr)
    return EXIT_CHECK_FAILED if report.failed() else EXIT_OK


COMMANDS = {
    'construct': cmd_construct,
    'gamma': cmd_gamma,
    'bounds': cmd_bounds,
    'verify-paper': cmd_verify_paper,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Command-line entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    config = ConfigManager(args.config, create_if_missing=False)
    setup_logging(args.log_level or config.get('logging.level', 'WARNING'),
                  config.get('logging.file'))
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE

    controller = AppController(config=config, threads=args.threads, node_budget=args.node_budget)
    try:
        return COMMANDS[args.command](controller, args)
    except BudgetExceededError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (DesignValidationError, FieldError, BoundNotApplicableError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == '__main__':
    sys.exit(main())
