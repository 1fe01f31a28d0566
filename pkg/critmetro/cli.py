"""
Command line interface.

    critmetro scan --model ferro --n 11 --hx 0.2 --sweep hz:-0.1:0.1:41 --out scan.csv
    critmetro scaling --model ferro --sizes 7,9,11,13 --hx 0.95 --hz 1e-6 --quantities F_xx,F_yy
    critmetro xy-rotation --gamma 0.2 --sizes 16,64,256 --sweep lambda:0:2:41
    critmetro xy-rotation --lambda 0.5 --sizes 64 --sweep gamma:0.1:1:10
    critmetro critical-point --model antiferro --n 10 --hx 0.5 --sweep hz:1.0:2.2:13
    critmetro scaling --model antiferro --sizes 6,8,10,12 --hx 0.5 --axes xy --sweep hz:1.0:2.2:13 \
        --locate-critical --critical-axis z --quantities F_xx,F_yy,det_F,det_2U

Exit codes: 0 on success, 1 on configuration errors, 2 if some points failed.
"""
import argparse
import logging
import sys

from . import __version__
from .scan import ConfigError, load_config, run_critical_point, run_scaling, run_scan

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2


def _common(parser):
    parser.add_argument('--config', help='INI file with a [scan] section')
    parser.add_argument('--model', help='ferro, antiferro or xy')
    parser.add_argument('--n', dest='sizes', help='chain size')
    parser.add_argument('--sizes', dest='sizes', help='comma-separated chain sizes')
    parser.add_argument('--hx', type=float)
    parser.add_argument('--hy', type=float)
    parser.add_argument('--hz', type=float)
    parser.add_argument('--gamma', type=float)
    parser.add_argument('--lambda', dest='lam', type=float)
    parser.add_argument('--sweep', help='label:start:stop:steps, several separated by ";"')
    parser.add_argument('--axes', help='parameter axes, e.g. xz')
    parser.add_argument('--method', help='fidelity_bargmann, exact_rotation or finite_difference')
    parser.add_argument('--delta0', type=float)
    parser.add_argument('--ladder', type=int)
    parser.add_argument('--areas', help='comma-separated loop areas')
    parser.add_argument('--tol', type=float)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--solver', choices=('lanczos', 'dense'))
    parser.add_argument('--workers', type=int)
    parser.add_argument('--out', help='output file')
    parser.add_argument('--format', choices=('csv', 'json'))
    parser.add_argument('-v', '--verbose', action='count', default=0)


def _critical(parser):
    parser.add_argument('--critical-axis', dest='critical_axis')
    parser.add_argument('--critical-tol', dest='critical_tol', type=float)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='critmetro',
        description='Multiparameter quantum metrology of spin chains near phase transitions')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    _common(sub.add_parser('scan', help='F, U and R over a parameter grid'))

    scaling = sub.add_parser('scaling', help='finite-size scaling of selected quantities')
    _common(scaling)
    scaling.add_argument('--quantities', help='e.g. F_xx,F_yy,det_F,det_2U,R_xy,gap')
    scaling.add_argument('--locate-critical', dest='locate_critical', action='store_const',
                         const=True, help='evaluate each size at the maximum of F along the sweep')
    _critical(scaling)

    _common(sub.add_parser('xy-rotation', help='rotation protocol on XY ground states'))

    critical = sub.add_parser('critical-point', help='maximum of a QFIM diagonal along a sweep')
    _common(critical)
    _critical(critical)
    return parser


def _overrides(args):
    skip = {'command', 'config', 'verbose'}
    overrides = {k: v for k, v in vars(args).items() if k not in skip}
    if args.command == 'xy-rotation':
        overrides['model'] = 'xy'
        overrides['method'] = 'exact_rotation'
    return overrides


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    try:
        config = load_config(args.config, _overrides(args))
        if args.command in ('scan', 'xy-rotation'):
            table = run_scan(config)
        elif args.command == 'scaling':
            table, reports = run_scaling(config)
            if config.out is None:
                for r in reports:
                    print(f'{r.quantity}: {r.preferred} (power m={r.power["m"]:.4g}, '
                          f'exponential rate={r.exponential["rate"]:.4g})')
        else:
            table, results = run_critical_point(config)
            if config.out is None:
                for r in results:
                    print(f'n={r["n"]}: {r["label"]}*={r["x"]:.6g} F={r["value"]:.6g}'
                          + (' (boundary)' if r['on_boundary'] else ''))
    except ConfigError as err:
        logger.error('configuration error: %s', err)
        return EXIT_CONFIG

    if table is not None and table.failures:
        logger.warning('%d of %d points failed', table.failures, len(table.rows))
        return EXIT_PARTIAL
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
