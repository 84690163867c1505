"""
logmarkov command line

    logmarkov validate --spec spec.json
    logmarkov analyze  --spec spec.json --out results/
    logmarkov verify   --spec spec.json --kmin 1 --kmax 30
    logmarkov simulate --spec spec.json --shots 100000 --seed 7
    logmarkov fit      --data series.csv

Without --spec the bundled repetition example is used. Exit status is 0 on success, 1 when a
check fails or the input is rejected, 2 on usage errors.
"""

import argparse
import logging
import sys
from pathlib import Path

import pandas as pd

from logmarkov import config, pipeline
from logmarkov.errors import LogMarkovError
from logmarkov.fit import fit_frame
from logmarkov.markov import lambda1_first_order_report
from logmarkov.report import FORMATS, model_to_dict, transfer_frame, write_json, write_table
from logmarkov.spec_io import load_spec

log = logging.getLogger('logmarkov')


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f'seed {text} is not an unsigned 64-bit integer')
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f'expected a positive integer, got {text}')
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--spec', type=Path, default=None, help='JSON spec file (default: bundled example)')
    common.add_argument('--out', type=Path, default=Path('.'), help='output directory')
    common.add_argument('--format', choices=FORMATS, default='csv', help='table format')
    common.add_argument('--threads', type=_positive, default=None,
                        help=f'worker cap (CLI > env:{config.THREADS_ENV} > CPU count)')
    common.add_argument('-v', '--verbose', action='store_true', help='log progress at INFO level')

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument('--criterion', choices=('fidelity', 'opnorm'), default='fidelity',
                       help='hypothesis on the per-cycle noise strength')
    model.add_argument('--strict', action='store_true', help='fail on ambiguous dominant eigenvalues')

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument('--kmin', type=int, default=config.DEFAULT_KMIN)
    sweep.add_argument('--kmax', type=int, default=config.DEFAULT_KMAX)

    parser = argparse.ArgumentParser(prog='logmarkov', description=__doc__.splitlines()[1].strip())
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('validate', parents=[common], help='check a spec file')
    sub.add_parser('analyze', parents=[common, model], help='extract tables and build the model')
    p = sub.add_parser('verify', parents=[common, model, sweep], help='check the model bounds over a K range')
    p.add_argument('--tol', type=float, default=config.NORM_TOL, help='absolute floor added to each bound')
    p.add_argument('--force', action='store_true', help='verify even when the model hypotheses fail')
    p = sub.add_parser('simulate', parents=[common, sweep], help='Monte-Carlo counts next to exact probabilities')
    p.add_argument('--shots', type=_positive, default=config.DEFAULT_SHOTS)
    p.add_argument('--seed', type=_seed, default=config.DEFAULT_SEED)
    p.add_argument('--defer-corrections', action='store_true', help='track corrections in a classical frame')
    p = sub.add_parser('fit', parents=[common], help='fit value ~ A chi^K to a CSV series')
    p.add_argument('--data', type=Path, required=True, help='CSV with columns K, value and optional weight')
    return parser


def _load(args):
    loaded = load_spec(args.spec)
    for w in loaded.warnings:
        print(f'warning: {w}')
    return loaded


def _print_summary(summary: dict):
    for key, value in summary.items():
        if key == 'reasons':
            for reason in value:
                print(f'  failed hypothesis: {reason}')
        else:
            print(f'  {key}: {value}')


def cmd_validate(args) -> int:
    loaded = _load(args)
    issues = pipeline.check_spec(loaded)
    for issue in issues:
        print(f'error: {issue}')
    if issues:
        return 1
    print(f'{loaded.source}: ok')
    return 0


def _usable(args):
    """Load a spec and reject it on any issue other than a failed decoding-symmetry check."""
    loaded = _load(args)
    issues = [i for i in pipeline.check_spec(loaded) if 'decoding symmetry' not in i]
    if issues:
        raise LogMarkovError('invalid spec: ' + '; '.join(issues))
    return loaded


def _analyzed(args):
    loaded = _usable(args)
    tr, model = pipeline.analyze(loaded, criterion=args.criterion, strict=args.strict, workers=args.threads)
    return loaded, tr, model


def cmd_analyze(args) -> int:
    loaded, tr, model = _analyzed(args)
    args.out.mkdir(parents=True, exist_ok=True)
    prep_names = [p.name for p in loaded.settings.preps]
    meas_names = [m.name for m in loaded.settings.meas]
    write_json(model_to_dict(model, prep_names, meas_names), args.out / 'model.json')
    report = lambda1_first_order_report(tr.cycle, model).reset_index()
    write_table(report, args.out / 'lambda1_report', args.format)
    write_table(transfer_frame(tr.cycle), args.out / 'transfer', args.format)
    print('Model summary:')
    _print_summary(pipeline.summary(loaded, tr, model))
    if not model.hypothesis_ok:
        print('warning: hypotheses not satisfied; the bounds are not guaranteed')
    print(f'Results written to: {args.out.resolve()}')
    return 0


def cmd_verify(args) -> int:
    if args.kmin < 0 or args.kmax < args.kmin:
        raise LogMarkovError(f'empty K range {args.kmin}..{args.kmax}')
    loaded, tr, model = _analyzed(args)
    if not model.hypothesis_ok and not args.force:
        for reason in model.reasons:
            print(f'error: {reason}')
        print('hypotheses not satisfied; rerun with --force to verify anyway')
        return 1
    if not model.hypothesis_ok:
        log.warning('verifying under --force: %s', '; '.join(model.reasons))
    report = pipeline.verify(loaded, tr, model, range(args.kmin, args.kmax + 1), args.tol)
    args.out.mkdir(parents=True, exist_ok=True)
    write_table(report.eigen, args.out / 'verify_eigen', args.format)
    write_table(report.probability, args.out / 'verify_prob', args.format)
    write_json(report.summary, args.out / 'verify_summary.json')
    print('Verification summary:')
    _print_summary(report.summary)
    return 0 if report.all_pass else 1


def cmd_simulate(args) -> int:
    if args.kmin < 0 or args.kmax < args.kmin:
        raise LogMarkovError(f'empty K range {args.kmin}..{args.kmax}')
    loaded = _usable(args)
    df = pipeline.simulate(loaded, range(args.kmin, args.kmax + 1), args.shots, args.seed,
                           defer_corrections=args.defer_corrections, workers=args.threads)
    args.out.mkdir(parents=True, exist_ok=True)
    path = write_table(df, args.out / 'simulate_counts', args.format)
    print(f'{len(df)} rows, largest |z| = {df["z"].abs().max():.3g}')
    print(f'Counts written to: {path.resolve()}')
    return 0


def cmd_fit(args) -> int:
    df = pd.read_csv(args.data)
    result = fit_frame(df)
    for key, value in result.as_dict().items():
        print(f'  {key}: {value}')
    args.out.mkdir(parents=True, exist_ok=True)
    write_json(result.as_dict(), args.out / 'fit.json')
    return 0


COMMANDS = {
    'validate': cmd_validate,
    'analyze': cmd_analyze,
    'verify': cmd_verify,
    'simulate': cmd_simulate,
    'fit': cmd_fit,
}


def main(argv=None) -> int:
    """Run one subcommand and return its exit status."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
    )
    try:
        return COMMANDS[args.command](args)
    except (LogMarkovError, OSError, pd.errors.ParserError) as e:
        print(f'Error during {args.command}: {e}', file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
