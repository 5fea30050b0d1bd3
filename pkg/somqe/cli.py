#!/usr/bin/python3

"""somqe command line.

 somqe generate --kind checker-count --out series3
 somqe analyze series3 --mode per-image
 somqe replicate --out replicate
 somqe bench --count 20
 somqe rerun replicate/run_manifest.json

Every command writes run_manifest.json into its output directory with
the fully resolved parameters and the sha256 of each file written;
`somqe rerun` repeats the command from that file alone.
"""

import argparse
import datetime
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional

import pooch

from . import config as cfg
from .analysis import TrainingMode, detect_changes, run_series
from .errors import ConfigurationError, FormatError, SomqeException
from .features import parse_strategy
from .imaging.series import SeriesKind, default_spec, generate_series, read_series, write_series
from .report import FORMATS, emit_report, write_summary

logger = logging.getLogger(__name__)

MANIFEST = 'run_manifest.json'
EXIT_IO = 4

@dataclass
class RunManifest:
    command: str
    params: dict
    seed: int
    out_dir: str
    config_path: Optional[str] = None
    timestamp: str = ''
    files: Dict[str, str] = field(default_factory=dict)

    def add(self, *paths):
        for p in paths:
            self.files[os.path.relpath(p, self.out_dir)] = None

    def write(self):
        os.makedirs(self.out_dir, exist_ok=True)
        for rel in self.files:
            path = os.path.join(self.out_dir, rel)
            if os.path.exists(path):
                self.files[rel] = 'sha256:' + pooch.file_hash(path, alg='sha256')
        path = os.path.join(self.out_dir, MANIFEST)
        with open(path, 'w') as f:
            json.dump(asdict(self), f, indent=2)
            f.write('\n')
        return path

def read_manifest(path):
    if os.path.isdir(path):
        path = os.path.join(path, MANIFEST)
    try:
        with open(path) as f:
            d = json.load(f)
        return RunManifest(**d)
    except (ValueError, TypeError) as e:
        raise FormatError('%s: bad run manifest (%s)' % (path, e))

def _som_and_strategy(params):
    return cfg.som_params(params), parse_strategy(params['strategy'], params['patch'])

def _mode(params):
    try:
        return TrainingMode(params['mode'])
    except ValueError:
        raise ConfigurationError('unknown mode %r (reference or per-image)' % params['mode'])

def _kind(name):
    try:
        return SeriesKind(name)
    except ValueError:
        raise ConfigurationError('unknown series kind %r (one of %s)'
                                 % (name, ', '.join(k.value for k in SeriesKind)))

def _spec(params, kind, per_kind_defaults=False):
    overrides = dict(width=params['width'], height=params['height'],
                     baseline_density=params['baseline'], seed=params['seed'])
    if not per_kind_defaults:
        overrides.update(deltas=params['deltas'], cells=params['cells'])
    return default_spec(kind, **overrides)

def cmd_generate(params, run):
    if not params.get('kind'):
        raise ConfigurationError('generate needs --kind (one of %s)' % ', '.join(k.value for k in SeriesKind))
    series = generate_series(_spec(params, _kind(params['kind'])))
    paths = write_series(series, run.out_dir, params['format'])
    run.add(*paths)
    for name, d, w in zip(series.filenames, series.deltas, series.achieved):
        print('%s  delta %6.4g%%  white %7.4f%%' % (name, d, w))
    for n in series.notes:
        print('note: %s' % n)
    print('%d images and %s in %s' % (len(series.images), os.path.basename(paths[-1]), run.out_dir))

def _analyze(series, series_id, params, run, out_dir, formats):
    som, strategy = _som_and_strategy(params)
    result = run_series(series.images, series.deltas, som, strategy, _mode(params),
                        series_id=series_id,
                        spec=series.spec.to_dict() if series.spec else None,
                        workers=params['workers'])
    run.add(*emit_report(result, out_dir, formats, params['timings']))
    return result

def cmd_analyze(params, run):
    path = params['series']
    series = read_series(path)
    if series.spec:
        series_id = series.series_id
    else:
        series_id = os.path.basename(os.path.normpath(path if os.path.isdir(path) else os.path.dirname(path)))
    result = _analyze(series, series_id, params, run, run.out_dir, params['reports'])
    fit = result.fit
    for r in result.records:
        print('image %2d  delta %6.4g%%  QE %.6f' % (r.index + 1, r.delta_pct, r.qe))
    print('%s (%s, %s): slope %.6g  intercept %.6g  r2 %.4f%s'
          % (series_id, result.mode.value, params['strategy'], fit.slope, fit.intercept, fit.r2,
             ' (degenerate)' if fit.degenerate else ''))
    if params.get('threshold') is not None:
        flags = detect_changes(result, params['threshold'])
        for c in flags:
            print('change: image %d (delta %.4g%%) QE %.6f, +%.1f%% over reference'
                  % (c.index + 1, c.delta_pct, c.qe, 100 * c.excess))
        if not flags:
            print('no image exceeds the reference QE by more than %.1f%%' % (100 * params['threshold']))

def cmd_replicate(params, run):
    results = []
    try:
        for kind in SeriesKind:
            series = generate_series(_spec(params, kind, per_kind_defaults=True))
            run.add(*write_series(series, os.path.join(run.out_dir, 'series', kind.value), params['format']))
            results.append(_analyze(series, kind.value, params, run, run.out_dir, FORMATS))
    finally:
        if results:
            path, table = write_summary(results, run.out_dir)
            run.add(path)
            print(table)

def cmd_bench(params, run):
    count = params['count']
    if count < 1:
        raise ConfigurationError('--count must be >= 1')
    deltas = [60.0 * i / (count - 1) for i in range(count)] if count > 1 else [0.0]
    spec = default_spec(SeriesKind.RANDOM_WHITE, width=params['width'], height=params['height'],
                        deltas=deltas, seed=params['seed'])
    series = generate_series(spec)
    som, strategy = _som_and_strategy(params)
    result = run_series(series.images, series.deltas, som, strategy, TrainingMode.REFERENCE,
                        series_id='bench', spec=spec.to_dict(), workers=params['workers'])
    run.add(*emit_report(result, run.out_dir, ('csv', 'json'), timings=True))
    print('training: %.1f ms' % result.train_ms)
    for r in result.records:
        print('image %2d: %8.1f ms  QE %.6f' % (r.index + 1, r.ms, r.qe))
    total = result.total_ms / 1000.0
    budget = params['budget']
    print('%d images %dx%d: %.2f s total, budget %.0f s: %s'
          % (count, spec.width, spec.height, total, budget, 'PASS' if total < budget else 'FAIL'))

COMMANDS = {
    'generate': cmd_generate,
    'analyze': cmd_analyze,
    'replicate': cmd_replicate,
    'bench': cmd_bench,
}

def _add_params(p, names):
    for name in names:
        kw = {'default': None, 'help': '%s (default: %s)' % (cfg.HELP[name], cfg.DEFAULTS[name])}
        if name == 'timings':
            kw.update(action='store_const', const=True)
        elif name == 'kind':
            kw.update(choices=[k.value for k in SeriesKind])
        elif name == 'mode':
            kw.update(choices=[m.value for m in TrainingMode])
        elif name == 'format':
            kw.update(choices=['pgm', 'png'])
        p.add_argument('--' + name, **kw)

SERIES_FLAGS = ('kind', 'width', 'height', 'deltas', 'baseline', 'cells', 'format', 'seed')
SOM_FLAGS = ('rows', 'cols', 'radius', 'alpha', 'iters', 'strategy', 'patch', 'mode',
             'workers', 'timings', 'seed')

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON config file (see docs/config.rst); flags override it')
    common.add_argument('--out', help='output directory')
    common.add_argument('-v', '--verbose', action='count', default=0, help='-v info, -vv debug')

    parser = argparse.ArgumentParser(
        prog='somqe',
        description='Quantization error of a self-organizing map as a change indicator '
                    'for image series.  Seed falls back to $%s.' % cfg.SEED_ENV)
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('generate', parents=[common], help='write a synthetic image series')
    _add_params(p, SERIES_FLAGS)

    p = sub.add_parser('analyze', parents=[common], help='QE per image of a series and the linear fit')
    p.add_argument('series', help='series directory or its series.json')
    p.add_argument('--reports', default=','.join(FORMATS),
                   help='report formats, comma separated (default: %s)' % ','.join(FORMATS))
    _add_params(p, SOM_FLAGS + ('threshold',))

    p = sub.add_parser('replicate', parents=[common], help='generate and analyze all five series')
    _add_params(p, ('width', 'height', 'baseline', 'format') + SOM_FLAGS)

    p = sub.add_parser('bench', parents=[common], help='time training and scoring')
    p.add_argument('--count', type=int, default=20, help='number of images (default: 20)')
    p.add_argument('--budget', type=float, default=60.0, help='seconds allowed (default: 60)')
    _add_params(p, ('width', 'height', 'rows', 'cols', 'radius', 'alpha', 'iters',
                    'strategy', 'patch', 'workers', 'seed'))

    p = sub.add_parser('rerun', help='repeat a command from its run_manifest.json')
    p.add_argument('manifest', help='run_manifest.json or the directory holding it')
    p.add_argument('--out', help='output directory (default: the recorded one)')
    p.add_argument('-v', '--verbose', action='count', default=0)
    return parser

def default_out(command, params):
    if command == 'generate':
        return params.get('kind') or 'series'
    if command == 'analyze':
        p = params['series']
        return p if os.path.isdir(p) else os.path.dirname(p) or '.'
    return command

def prepare(args):
    "RunManifest for parsed arguments: flags merged over config and defaults."
    if args.command == 'rerun':
        old = read_manifest(args.manifest)
        if old.command not in COMMANDS:
            raise FormatError("%s: unknown command %r" % (args.manifest, old.command))
        out = args.out or old.out_dir
        return RunManifest(old.command, old.params, old.seed, out, old.config_path)

    file_config = cfg.load_config(args.config) if args.config else {}
    flags = dict((k, v) for k, v in vars(args).items() if k in cfg.DEFAULTS)
    params = cfg.resolve(flags, file_config)
    if args.command == 'analyze':
        params['series'] = args.series
        params['reports'] = [x for x in args.reports.replace(',', ' ').split() if x]
    elif args.command == 'bench':
        params['count'] = args.count
        params['budget'] = args.budget
    out = args.out or default_out(args.command, params)
    return RunManifest(args.command, params, params['seed'], out, args.config)

def main(argv=None):
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')

    run = None
    try:
        run = prepare(args)
        run.timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
        os.makedirs(run.out_dir, exist_ok=True)
        COMMANDS[run.command](run.params, run)
        return 0
    except SomqeException as e:
        print('somqe: error: %s' % e, file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print('somqe: error: %s' % e, file=sys.stderr)
        return EXIT_IO
    finally:
        if run is not None and os.path.isdir(run.out_dir):
            try:
                logger.info('wrote %s', run.write())
            except OSError as e:
                print('somqe: error writing manifest: %s' % e, file=sys.stderr)

if __name__ == "__main__":
    sys.exit(main())
