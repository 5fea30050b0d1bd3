#!/usr/bin/python3

"""CSV, JSON and SVG reports of a SeriesResult.

Floats are written with repr() so a JSON report reads back to the same
values.  Images are numbered from 1 in every report.  Wall times make
output differ from run to run; they are only written when asked for
(timings=True).
"""

import csv
import io
import json
import logging
import os

import matplotlib
from matplotlib.figure import Figure

from .analysis import ImageRecord, RegressionFit, SeriesResult, TrainingMode
from .errors import FormatError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FORMATS = ('csv', 'json', 'svg')
CSV_HEADER = ('series_id', 'image_index', 'delta_pct', 'qe', 'ms')

def _num(x):
    return '' if x is None else repr(float(x))

def write_csv(result, path, timings=False):
    with open(path, 'w', newline='') as f:
        w = csv.writer(f, lineterminator='\n')
        w.writerow(CSV_HEADER)
        for r in result.records:
            w.writerow((result.series_id, r.index + 1, _num(r.delta_pct), _num(r.qe),
                        _num(r.ms if timings else None)))

def result_dict(result, timings=False):
    if not timings:
        result = result.without_timings()
    return {
        'schema_version': SCHEMA_VERSION,
        'series_id': result.series_id,
        'mode': result.mode.value,
        'strategy': result.strategy,
        'som': result.som,
        'seed': result.som.get('seed'),
        'spec': result.spec,
        'records': [{'image_index': r.index + 1, 'delta_pct': r.delta_pct, 'qe': r.qe, 'ms': r.ms}
                    for r in result.records],
        'fit': result.fit.to_dict(),
        'train_ms': result.train_ms,
        'total_ms': result.total_ms,
        'weights': result.weights,
    }

def write_json(result, path, timings=False):
    with open(path, 'w') as f:
        json.dump(result_dict(result, timings), f, indent=2)
        f.write('\n')

def load_result(path):
    try:
        with open(path) as f:
            d = json.load(f)
        if d.get('schema_version') != SCHEMA_VERSION:
            raise FormatError('%s: unsupported schema_version %r' % (path, d.get('schema_version')))
        return SeriesResult(
            series_id=d['series_id'],
            spec=d['spec'],
            mode=TrainingMode(d['mode']),
            strategy=d['strategy'],
            som=d['som'],
            records=[ImageRecord(r['image_index'] - 1, r['delta_pct'], r['qe'], r['ms'])
                     for r in d['records']],
            fit=RegressionFit(**d['fit']),
            total_ms=d['total_ms'],
            train_ms=d['train_ms'],
            weights=d['weights'])
    except (ValueError, KeyError, TypeError) as e:
        raise FormatError('%s: bad report (%s)' % (path, e))

def plot_result(result):
    "QE against change with the fitted line; returns a matplotlib Figure."
    xs, ys = result.deltas, result.qes
    fit = result.fit
    fig = Figure(figsize=(6.4, 4.8))
    ax = fig.add_subplot()
    lo, hi = min(xs), max(xs)
    ax.plot([lo, hi], [fit.predict(lo), fit.predict(hi)], color='red', linewidth=1, gid='fit')
    for i, (x, y) in enumerate(zip(xs, ys)):
        ax.plot([x], [y], 'o', color='black', markersize=5, gid='point_%d' % (i + 1))
    note = 'r2 = %.4f' % fit.r2
    if fit.degenerate:
        note += ' (degenerate)'
    ax.set_title('%s, %s  %s' % (result.series_id, result.mode.value, note), fontsize=11)
    ax.set_xlabel('change (%)')
    ax.set_ylabel('QE')
    ax.spines['right'].set_visible(False)
    ax.spines['top'].set_visible(False)
    return fig

# fixed element ids and no date, so equal results give equal files
SVG_RC = {'svg.hashsalt': 'somqe', 'svg.fonttype': 'none'}

def render_svg(result):
    fig = plot_result(result)
    buf = io.BytesIO()
    with matplotlib.rc_context(SVG_RC):
        fig.savefig(buf, format='svg', metadata={'Date': None})
    return buf.getvalue().decode('utf-8')

def write_svg(result, path):
    with open(path, 'w') as f:
        f.write(render_svg(result))

WRITERS = {
    'csv': lambda r, p, t: write_csv(r, p, t),
    'json': lambda r, p, t: write_json(r, p, t),
    'svg': lambda r, p, t: write_svg(r, p),
}

def emit_report(result, out_dir, formats=FORMATS, timings=False):
    "Write <series_id>.<fmt> for each format; returns the paths."
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for fmt in formats:
        if fmt not in WRITERS:
            raise FormatError('unknown report format %r (one of %s)' % (fmt, ', '.join(FORMATS)))
        path = os.path.join(out_dir, '%s.%s' % (result.series_id, fmt))
        WRITERS[fmt](result, path, timings)
        logger.info('wrote %s', path)
        paths.append(path)
    return paths

SUMMARY_HEADER = ('series_id', 'images', 'slope', 'intercept', 'r2', 'degenerate', 'increasing')

def strictly_increasing(values):
    return all(b > a for a, b in zip(values, values[1:]))

def write_summary(results, out_dir):
    "summary.csv with one fit per series; returns (path, text table)."
    path = os.path.join(out_dir, 'summary.csv')
    rows = [(r.series_id, len(r.records), r.fit.slope, r.fit.intercept, r.fit.r2,
             r.fit.degenerate, strictly_increasing(r.qes)) for r in results]
    with open(path, 'w', newline='') as f:
        w = csv.writer(f, lineterminator='\n')
        w.writerow(SUMMARY_HEADER)
        for row in rows:
            w.writerow(row[:2] + tuple(repr(v) for v in row[2:5]) + row[5:])
    lines = ['%-16s %6s %12s %12s %8s %s' % ('series', 'images', 'slope', 'intercept', 'r2', 'increasing')]
    for sid, n, slope, icpt, r2, degen, inc in rows:
        lines.append('%-16s %6d %12.6g %12.6g %8.4f %s%s'
                     % (sid, n, slope, icpt, r2, 'yes' if inc else 'no',
                        ' (degenerate)' if degen else ''))
    return path, '\n'.join(lines)
