#!/usr/bin/python3

"""Series runs: QE per image, then QE against %-change by least squares.

Two ways of getting a QE per image:

 reference   train once on image 1, score every image against the
             frozen map (a QE that grows means the image moved away
             from what the reference taught the map)
 per-image   train a fresh map on each image (seed + index) and report
             its QE on that same image
"""

import enum
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .errors import ConfigurationError, InputError
from .features import PixelPosition, extract_vectors, strategy_dict
from .som import SEED_LIMIT, SomConfig, init_grid, quantization_error, train

logger = logging.getLogger(__name__)

class TrainingMode(enum.Enum):
    REFERENCE = 'reference'
    PER_IMAGE = 'per-image'

@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r2: float
    n: int
    degenerate: bool = False

    def predict(self, x):
        return self.slope * x + self.intercept

    def to_dict(self):
        return {'slope': self.slope, 'intercept': self.intercept, 'r2': self.r2,
                'n': self.n, 'degenerate': self.degenerate}

@dataclass(frozen=True)
class ImageRecord:
    index: int
    delta_pct: float
    qe: float
    ms: Optional[float] = None

@dataclass
class SeriesResult:
    series_id: str
    spec: Optional[dict]
    mode: TrainingMode
    strategy: dict
    som: dict
    records: List[ImageRecord]
    fit: RegressionFit
    total_ms: Optional[float] = None
    train_ms: Optional[float] = None
    weights: Optional[list] = field(default=None, repr=False)

    @property
    def qes(self):
        return [r.qe for r in self.records]

    @property
    def deltas(self):
        return [r.delta_pct for r in self.records]

    def without_timings(self):
        return replace(self, total_ms=None, train_ms=None,
                       records=[replace(r, ms=None) for r in self.records])

def linear_fit(points):
    """Ordinary least squares y = slope*x + intercept.

    All-equal x or all-equal y gives a degenerate fit with r2 = 0."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise InputError('a linear fit needs at least 2 (x, y) points, got %d' % len(points))
    x, y = pts[:, 0], pts[:, 1]
    n = len(x)
    dx = x - x.mean()
    dy = y - y.mean()
    # the mean of equal floats can be off by an ulp
    if np.all(y == y[0]):
        return RegressionFit(0.0, float(y[0]), 0.0, n, True)
    if np.all(x == x[0]):
        return RegressionFit(0.0, float(y.mean()), 0.0, n, True)
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    slope = float(np.dot(dx, dy)) / sxx
    intercept = float(y.mean()) - slope * float(x.mean())
    resid = y - (slope * x + intercept)
    r2 = 1.0 - float(np.dot(resid, resid)) / syy
    return RegressionFit(slope, intercept, min(1.0, max(0.0, r2)), n, False)

def _ms(t0):
    return (time.perf_counter() - t0) * 1000.0

def _score(grid, dataset, workers):
    t0 = time.perf_counter()
    qe = quantization_error(grid, dataset, workers)
    return qe, _ms(t0)

def _train_and_score(config, dataset):
    t0 = time.perf_counter()
    grid = train(init_grid(config), dataset)
    return quantization_error(grid, dataset), _ms(t0)

def run_series(images, deltas, som=None, strategy=PixelPosition(), mode=TrainingMode.REFERENCE,
               series_id='series', spec=None, workers=1):
    """QE of every image and the fit of QE against delta.

    som may omit dim (pass a SomConfig for an equal dim, or a dict of
    SomConfig fields); it is set from the extracted vectors.  A single
    image gets a degenerate fit through its one point."""
    if not images:
        raise InputError('no images')
    if len(deltas) != len(images):
        raise InputError('%d deltas for %d images' % (len(deltas), len(images)))
    sizes = set((im.width, im.height) for im in images)
    if len(sizes) > 1:
        raise InputError('images differ in size: %s' % sorted(sizes))
    try:
        mode = TrainingMode(mode)
    except ValueError:
        raise ConfigurationError('unknown training mode %r (reference or per-image)' % (mode,))

    t_start = time.perf_counter()
    datasets = [extract_vectors(im, strategy) for im in images]
    if isinstance(som, SomConfig):
        som = som.to_dict()
    params = dict(som or {})
    params['dim'] = datasets[0].dim
    config = SomConfig(**params)

    train_ms = None
    weights = None
    if mode == TrainingMode.REFERENCE:
        t0 = time.perf_counter()
        grid = train(init_grid(config), datasets[0])
        train_ms = _ms(t0)
        weights = grid.weight_map().tolist()
        logger.info('%s: trained on reference in %.1f ms', series_id, train_ms)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                scored = list(pool.map(lambda d: _score(grid, d, 1), datasets))
        else:
            scored = [_score(grid, d, 1) for d in datasets]
    else:
        configs = [replace(config, seed=(config.seed + i) % SEED_LIMIT) for i in range(len(images))]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                scored = list(pool.map(_train_and_score, configs, datasets))
        else:
            scored = [_train_and_score(c, d) for c, d in zip(configs, datasets)]

    records = [ImageRecord(i, float(d), float(qe), ms)
               for i, (d, (qe, ms)) in enumerate(zip(deltas, scored))]
    for r in records:
        logger.info('%s: image %d delta %.4g%% QE %.6f', series_id, r.index + 1, r.delta_pct, r.qe)
    if len(records) > 1:
        fit = linear_fit([(r.delta_pct, r.qe) for r in records])
    else:
        fit = RegressionFit(0.0, records[0].qe, 0.0, 1, True)
    if fit.degenerate:
        logger.warning('%s: degenerate fit (single image, constant QE or constant delta)', series_id)

    return SeriesResult(series_id, spec, mode, strategy_dict(strategy), config.to_dict(), records, fit,
                        _ms(t_start), train_ms, weights)

@dataclass(frozen=True)
class ChangeFlag:
    index: int
    delta_pct: float
    qe: float
    excess: float

def detect_changes(result, tolerance=0.05):
    """Images whose QE exceeds the first image's by more than tolerance
    (relative to the first QE, or absolute when that QE is 0)."""
    if tolerance < 0:
        raise InputError('tolerance must be >= 0, got %r' % tolerance)
    ref = result.records[0].qe
    flags = []
    for r in result.records[1:]:
        excess = (r.qe - ref) / ref if ref > 0 else r.qe - ref
        if excess > tolerance:
            flags.append(ChangeFlag(r.index, r.delta_pct, r.qe, excess))
    return flags
