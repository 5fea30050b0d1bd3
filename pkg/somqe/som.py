#!/usr/bin/python3

"""Online self-organizing map on a rectangular lattice.

The map is a rows x cols lattice of weight vectors ("synaptic
weights").  Training is the classic online Kohonen rule: pick one input
at random, find its best-matching unit (BMU), and pull every weight
toward the input by the learning rate times a Gaussian of the lattice
distance to the BMU.  Learning rate and radius both decay as
v * exp(-t / T).

One PCG64 stream, seeded from the config, is consumed first by
init_grid() and then by train(), so a single seed reproduces a run.
The generator state left by init_grid() travels with the grid.

The quantization error (QE) of a dataset is the mean Euclidean distance
from each vector to its BMU weight.
"""

import copy
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, InputError

logger = logging.getLogger(__name__)

# Vectors per distance block; bounds the (chunk, cells, dim) scratch array.
CHUNK = 4096

SEED_LIMIT = 1 << 64

@dataclass(frozen=True)
class SomConfig:
    dim: int
    rows: int = 4
    cols: int = 4
    initial_radius: float = 1.2
    initial_learning_rate: float = 0.2
    iterations: int = 10000
    seed: int = 0

    def __post_init__(self):
        for name in ('rows', 'cols', 'dim'):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigurationError('%s must be a positive integer, got %r' % (name, v))
        if not self.iterations >= 0:
            raise ConfigurationError('iterations must be >= 0, got %r' % self.iterations)
        if not self.initial_radius > 0:
            raise ConfigurationError('initial_radius must be > 0, got %r' % self.initial_radius)
        if not 0 < self.initial_learning_rate <= 1:
            raise ConfigurationError('initial_learning_rate must be in (0, 1], got %r'
                                     % self.initial_learning_rate)
        if not 0 <= self.seed < SEED_LIMIT:
            raise ConfigurationError('seed must be a 64-bit unsigned integer, got %r' % self.seed)

    @property
    def cells(self):
        return self.rows * self.cols

    def to_dict(self):
        return {'rows': self.rows, 'cols': self.cols, 'dim': self.dim,
                'initial_radius': self.initial_radius,
                'initial_learning_rate': self.initial_learning_rate,
                'iterations': self.iterations, 'seed': self.seed}

@dataclass(frozen=True, eq=False)
class FeatureDataset:
    """Fixed-dimension vectors with components in [0, 1], in the order
    they were extracted."""
    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=np.float64)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise InputError('dataset must be a non-empty list of vectors, got shape %r' % (v.shape,))
        if not np.all(np.isfinite(v)) or v.min() < 0.0 or v.max() > 1.0:
            raise InputError('dataset components must lie in [0, 1]')
        v.setflags(write=False)
        object.__setattr__(self, 'vectors', v)

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return self.vectors.shape[0]

@dataclass(frozen=True, eq=False)
class SomGrid:
    """Trained or freshly initialized map.  Immutable, so a trained grid
    can be shared by concurrent scorers."""
    config: SomConfig
    weights: np.ndarray
    rng_state: Optional[dict] = field(default=None, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        cfg = self.config
        if w.shape != (cfg.cells, cfg.dim):
            raise InputError('weights shape %r does not match %dx%d grid of dim %d'
                             % (w.shape, cfg.rows, cfg.cols, cfg.dim))
        if not np.all(np.isfinite(w)):
            raise InputError('weights must be finite')
        w.setflags(write=False)
        object.__setattr__(self, 'weights', w)

    @classmethod
    def from_weights(cls, weights, rows, cols, seed=0, **kwargs):
        "Grid with given row-major weights, e.g. for scoring a saved map."
        w = np.asarray(weights, dtype=np.float64).reshape(rows * cols, -1)
        config = SomConfig(dim=w.shape[1], rows=rows, cols=cols, seed=seed, **kwargs)
        return cls(config, w)

    def weight_map(self):
        "Weights as a (rows, cols, dim) array."
        return self.weights.reshape(self.config.rows, self.config.cols, self.config.dim)

    def cell(self, index):
        return divmod(int(index), self.config.cols)

@dataclass(frozen=True)
class BmuResult:
    row: int
    col: int
    distance: float

def _generator(seed=None, state=None):
    g = np.random.Generator(np.random.PCG64(seed))
    if state is not None:
        g.bit_generator.state = copy.deepcopy(state)
    return g

def init_grid(config):
    "Weights uniform in [0, 1] from the config's seeded stream."
    rng = _generator(config.seed)
    weights = rng.random((config.cells, config.dim))
    return SomGrid(config, weights, rng.bit_generator.state)

def neighborhood_factor(grid_distance, radius):
    "Gaussian attenuation, 1 at the BMU."
    if not radius > 0:
        raise ConfigurationError('radius must be > 0, got %r' % radius)
    return math.exp(-grid_distance * grid_distance / (2.0 * radius * radius))

def decay_at(initial_value, t, total_iterations):
    if total_iterations <= 0:
        raise ConfigurationError('total_iterations must be positive, got %r' % total_iterations)
    if not 0 <= t <= total_iterations:
        raise InputError('t=%r outside [0, %r]' % (t, total_iterations))
    return initial_value * math.exp(-t / total_iterations)

def lattice_sq_distances(config):
    "Squared Euclidean distances between all (row, col) pairs, row-major."
    r, c = np.divmod(np.arange(config.cells), config.cols)
    dr = r[:, None] - r[None, :]
    dc = c[:, None] - c[None, :]
    return (dr * dr + dc * dc).astype(np.float64)

def _check(grid, data):
    if len(data) == 0:
        raise InputError('empty dataset')
    if data.dim != grid.config.dim:
        raise InputError('dataset dim %d does not match grid dim %d' % (data.dim, grid.config.dim))

def _chunk_bmus(weights, chunk):
    diff = chunk[:, None, :] - weights[None, :, :]
    dist = np.sqrt(np.einsum('ijk,ijk->ij', diff, diff))
    idx = np.argmin(dist, axis=1) # first minimum: lowest row-major index
    return idx, dist[np.arange(len(chunk)), idx]

def find_bmu(grid, vector):
    x = np.asarray(vector, dtype=np.float64).reshape(-1)
    if x.shape[0] != grid.config.dim:
        raise InputError('vector dim %d does not match grid dim %d' % (x.shape[0], grid.config.dim))
    idx, dist = _chunk_bmus(grid.weights, x[None, :])
    row, col = grid.cell(idx[0])
    return BmuResult(row, col, float(dist[0]))

def _bmus(grid, data, workers=1):
    _check(grid, data)
    v = data.vectors
    chunks = [v[i:i + CHUNK] for i in range(0, len(v), CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _chunk_bmus(grid.weights, c), chunks))
    else:
        parts = [_chunk_bmus(grid.weights, c) for c in chunks]
    logger.debug('scored %d vectors in %d chunks', len(v), len(chunks))
    return (np.concatenate([p[0] for p in parts]),
            np.concatenate([p[1] for p in parts]))

def bmu_indices(grid, data, workers=1):
    "Row-major BMU index of every dataset vector."
    return _bmus(grid, data, workers)[0]

def bmu_distances(grid, data, workers=1):
    "Distance of every dataset vector to its BMU weight."
    return _bmus(grid, data, workers)[1]

def quantization_error(grid, data, workers=1):
    """Mean BMU distance.  The sum is exactly rounded (math.fsum), so
    the value is the same for any chunking, worker count or order."""
    d = bmu_distances(grid, data, workers)
    return math.fsum(d.tolist()) / len(d)

def train(grid, data, checkpoint=None, checkpoint_every=100):
    """Run config.iterations online updates and return the new grid.

    checkpoint(t, weights) is called after every checkpoint_every steps
    with a copy of the weights."""
    _check(grid, data)
    cfg = grid.config
    T = cfg.iterations
    if T == 0:
        return grid

    if grid.rng_state is None:
        rng = _generator(cfg.seed)
        rng.random((cfg.cells, cfg.dim)) # skip the init draws
    else:
        rng = _generator(state=grid.rng_state)

    vectors = data.vectors
    picks = rng.integers(0, len(vectors), size=T)
    alphas = [decay_at(cfg.initial_learning_rate, t, T) for t in range(T)]
    sigmas = [decay_at(cfg.initial_radius, t, T) for t in range(T)]
    lattice = lattice_sq_distances(cfg)
    weights = np.array(grid.weights)

    logger.debug('training %dx%d map, dim %d, %d iterations on %d vectors',
                 cfg.rows, cfg.cols, cfg.dim, T, len(vectors))
    for t in range(T):
        diff = vectors[picks[t]] - weights
        bmu = np.argmin(np.einsum('ij,ij->i', diff, diff))
        h = np.exp(-lattice[bmu] / (2.0 * sigmas[t] * sigmas[t]))
        weights += (alphas[t] * h)[:, None] * diff
        if checkpoint is not None and (t + 1) % checkpoint_every == 0:
            checkpoint(t + 1, weights.copy())

    return SomGrid(cfg, weights, rng.bit_generator.state)

if __name__ == "__main__":
    import sys
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
    rng = np.random.default_rng(0)
    data = FeatureDataset(rng.random((n, 16)))
    g = train(init_grid(SomConfig(dim=16)), data)
    print('QE of %d random 16-D vectors: %.6f' % (n, quantization_error(g, data)))
