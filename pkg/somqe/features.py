#!/usr/bin/python3

"""Images to SOM input vectors.

 PixelScalar    one 1-D vector per pixel: v/255
 Patch(k)       non-overlapping k x k blocks from (0, 0), flattened
                row-major; partial blocks at the right/bottom are dropped
 PixelPosition  one 3-D vector per pixel: (x/(w-1), y/(h-1), v/255);
                the default

Vectors come out in row-major scan order.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InputError
from .imaging.base import GrayImage
from .som import FeatureDataset

@dataclass(frozen=True)
class PixelScalar:
    name = 'pixel'

    def __str__(self):
        return self.name

@dataclass(frozen=True)
class Patch:
    k: int = 4
    name = 'patch'

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError('patch size must be >= 1, got %r' % self.k)

    def __str__(self):
        return 'patch(%d)' % self.k

@dataclass(frozen=True)
class PixelPosition:
    name = 'position'

    def __str__(self):
        return self.name

STRATEGIES = ('pixel', 'patch', 'position')

def parse_strategy(name, k=4):
    if name == 'pixel':
        return PixelScalar()
    if name == 'patch':
        return Patch(k)
    if name == 'position':
        return PixelPosition()
    raise ConfigurationError('unknown extraction strategy %r (one of %s)' % (name, ', '.join(STRATEGIES)))

def strategy_dict(strategy):
    d = {'name': strategy.name}
    if isinstance(strategy, Patch):
        d['k'] = strategy.k
    return d

def _patches(a, k):
    h, w = a.shape
    if k > min(w, h):
        raise InputError('patch size %d larger than %dx%d image' % (k, w, h))
    bh, bw = h // k, w // k
    blocks = a[:bh * k, :bw * k].reshape(bh, k, bw, k).swapaxes(1, 2)
    return blocks.reshape(bh * bw, k * k)

def _positions(a):
    h, w = a.shape
    ys, xs = np.mgrid[0:h, 0:w]
    x = xs / float(w - 1) if w > 1 else np.zeros_like(xs, dtype=np.float64)
    y = ys / float(h - 1) if h > 1 else np.zeros_like(ys, dtype=np.float64)
    return np.stack([x.ravel(), y.ravel(), a.ravel() / 255.0], axis=1)

def extract_vectors(image, strategy=PixelPosition()):
    a = image.data
    if isinstance(strategy, PixelScalar):
        v = a.reshape(-1, 1) / 255.0
    elif isinstance(strategy, Patch):
        v = _patches(a, strategy.k) / 255.0
    elif isinstance(strategy, PixelPosition):
        v = _positions(a)
    else:
        raise ConfigurationError('unknown extraction strategy %r' % (strategy,))
    return FeatureDataset(v)
