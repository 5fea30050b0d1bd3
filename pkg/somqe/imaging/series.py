#!/usr/bin/python3

"""The five synthetic bilevel image series.

 random-white    black ground, random white pixels, cumulative
 random-black    white ground, random black pixels, cumulative
 checker-count   cells x cells grid, more white cells per image
 checker-size    one white square per cell, growing side
 central-square  one white square in the middle, growing side

Deltas are percentage points of the total image area.  For the random
kinds they are added to the reference density (deltas[0] must be 0);
for the others they are the white area itself.

Pixel placement for the random kinds uses its own PCG64 stream
(SeedSequence([seed, 1])), separate from the SOM's.
"""

import enum
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError, FormatError, InputError
from .base import BLACK, WHITE, GrayImage, blank, measure_white_fraction
from .pnm import load_image, save_image

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MANIFEST = 'series.json'
IMAGING_STREAM = 1

class SeriesKind(enum.Enum):
    RANDOM_WHITE = 'random-white'
    RANDOM_BLACK = 'random-black'
    CHECKER_COUNT = 'checker-count'
    CHECKER_SIZE = 'checker-size'
    CENTRAL_SQUARE = 'central-square'

    @property
    def is_random(self):
        return self in (SeriesKind.RANDOM_WHITE, SeriesKind.RANDOM_BLACK)

DEFAULT_DELTAS = {
    SeriesKind.RANDOM_WHITE: (0.0, 10.0, 22.5, 35.0, 47.5, 60.0),
    SeriesKind.RANDOM_BLACK: (0.0, 20.0, 30.0),
    SeriesKind.CHECKER_COUNT: tuple(float(8 * i) for i in range(1, 10)),
    SeriesKind.CHECKER_SIZE: tuple(float(2 * i) for i in range(1, 10)),
    SeriesKind.CENTRAL_SQUARE: (1.0, 2.0, 4.0, 8.0, 16.0, 32.0),
}

DEFAULT_CELLS = {
    SeriesKind.CHECKER_COUNT: 5,
    SeriesKind.CHECKER_SIZE: 3,
}

DEFAULT_WIDTH = 792
DEFAULT_HEIGHT = 777
DEFAULT_BASELINE = 20.0

def round_half_up(x):
    return int(math.floor(x + 0.5))

@dataclass(frozen=True)
class SeriesSpec:
    kind: SeriesKind
    deltas: Tuple[float, ...]
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    baseline_density: float = DEFAULT_BASELINE
    cells: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'kind', SeriesKind(self.kind))
        object.__setattr__(self, 'deltas', tuple(float(d) for d in self.deltas))
        d = self.deltas
        if not d:
            raise ConfigurationError('a series needs at least one delta')
        if any(b < a for a, b in zip(d, d[1:])):
            raise ConfigurationError('deltas must be non-decreasing: %r' % (d,))
        if self.width < 1 or self.height < 1:
            raise ConfigurationError('image size must be positive, got %dx%d' % (self.width, self.height))
        if self.cells < 1:
            raise ConfigurationError('cells must be >= 1, got %r' % self.cells)
        if not 0 <= self.seed < 1 << 64:
            raise ConfigurationError('seed must be a 64-bit unsigned integer, got %r' % self.seed)
        if self.kind.is_random:
            if d[0] != 0:
                raise ConfigurationError('random series start from the reference: deltas[0] must be 0')
            lo, hi = self.baseline_density, self.baseline_density + d[-1]
        else:
            lo, hi = d[0], d[-1]
        if lo < 0 or hi > 100:
            raise ConfigurationError('pixel fractions %.4g..%.4g%% outside [0, 100]' % (lo, hi))

    @property
    def count(self):
        return len(self.deltas)

    def to_dict(self):
        return {'kind': self.kind.value, 'width': self.width, 'height': self.height,
                'count': self.count, 'deltas': list(self.deltas),
                'baseline_density': self.baseline_density, 'cells': self.cells,
                'seed': self.seed}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d.pop('count', None)
        try:
            return cls(**d)
        except (TypeError, ValueError) as e:
            raise ConfigurationError('bad series spec %r: %s' % (d, e))

def default_spec(kind, **overrides):
    "Spec with the built-in defaults for kind; None overrides are ignored."
    kind = SeriesKind(kind)
    fields = {'kind': kind, 'deltas': DEFAULT_DELTAS[kind],
              'cells': DEFAULT_CELLS.get(kind, 1)}
    fields.update((k, v) for k, v in overrides.items() if v is not None)
    return SeriesSpec(**fields)

def imaging_rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, IMAGING_STREAM])))

def cell_edges(n, cells):
    "Boundaries of cells equal parts of n pixels; the remainder goes to the last."
    base = n // cells
    return [i * base for i in range(cells)] + [n]

def checker_order(cells):
    "Interleaved cell order: the (r+c) even cells row-major, then the odd ones."
    allcells = [(r, c) for r in range(cells) for c in range(cells)]
    return ([rc for rc in allcells if sum(rc) % 2 == 0] +
            [rc for rc in allcells if sum(rc) % 2 == 1])

def gen_random_contrast_series(spec):
    if not spec.kind.is_random:
        raise ConfigurationError('%s is not a random series' % spec.kind.value)
    total = spec.width * spec.height
    counts = [round_half_up((spec.baseline_density + d) / 100.0 * total) for d in spec.deltas]
    if counts[-1] > total:
        raise ConfigurationError('target of %d foreground pixels exceeds %d' % (counts[-1], total))
    if spec.kind == SeriesKind.RANDOM_WHITE:
        fg, bg = WHITE, BLACK
    else:
        fg, bg = BLACK, WHITE

    # a prefix of one permutation: each image contains the previous one's foreground
    order = imaging_rng(spec.seed).permutation(total)
    images = []
    for n in counts:
        flat = np.full(total, bg, dtype=np.uint8)
        flat[order[:n]] = fg
        images.append(GrayImage(spec.width, spec.height, flat.reshape(spec.height, spec.width)))
    return images

def checker_cell_counts(spec):
    "Whole cells per image, and a note for each delta that had to be rounded."
    ncells = spec.cells * spec.cells
    counts, notes = [], []
    for i, d in enumerate(spec.deltas):
        exact = d / 100.0 * ncells
        n = round_half_up(exact)
        if abs(n - exact) > 1e-9:
            notes.append('image %d: %.4g%% is %.4g of %d cells, rounded to %d'
                         % (i + 1, d, exact, ncells, n))
        counts.append(n)
    for n in notes:
        logger.warning(n)
    return counts, notes

def gen_checker_count_series(spec):
    if spec.kind != SeriesKind.CHECKER_COUNT:
        raise ConfigurationError('%s is not a checker-count series' % spec.kind.value)
    if spec.cells > min(spec.width, spec.height):
        raise ConfigurationError('%d cells do not fit a %dx%d image' % (spec.cells, spec.width, spec.height))
    xs = cell_edges(spec.width, spec.cells)
    ys = cell_edges(spec.height, spec.cells)
    order = checker_order(spec.cells)
    counts, _ = checker_cell_counts(spec)
    images = []
    for n in counts:
        a = np.full((spec.height, spec.width), BLACK, dtype=np.uint8)
        for r, c in order[:n]:
            a[ys[r]:ys[r + 1], xs[c]:xs[c + 1]] = WHITE
        images.append(GrayImage(spec.width, spec.height, a))
    return images

def gen_checker_size_series(spec):
    if spec.kind != SeriesKind.CHECKER_SIZE:
        raise ConfigurationError('%s is not a checker-size series' % spec.kind.value)
    xs = cell_edges(spec.width, spec.cells)
    ys = cell_edges(spec.height, spec.cells)
    room = min(spec.width // spec.cells, spec.height // spec.cells)
    area = spec.width * spec.height / float(spec.cells * spec.cells)
    images = []
    for d in spec.deltas:
        side = round_half_up(math.sqrt(d / 100.0 * area))
        if side > room:
            raise ConfigurationError('square side %d for %.4g%% exceeds the %d pixel cell' % (side, d, room))
        a = np.full((spec.height, spec.width), BLACK, dtype=np.uint8)
        if side:
            for r in range(spec.cells):
                top = ys[r] + (ys[r + 1] - ys[r] - side) // 2
                for c in range(spec.cells):
                    left = xs[c] + (xs[c + 1] - xs[c] - side) // 2
                    a[top:top + side, left:left + side] = WHITE
        images.append(GrayImage(spec.width, spec.height, a))
    return images

def central_square_side(spec, delta):
    side = round_half_up(math.sqrt(delta / 100.0 * spec.width * spec.height))
    if side > min(spec.width, spec.height):
        raise ConfigurationError('square side %d for %.4g%% exceeds the %dx%d image'
                                 % (side, delta, spec.width, spec.height))
    return side

def gen_central_square_series(spec):
    if spec.kind != SeriesKind.CENTRAL_SQUARE:
        raise ConfigurationError('%s is not a central-square series' % spec.kind.value)
    cx, cy = spec.width // 2, spec.height // 2
    images = []
    for d in spec.deltas:
        side = central_square_side(spec, d)
        a = np.full((spec.height, spec.width), BLACK, dtype=np.uint8)
        top, left = cy - side // 2, cx - side // 2
        a[top:top + side, left:left + side] = WHITE
        images.append(GrayImage(spec.width, spec.height, a))
    return images

GENERATORS = {
    SeriesKind.RANDOM_WHITE: gen_random_contrast_series,
    SeriesKind.RANDOM_BLACK: gen_random_contrast_series,
    SeriesKind.CHECKER_COUNT: gen_checker_count_series,
    SeriesKind.CHECKER_SIZE: gen_checker_size_series,
    SeriesKind.CENTRAL_SQUARE: gen_central_square_series,
}

@dataclass
class GeneratedSeries:
    """Images of one series with their deltas.  spec is None for a
    series read from a manifest that does not carry one."""
    spec: Optional[SeriesSpec]
    images: List[GrayImage]
    deltas: List[float]
    achieved: List[float] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    filenames: List[str] = field(default_factory=list)

    @property
    def series_id(self):
        return self.spec.kind.value if self.spec else 'series'

def generate_series(spec):
    images = GENERATORS[spec.kind](spec)
    notes = checker_cell_counts(spec)[1] if spec.kind == SeriesKind.CHECKER_COUNT else []
    achieved = [measure_white_fraction(im) for im in images]
    logger.info('generated %s: %d images %dx%d', spec.kind.value, len(images), spec.width, spec.height)
    return GeneratedSeries(spec, images, list(spec.deltas), achieved, notes)

def write_series(series, directory, fmt='pgm'):
    "Images plus series.json; returns the written paths, manifest last."
    os.makedirs(directory, exist_ok=True)
    paths = []
    entries = []
    width = max(2, len(str(len(series.images))))
    for i, (im, d) in enumerate(zip(series.images, series.deltas)):
        name = 'image_%0*d.%s' % (width, i + 1, fmt)
        path = os.path.join(directory, name)
        save_image(im, path)
        paths.append(path)
        entries.append({'filename': name, 'delta_pct': d,
                        'white_pct': measure_white_fraction(im)})
    series.filenames = [e['filename'] for e in entries]
    manifest = {
        'schema_version': SCHEMA_VERSION,
        'kind': series.spec.kind.value if series.spec else None,
        'spec': series.spec.to_dict() if series.spec else None,
        'seed': series.spec.seed if series.spec else None,
        'images': entries,
        'notes': list(series.notes),
    }
    mpath = os.path.join(directory, MANIFEST)
    with open(mpath, 'w') as f:
        json.dump(manifest, f, indent=2)
        f.write('\n')
    paths.append(mpath)
    return paths

def read_series(path):
    "Load a series from its manifest, or from a directory holding series.json."
    if os.path.isdir(path):
        path = os.path.join(path, MANIFEST)
    if not os.path.exists(path):
        raise InputError('no series manifest at %s' % path)
    try:
        with open(path) as f:
            manifest = json.load(f)
        entries = manifest['images']
        filenames = [str(e['filename']) for e in entries]
        deltas = [float(e['delta_pct']) for e in entries]
    except (ValueError, KeyError, TypeError) as e:
        raise FormatError('%s: bad series manifest (%s)' % (path, e))
    if not entries:
        raise InputError('%s lists no images' % path)
    spec = SeriesSpec.from_dict(manifest['spec']) if manifest.get('spec') else None
    base = os.path.dirname(path)
    images = [load_image(os.path.join(base, name)) for name in filenames]
    sizes = set((im.width, im.height) for im in images)
    if len(sizes) > 1:
        raise InputError('%s: mixed image sizes %s' % (path, sorted(sizes)))
    return GeneratedSeries(spec, images, deltas,
                           [measure_white_fraction(im) for im in images],
                           list(manifest.get('notes', [])),
                           filenames)
