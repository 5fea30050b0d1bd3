#!/usr/bin/python3

from dataclasses import dataclass

import numpy as np

from ..errors import InputError

BLACK = 0
WHITE = 255

@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit greyscale image.  data is a (height, width) uint8 array,
    row-major."""
    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InputError('image size must be positive, got %dx%d' % (self.width, self.height))
        d = np.asarray(self.data)
        if d.size != self.width * self.height:
            raise InputError('%d pixels for a %dx%d image' % (d.size, self.width, self.height))
        if d.dtype != np.uint8:
            if d.size and (d.min() < 0 or d.max() > 255):
                raise InputError('intensities must lie in [0, 255]')
            u = d.astype(np.uint8)
            if not np.array_equal(u, d):
                raise InputError('intensities must be whole numbers')
            d = u
        d = d.reshape(self.height, self.width)
        d.setflags(write=False)
        object.__setattr__(self, 'data', d)

    @classmethod
    def from_array(cls, array):
        a = np.asarray(array)
        return cls(a.shape[1], a.shape[0], a)

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (self.width, self.height) == (other.width, other.height) and \
            np.array_equal(self.data, other.data)

    def __repr__(self):
        return 'GrayImage(%dx%d)' % (self.width, self.height)

def blank(width, height, value=BLACK):
    return GrayImage(width, height, np.full((height, width), value, dtype=np.uint8))

def measure_white_fraction(image):
    "Percentage of pixels at 255."
    return 100.0 * np.count_nonzero(image.data == WHITE) / (image.width * image.height)

def is_bilevel(image):
    return bool(np.all((image.data == BLACK) | (image.data == WHITE)))
