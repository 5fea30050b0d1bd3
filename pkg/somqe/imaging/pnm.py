#!/usr/bin/python3

"""Greyscale image files.

Binary PGM (P5, maxval 255) is read and written directly; the round
trip is bit-exact.  8-bit greyscale PNG goes through pypng.  Anything
else (colour, palette, alpha, 16-bit, ASCII PGM) is a FormatError.
"""

import logging
import os.path

import numpy as np
import png

from ..errors import FormatError
from .base import GrayImage

logger = logging.getLogger(__name__)

FORMATS = ('pgm', 'png')

def image_format(path):
    ext = os.path.splitext(str(path))[1].lower().lstrip('.')
    if ext not in FORMATS:
        raise FormatError('unsupported image extension %r (want .pgm or .png)' % ext)
    return ext

def _pgm_tokens(buf, count):
    "Header tokens of a PNM file, skipping whitespace and # comments."
    tokens = []
    i = 0
    n = len(buf)
    while len(tokens) < count:
        while i < n and (buf[i:i+1].isspace() or buf[i:i+1] == b'#'):
            if buf[i:i+1] == b'#':
                j = buf.find(b'\n', i)
                if j < 0:
                    raise FormatError('unterminated comment in PGM header')
                i = j + 1
            else:
                i += 1
        start = i
        while i < n and not buf[i:i+1].isspace() and buf[i:i+1] != b'#':
            i += 1
        if start == i:
            raise FormatError('truncated PGM header')
        tokens.append(buf[start:i])
    # exactly one whitespace byte separates maxval from the raster
    if i >= n or not buf[i:i+1].isspace():
        raise FormatError('truncated PGM header')
    return tokens, i + 1

def decode_pgm(buf):
    (magic, w, h, maxval), offset = _pgm_tokens(buf, 4)
    if magic != b'P5':
        raise FormatError('not a binary PGM (magic %r)' % magic)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise FormatError('bad PGM header %r %r %r' % (w, h, maxval))
    if maxval != 255:
        raise FormatError('unsupported PGM maxval %d (only 8-bit, 255)' % maxval)
    if width < 1 or height < 1:
        raise FormatError('bad PGM size %dx%d' % (width, height))
    raster = buf[offset:offset + width * height]
    if len(raster) != width * height:
        raise FormatError('PGM raster has %d bytes, expected %d' % (len(raster), width * height))
    data = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return GrayImage(width, height, data)

def encode_pgm(image):
    header = b'P5\n%d %d\n255\n' % (image.width, image.height)
    return header + image.data.tobytes()

def _load_png(path):
    try:
        width, height, rows, info = png.Reader(filename=str(path)).read()
        if (not info.get('greyscale') or info.get('alpha')
                or 'palette' in info or info.get('bitdepth') != 8):
            raise FormatError('%s: only 8-bit greyscale PNG is supported '
                              '(greyscale=%s alpha=%s bitdepth=%s)'
                              % (path, info.get('greyscale'), info.get('alpha'),
                                 info.get('bitdepth')))
        data = np.array([list(r) for r in rows], dtype=np.uint8)
    except png.Error as e:
        raise FormatError('%s: %s' % (path, e))
    return GrayImage(width, height, data)

def _save_png(image, path):
    writer = png.Writer(image.width, image.height, greyscale=True, bitdepth=8)
    with open(path, 'wb') as f:
        writer.write(f, image.data.tolist())

def load_image(path):
    fmt = image_format(path)
    logger.debug('loading %s', path)
    if fmt == 'png':
        return _load_png(path)
    with open(path, 'rb') as f:
        buf = f.read()
    try:
        return decode_pgm(buf)
    except FormatError as e:
        raise FormatError('%s: %s' % (path, e))

def save_image(image, path):
    fmt = image_format(path)
    logger.debug('saving %r to %s', image, path)
    if fmt == 'png':
        _save_png(image, path)
    else:
        with open(path, 'wb') as f:
            f.write(encode_pgm(image))
