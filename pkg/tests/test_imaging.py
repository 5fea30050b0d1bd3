import json
import math
import os

import numpy as np
import png
import pytest

from somqe.errors import ConfigurationError, FormatError, InputError
from somqe.imaging import (GrayImage, SeriesKind, SeriesSpec, blank, default_spec,
                           gen_central_square_series, gen_checker_count_series,
                           gen_checker_size_series, gen_random_contrast_series,
                           generate_series, is_bilevel, load_image, measure_white_fraction,
                           read_series, save_image, write_series)
from somqe.imaging.pnm import decode_pgm

# GrayImage

def test_image_validation():
    with pytest.raises(InputError):
        GrayImage(3, 3, np.zeros(8, dtype=np.uint8))
    with pytest.raises(InputError):
        GrayImage(2, 1, np.array([0, 300]))
    with pytest.raises(InputError):
        GrayImage(0, 1, np.zeros(0, dtype=np.uint8))

def test_fractional_intensities_rejected():
    with pytest.raises(InputError):
        GrayImage(2, 1, np.array([0.0, 12.7]))
    im = GrayImage(2, 1, np.array([0.0, 12.0]))
    assert im.data.dtype == np.uint8
    assert im.data.tolist() == [[0, 12]]

def test_white_fraction():
    assert measure_white_fraction(blank(10, 10)) == 0.0
    assert measure_white_fraction(blank(10, 10, 255)) == 100.0
    a = np.zeros((2, 4), dtype=np.uint8)
    a[0, :3] = 255
    a[1, 0] = 254
    assert measure_white_fraction(GrayImage.from_array(a)) == 37.5

# files

def test_pgm_round_trip(tmp_path, noise_image):
    path = str(tmp_path / 'a.pgm')
    save_image(noise_image, path)
    assert load_image(path) == noise_image

def test_pgm_header_on_one_line():
    im = decode_pgm(b'P5 792 777 255\n' + bytes(792 * 777))
    assert (im.width, im.height) == (792, 777)

def test_pgm_header_comments():
    im = decode_pgm(b'P5\n# made by hand\n2 1\n# depth\n255\n\x00\xff')
    assert im.data.tolist() == [[0, 255]]

@pytest.mark.parametrize('buf', [
    b'P2\n2 1\n255\n0 255\n',
    b'P5\n2 1\n65535\n\x00\x00\xff\xff',
    b'P5\n2 1\n255\n\x00',
    b'P5\n2',
    b'P5\nx 1\n255\n\x00\x00',
])
def test_pgm_malformed(buf):
    with pytest.raises(FormatError):
        decode_pgm(buf)

def test_png_round_trip(tmp_path, noise_image):
    path = str(tmp_path / 'a.png')
    save_image(noise_image, path)
    assert load_image(path) == noise_image

def test_color_png_rejected(tmp_path):
    path = str(tmp_path / 'rgb.png')
    with open(path, 'wb') as f:
        png.Writer(2, 1, greyscale=False, bitdepth=8).write(f, [[255, 0, 0, 0, 255, 0]])
    with pytest.raises(FormatError):
        load_image(path)

def test_16_bit_png_rejected(tmp_path):
    path = str(tmp_path / 'deep.png')
    with open(path, 'wb') as f:
        png.Writer(2, 1, greyscale=True, bitdepth=16).write(f, [[0, 65535]])
    with pytest.raises(FormatError):
        load_image(path)

def test_garbage_png_rejected(tmp_path):
    path = tmp_path / 'junk.png'
    path.write_bytes(b'not a png at all')
    with pytest.raises(FormatError):
        load_image(str(path))

def test_unknown_extension(tmp_path, noise_image):
    with pytest.raises(FormatError):
        save_image(noise_image, str(tmp_path / 'a.bmp'))

# specs

def test_default_deltas():
    assert default_spec('random-white').deltas == (0, 10, 22.5, 35, 47.5, 60)
    assert default_spec('random-black').deltas == (0, 20, 30)
    assert default_spec('checker-count').deltas == tuple(range(8, 73, 8))
    assert default_spec('checker-size').deltas == tuple(range(2, 19, 2))
    assert default_spec('central-square').deltas == (1, 2, 4, 8, 16, 32)
    assert default_spec('checker-count').cells == 5
    assert default_spec('checker-size').cells == 3
    s = default_spec('random-white')
    assert (s.width, s.height, s.baseline_density, s.count) == (792, 777, 20.0, 6)

@pytest.mark.parametrize('kwargs', [
    dict(kind='random-white', deltas=(0, 20, 10)),
    dict(kind='random-white', deltas=(5, 10)),
    dict(kind='random-white', deltas=(0, 90)),
    dict(kind='checker-count', deltas=(10, 110)),
    dict(kind='central-square', deltas=()),
    dict(kind='central-square', deltas=(1,), width=0),
])
def test_invalid_spec(kwargs):
    with pytest.raises(ConfigurationError):
        SeriesSpec(**kwargs)

# random series

@pytest.mark.parametrize('kind', ['random-white', 'random-black'])
def test_random_series_counts(kind):
    spec = default_spec(kind, seed=5)
    images = gen_random_contrast_series(spec)
    total = spec.width * spec.height
    fg = 255 if kind == 'random-white' else 0
    assert len(images) == spec.count
    for im, d in zip(images, spec.deltas):
        target = math.floor((spec.baseline_density + d) / 100.0 * total + 0.5)
        assert np.count_nonzero(im.data == fg) == target
        assert is_bilevel(im)

@pytest.mark.parametrize('kind', ['random-white', 'random-black'])
def test_random_series_is_cumulative(kind):
    images = gen_random_contrast_series(default_spec(kind, width=120, height=90, seed=2))
    fg = 255 if kind == 'random-white' else 0
    for a, b in zip(images, images[1:]):
        assert np.all((a.data == fg) <= (b.data == fg))

def test_random_series_seeded():
    a = gen_random_contrast_series(default_spec('random-white', width=64, height=64, seed=1))
    b = gen_random_contrast_series(default_spec('random-white', width=64, height=64, seed=1))
    c = gen_random_contrast_series(default_spec('random-white', width=64, height=64, seed=2))
    assert a == b
    assert a != c

def test_random_series_wrong_kind():
    with pytest.raises(ConfigurationError):
        gen_random_contrast_series(default_spec('central-square'))

# checker count

def test_checker_count_exact_when_divisible():
    images = gen_checker_count_series(default_spec('checker-count', width=500, height=400))
    assert [measure_white_fraction(im) for im in images] == [8.0 * i for i in range(1, 10)]

def test_checker_count_defaults():
    spec = default_spec('checker-count')
    images = gen_checker_count_series(spec)
    assert len(images) == 9
    # 158x155 cells, the remainder going to the last row and column
    for im, d in zip(images, spec.deltas):
        assert abs(measure_white_fraction(im) - d) < 0.1
        assert is_bilevel(im)

def test_checker_count_cells_are_interleaved():
    im = gen_checker_count_series(default_spec('checker-count', width=50, height=50, deltas=(8,)))[0]
    # first two cells in the even-parity order are (0, 0) and (0, 2)
    assert im.data[0, 0] == 255 and im.data[0, 25] == 255
    assert im.data[0, 15] == 0
    assert measure_white_fraction(im) == 8.0

def test_checker_count_zero_is_black():
    im = gen_checker_count_series(default_spec('checker-count', deltas=(0,)))[0]
    assert measure_white_fraction(im) == 0.0

def test_checker_count_rounding_noted():
    s = generate_series(default_spec('checker-count', width=100, height=100, deltas=(10, 20, 30)))
    assert len(s.notes) == 2
    assert s.achieved == [12.0, 20.0, 32.0]

# checker size

def test_checker_size_defaults():
    spec = default_spec('checker-size')
    images = gen_checker_size_series(spec)
    assert len(images) == 9
    for im, d in zip(images, spec.deltas):
        # half a pixel of side at most
        assert abs(measure_white_fraction(im) - d) < 0.2
        assert is_bilevel(im)
    assert abs(measure_white_fraction(images[0]) - 2) <= 0.1
    assert abs(measure_white_fraction(images[-1]) - 18) <= 0.1

def test_checker_size_squares_are_centred():
    im = gen_checker_size_series(default_spec('checker-size', width=90, height=90, deltas=(4,)))[0]
    # side round(sqrt(0.04 * 900)) = 6 in each 30 pixel cell, starting at 12
    assert im.data[12:18, 12:18].all()
    assert not im.data[11, 12] and not im.data[18, 12]
    assert np.count_nonzero(im.data) == 9 * 36

def test_checker_size_zero_and_overflow():
    im = gen_checker_size_series(default_spec('checker-size', deltas=(0,)))[0]
    assert measure_white_fraction(im) == 0.0
    with pytest.raises(ConfigurationError):
        gen_checker_size_series(default_spec('checker-size', deltas=(99,)))

# central square

def test_central_square_defaults():
    spec = default_spec('central-square')
    images = gen_central_square_series(spec)
    assert len(images) == 6
    for im, d in zip(images, spec.deltas):
        assert abs(measure_white_fraction(im) - d) <= 0.05
        assert is_bilevel(im)

def test_central_square_side():
    im = gen_central_square_series(default_spec('central-square', deltas=(32,)))[0]
    rows = np.flatnonzero(im.data.any(axis=1))
    cols = np.flatnonzero(im.data.any(axis=0))
    assert len(rows) == len(cols) == 444
    assert cols[0] == 396 - 222 and rows[0] == 388 - 222

def test_central_square_overflow():
    with pytest.raises(ConfigurationError):
        gen_central_square_series(default_spec('central-square', deltas=(100,), width=100, height=50))

# whole series

@pytest.mark.parametrize('kind', [k.value for k in SeriesKind])
def test_series_properties(kind):
    s = generate_series(default_spec(kind, seed=3))
    assert len(s.images) == len(s.deltas) == s.spec.count
    assert len(set((im.width, im.height) for im in s.images)) == 1
    assert all(is_bilevel(im) for im in s.images)
    again = generate_series(default_spec(kind, seed=3))
    assert again.images == s.images

def test_write_and_read_series(tmp_path):
    s = generate_series(default_spec('central-square', width=64, height=48, seed=9))
    paths = write_series(s, str(tmp_path), 'png')
    assert len(paths) == 7
    with open(paths[-1]) as f:
        manifest = json.load(f)
    assert manifest['kind'] == 'central-square'
    assert manifest['seed'] == 9
    assert [e['delta_pct'] for e in manifest['images']] == list(s.deltas)
    back = read_series(str(tmp_path))
    assert back.images == s.images
    assert back.spec == s.spec
    assert back.deltas == s.deltas

def test_read_series_errors(tmp_path):
    with pytest.raises(InputError):
        read_series(str(tmp_path))
    s = generate_series(default_spec('checker-count', width=50, height=50, deltas=(8, 16)))
    write_series(s, str(tmp_path))
    save_image(blank(40, 40), os.path.join(str(tmp_path), 'image_02.pgm'))
    with pytest.raises(InputError):
        read_series(str(tmp_path))

@pytest.mark.parametrize('missing', ['filename', 'delta_pct'])
def test_manifest_entry_missing_field(tmp_path, missing):
    s = generate_series(default_spec('checker-count', width=50, height=50, deltas=(8, 16)))
    write_series(s, str(tmp_path))
    mpath = os.path.join(str(tmp_path), 'series.json')
    with open(mpath) as f:
        manifest = json.load(f)
    del manifest['images'][1][missing]
    with open(mpath, 'w') as f:
        json.dump(manifest, f)
    with pytest.raises(FormatError):
        read_series(str(tmp_path))
