from .base import GrayImage, blank, is_bilevel, measure_white_fraction
from .pnm import load_image, save_image
from .series import (SeriesKind, SeriesSpec, GeneratedSeries, default_spec,
                     gen_random_contrast_series, gen_checker_count_series,
                     gen_checker_size_series, gen_central_square_series,
                     generate_series, read_series, write_series)
