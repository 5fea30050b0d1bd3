import numpy as np
import pytest

from somqe.analysis import (ImageRecord, RegressionFit, SeriesResult, TrainingMode,
                            detect_changes, linear_fit, run_series)
from somqe.errors import ConfigurationError, InputError
from somqe.features import Patch, PixelScalar
from somqe.imaging import blank, default_spec, generate_series
from somqe.som import SomConfig

SMALL = dict(rows=2, cols=2, iterations=300, seed=4)

def reference_fit(x, y):
    "slope, intercept, r2 from lstsq and the correlation coefficient."
    A = np.column_stack([x, np.ones_like(x)])
    slope, intercept = np.linalg.lstsq(A, y, rcond=None)[0]
    r = np.corrcoef(x, y)[0, 1]
    return slope, intercept, r * r

# linear_fit

def test_fit_collinear():
    f = linear_fit([(0, 1), (1, 3), (2, 5), (3, 7)])
    assert f.slope == pytest.approx(2.0)
    assert f.intercept == pytest.approx(1.0)
    assert f.r2 == pytest.approx(1.0, abs=1e-12)
    assert (f.n, f.degenerate) == (4, False)
    assert f.predict(10) == pytest.approx(21.0)

def test_fit_constant_y():
    f = linear_fit([(0, 0.3), (1, 0.3), (5, 0.3)])
    assert (f.slope, f.intercept, f.r2, f.degenerate) == (0.0, 0.3, 0.0, True)

def test_fit_constant_x():
    f = linear_fit([(2, 1.0), (2, 3.0)])
    assert f.degenerate
    assert f.r2 == 0.0
    assert f.intercept == 2.0

def test_fit_needs_two_points():
    with pytest.raises(InputError):
        linear_fit([(1, 1)])
    with pytest.raises(InputError):
        linear_fit([])

def test_fit_matches_lstsq(rng):
    for _ in range(1000):
        n = rng.integers(3, 30)
        x = rng.uniform(0, 100, n)
        y = rng.uniform(-2, 2) * x + rng.choice([-1, 1]) * rng.uniform(1, 5) + rng.normal(0, 3, n)
        slope, intercept, r2 = reference_fit(x, y)
        f = linear_fit(np.column_stack([x, y]))
        assert f.slope == pytest.approx(slope, rel=1e-10, abs=1e-12)
        assert f.intercept == pytest.approx(intercept, rel=1e-10, abs=1e-10)
        assert f.r2 == pytest.approx(r2, rel=1e-10, abs=1e-12)
        assert 0.0 <= f.r2 <= 1.0

def test_fit_r2_affine_invariant(rng):
    x = rng.uniform(0, 60, 12)
    y = 0.01 * x + rng.normal(0, 0.05, 12)
    f = linear_fit(np.column_stack([x, y]))
    g = linear_fit(np.column_stack([3 * x + 7, -2 * y + 1]))
    assert g.r2 == pytest.approx(f.r2, rel=1e-12)

def test_fit_shift_moves_intercept_only(rng):
    x = rng.uniform(0, 60, 10)
    y = rng.uniform(0, 1, 10)
    f = linear_fit(np.column_stack([x, y]))
    g = linear_fit(np.column_stack([x, y + 4.0]))
    assert g.slope == pytest.approx(f.slope, rel=1e-9, abs=1e-12)
    assert g.intercept == pytest.approx(f.intercept + 4.0, rel=1e-12)
    assert g.r2 == pytest.approx(f.r2, rel=1e-9, abs=1e-12)

# run_series

def small_series(kind='central-square', **kw):
    return generate_series(default_spec(kind, width=64, height=64, **kw))

def test_identical_images_give_degenerate_fit():
    images = [blank(16, 16, 255)] * 4
    r = run_series(images, [0, 1, 2, 3], som=SMALL)
    assert len(set(r.qes)) == 1
    assert r.fit.degenerate
    assert r.fit.r2 == 0.0

def test_reference_image_scores_lowest():
    s = small_series()
    r = run_series(s.images, s.deltas, som=SMALL, series_id='central-square')
    assert [rec.index for rec in r.records] == list(range(6))
    assert r.deltas == list(s.deltas)
    assert min(r.qes[1:]) >= r.qes[0]
    assert r.mode == TrainingMode.REFERENCE
    assert r.som['dim'] == 3
    assert r.strategy == {'name': 'position'}
    assert np.asarray(r.weights).shape == (2, 2, 3)
    assert r.train_ms is not None and r.total_ms >= r.train_ms

def test_single_image_gives_degenerate_fit():
    s = small_series(deltas=(5,))
    r = run_series(s.images, s.deltas, som=SMALL)
    assert len(r.records) == 1
    assert (r.fit.n, r.fit.degenerate, r.fit.slope) == (1, True, 0.0)
    assert r.fit.intercept == r.qes[0]

def test_run_is_reproducible():
    s = small_series('random-white', seed=2)
    a = run_series(s.images, s.deltas, som=SMALL).without_timings()
    b = run_series(s.images, s.deltas, som=SMALL).without_timings()
    assert a.records == b.records
    assert a.fit == b.fit
    assert a.weights == b.weights

@pytest.mark.parametrize('mode', ['reference', 'per-image'])
def test_run_independent_of_workers(mode):
    s = small_series('checker-size')
    one = run_series(s.images, s.deltas, som=SMALL, mode=mode)
    four = run_series(s.images, s.deltas, som=SMALL, mode=mode, workers=4)
    assert one.qes == four.qes
    assert one.fit == four.fit

def test_per_image_mode():
    s = small_series()
    r = run_series(s.images, s.deltas, som=SMALL, mode='per-image')
    assert r.mode == TrainingMode.PER_IMAGE
    assert r.weights is None and r.train_ms is None
    assert len(r.records) == 6
    assert all(rec.ms is not None for rec in r.records)

def test_som_config_and_strategy():
    s = small_series()
    r = run_series(s.images, s.deltas, som=SomConfig(dim=1, **SMALL), strategy=PixelScalar())
    assert r.som['dim'] == 1
    assert r.strategy == {'name': 'pixel'}
    r = run_series(s.images, s.deltas, som=SMALL, strategy=Patch(2))
    assert r.som['dim'] == 4
    assert r.strategy == {'name': 'patch', 'k': 2}

def test_without_timings():
    s = small_series()
    r = run_series(s.images, s.deltas, som=SMALL).without_timings()
    assert r.total_ms is None and r.train_ms is None
    assert all(rec.ms is None for rec in r.records)

def test_run_errors():
    with pytest.raises(InputError):
        run_series([], [])
    with pytest.raises(InputError):
        run_series([blank(8, 8)], [0, 1])
    with pytest.raises(InputError):
        run_series([blank(8, 8), blank(12, 8)], [0, 1])
    with pytest.raises(ConfigurationError):
        run_series([blank(8, 8)] * 2, [0, 1], som=dict(rows=0))
    with pytest.raises(ConfigurationError):
        run_series([blank(8, 8)] * 2, [0, 1], mode='sideways')

# detect_changes

def result_with(qes):
    records = [ImageRecord(i, float(i), q) for i, q in enumerate(qes)]
    return SeriesResult('s', None, TrainingMode.REFERENCE, {}, {}, records,
                        RegressionFit(0.0, 0.0, 0.0, len(qes)))

def test_detect_changes():
    flags = detect_changes(result_with([0.10, 0.104, 0.2, 0.11]), tolerance=0.05)
    assert [f.index for f in flags] == [2, 3]
    assert flags[0].excess == pytest.approx(1.0)

def test_detect_changes_from_zero():
    flags = detect_changes(result_with([0.0, 0.01, 0.5]), tolerance=0.05)
    assert [f.index for f in flags] == [2]
    assert detect_changes(result_with([0.3, 0.1])) == []

def test_detect_changes_bad_tolerance():
    with pytest.raises(InputError):
        detect_changes(result_with([0.1, 0.2]), tolerance=-1)
