import math

import numpy as np
import pytest

import _factories as F
from hadwiger.cells import GridComplex, GridRegion, SimplicialSet, region_boolean
from hadwiger.intrinsic import (
    CalibrationError,
    CroftonConstants,
    MCEstimate,
    UnsupportedDimensionError,
    calibrate,
    default_constants,
    exact_volume,
    mu_crofton,
    mu_grid_exact,
    mu_grid_polynomial,
    mu_slice_mc,
)


def test_exact_examples():
    box = GridRegion.closed_box([0, 0], [2.0, 3.5])
    assert [mu_grid_exact(box, k) for k in range(3)] == pytest.approx([1, 5.5, 7.0])
    point = GridRegion.from_cells(GridComplex(([0, 1], [0, 1])), [(0, 2)])
    assert list(mu_grid_polynomial(point)) == [1, 0, 0]
    interval = GridRegion.open_box([0.0], [2.5])
    assert list(mu_grid_polynomial(interval)) == [-1, 2.5]
    cube = GridRegion.closed_box([0, 0, 0], [1, 2, 3])
    assert list(mu_grid_polynomial(cube)) == pytest.approx([1, 6, 11, 6])
    with pytest.raises(ValueError):
        mu_grid_exact(box, 3)


def test_exact_zero_above_max_cell_dim():
    edges = GridRegion.from_cells(GridComplex(([0, 1], [0, 1])), [(1, 0), (0, 1)])
    assert mu_grid_exact(edges, 2) == 0.0


def test_additivity_and_homogeneity():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 4))
        gc = F.random_complex(rng, n)
        a = GridRegion(gc, rng.random(gc.shape) < 0.5)
        gc2 = F.random_complex(rng, n)
        b = GridRegion(gc2, rng.random(gc2.shape) < 0.5)
        lhs = mu_grid_polynomial(region_boolean(a, b, "union")) + mu_grid_polynomial(region_boolean(a, b, "intersection"))
        rhs = mu_grid_polynomial(a) + mu_grid_polynomial(b)
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)
        lam = rng.uniform(0.3, 3.0)
        np.testing.assert_allclose(
            mu_grid_polynomial(a.scaled(lam)), lam ** np.arange(n + 1) * mu_grid_polynomial(a), atol=1e-9
        )
        shift = rng.normal(size=n)
        np.testing.assert_allclose(mu_grid_polynomial(a.translated(shift)), mu_grid_polynomial(a), atol=1e-9)


def test_crofton_trivial_degrees_are_exact():
    sq = F.unit_square()
    e0 = mu_crofton(sq, 0)
    assert (e0.value, e0.stderr) == (1.0, 0.0)
    e2 = mu_crofton(sq, 2)
    assert e2.value == pytest.approx(1.0) and e2.stderr == 0.0
    assert exact_volume(GridRegion.closed_box([0, 0], [2, 3])) == pytest.approx(6.0)


def test_crofton_without_high_cells_is_zero():
    pts = SimplicialSet([[0.0, 0.0], [1.0, 1.0]], ((0,), (1,)))
    est = mu_crofton(pts, 1)
    assert est.value == 0.0 and est.stderr == 0.0


def test_crofton_per_angle_values():
    # per-angle projection sum on the unit square is |cos| + |sin|
    sq = F.unit_square()
    est = mu_crofton(sq, 1, samples=20_000, seed=3)
    assert abs(est.value - 2.0) <= 3 * est.stderr
    assert est.constant == pytest.approx(math.pi / 2)


@pytest.mark.parametrize("a,b", [(0.5, 3.0), (2.0, 2.0), (4.0, 0.25)])
def test_estimators_on_grid_boxes(a, b):
    box = GridRegion.closed_box([0, 0], [a, b])
    for fn in (mu_crofton, mu_slice_mc):
        est = fn(box, 1, samples=5_000, seed=1)
        assert abs(est.value - (a + b)) <= 3.5 * est.stderr


def test_slice_agrees_with_crofton():
    sq = F.unit_square()
    a = mu_crofton(sq, 1, samples=10_000, seed=4)
    b = mu_slice_mc(sq, 1, samples=10_000, seed=5)
    assert abs(a.value - b.value) <= 3 * math.hypot(a.stderr, b.stderr)


def test_slice_translation_invariance():
    sq = F.unit_square()
    moved = sq.transformed(np.eye(2), [10.0, -3.0])
    a = mu_slice_mc(sq, 1, samples=5_000, seed=0)
    b = mu_slice_mc(moved, 1, samples=5_000, seed=1)
    assert abs(a.value - b.value) <= 3 * math.hypot(a.stderr, b.stderr)


def test_three_dimensional_estimates():
    cube = GridRegion.closed_box([0, 0, 0], [1, 2, 3])
    for k, target in ((1, 6.0), (2, 11.0)):
        est = mu_crofton(cube, k, samples=4_000, seed=k)
        assert abs(est.value - target) <= 3.5 * est.stderr


def test_unsupported_and_invalid_requests():
    hyper = GridRegion.closed_box([0] * 5, [1] * 5)
    with pytest.raises(UnsupportedDimensionError):
        mu_crofton(hyper, 4)
    with pytest.raises(ValueError):
        mu_crofton(F.unit_square(), 1, samples=1)


def test_estimate_is_thread_count_independent():
    sq = F.unit_square()
    runs = [mu_crofton(sq, 1, samples=5_000, seed=9, threads=t) for t in (1, 3, 8)]
    assert len({(r.value, r.stderr) for r in runs}) == 1
    runs = [mu_slice_mc(sq, 1, samples=3_000, seed=9, threads=t) for t in (1, 4)]
    assert len({(r.value, r.stderr) for r in runs}) == 1


def test_calibration_matches_closed_form():
    est = calibrate(2, 1, samples=20_000, seed=0)
    assert abs(est.value - math.pi / 2) <= 3 * est.stderr
    est = calibrate(3, 1, samples=20_000, seed=0)
    assert abs(est.value - 2.0) <= 3 * est.stderr
    assert CroftonConstants().get(3, 2) == pytest.approx(2.0)
    assert CroftonConstants().get(4, 0) == CroftonConstants().get(4, 4) == 1.0


def test_calibration_failure_on_tiny_budget():
    with pytest.raises(CalibrationError):
        calibrate(2, 1, samples=4, seed=0)
    with pytest.raises(ValueError):
        calibrate(2, 0)


def test_constants_round_trip_and_env(tmp_path, monkeypatch):
    c = CroftonConstants()
    c.set(2, 1, 1.6, "test")
    with pytest.raises(ValueError):
        c.set(2, 2, 1.0, "test")
    path = tmp_path / "cal.json"
    path.write_text(c.to_json())
    assert CroftonConstants.load(path).get(2, 1) == 1.6
    monkeypatch.setenv("HADWIGER_CALIBRATION", str(path))
    assert default_constants().get(2, 1) == 1.6
    est = mu_crofton(F.unit_square(), 1, samples=2_000, seed=0)
    assert est.constant == 1.6
    monkeypatch.delenv("HADWIGER_CALIBRATION")
    assert default_constants().get(2, 1) == pytest.approx(math.pi / 2)


def test_mc_estimate_validation():
    with pytest.raises(ValueError):
        MCEstimate(1.0, -1.0, 10, 0)
    with pytest.raises(ValueError):
        MCEstimate(1.0, 0.0, 0, 0)
