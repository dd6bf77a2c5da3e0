import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hadwiger.geometry import (
    AffineFlat,
    EmptyInputError,
    InvalidDimensionError,
    Subspace,
    hull_contains,
    hull_margin,
    hull_measure,
    hull_measure_batch,
    orthogonal_complement,
    project,
    sample_subspace,
    sample_subspaces,
)


def test_line_in_r1_is_plus_minus_one():
    s = sample_subspace(1, 1, np.random.default_rng(0))
    assert abs(abs(s.basis[0, 0]) - 1) < 1e-15


@pytest.mark.parametrize("n,d", [(3, 2), (2, 1), (3, 1), (4, 3), (3, 3), (5, 0)])
def test_sampled_bases_are_orthonormal(n, d):
    rng = np.random.default_rng(n * 10 + d)
    for _ in range(20):
        s = sample_subspace(n, d, rng)
        assert s.dim == d
        np.testing.assert_allclose(s.basis @ s.basis.T, np.eye(d), atol=1e-12)
    batch = sample_subspaces(n, d, 50, rng)
    gram = np.einsum("bdn,ben->bde", batch, batch)
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(d), gram.shape), atol=1e-12)


def test_line_angles_are_uniform():
    w = sample_subspaces(2, 1, 10_000, np.random.default_rng(1))[:, 0, :]
    angles = np.mod(np.arctan2(w[:, 1], w[:, 0]), np.pi)
    assert stats.kstest(angles, stats.uniform(0, np.pi).cdf).pvalue > 0.01


def test_sampling_is_deterministic_per_stream():
    a = sample_subspaces(3, 2, 100, np.random.default_rng(5))
    b = sample_subspaces(3, 2, 100, np.random.default_rng(5))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("n,d", [(2, 3), (0, 1), (-1, 0)])
def test_invalid_dimensions(n, d):
    with pytest.raises(InvalidDimensionError):
        sample_subspace(n, d, np.random.default_rng(0))


def test_subspace_rejects_non_orthonormal():
    with pytest.raises(ValueError):
        Subspace(2, [[1.0, 0.1]])


def test_affine_flat_offset_must_be_orthogonal():
    line = Subspace(2, [[1.0, 0.0]])
    AffineFlat(line, [0.0, 2.0])
    with pytest.raises(ValueError):
        AffineFlat(line, [1.0, 2.0])


def test_flat_from_normal_coordinates():
    normal = Subspace(3, [[0.0, 0.0, 1.0]])
    flat = AffineFlat.from_normal_coordinates(normal, [2.5])
    assert flat.dim == 2
    np.testing.assert_allclose(flat.offset, [0, 0, 2.5])


def test_orthogonal_complement_spans_the_rest():
    s = sample_subspace(4, 1, np.random.default_rng(3))
    c = orthogonal_complement(s)
    full = np.vstack([s.basis, c.basis])
    np.testing.assert_allclose(full @ full.T, np.eye(4), atol=1e-12)


def test_project_examples():
    assert project([[3.0, 4.0]], Subspace(2, [[1.0, 0.0]]))[0, 0] == 3.0
    s = sample_subspace(3, 2, np.random.default_rng(0))
    np.testing.assert_array_equal(project(np.zeros((1, 3)), s), np.zeros((1, 2)))
    diag = Subspace(2, [[1 / math.sqrt(2), 1 / math.sqrt(2)]])
    assert abs(project([[1.0, 1.0]], diag)[0, 0] - math.sqrt(2)) < 1e-12
    with pytest.raises(InvalidDimensionError):
        project([[1.0, 2.0, 3.0]], diag)


def test_hull_measure_examples():
    assert hull_measure([[0, 0], [1, 0], [1, 1], [0, 1]]) == pytest.approx(1.0, abs=1e-12)
    assert hull_measure([[0, 0], [1, 1], [2, 2]]) == 0.0
    assert hull_measure(np.zeros((3, 0))) == 1.0
    assert hull_measure([[0.5], [-1.0], [2.0]]) == 3.0
    cube = np.array([[i, j, k] for i in (0, 2) for j in (0, 1) for k in (0, 3)], dtype=float)
    assert hull_measure(cube) == pytest.approx(6.0)
    with pytest.raises(EmptyInputError):
        hull_measure([])
    with pytest.raises(InvalidDimensionError):
        hull_measure(np.zeros((5, 4)))


def _shoelace_hull(points):
    from scipy.spatial import ConvexHull

    ring = points[ConvexHull(points).vertices]
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def test_hull_measure_matches_fan_oracle():
    rng = np.random.default_rng(11)
    for _ in range(50):
        pts = rng.normal(size=(10, 2))
        assert abs(hull_measure(pts) - _shoelace_hull(pts)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([3, 4, 6]), st.sampled_from([1, 2, 3]))
def test_hull_measure_invariances(seed, m, d):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(m, d))
    base = hull_measure(pts)
    perm = rng.permutation(m)
    assert abs(hull_measure(pts[perm]) - base) < 1e-9
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    moved = pts @ q.T + rng.normal(size=d)
    assert abs(hull_measure(moved) - base) < 1e-9


def test_batch_matches_scalar_paths():
    rng = np.random.default_rng(2)
    for m, d in [(2, 1), (3, 2), (4, 2), (4, 3), (5, 3), (6, 2), (1, 2)]:
        pts = rng.normal(size=(40, m, d))
        # include a triangle with an interior point
        if (m, d) == (4, 2):
            pts[0] = [[0, 0], [4, 0], [0, 4], [1, 1]]
        got = hull_measure_batch(pts)
        want = np.array([hull_measure(p) for p in pts])
        np.testing.assert_allclose(got, want, atol=1e-9)


def test_hull_contains_examples():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert hull_contains(tri.mean(axis=0), tri)
    assert not hull_contains([2.0, 2.0], tri)
    seg = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert hull_contains([1.0, 1.0], seg)
    assert hull_contains([1.0 + 1e-11, 1.0 + 1e-11], seg)
    assert not hull_contains([0.5, 0.6], seg)
    with pytest.raises(EmptyInputError):
        hull_contains([0.0], [])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_hull_contains_its_own_points(seed):
    pts = np.random.default_rng(seed).normal(size=(5, 3))
    assert all(hull_contains(p, pts) for p in pts)


def test_hull_margin_signs():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert hull_margin([0.25, 0.25], tri) == pytest.approx(0.25)
    assert abs(hull_margin([0.5, 0.0], tri)) < 1e-9
    assert hull_margin([1.0, 1.0], tri) < 0
    seg = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert hull_margin([0.5, 1.0], seg) == -np.inf
