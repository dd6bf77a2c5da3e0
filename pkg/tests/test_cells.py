import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _factories as F
from hadwiger.cells import (
    DegenerateSliceError,
    GridComplex,
    GridRegion,
    SimplicialSet,
    closure,
    euler_characteristic,
    refine_common,
    region_boolean,
    slice_chi,
)
from hadwiger.geometry import AffineFlat, InvalidDimensionError, Subspace


def random_region(rng, n=None):
    n = int(rng.integers(1, 4)) if n is None else n
    gc = F.random_complex(rng, n)
    return GridRegion(gc, rng.random(gc.shape) < 0.4)


def test_grid_complex_validation():
    with pytest.raises(ValueError):
        GridComplex(([0.0],))
    with pytest.raises(ValueError):
        GridComplex(([0.0, 0.0, 1.0],))
    with pytest.raises(ValueError):
        GridComplex(())
    gc = GridComplex(([0, 1, 3], [2, 5]))
    assert gc.n == 2 and gc.shape == (5, 3)
    assert gc.cell_dims()[1, 1] == 2 and gc.cell_dims()[2, 0] == 0


def test_chi_examples():
    gc = GridComplex(([0.0, 1.0],))
    assert euler_characteristic(GridRegion.from_cells(gc, [(0,)])) == 1
    assert euler_characteristic(GridRegion.from_cells(gc, [(1,)])) == -1
    square = GridRegion.closed_box([0, 0], [1, 1])
    assert len(square) == 9
    assert euler_characteristic(square) == 1


def test_invalid_cell_identifier():
    gc = GridComplex(([0.0, 1.0],))
    with pytest.raises(ValueError):
        GridRegion.from_cells(gc, [(3,)])
    with pytest.raises(ValueError):
        GridRegion.from_cells(gc, [(0, 0)])


def test_closure_examples():
    cl = closure(GridRegion.open_box([0, 0], [1, 1]))
    assert len(cl) == 9
    dims = cl.complex.cell_dims()[cl.mask]
    assert sorted(np.bincount(dims)) == [1, 4, 4]
    point = GridRegion.from_cells(GridComplex(([0, 1], [0, 1])), [(2, 0)])
    assert closure(point).same_as(point)


def test_closure_idempotent_and_contractible():
    rng = np.random.default_rng(0)
    for _ in range(100):
        r = random_region(rng)
        c = closure(r)
        assert closure(c).same_as(c)
        assert (c.mask | r.mask == c.mask).all()
    for n in (1, 2, 3):
        cell = GridRegion.open_box(np.zeros(n), np.ones(n))
        assert euler_characteristic(closure(cell)) == 1


def test_refine_identity_and_split():
    gc = GridComplex(([0.0, 1.0, 2.0],))
    ref = refine_common(gc, gc)
    assert ref.complex.same_as(gc)
    assert ref.cells_of(0, (1,)) == {(1,)}
    ref = refine_common(GridComplex(([0.0, 1.0],)), GridComplex(([0.0, 0.5, 1.0],)))
    assert ref.cells_of(0, (1,)) == {(1,), (2,), (3,)}
    assert ref.cells_of(0, (0,)) == {(0,)}
    with pytest.raises(InvalidDimensionError):
        refine_common(GridComplex(([0, 1],)), GridComplex(([0, 1], [0, 1])))


def test_refinement_preserves_chi():
    rng = np.random.default_rng(1)
    for _ in range(100):
        r = random_region(rng)
        other = F.random_complex(rng, r.n)
        ref = refine_common(r.complex, other)
        fine = GridRegion(ref.complex, ref.transfer(r.mask, 0))
        assert euler_characteristic(fine) == euler_characteristic(r)


def test_boolean_laws():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        a, b = random_region(rng, n), random_region(rng, n)
        u = region_boolean(a, b, "union")
        i = region_boolean(a, b, "intersection")
        assert euler_characteristic(u) + euler_characteristic(i) == euler_characteristic(a) + euler_characteristic(b)
        d = region_boolean(a, b, "difference")
        assert euler_characteristic(d) + euler_characteristic(i) == euler_characteristic(a)
    a = random_region(rng, 2)
    assert region_boolean(a, a, "union").same_as(a)
    with pytest.raises(ValueError):
        region_boolean(a, a, "xor")


def test_disjoint_union_is_additive():
    a = GridRegion.closed_box([0, 0], [1, 1])
    b = GridRegion.open_box([2, 0], [3, 1])
    u = region_boolean(a, b, "union")
    assert euler_characteristic(u) == euler_characteristic(a) + euler_characteristic(b) == 2


def test_simplicial_validation():
    with pytest.raises(ValueError):
        SimplicialSet([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], ((0, 1, 2),))
    with pytest.raises(ValueError):
        SimplicialSet([[0.0], [1.0]], ((0, 1), (1, 0)))
    # two overlapping open segments
    with pytest.raises(ValueError):
        SimplicialSet([[0.0], [2.0], [1.0], [3.0]], ((0, 1), (2, 3)))
    # an open segment and a vertex in its interior
    with pytest.raises(ValueError):
        SimplicialSet([[0.0], [2.0], [1.0]], ((0, 1), (2,)))
    sq = F.unit_square()
    assert len(sq.cells) == 11  # 4 vertices, 5 edges, 2 triangles
    assert euler_characteristic(sq) == 1


def test_simplex_chi_signs():
    for k in range(4):
        verts = np.vstack([np.zeros(3), np.eye(3)])[: k + 1]
        assert euler_characteristic(SimplicialSet(verts, (tuple(range(k + 1)),))) == (-1) ** k


def _line(angle, offset):
    normal = Subspace(2, [[-np.sin(angle), np.cos(angle)]])
    return AffineFlat.from_normal_coordinates(normal, [offset])


def test_slice_chi_examples():
    sq = F.unit_square()
    # crosses both triangles, the diagonal and two boundary edges
    assert slice_chi(sq, _line(0.1, 0.5)) == 1
    assert slice_chi(sq, _line(0.3, 5.0)) == 0
    tri = SimplicialSet([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], ((0, 1, 2),))
    assert slice_chi(tri, _line(0.2, 0.2)) == -1


def test_slice_chi_flags_degenerate_flats():
    with pytest.raises(DegenerateSliceError):
        slice_chi(F.unit_square(), _line(0.0, 0.0))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(-0.4, 0.4))
def test_generic_lines_through_closed_convex_set(angle, offset):
    # a closed convex set meets a line in a point, a segment or nothing: chi in {0, 1}
    sq = F.unit_square()
    centre_offset = offset + 0.5 * (np.cos(angle) - np.sin(angle))
    try:
        val = slice_chi(sq, _line(angle, centre_offset))
    except DegenerateSliceError:
        return
    assert val == 1


def test_transformed_set_keeps_chi():
    sq = F.unit_square()
    moved = sq.transformed(np.array([[0.0, -1.0], [1.0, 0.0]]), [2.0, 3.0])
    assert euler_characteristic(moved) == 1
    np.testing.assert_allclose(moved.vertices[1], [2.0, 4.0])
