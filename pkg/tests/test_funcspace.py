"""Exact integration, grids, and geometry primitives.

Oracles: scipy adaptive quadrature for segment masses, Fraction arithmetic
for prefix sums, and hand-derived closed forms frozen as literals.
"""

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from weightlab.funcspace import (
    Cube,
    CubeFamily,
    DomainError,
    EXP_ABS,
    GridFunction,
    LEBESGUE,
    Segment,
    SegmentWeight1D,
    SquareMatrix,
    compose_matrix,
    constant_weight,
    power_weight,
    sample_product_to_grid,
    sample_to_grid,
    weight_mass,
)


# ---------------------------------------------------------------------------
# segments and weights
# ---------------------------------------------------------------------------

def test_power_segment_mass_closed_form():
    seg = Segment(0.0, 2.0, "power", a=0.0, gamma=-0.5)
    # integral of x^(-1/2) over (0, 2) = 2 sqrt(2)
    assert seg.mass(0.0, 2.0) == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-14)
    # symmetric piece through the singularity
    seg2 = Segment(-1.0, 1.0, "power", a=0.0, gamma=-0.5)
    assert seg2.mass(-1.0, 1.0) == pytest.approx(4.0, abs=1e-14)


def test_power_segment_mass_vs_quadrature():
    seg = Segment(1.0, 3.0, "power", a=1.5, gamma=-0.25, c=2.0)
    ref, _ = quad(lambda x: 2.0 * abs(x - 1.5) ** -0.25, 1.0, 3.0,
                  points=[1.5], limit=200)
    assert seg.mass(1.0, 3.0) == pytest.approx(ref, rel=1e-9)


def test_exp_segment_mass():
    seg = Segment(-1.0, 2.0, "exp", c=3.0, s=0.5)
    ref = 3.0 / 0.5 * (math.exp(1.0) - math.exp(-0.5))
    assert seg.mass(-1.0, 2.0) == pytest.approx(ref, rel=1e-14)


def test_segment_scaled_matches_substitution():
    seg = Segment(1.0, 4.0, "power", a=2.0, gamma=0.5)
    for lam in (2.0, -0.5):
        sc = seg.scaled(lam)
        for x in np.linspace(min(1 / lam, 4 / lam) + 0.01,
                             max(1 / lam, 4 / lam) - 0.01, 7):
            assert sc.value(x) == pytest.approx(seg.value(lam * x), rel=1e-12)


def test_weight_powered_and_scaled():
    w = power_weight(0.5, -4.0, 4.0)
    w_inv = w.powered(-1.0)
    assert weight_mass(w_inv, 1.0, 2.0) == pytest.approx(
        2.0 * (math.sqrt(2.0) - 1.0), rel=1e-13)
    w2 = w.scaled_argument(2.0)          # |2x|^{1/2}
    assert w2.value(1.0) == pytest.approx(math.sqrt(2.0), rel=1e-14)
    assert weight_mass(w2, 0.0, 1.0) == pytest.approx(
        math.sqrt(2.0) * 2.0 / 3.0, rel=1e-13)


def test_try_powered_reports_witness():
    w = power_weight(1.0, -2.0, 2.0)     # |x|, inverse is non-integrable
    powered, witness = w.try_powered(-1.0)
    assert powered is None and witness is not None
    powered, witness = w.try_powered(-0.5)
    assert witness is None and powered is not None


def test_exp_measure_of_intervals():
    one = constant_weight(1.0, -10.0, 10.0)
    # straddling the origin: e^{|x|} integrates to (e^b - 1) + (e^a... ) parts
    val = weight_mass(one, -1.0, 2.0, EXP_ABS)
    ref = (math.e - 1.0) + (math.exp(2.0) - 1.0)
    assert val == pytest.approx(ref, rel=1e-13)
    val = weight_mass(one, 2.0, 5.0, EXP_ABS)
    assert val == pytest.approx(math.exp(5.0) - math.exp(2.0), rel=1e-13)


def test_exp_weight_in_exp_measure_closed_form():
    w = SegmentWeight1D([Segment(-30.0, 0.0, "exp", s=-1.0),
                         Segment(0.0, 30.0, "exp", s=1.0)])
    # integral of e^{|x|} e^{|x|} over (0, h) = (e^{2h} - 1)/2
    val = weight_mass(w, 0.0, 3.0, EXP_ABS)
    assert val == pytest.approx((math.exp(6.0) - 1.0) / 2.0, rel=1e-13)


def test_weight_json_roundtrip():
    w = power_weight(-0.25, -8.0, 8.0, a=1.0, c=2.0)
    w2 = SegmentWeight1D.from_json_dict(w.to_json_dict())
    assert weight_mass(w2, -3.0, 5.0) == pytest.approx(
        weight_mass(w, -3.0, 5.0), rel=1e-15)


def test_compose_matrix_scalar_and_matrix():
    w = power_weight(0.5, -8.0, 8.0)
    for lam in (2.0, -1.0, 0.5):
        wa = compose_matrix(w, lam)
        for x in (-1.5, 0.3, 2.0):
            assert wa.value(x) == pytest.approx(w.value(lam * x), rel=1e-13)
    wa = compose_matrix(w, SquareMatrix.scalar(2.0))
    assert wa.value(1.0) == pytest.approx(w.value(2.0), rel=1e-13)


# ---------------------------------------------------------------------------
# matrices, cubes, families
# ---------------------------------------------------------------------------

def test_matrix_inverse_and_det():
    A = SquareMatrix([[0.0, -2.0], [0.5, 0.0]])
    assert A.det == pytest.approx(1.0)
    x = (1.0, 2.0)
    y = A.apply(x)
    back = A.inverse().apply(y)
    assert back[0] == pytest.approx(x[0]) and back[1] == pytest.approx(x[1])


def test_matrix_order():
    assert SquareMatrix.scalar(-1.0).order() == 2
    assert SquareMatrix([[0.0, -1.0], [1.0, 0.0]]).order() == 4
    assert SquareMatrix.scalar(2.0).order() is None


def test_cube_dilated_and_bounds():
    q = Cube((1.0, 1.0), 2.0)
    d = q.dilated(3.0)
    assert d.corner == (-1.0, -1.0) and d.side == 6.0
    assert q.volume == 4.0


def test_family_cell_spans_alignment():
    fam = CubeFamily((0.0, 8.0), levels=(0, 3), shifts=2)
    n = 32
    total = 0
    for level, off, side, starts in fam.cell_spans(n):
        assert side in (32, 16, 8, 4)
        for s in starts:
            assert 0 <= s and s + side <= n
        total += len(starts)
    assert total == fam.count()


def test_family_count_and_enumeration_match():
    fam = CubeFamily((-4.0, 4.0), levels=(0, 4), shifts=3)
    assert fam.count() == len(list(fam.cubes()))


def test_family_json_roundtrip():
    fam = CubeFamily((-4.0, 4.0), levels=(1, 3), shifts=2)
    fam2 = CubeFamily.from_json_dict(fam.to_json_dict())
    assert fam2.count() == fam.count()


# ---------------------------------------------------------------------------
# grid functions: exact prefix engine
# ---------------------------------------------------------------------------

def _exact_span_sum(values, span):
    """Oracle: Fraction sum over the span."""
    if len(span) == 1:
        (i0, i1), = span
        cells = values[i0:i1].ravel()
    else:
        (i0, i1), (j0, j1) = span
        cells = values[i0:i1, j0:j1].ravel()
    tot = sum(Fraction(float(v)) for v in cells)
    return float(tot)


def test_cube_sum_exact_100_random_cubes_1d():
    rng = np.random.default_rng(5)
    vals = rng.random(256)
    g = GridFunction((0.0, 1.0), vals)
    for _ in range(100):
        i0, i1 = sorted(rng.integers(0, 257, size=2))
        if i0 == i1:
            i1 += 1
            if i1 > 256:
                i0, i1 = 0, 1
        assert g.cube_sum(((i0, i1),)) == _exact_span_sum(vals, ((i0, i1),))


def test_cube_sum_exact_random_cubes_2d():
    rng = np.random.default_rng(6)
    vals = rng.random((64, 64))
    g = GridFunction(((0.0, 0.0), (1.0, 1.0)), vals)
    for _ in range(100):
        i0, i1 = sorted(rng.integers(0, 65, size=2))
        j0, j1 = sorted(rng.integers(0, 65, size=2))
        i1 += i0 == i1
        j1 += j0 == j1
        if i1 > 64 or j1 > 64:
            continue
        span = ((i0, i1), (j0, j1))
        assert g.cube_sum(span) == _exact_span_sum(vals, span)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 2 ** 40), min_size=4, max_size=64),
       st.data())
def test_cube_sum_exact_property(ints, data):
    vals = np.asarray(ints, float) / 2.0 ** 20
    g = GridFunction((0.0, 1.0), vals)
    n = len(ints)
    i0 = data.draw(st.integers(0, n - 1))
    i1 = data.draw(st.integers(i0 + 1, n))
    assert g.cube_sum(((i0, i1),)) == _exact_span_sum(vals, ((i0, i1),))


def test_grid_rejects_negative_and_rectangular():
    with pytest.raises(ValueError):
        GridFunction((0.0, 1.0), np.array([1.0, -0.5]))
    with pytest.raises(ValueError):
        GridFunction(((0.0, 0.0), (2.0, 1.0)), np.ones((4, 4)))


def test_span_of_cube_alignment_and_clip():
    g = GridFunction((0.0, 2.0), np.ones(16))
    assert g.span_of_cube(Cube((0.5,), 0.5)) == ((4, 8),)
    with pytest.raises(ValueError):
        g.span_of_cube(Cube((0.3,), 0.5))
    with pytest.raises(DomainError):
        g.span_of_cube(Cube((1.5,), 1.0))
    assert g.span_of_cube(Cube((1.5,), 1.0), clip=True) == ((12, 16),)


def test_sample_to_grid_is_exact_cell_average():
    w = power_weight(0.5, -4.0, 4.0)
    g = sample_to_grid(w, (0.0, 2.0), 8)
    h = 0.25
    for i in range(8):
        ref = weight_mass(w, i * h, (i + 1) * h) / h
        assert g.values[i] == pytest.approx(ref, rel=1e-14)


def test_sample_product_grid():
    wx = power_weight(0.5, -4.0, 4.0)
    wy = constant_weight(2.0, -4.0, 4.0)
    g = sample_product_to_grid(wx, wy, ((0.0, 0.0), (2.0, 2.0)), 8)
    assert g.values[3, 5] == pytest.approx(
        (weight_mass(wx, 0.75, 1.0) / 0.25) * 2.0, rel=1e-13)


def test_cell_of_point_and_centers():
    g = GridFunction((0.0, 2.0), np.ones(8))
    assert g.cell_of_point(0.3) == (1,)
    assert g.cell_of_point(2.0) == (7,)      # right edge folds into last cell
    assert g.cell_of_point(2.5) is None
    assert g.cell_centers(0)[0] == pytest.approx(0.125)
