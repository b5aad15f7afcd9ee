"""Maximal operator fields on grids.

Every operator here returns a new GridFunction on the same grid whose cell
value is the supremum, over a declared set of grid-aligned cubes containing
that cell, of a cube functional of the input:

* ``hl_maximal``           average over the cube
* ``fractional_maximal``   |Q|^(alpha/n) times the average
* ``dyadic_maximal``       average, cubes restricted to the dyadic splits
* ``orlicz_maximal``       normalized Luxemburg norm over the cube

With ``family=None`` the supremum runs over all grid-aligned cubes (every
side length at every position), which dominates any family on the same grid.
Cells without a defined value (mask False) contribute their stored value 0,
so all fields are lower bounds for the operators applied to any nonnegative
extension of the data.

``matrix_compose`` evaluates a field at A^(-1) x, which turns a plain
maximal field into the matrix-composed variant.
"""

from __future__ import annotations

import math

import numpy as np

from .funcspace import CubeFamily, GridFunction, SquareMatrix
from .young import YoungFn, luxemburg_norm_of_values

__all__ = [
    "hl_maximal",
    "fractional_maximal",
    "dyadic_maximal",
    "orlicz_maximal",
    "matrix_compose",
]


# ---------------------------------------------------------------------------
# sliding trailing maximum (exact, O(n) per call)
# ---------------------------------------------------------------------------

def _trailing_max(x: np.ndarray, L: int) -> np.ndarray:
    """out[..., i] = max(x[..., max(0, i-L+1) : i+1]) along the last axis."""
    if L == 1:
        return x.copy()
    n = x.shape[-1]
    nb = -(-n // L) * L
    y = np.full(x.shape[:-1] + (nb,), -np.inf)
    y[..., :n] = x
    blocks = y.reshape(x.shape[:-1] + (-1, L))
    pref = np.maximum.accumulate(blocks, axis=-1).reshape(x.shape[:-1] + (nb,))
    suff = np.maximum.accumulate(blocks[..., ::-1], axis=-1)[..., ::-1]
    suff = suff.reshape(x.shape[:-1] + (nb,))
    out = pref[..., :n].copy()
    idx = np.arange(L - 1, n)
    out[..., L - 1:] = np.maximum(suff[..., idx - L + 1], pref[..., idx])
    return out


def _window_averages_1d(prefix: np.ndarray, L: int) -> np.ndarray:
    # clamp: cancellation in the prefix sums can leave tiny negatives over
    # all-zero stretches, which fractional powers would turn into NaN
    return np.maximum(prefix[L:] - prefix[:-L], 0.0) / L


def _window_averages_2d(prefix: np.ndarray, L: int) -> np.ndarray:
    S = (prefix[L:, L:] - prefix[:-L, L:] - prefix[L:, :-L]
         + prefix[:-L, :-L])
    return np.maximum(S, 0.0) / (L * L)


def _spread_full(contrib: np.ndarray, L: int, n: int) -> np.ndarray:
    """Embed start-indexed window values into length-n cell axis, then take
    the trailing max so each cell sees every window containing it."""
    if contrib.ndim == 1:
        padded = np.full(n, -np.inf)
        padded[: n - L + 1] = contrib
        return _trailing_max(padded, L)
    padded = np.full((n, n), -np.inf)
    m = n - L + 1
    padded[:m, :m] = contrib
    out = _trailing_max(padded, L)
    return _trailing_max(out.T, L).T


# ---------------------------------------------------------------------------
# core sweeps
# ---------------------------------------------------------------------------

def _length_list(n: int, lengths) -> list:
    """Window side lengths in cells: "all", "dyadic" (sides n / 2^j plus
    single cells), or an explicit iterable."""
    if lengths == "all":
        return list(range(1, n + 1))
    if lengths == "dyadic":
        out = []
        side = n
        while side >= 1:
            out.append(side)
            if side % 2 or side == 1:
                break
            side //= 2
        if out[-1] != 1:
            out.append(1)
        return sorted(set(out))
    return sorted({int(L) for L in lengths})


def _sup_field(f: GridFunction, family, alpha: float,
               powered: float | None = None, coeff: float = 1.0,
               lengths="all"):
    """Supremum field of (side^alpha) * (coeff * avg of f^powered)^(1/powered).

    powered=None means a plain average (hl / fractional); a float r gives the
    closed-form Luxemburg norm of the power Young function coeff * t^r.
    With family=None the sweep covers every position of every side length
    selected by ``lengths``.
    """
    n = f.shape[0]
    if f.dim == 2 and f.shape[0] != f.shape[1]:
        raise ValueError("maximal sweeps need a square grid")
    h = f.h[0]
    if powered is None:
        base = f.values
    else:
        base = f.values ** powered
    if f.dim == 1:
        prefix = np.zeros(n + 1)
        np.cumsum(base, out=prefix[1:])
    else:
        prefix = np.zeros((n + 1, n + 1))
        prefix[1:, 1:] = base.cumsum(axis=0).cumsum(axis=1)

    def contrib_of(avgs: np.ndarray, L: int) -> np.ndarray:
        vals = avgs
        if powered is not None:
            vals = (coeff * vals) ** (1.0 / powered)
        if alpha != 0.0:
            vals = vals * (L * h) ** alpha
        return vals

    out = np.full(f.shape, -np.inf)
    if family is None:
        for L in _length_list(n, lengths):
            if f.dim == 1:
                avgs = _window_averages_1d(prefix, L)
            else:
                avgs = _window_averages_2d(prefix, L)
            np.maximum(out, _spread_full(contrib_of(avgs, L), L, n), out=out)
        return GridFunction((f.lo, f.hi), out)

    for level, off, side, starts in _lattices(f, family):
        if f.dim == 1:
            avgs = _window_averages_1d(prefix, side)[starts]
            vals = np.repeat(contrib_of(avgs, side), side)
            lo = starts[0]
            np.maximum(out[lo:lo + vals.size], vals, out=out[lo:lo + vals.size])
        else:
            st = np.asarray(starts)
            avgs = _window_averages_2d(prefix, side)[np.ix_(st, st)]
            vals = contrib_of(avgs, side)
            vals = np.repeat(np.repeat(vals, side, axis=0), side, axis=1)
            lo = starts[0]
            m = vals.shape[0]
            region = out[lo:lo + m, lo:lo + m]
            np.maximum(region, vals, out=region)
    if not np.isfinite(out).all():
        raise ValueError("family does not cover the grid (missing level-0 lattice)")
    return GridFunction((f.lo, f.hi), out)


def _lattices(f: GridFunction, family):
    """(level, offset, side_cells, starts) windows of a family on f's grid."""
    n = f.shape[0]
    if isinstance(family, CubeFamily):
        if abs(family.box_side - (f.hi[0] - f.lo[0])) > 1e-9 * family.box_side \
                or any(abs(a - b) > 1e-9 for a, b in zip(family.lo, f.lo)):
            raise ValueError("family box must match the grid box")
        return family.cell_spans(n)
    raise TypeError("family must be a CubeFamily or None")


def hl_maximal(f: GridFunction, family: CubeFamily | None = None,
               lengths="all") -> GridFunction:
    """Hardy-Littlewood maximal field: sup of cube averages."""
    return _sup_field(f, family, alpha=0.0, lengths=lengths)


def fractional_maximal(f: GridFunction, alpha: float,
                       family: CubeFamily | None = None,
                       lengths="all") -> GridFunction:
    """Fractional maximal field: sup of |Q|^(alpha/n) * avg_Q f.

    alpha ranges over [0, n); alpha = 0 reproduces ``hl_maximal`` bit for
    bit because the sweep is shared and the scale factor is skipped.
    """
    if not 0.0 <= alpha < f.dim:
        raise ValueError("alpha must lie in [0, dim)")
    return _sup_field(f, family, alpha=float(alpha), lengths=lengths)


def dyadic_maximal(f: GridFunction, min_side_cells: int = 1) -> GridFunction:
    """Dyadic maximal field: sup over the dyadic splits of the grid box.

    Levels run from the whole box down to sides of ``min_side_cells`` cells,
    as far as the cell count divides evenly.
    """
    n = f.shape[0]
    lattices = []
    j = 0
    while n % (1 << j) == 0:
        side = n >> j
        if side < min_side_cells:
            break
        lattices.append((j, 0, side, list(range(0, n, side))))
        if side == 1:
            break
        j += 1
    fixed = CubeFamily.__new__(CubeFamily)
    fixed.lo, fixed.hi = f.lo, f.hi
    fixed.dim = f.dim
    fixed.levels = (0, j)
    fixed.shifts = 1
    fixed.cell_spans = lambda m: lattices
    return _sup_field(f, fixed, alpha=0.0)


def orlicz_maximal(f: GridFunction, phi: YoungFn,
                   family: CubeFamily | None = None,
                   alpha: float = 0.0, lengths="all") -> GridFunction:
    """Orlicz maximal field: sup of |Q|^(alpha/n) * ||f||_{phi,Q}.

    Homogeneous phi (identity, powers) rides the shared prefix sweep, so
    phi(t) = t agrees with ``hl_maximal`` exactly.  Other kinds solve a
    Luxemburg bisection per cube and therefore need a finite family.
    """
    if phi.kind == "identity":
        return _sup_field(f, family, alpha=alpha, lengths=lengths)
    if phi.is_homogeneous:
        return _sup_field(f, family, alpha=alpha, powered=phi.r, coeff=phi.c,
                          lengths=lengths)
    if phi.kind == "sup":
        return _sup_max_field(f, family, alpha)
    if family is None:
        raise ValueError(f"{phi.describe()} needs a finite cube family")
    out = np.full(f.shape, -np.inf)
    h = f.h[0]
    for level, off, side, starts in _lattices(f, family):
        scale = (side * h) ** alpha if alpha != 0.0 else 1.0
        for s in starts:
            if f.dim == 1:
                vals = f.values[s:s + side]
                norm = luxemburg_norm_of_values(vals, phi) * scale
                np.maximum(out[s:s + side], norm, out=out[s:s + side])
            else:
                for s2 in starts:
                    vals = f.values[s:s + side, s2:s2 + side]
                    norm = luxemburg_norm_of_values(vals.ravel(), phi) * scale
                    region = out[s:s + side, s2:s2 + side]
                    np.maximum(region, norm, out=region)
    if not np.isfinite(out).all():
        raise ValueError("family does not cover the grid")
    return GridFunction((f.lo, f.hi), out)


def _sup_max_field(f: GridFunction, family, alpha: float) -> GridFunction:
    """Field of windowed maxima (the sup-norm Young function)."""
    n = f.shape[0]
    h = f.h[0]
    out = np.full(f.shape, -np.inf)
    if family is None:
        for L in range(1, n + 1):
            scale = (L * h) ** alpha if alpha != 0.0 else 1.0
            if f.dim == 1:
                win = _trailing_max(f.values, L)[L - 1:]
            else:
                win = _trailing_max(_trailing_max(f.values, L).T, L).T[L - 1:, L - 1:]
            np.maximum(out, _spread_full(win * scale, L, n), out=out)
        return GridFunction((f.lo, f.hi), out)
    for level, off, side, starts in _lattices(f, family):
        scale = (side * h) ** alpha if alpha != 0.0 else 1.0
        for s in starts:
            if f.dim == 1:
                m = float(f.values[s:s + side].max()) * scale
                np.maximum(out[s:s + side], m, out=out[s:s + side])
            else:
                for s2 in starts:
                    m = float(f.values[s:s + side, s2:s2 + side].max()) * scale
                    region = out[s:s + side, s2:s2 + side]
                    np.maximum(region, m, out=region)
    return GridFunction((f.lo, f.hi), out)


# ---------------------------------------------------------------------------
# matrix composition of fields
# ---------------------------------------------------------------------------

def matrix_compose(f: GridFunction, A, out_box=None, n_out=None,
                   reduce: str = "nearest") -> GridFunction:
    """Field x -> f(A^(-1) x) on a new grid.

    reduce="nearest" reads the input cell containing A^(-1)(cell center).
    reduce="min" takes the minimum of f over an index box covering the full
    preimage of the output cell, which never overestimates and is exact when
    A maps the output grid onto unions of input cells (dyadic scalings).
    Output cells whose preimage leaves the input domain get value 0 and
    mask False.
    """
    A = _resolve_matrix(A, f.dim)
    if reduce not in ("nearest", "min"):
        raise ValueError("reduce must be 'nearest' or 'min'")
    lo_out, hi_out, shape_out = _output_geometry(f, A, out_box, n_out)
    if f.dim == 1:
        return _compose_1d(f, A, lo_out, hi_out, shape_out, reduce)
    return _compose_2d(f, A, lo_out, hi_out, shape_out, reduce)


def _resolve_matrix(A, dim: int) -> SquareMatrix:
    if isinstance(A, SquareMatrix):
        if len(A.entries) != dim:
            raise ValueError("matrix dimension does not match the field")
        return A
    if np.isscalar(A):
        return SquareMatrix.scalar(float(A), dim)
    return SquareMatrix(A)


def _output_geometry(f: GridFunction, A: SquareMatrix, out_box, n_out):
    if out_box is None:
        corners = []
        for corner in _box_corners(f.lo, f.hi):
            corners.append(A.apply(corner))
        pts = np.asarray(corners)
        lo = tuple(float(v) for v in pts.min(axis=0))
        hi = tuple(float(v) for v in pts.max(axis=0))
    else:
        from .funcspace import _normalize_box
        lo, hi = _normalize_box(out_box)
    if n_out is None:
        h = f.h[0]
        shape = tuple(int(round((b - a) / h)) for a, b in zip(lo, hi))
        for (a, b), m in zip(zip(lo, hi), shape):
            if m < 1 or abs((b - a) / m - h) > 1e-9 * h:
                raise ValueError("output box does not align with the input cell size; pass n_out")
    elif np.isscalar(n_out):
        shape = (int(n_out),) * f.dim
    else:
        shape = tuple(int(m) for m in n_out)
    return lo, hi, shape


def _box_corners(lo, hi):
    if len(lo) == 1:
        return [(lo[0],), (hi[0],)]
    return [(lo[0], lo[1]), (lo[0], hi[1]), (hi[0], lo[1]), (hi[0], hi[1])]


def _compose_1d(f, A, lo, hi, shape, reduce):
    n_out = shape[0]
    h_out = (hi[0] - lo[0]) / n_out
    n_in = f.shape[0]
    if reduce == "nearest":
        centers = lo[0] + (np.arange(n_out) + 0.5) * h_out
        y = np.array([A.apply_inv((c,))[0] for c in centers[:2]])
        # affine in 1D: recover the scale once instead of looping
        lam_inv = (y[1] - y[0]) / (centers[1] - centers[0]) if n_out > 1 else None
        if lam_inv is None:
            ys = np.array([A.apply_inv((c,))[0] for c in centers])
        else:
            ys = y[0] + (centers - centers[0]) * lam_inv
        t = np.floor((ys - f.lo[0]) / f.h[0]).astype(int)
        valid = (t >= 0) & (t < n_in)
        vals = np.zeros(n_out)
        msk = np.zeros(n_out, dtype=bool)
        vals[valid] = f.values[t[valid]]
        msk[valid] = f.mask[t[valid]]
        vals[~msk] = 0.0
        return GridFunction((lo, hi), vals, mask=msk)
    vals = np.zeros(n_out)
    msk = np.zeros(n_out, dtype=bool)
    for i in range(n_out):
        a = lo[0] + i * h_out
        b = a + h_out
        ya = A.apply_inv((a,))[0]
        yb = A.apply_inv((b,))[0]
        ya, yb = min(ya, yb), max(ya, yb)
        i0 = math.floor((ya - f.lo[0]) / f.h[0] + 1e-9)
        i1 = math.ceil((yb - f.lo[0]) / f.h[0] - 1e-9)
        if i0 < 0 or i1 > n_in or i1 <= i0:
            continue
        if not f.mask[i0:i1].all():
            continue
        vals[i] = float(f.values[i0:i1].min())
        msk[i] = True
    return GridFunction((lo, hi), vals, mask=msk)


def _compose_2d(f, A, lo, hi, shape, reduce):
    n0, n1 = shape
    h0 = (hi[0] - lo[0]) / n0
    h1 = (hi[1] - lo[1]) / n1
    inv = np.asarray(A.inverse().entries)
    vals = np.zeros(shape)
    msk = np.zeros(shape, dtype=bool)
    if reduce == "nearest":
        cx = lo[0] + (np.arange(n0) + 0.5) * h0
        cy = lo[1] + (np.arange(n1) + 0.5) * h1
        X, Y = np.meshgrid(cx, cy, indexing="ij")
        U = inv[0, 0] * X + inv[0, 1] * Y
        V = inv[1, 0] * X + inv[1, 1] * Y
        iu = np.floor((U - f.lo[0]) / f.h[0]).astype(int)
        iv = np.floor((V - f.lo[1]) / f.h[1]).astype(int)
        ok = (iu >= 0) & (iu < f.shape[0]) & (iv >= 0) & (iv < f.shape[1])
        vals[ok] = f.values[iu[ok], iv[ok]]
        msk[ok] = f.mask[iu[ok], iv[ok]]
        vals[~msk] = 0.0
        return GridFunction((lo, hi), vals, mask=msk)
    for i in range(n0):
        a0, b0 = lo[0] + i * h0, lo[0] + (i + 1) * h0
        for j in range(n1):
            a1, b1 = lo[1] + j * h1, lo[1] + (j + 1) * h1
            pts = np.array([[a0, a1], [a0, b1], [b0, a1], [b0, b1]]) @ inv.T
            u0, v0 = pts.min(axis=0)
            u1, v1 = pts.max(axis=0)
            i0 = math.floor((u0 - f.lo[0]) / f.h[0] + 1e-9)
            i1 = math.ceil((u1 - f.lo[0]) / f.h[0] - 1e-9)
            j0 = math.floor((v0 - f.lo[1]) / f.h[1] + 1e-9)
            j1 = math.ceil((v1 - f.lo[1]) / f.h[1] - 1e-9)
            if i0 < 0 or j0 < 0 or i1 > f.shape[0] or j1 > f.shape[1] \
                    or i1 <= i0 or j1 <= j0:
                continue
            if not f.mask[i0:i1, j0:j1].all():
                continue
            vals[i, j] = float(f.values[i0:i1, j0:j1].min())
            msk[i, j] = True
    return GridFunction((lo, hi), vals, mask=msk)
