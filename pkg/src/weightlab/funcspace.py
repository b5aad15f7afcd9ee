"""Exact weight representations, grids, cubes and matrices.

The ground rule of this module: nothing that can blow up is ever point
sampled.  Weights are unions of closed-form pieces (power singularities
``c |x-a|^gamma`` and exponentials ``c e^{s x}``) and every interval mass is
an antiderivative difference, so masses next to a singular point are exact to
rounding.  Grid data stores per-cell averages together with an integer-exact
prefix sum: cube sums are correctly rounded true sums and therefore agree
bitwise with compensated direct summation (``math.fsum``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import accumulate

import numpy as np
from scipy import integrate


class DomainError(ValueError):
    """Raised when a request leaves the explicitly covered domain."""


# ---------------------------------------------------------------------------
# segments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """One closed-form piece of a weight on the interval [lo, hi).

    form="power": c * |x - a|**gamma with gamma > -1 (integrable singularity).
    form="exp":   c * exp(s * x).
    """

    lo: float
    hi: float
    form: str
    c: float = 1.0
    a: float = 0.0
    gamma: float = 0.0
    s: float = 0.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty segment [{self.lo}, {self.hi})")
        if self.form == "power":
            if self.gamma <= -1.0:
                raise ValueError(f"gamma={self.gamma} is not integrable")
        elif self.form != "exp":
            raise ValueError(f"unknown segment form {self.form!r}")
        if not self.c > 0:
            raise ValueError("segment coefficient must be positive")

    # F with F(a) = 0 for the power form; continuous across the singularity.
    def _antideriv(self, x):
        if self.form == "power":
            u = np.asarray(x, dtype=float) - self.a
            return self.c * np.sign(u) * np.abs(u) ** (self.gamma + 1.0) / (self.gamma + 1.0)
        if self.s == 0.0:
            return self.c * np.asarray(x, dtype=float)
        return (self.c / self.s) * np.exp(self.s * np.asarray(x, dtype=float))

    def mass(self, a: float, b: float) -> float:
        """Exact Lebesgue integral of the piece over [a, b] ∩ [lo, hi)."""
        a = max(a, self.lo)
        b = min(b, self.hi)
        if b <= a:
            return 0.0
        return float(self._antideriv(b) - self._antideriv(a))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.form == "power":
            with np.errstate(divide="ignore"):
                return self.c * np.abs(x - self.a) ** self.gamma
        return self.c * np.exp(self.s * x)

    def scaled(self, lam: float) -> "Segment":
        """The piece of x -> value(lam * x), living on [lo, hi) / lam."""
        lo, hi = self.lo / lam, self.hi / lam
        if lam < 0:
            lo, hi = hi, lo
        if self.form == "power":
            return Segment(lo, hi, "power", c=self.c * abs(lam) ** self.gamma,
                           a=self.a / lam, gamma=self.gamma)
        return Segment(lo, hi, "exp", c=self.c, s=self.s * lam)

    def powered(self, e: float) -> "Segment":
        """The piece of value(x)**e; raises if the power lands non-integrable."""
        if self.form == "power":
            return Segment(self.lo, self.hi, "power", c=self.c ** e,
                           a=self.a, gamma=self.gamma * e)
        return Segment(self.lo, self.hi, "exp", c=self.c ** e, s=self.s * e)


def segment_mass(seg: Segment, a: float, b: float) -> float:
    return seg.mass(a, b)


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

class Measure:
    """Lebesgue measure or the density e^{|x|} dx (the only two supported)."""

    def __init__(self, kind: str = "lebesgue"):
        if kind not in ("lebesgue", "exp_abs"):
            raise ValueError(f"unsupported measure {kind!r}")
        self.kind = kind

    def __repr__(self):
        return f"Measure({self.kind!r})"

    def __eq__(self, other):
        return isinstance(other, Measure) and self.kind == other.kind

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "lebesgue":
            return np.ones_like(x)
        return np.exp(np.abs(x))

    def segment_mass(self, seg: Segment, a: float, b: float) -> float:
        """Integral of seg.value against this measure over [a,b] ∩ segment."""
        a = max(a, seg.lo)
        b = min(b, seg.hi)
        if b <= a:
            return 0.0
        if self.kind == "lebesgue":
            return float(seg._antideriv(b) - seg._antideriv(a))
        if seg.form == "exp":
            # e^{|x|} merges with the exponential: split at the origin.
            total = 0.0
            if min(b, 0.0) > a:
                neg = Segment(a, min(b, 0.0), "exp", c=seg.c, s=seg.s - 1.0)
                total += neg.mass(a, min(b, 0.0))
            if b > max(a, 0.0):
                pos = Segment(max(a, 0.0), b, "exp", c=seg.c, s=seg.s + 1.0)
                total += pos.mass(max(a, 0.0), b)
            return total
        # power piece against e^{|x|}: no elementary antiderivative, use
        # singularity-aware adaptive quadrature (only exercised in cross checks).
        pts = [p for p in (seg.a, 0.0) if a < p < b]
        val, _ = integrate.quad(lambda x: seg.value(x) * math.exp(abs(x)), a, b,
                                points=pts or None, limit=400, epsabs=1e-13, epsrel=1e-11)
        return float(val)


LEBESGUE = Measure("lebesgue")
EXP_ABS = Measure("exp_abs")


# ---------------------------------------------------------------------------
# 1D weights
# ---------------------------------------------------------------------------

class SegmentWeight1D:
    """A nonnegative weight given by disjoint closed-form segments, zero tail.

    Segments are kept sorted; overlaps are rejected.  All masses are exact
    antiderivative differences (relative error at rounding level), including
    across interior singular points.
    """

    def __init__(self, segments):
        segs = sorted(segments, key=lambda s: s.lo)
        for s0, s1 in zip(segs, segs[1:]):
            if s1.lo < s0.hi - 1e-15 * max(1.0, abs(s0.hi)):
                raise ValueError(f"segments overlap near x={s1.lo}")
        if not segs:
            raise ValueError("weight needs at least one segment")
        self.segments = tuple(segs)

    @property
    def support(self):
        return (self.segments[0].lo, self.segments[-1].hi)

    def covers(self, a: float, b: float) -> bool:
        """True if [a,b] is covered by segments with no gaps."""
        lo, hi = self.support
        if a < lo - 1e-12 or b > hi + 1e-12:
            return False
        cursor = a
        for seg in self.segments:
            if seg.hi <= cursor:
                continue
            if seg.lo > cursor + 1e-12 * max(1.0, abs(cursor)):
                return False
            cursor = seg.hi
            if cursor >= b:
                return True
        return cursor >= b

    def mass(self, a: float, b: float, measure: Measure = LEBESGUE) -> float:
        if b < a:
            raise ValueError("reversed interval")
        return float(sum(measure.segment_mass(seg, a, b) for seg in self.segments))

    def value(self, x):
        """Pointwise values (for quadrature oracles); inf at singular points."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for seg in self.segments:
            m = (x >= seg.lo) & (x < seg.hi)
            if m.any():
                out[m] = seg.value(x[m])
        return out if out.shape else float(out)

    def powered(self, e: float) -> "SegmentWeight1D":
        w, witness = self.try_powered(e)
        if w is None:
            raise DomainError(
                f"w**{e} is not integrable on segment [{witness.lo}, {witness.hi}) "
                f"(gamma*e = {witness.gamma * e})")
        return w

    def try_powered(self, e: float):
        """(weight, None) when w**e has integrable pieces, else (None, witness)."""
        out = []
        for seg in self.segments:
            if seg.form == "power" and seg.gamma * e <= -1.0:
                return None, seg
            out.append(seg.powered(e))
        return SegmentWeight1D(out), None

    def scaled_argument(self, lam: float) -> "SegmentWeight1D":
        if lam == 0:
            raise ValueError("lam must be nonzero")
        return SegmentWeight1D([seg.scaled(lam) for seg in self.segments])

    def cell_averages(self, lo: float, hi: float, n: int) -> np.ndarray:
        """Exact per-cell averages over n equal cells of [lo, hi]."""
        edges = np.linspace(lo, hi, n + 1)
        masses = np.zeros(n)
        for seg in self.segments:
            clipped = np.clip(edges, seg.lo, seg.hi)
            F = seg._antideriv(clipped)
            masses += np.diff(F)
        return masses / ((hi - lo) / n)

    def to_json_dict(self) -> dict:
        segs = []
        for s in self.segments:
            d = {"lo": s.lo, "hi": s.hi, "form": s.form, "c": s.c}
            if s.form == "power":
                d["a"] = s.a
                d["gamma"] = s.gamma
            else:
                d["s"] = s.s
            segs.append(d)
        return {"dim": 1, "segments": segs, "tail": "zero"}

    @classmethod
    def from_json_dict(cls, d: dict) -> "SegmentWeight1D":
        if d.get("dim", 1) != 1:
            raise ValueError("only dim=1 weights are supported")
        if d.get("tail", "zero") != "zero":
            raise ValueError("only tail='zero' is supported")
        segs = []
        for sd in d["segments"]:
            segs.append(Segment(sd["lo"], sd["hi"], sd["form"], c=sd.get("c", 1.0),
                                a=sd.get("a", 0.0), gamma=sd.get("gamma", 0.0),
                                s=sd.get("s", 0.0)))
        return cls(segs)


def weight_mass(w: SegmentWeight1D, a: float, b: float,
                measure: Measure = LEBESGUE) -> float:
    """Exact integral of w over [a, b] against the given measure."""
    return w.mass(a, b, measure)


def compose_matrix(w: SegmentWeight1D, A) -> SegmentWeight1D:
    """The weight x -> w(lambda x) for a 1x1 matrix A = (lambda), in closed form."""
    lam = _as_scalar(A)
    return w.scaled_argument(lam)


def constant_weight(value: float, lo: float, hi: float) -> SegmentWeight1D:
    return SegmentWeight1D([Segment(lo, hi, "power", c=value, a=lo - 1.0, gamma=0.0)])


def power_weight(gamma: float, lo: float, hi: float, a: float = 0.0,
                 c: float = 1.0) -> SegmentWeight1D:
    """c |x - a|^gamma on [lo, hi)."""
    return SegmentWeight1D([Segment(lo, hi, "power", c=c, a=a, gamma=gamma)])


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

def _as_scalar(A) -> float:
    if isinstance(A, SquareMatrix):
        if A.dim != 1:
            raise ValueError("analytic composition supports dim 1 only")
        return float(A.entries[0, 0])
    if np.isscalar(A):
        return float(A)
    arr = np.asarray(A, dtype=float)
    if arr.size == 1:
        return float(arr.reshape(()))
    raise ValueError("expected a scalar or 1x1 matrix")


class SquareMatrix:
    """Invertible real matrix with cached inverse and finite-order detection."""

    def __init__(self, entries):
        arr = np.atleast_2d(np.asarray(entries, dtype=float))
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("matrix must be square")
        self.entries = arr
        self.dim = arr.shape[0]
        self.det = float(np.linalg.det(arr))
        if abs(self.det) < 1e-14:
            raise ValueError("matrix is singular")
        self.inv = np.linalg.inv(arr)

    @classmethod
    def scalar(cls, lam: float, dim: int = 1) -> "SquareMatrix":
        return cls(np.eye(dim) * lam)

    def __repr__(self):
        return f"SquareMatrix({self.entries.tolist()})"

    def apply(self, x):
        return self.entries @ np.asarray(x, dtype=float)

    def apply_inv(self, x):
        return self.inv @ np.asarray(x, dtype=float)

    def inverse(self) -> "SquareMatrix":
        return SquareMatrix(self.inv)

    def order(self, bound: int = 24, tol: float = 1e-10):
        """Smallest k <= bound with A^k = I (within tol), else None."""
        P = np.eye(self.dim)
        for k in range(1, bound + 1):
            P = P @ self.entries
            if np.max(np.abs(P - np.eye(self.dim))) <= tol:
                return k
        return None

    def to_json_dict(self) -> dict:
        return {"dim": self.dim, "entries": [float(v) for v in self.entries.ravel()]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "SquareMatrix":
        n = int(d["dim"])
        return cls(np.asarray(d["entries"], dtype=float).reshape(n, n))


# ---------------------------------------------------------------------------
# cubes and cube families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cube:
    """Axis-parallel cube: corner (lower-left) plus side length."""

    corner: tuple
    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError("cube side must be positive")
        object.__setattr__(self, "corner", tuple(float(c) for c in self.corner))

    @property
    def dim(self):
        return len(self.corner)

    @property
    def volume(self):
        return self.side ** self.dim

    def bounds(self):
        return [(c, c + self.side) for c in self.corner]

    def contains_point(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return all(c <= xi <= c + self.side for c, xi in zip(self.corner, x))

    def dilated(self, factor: float) -> "Cube":
        """Concentric dilation (factor=3 gives the tripled cube)."""
        new_side = self.side * factor
        shift = (new_side - self.side) / 2.0
        return Cube(tuple(c - shift for c in self.corner), new_side)


class CubeFamily:
    """Deterministic finite family: dyadic levels of a box plus shifted lattices.

    Level j slices the box into 2^j pieces per axis; each level carries
    `shifts` translated lattices (offsets r/shifts of the side, r = 0..shifts-1,
    truncated so every cube stays inside the box).  Suprema over the family are
    lower bounds for the corresponding suprema over all cubes.
    """

    def __init__(self, box, levels=(0, 4), shifts: int = 1):
        lo, hi = _normalize_box(box)
        if any(h <= l for l, h in zip(lo, hi)):
            raise ValueError("degenerate box")
        sides = [h - l for l, h in zip(lo, hi)]
        if max(sides) - min(sides) > 1e-12 * max(sides):
            raise ValueError("box must be a cube (equal side lengths)")
        j0, j1 = int(levels[0]), int(levels[1])
        if j0 < 0 or j1 < j0:
            raise ValueError("levels must satisfy 0 <= j_min <= j_max")
        if shifts < 1:
            raise ValueError("shifts must be >= 1")
        self.lo, self.hi = lo, hi
        self.dim = len(lo)
        self.levels = (j0, j1)
        self.shifts = int(shifts)

    @property
    def box_side(self):
        return self.hi[0] - self.lo[0]

    def cubes(self):
        """Deterministic enumeration (level, then offset, then lattice position)."""
        L = self.box_side
        out = []
        for j in range(self.levels[0], self.levels[1] + 1):
            side = L / (1 << j)
            offsets = sorted({r * side / self.shifts for r in range(self.shifts)})
            for off in offsets:
                per_axis = []
                for d in range(self.dim):
                    starts = []
                    s = self.lo[d] + off
                    while s + side <= self.hi[d] + 1e-9 * L:
                        starts.append(s)
                        s += side
                    per_axis.append(starts)
                for corner in _product_corners(per_axis):
                    out.append(Cube(corner, side))
        return out

    def cell_spans(self, n_cells: int):
        """Grid-aligned spans for an n_cells-per-side grid on the same box.

        Yields (level, start_indices, side_in_cells); offsets snap to whole
        cells (floor) so every cube is a union of cells inside the box.
        """
        n = int(n_cells)
        spans = []
        for j in range(self.levels[0], self.levels[1] + 1):
            if n % (1 << j) != 0:
                raise ValueError(f"grid with {n} cells does not align with level {j}")
            side = n // (1 << j)
            offsets = sorted({(r * side) // self.shifts for r in range(self.shifts)})
            offsets = [o for o in offsets if o < side]
            for off in offsets:
                starts = list(range(off, n - side + 1, side))
                if starts:        # a shifted lattice can miss the box entirely
                    spans.append((j, off, side, starts))
        return spans

    def count(self) -> int:
        return len(self.cubes())

    def to_json_dict(self) -> dict:
        box = []
        for l in self.lo:
            box.append(float(l))
        for h in self.hi:
            box.append(float(h))
        return {"levels": [self.levels[0], self.levels[1]], "shifts": self.shifts,
                "box": box}

    @classmethod
    def from_json_dict(cls, d: dict) -> "CubeFamily":
        box = d["box"]
        k = len(box) // 2
        lo, hi = box[:k], box[k:]
        return cls((tuple(lo), tuple(hi)), levels=tuple(d["levels"]),
                   shifts=int(d.get("shifts", 1)))


def _normalize_box(box):
    """Accept (lo, hi) scalars for 1D or ((lo...), (hi...)) for nD."""
    a, b = box
    if np.isscalar(a):
        return (float(a),), (float(b),)
    return tuple(float(x) for x in a), tuple(float(x) for x in b)


def _product_corners(per_axis):
    if len(per_axis) == 1:
        return [(s,) for s in per_axis[0]]
    out = []
    for x in per_axis[0]:
        for rest in _product_corners(per_axis[1:]):
            out.append((x,) + rest)
    return out


# ---------------------------------------------------------------------------
# grid functions with exact cube sums
# ---------------------------------------------------------------------------

def _exact_prefix_1d(values: np.ndarray):
    """Integer prefix over a common power-of-two denominator (lossless)."""
    nums, dens = [], []
    for v in values.tolist():
        if not math.isfinite(v):
            raise ValueError("grid values must be finite")
        n, d = float(v).as_integer_ratio()
        nums.append(n)
        dens.append(d)
    D = max(dens) if dens else 1
    ints = [n * (D // d) for n, d in zip(nums, dens)]
    prefix = [0]
    prefix.extend(accumulate(ints))
    return prefix, D


class GridFunction:
    """Nonnegative function stored as exact per-cell averages on a box grid.

    Supports dim 1 and 2.  `cube_sum` over any grid-aligned span is the
    correctly rounded true sum of the covered cell masses (integer prefix).
    `mask` marks cells carrying a defined value; matrix pullbacks may leave
    out-of-domain cells, which are excluded from norms and level sets.
    """

    def __init__(self, box, values, mask=None):
        self.lo, self.hi = _normalize_box(box)
        self.dim = len(self.lo)
        vals = np.asarray(values, dtype=float)
        if vals.ndim != self.dim:
            raise ValueError("value array rank must match box dimension")
        if np.any(vals < 0):
            raise ValueError("grid values must be nonnegative")
        self.values = vals
        self.shape = vals.shape
        self.h = tuple((h - l) / n for l, h, n in zip(self.lo, self.hi, self.shape))
        if self.dim == 2 and abs(self.h[0] - self.h[1]) > 1e-12 * abs(self.h[0]):
            raise ValueError("cells must be square")
        self.cell_volume = float(np.prod(self.h))
        if mask is None:
            self.mask = np.ones(self.shape, dtype=bool)
        else:
            self.mask = np.asarray(mask, dtype=bool)
            if self.mask.shape != self.shape:
                raise ValueError("mask shape mismatch")
        self._int_prefix = None
        self._den = None
        self._float_prefix = None

    # -- exact engine -------------------------------------------------------

    def _ensure_exact_prefix(self):
        if self._int_prefix is not None:
            return
        if self.dim == 1:
            self._int_prefix, self._den = _exact_prefix_1d(self.values)
        else:
            flat, D = _exact_prefix_1d(self.values.ravel())
            # rebuild 2D integer prefix P[i][j] = sum over cells [<i, <j]
            n0, n1 = self.shape
            ints = [flat[k + 1] - flat[k] for k in range(n0 * n1)]
            P = [[0] * (n1 + 1) for _ in range(n0 + 1)]
            for i in range(n0):
                row = 0
                base = i * n1
                for j in range(n1):
                    row += ints[base + j]
                    P[i + 1][j + 1] = P[i][j + 1] + row
            self._int_prefix, self._den = P, D

    def cube_sum(self, span) -> float:
        """Exact sum of cell values over the span (start, stop) per axis."""
        self._ensure_exact_prefix()
        if self.dim == 1:
            (i0, i1), = _normalize_span(span, self.dim)
            diff = self._int_prefix[i1] - self._int_prefix[i0]
        else:
            (i0, i1), (j0, j1) = _normalize_span(span, self.dim)
            P = self._int_prefix
            diff = P[i1][j1] - P[i0][j1] - P[i1][j0] + P[i0][j0]
        return diff / self._den

    def cube_average(self, span) -> float:
        count = 1
        for (a, b) in _normalize_span(span, self.dim):
            count *= (b - a)
        if count <= 0:
            raise ValueError("empty span")
        return self.cube_sum(span) / count

    def cube_mass(self, span) -> float:
        """Integral over the spanned region (sum of cell masses)."""
        return self.cube_sum(span) * self.cell_volume

    # -- float engine (field sweeps) ----------------------------------------

    def float_prefix(self):
        if self._float_prefix is None:
            if self.dim == 1:
                p = np.zeros(self.shape[0] + 1)
                np.cumsum(self.values, out=p[1:])
            else:
                p = np.zeros((self.shape[0] + 1, self.shape[1] + 1))
                p[1:, 1:] = self.values.cumsum(axis=0).cumsum(axis=1)
            self._float_prefix = p
        return self._float_prefix

    # -- geometry helpers ----------------------------------------------------

    def cell_centers(self, axis: int = 0) -> np.ndarray:
        n = self.shape[axis]
        return self.lo[axis] + (np.arange(n) + 0.5) * self.h[axis]

    def cell_of_point(self, x):
        """Cell index containing x (clipped half-open cells), or None outside."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = []
        for d in range(self.dim):
            t = (x[d] - self.lo[d]) / self.h[d]
            i = int(math.floor(t))
            if i == self.shape[d] and abs(x[d] - self.hi[d]) <= 1e-12 * max(1.0, abs(self.hi[d])):
                i -= 1
            if i < 0 or i >= self.shape[d]:
                return None
            idx.append(i)
        return tuple(idx)

    def span_of_cube(self, cube: Cube, clip: bool = False):
        """Grid span covered by the cube; must be grid aligned to rounding."""
        spans = []
        for d, (a, b) in enumerate(cube.bounds()):
            t0 = (a - self.lo[d]) / self.h[d]
            t1 = (b - self.lo[d]) / self.h[d]
            i0, i1 = round(t0), round(t1)
            if abs(t0 - i0) > 1e-9 or abs(t1 - i1) > 1e-9:
                raise ValueError(f"cube {cube} is not grid aligned")
            if clip:
                i0, i1 = max(i0, 0), min(i1, self.shape[d])
            if i0 < 0 or i1 > self.shape[d] or i1 <= i0:
                raise DomainError(f"cube {cube} leaves the grid box")
            spans.append((int(i0), int(i1)))
        return tuple(spans)

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction((self.lo, self.hi), self.values * c, mask=self.mask)


def _normalize_span(span, dim):
    if dim == 1:
        if isinstance(span[0], (tuple, list)):
            return (tuple(span[0]),)
        return ((int(span[0]), int(span[1])),)
    return tuple((int(a), int(b)) for a, b in span)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def sample_to_grid(w: SegmentWeight1D, box, n: int) -> GridFunction:
    """Exact cell-average sampling of a 1D analytic weight."""
    lo, hi = _normalize_box(box)
    if len(lo) != 1:
        raise ValueError("sample_to_grid is 1D; use sample_product_to_grid for 2D")
    vals = w.cell_averages(lo[0], hi[0], int(n))
    return GridFunction(box, vals)


def sample_product_to_grid(wx: SegmentWeight1D, wy: SegmentWeight1D, box,
                           n: int) -> GridFunction:
    """Exact cell averages of the separable density wx(x) * wy(y) on a 2D box."""
    lo, hi = _normalize_box(box)
    if len(lo) != 2:
        raise ValueError("expected a 2D box")
    ax = wx.cell_averages(lo[0], hi[0], int(n))
    ay = wy.cell_averages(lo[1], hi[1], int(n))
    return GridFunction(box, np.outer(ax, ay))


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(6)


def sample_callable_to_grid(f, box, n: int) -> GridFunction:
    """Cell averages of a smooth callable via 6x6 (or 6-point) Gauss rules."""
    lo, hi = _normalize_box(box)
    n = int(n)
    if len(lo) == 1:
        h = (hi[0] - lo[0]) / n
        centers = lo[0] + (np.arange(n) + 0.5) * h
        nodes = centers[:, None] + 0.5 * h * _GAUSS_NODES[None, :]
        vals = np.asarray(f(nodes)) @ (_GAUSS_WEIGHTS / 2.0)
        return GridFunction(box, vals)
    h = (hi[0] - lo[0]) / n
    cx = lo[0] + (np.arange(n) + 0.5) * h
    cy = lo[1] + (np.arange(n) + 0.5) * h
    gx = cx[:, None] + 0.5 * h * _GAUSS_NODES[None, :]
    gy = cy[:, None] + 0.5 * h * _GAUSS_NODES[None, :]
    out = np.zeros((n, n))
    wq = np.outer(_GAUSS_WEIGHTS, _GAUSS_WEIGHTS) / 4.0
    for a in range(len(_GAUSS_NODES)):
        for b in range(len(_GAUSS_NODES)):
            out += wq[a, b] * np.asarray(f(gx[:, a][:, None], gy[:, b][None, :]))
    return GridFunction(box, out)


# ---------------------------------------------------------------------------
# JSON interface
# ---------------------------------------------------------------------------

def load_weight(path_or_dict) -> SegmentWeight1D:
    return SegmentWeight1D.from_json_dict(_as_dict(path_or_dict))


def load_matrix(path_or_dict) -> SquareMatrix:
    return SquareMatrix.from_json_dict(_as_dict(path_or_dict))


def load_family(path_or_dict) -> CubeFamily:
    return CubeFamily.from_json_dict(_as_dict(path_or_dict))


def _as_dict(path_or_dict) -> dict:
    if isinstance(path_or_dict, dict):
        return path_or_dict
    with open(path_or_dict, "r") as fh:
        return json.load(fh)
