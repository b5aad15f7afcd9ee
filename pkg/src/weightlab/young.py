"""Young functions, Luxemburg norms, B_p integrals, Holder defects.

A Young function here is continuous, convex, nondecreasing on [0, inf) with
phi(0) = 0 and phi(t) -> inf.  Norms are normalized by |Q| (averages), so
``luxemburg_norm`` of f over Q with phi(t) = t is the plain average and with
phi(t) = t^r the normalized L^r norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .funcspace import Cube, GridFunction, SegmentWeight1D

_REL_TOL = 1e-11          # bisection relative width target
_CERT_TOL = 1e-8          # certificate: avg phi(f/lam) within this of 1


@dataclass(frozen=True)
class YoungFn:
    """One of a small closed set of Young functions.

    kinds: identity, power (c*t^r, r>1), power_log (t^r log(e+t)^beta),
    exp_minus_one (e^t - 1), bump_exponent (t^{p/(p+eps-1)}), sup (the
    {0, inf} complement of identity, whose Luxemburg norm is the sup norm),
    legendre_of (numeric complement of a base function).
    """

    kind: str
    r: float = 0.0
    c: float = 1.0
    beta: float = 0.0
    base: "YoungFn | None" = None

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def power(cls, r: float, c: float = 1.0):
        if r <= 1.0:
            raise ValueError("power kind needs r > 1")
        return cls("power", r=float(r), c=float(c))

    @classmethod
    def power_log(cls, r: float, beta: float):
        if r < 1.0 or beta <= 0.0:
            raise ValueError("power_log needs r >= 1, beta > 0")
        return cls("power_log", r=float(r), beta=float(beta))

    @classmethod
    def exp_minus_one(cls):
        return cls("exp_minus_one")

    @classmethod
    def bump_exponent(cls, p: float, eps: float):
        rho = p / (p + eps - 1.0)
        if rho <= 1.0:
            raise ValueError(f"bump exponent p/(p+eps-1) = {rho} must exceed 1")
        return cls("bump_exponent", r=float(rho))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "identity":
            out = t.copy()
        elif self.kind in ("power", "bump_exponent"):
            out = self.c * t ** self.r
        elif self.kind == "power_log":
            out = t ** self.r * np.log(np.e + t) ** self.beta
        elif self.kind == "exp_minus_one":
            # large arguments overflow to inf, which is the correct value
            with np.errstate(over="ignore"):
                out = np.expm1(t)
        elif self.kind == "sup":
            out = np.where(t <= 1.0, 0.0, np.inf)
        elif self.kind == "legendre_of":
            out = _legendre_values(self.base, t)
        else:
            raise ValueError(f"unknown kind {self.kind}")
        return out if out.shape else float(out)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "identity":
            out = np.ones_like(t)
        elif self.kind in ("power", "bump_exponent"):
            out = self.c * self.r * t ** (self.r - 1.0)
        elif self.kind == "power_log":
            lg = np.log(np.e + t)
            out = t ** (self.r - 1.0) * lg ** (self.beta - 1.0) * (
                self.r * lg + self.beta * t / (np.e + t))
        elif self.kind == "exp_minus_one":
            out = np.exp(t)
        else:
            raise ValueError(f"no derivative for kind {self.kind}")
        return out if out.shape else float(out)

    @property
    def is_homogeneous(self) -> bool:
        """True when phi(s t) = s^r phi(t): norm has a closed form."""
        return self.kind in ("identity", "power", "bump_exponent")

    @property
    def exponent(self):
        """Power-type growth exponent, or None when not power-type."""
        if self.kind == "identity":
            return 1.0
        if self.kind in ("power", "bump_exponent", "power_log"):
            return self.r
        return None

    def describe(self) -> str:
        if self.kind == "identity":
            return "t"
        if self.kind in ("power", "bump_exponent"):
            return f"{self.c:g}*t^{self.r:g}" if self.c != 1.0 else f"t^{self.r:g}"
        if self.kind == "power_log":
            return f"t^{self.r:g}*log(e+t)^{self.beta:g}"
        if self.kind == "exp_minus_one":
            return "exp(t)-1"
        if self.kind == "sup":
            return "sup-restriction"
        return f"legendre({self.base.describe()})"

    @classmethod
    def from_json_dict(cls, d: dict) -> "YoungFn":
        kind = d["kind"]
        if kind == "identity":
            return cls.identity()
        if kind == "power":
            return cls.power(d["r"], d.get("c", 1.0))
        if kind == "power_log":
            return cls.power_log(d["r"], d["beta"])
        if kind == "exp_minus_one":
            return cls.exp_minus_one()
        if kind == "bump":
            return cls.bump_exponent(d["p"], d["eps"])
        raise ValueError(f"unknown young function kind {kind!r}")


def complementary(phi: YoungFn) -> YoungFn:
    """The complementary Young function (Legendre transform normalization).

    Power pairs are returned in closed form: the complement of c t^r is
    c(r-1)(cr)^{-r'} s^{r'} with r' = r/(r-1), so Young's inequality
    s t <= phi(t) + comp(s) is tight along s = phi'(t).  The complement of
    the identity is the {0, inf} restriction whose Luxemburg norm is the
    sup norm.  Everything else goes through a numeric Legendre transform.
    """
    if phi.kind == "identity":
        return YoungFn("sup")
    if phi.kind == "sup":
        return YoungFn.identity()
    if phi.kind in ("power", "bump_exponent"):
        r, c = phi.r, phi.c
        rp = r / (r - 1.0)
        coeff = c * (r - 1.0) * (c * r) ** (-rp)
        return YoungFn("power", r=rp, c=coeff)
    if phi.kind == "legendre_of":
        return phi.base
    return YoungFn("legendre_of", base=phi)


def _legendre_scalar(base: YoungFn, s: float) -> float:
    """sup_{t>=0} s t - base(t) by ternary search on the concave objective."""
    if s <= 0.0:
        return 0.0
    # bracket: grow until the derivative of the objective goes negative
    hi = 1.0
    for _ in range(400):
        if s - float(base.derivative(hi)) < 0.0:
            break
        hi *= 2.0
    else:
        return math.inf
    lo = 0.0
    for _ in range(200):
        if (hi - lo) <= 1e-13 * max(1.0, hi):
            break
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        f1 = s * m1 - float(base(m1))
        f2 = s * m2 - float(base(m2))
        if f1 < f2:
            lo = m1
        else:
            hi = m2
    t = 0.5 * (lo + hi)
    return max(0.0, s * t - float(base(t)))


def _legendre_values(base: YoungFn, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.array([_legendre_scalar(base, float(x)) for x in t])
    return out if out.shape != (1,) else out.reshape(())


# ---------------------------------------------------------------------------
# Luxemburg norms
# ---------------------------------------------------------------------------

def luxemburg_norm(f, Q, phi: YoungFn, method: str = "auto") -> float:
    """Normalized Luxemburg norm inf{lam > 0 : avg_Q phi(|f|/lam) <= 1}.

    f is a GridFunction (Q grid-aligned, cells outside the grid count as 0
    when Q pokes out of the box) or a SegmentWeight1D (Q must be covered by
    its segments).  method="auto" uses the closed form for homogeneous phi
    and bisection otherwise; method="bisect" forces bisection.
    """
    if isinstance(f, GridFunction):
        G, vmax, vbar = _grid_mean_fn(f, Q, phi)
    elif isinstance(f, SegmentWeight1D):
        G, vmax, vbar = _analytic_mean_fn(f, Q, phi)
    else:
        raise TypeError("f must be a GridFunction or SegmentWeight1D")

    if vmax == 0.0:
        return 0.0
    if phi.kind == "sup":
        return vmax
    if math.isinf(vmax) and phi.kind != "identity":
        # a non-integrable power of the weight inside Q
        if math.isinf(G(1.0)) and math.isinf(G(2.0 ** 64)):
            return math.inf

    if method == "auto" and phi.is_homogeneous:
        # c (avg f^r) / lam^r = 1
        r = phi.r if phi.kind != "identity" else 1.0
        c = phi.c if phi.kind != "identity" else 1.0
        moment = G(1.0) / c if phi.kind == "identity" else G(1.0)
        if math.isinf(moment):
            return math.inf
        if phi.kind == "identity":
            return moment
        return float((moment) ** (1.0 / r))

    return _bisect_norm(G, vbar, vmax)


def luxemburg_norm_of_values(values, phi: YoungFn, total_cells: int | None = None) -> float:
    """Luxemburg norm of a finite list of equally weighted cell values.

    total_cells pads the average with that many cells in all (extra cells
    count as zeros); default is len(values).
    """
    vals = np.asarray(values, dtype=float).ravel()
    count = len(vals) if total_cells is None else int(total_cells)
    if count <= 0:
        raise ValueError("need at least one cell")
    vmax = float(vals.max()) if vals.size else 0.0
    if vmax == 0.0:
        return 0.0
    if phi.kind == "sup":
        return vmax
    if phi.is_homogeneous:
        r = 1.0 if phi.kind == "identity" else phi.r
        c = 1.0 if phi.kind == "identity" else phi.c
        moment = c * float(np.sum(vals ** r)) / count
        return moment if phi.kind == "identity" else moment ** (1.0 / r)

    def G(lam: float) -> float:
        return float(np.sum(phi(vals / lam))) / count

    vbar = float(np.sum(vals)) / count
    return _bisect_norm(G, max(vbar, vmax * 1e-12), vmax)


def _bisect_norm(G, vbar: float, vmax: float) -> float:
    lam_hi = max(vbar, 1e-300)
    for _ in range(2200):
        g = G(lam_hi)
        if g <= 1.0:
            break
        lam_hi *= 2.0
    else:
        return math.inf
    lam_lo = lam_hi
    for _ in range(2200):
        trial = lam_lo / 2.0
        if trial <= 0.0:
            break
        if G(trial) > 1.0:
            lam_lo = trial
            break
        lam_lo = trial
        if lam_lo < 1e-300:
            return 0.0
    while G(lam_lo) <= 1.0 and lam_lo > 1e-300:
        lam_lo /= 2.0
    # invariant: G(lam_lo) > 1 >= G(lam_hi)
    for _ in range(200):
        if lam_hi - lam_lo <= _REL_TOL * lam_hi:
            break
        mid = 0.5 * (lam_lo + lam_hi)
        if G(mid) > 1.0:
            lam_lo = mid
        else:
            lam_hi = mid
    return 0.5 * (lam_lo + lam_hi)


def _grid_mean_fn(f: GridFunction, Q, phi: YoungFn):
    """Mean functional lam -> avg_Q phi(f/lam) for grid data."""
    cube = _as_cube(Q, f.dim)
    span = f.span_of_cube(cube, clip=True)
    if f.dim == 1:
        vals = f.values[span[0][0]:span[0][1]]
        msk = f.mask[span[0][0]:span[0][1]]
    else:
        vals = f.values[span[0][0]:span[0][1], span[1][0]:span[1][1]]
        msk = f.mask[span[0][0]:span[0][1], span[1][0]:span[1][1]]
    if not msk.all():
        raise ValueError("Luxemburg norm over cells without defined values")
    vals = vals.ravel()
    total_cells = cube.volume / f.cell_volume
    if abs(total_cells - round(total_cells)) > 1e-6:
        raise ValueError("cube volume is not a whole number of cells")
    total_cells = round(total_cells)
    # cells of Q beyond the grid count as zeros: phi(0) = 0 contributes nothing

    def G(lam: float) -> float:
        return float(np.sum(phi(vals / lam))) / total_cells

    vmax = float(vals.max()) if vals.size else 0.0
    vbar = float(np.sum(vals)) / total_cells if vals.size else 0.0
    return G, vmax, max(vbar, vmax * 1e-12)


_PANEL_NODES, _PANEL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _analytic_mean_fn(w: SegmentWeight1D, Q, phi: YoungFn):
    """Mean functional for an analytic weight over an interval cube.

    Homogeneous phi uses exact powered-segment masses.  Otherwise the
    integral runs on Gauss panels geometrically refined toward singular
    points (8 nodes per panel).
    """
    cube = _as_cube(Q, 1)
    a, b = cube.corner[0], cube.corner[0] + cube.side
    if not w.covers(a, b):
        raise ValueError(f"weight does not cover [{a}, {b}]")

    if phi.is_homogeneous and phi.kind != "identity":
        powered, witness = w.try_powered(phi.r)
        if powered is None:
            def G_inf(lam):
                return math.inf
            return G_inf, math.inf, 1.0
        moment = powered.mass(a, b) / (b - a) * phi.c

        def G_hom(lam: float) -> float:
            return moment / lam ** phi.r
        vmax = _analytic_sup(w, a, b)
        return G_hom, vmax, max(moment ** (1.0 / phi.r), 1e-300)

    if phi.kind == "identity":
        mean = w.mass(a, b) / (b - a)

        def G_id(lam: float) -> float:
            return mean / lam
        return G_id, _analytic_sup(w, a, b), max(mean, 1e-300)

    nodes, weights = _panelize(w, a, b)

    def G(lam: float) -> float:
        vals = phi(w.value(nodes) / lam)
        return float(np.dot(weights, vals)) / (b - a)

    return G, _analytic_sup(w, a, b), max(w.mass(a, b) / (b - a), 1e-300)


def _panelize(w: SegmentWeight1D, a: float, b: float, geometric: int = 14):
    """Gauss panels on [a,b] refined toward singular points of w."""
    cuts = {a, b}
    sing = []
    for seg in w.segments:
        for x in (seg.lo, seg.hi):
            if a < x < b:
                cuts.add(x)
        if seg.form == "power" and seg.gamma != 0 and a - 1e-12 <= seg.a <= b + 1e-12:
            sing.append(min(max(seg.a, a), b))
            if a < seg.a < b:
                cuts.add(seg.a)
    cuts = sorted(cuts)
    nodes, weights = [], []
    for u, v in zip(cuts, cuts[1:]):
        sub = [u, v]
        for sp in sing:
            if abs(sp - u) < 1e-14 * max(1, abs(u)):
                sub = _geometric_marks(u, v, True, geometric)
                break
            if abs(sp - v) < 1e-14 * max(1, abs(v)):
                sub = _geometric_marks(u, v, False, geometric)
                break
        else:
            sub = np.linspace(u, v, 9).tolist()
        for s0, s1 in zip(sub, sub[1:]):
            mid, half = 0.5 * (s0 + s1), 0.5 * (s1 - s0)
            nodes.append(mid + half * _PANEL_NODES)
            weights.append(half * _PANEL_WEIGHTS)
    return np.concatenate(nodes), np.concatenate(weights)


def _geometric_marks(u, v, toward_left, k):
    length = v - u
    marks = [0.0] + [2.0 ** (-i) for i in range(k, -1, -1)]
    marks = np.asarray(marks) * length
    if toward_left:
        return (u + marks).tolist()
    return (v - marks[::-1]).tolist()


def _analytic_sup(w: SegmentWeight1D, a: float, b: float) -> float:
    sup = 0.0
    for seg in w.segments:
        lo, hi = max(a, seg.lo), min(b, seg.hi)
        if hi <= lo:
            continue
        if seg.form == "exp":
            sup = max(sup, float(seg.value(lo)), float(seg.value(hi)))
        elif seg.gamma == 0:
            sup = max(sup, seg.c)
        elif seg.gamma > 0:
            sup = max(sup, float(seg.value(lo)), float(seg.value(hi)))
        else:
            if lo <= seg.a <= hi:
                return math.inf
            sup = max(sup, float(seg.value(lo)), float(seg.value(hi)))
    return sup


def _as_cube(Q, dim: int) -> Cube:
    if isinstance(Q, Cube):
        return Q
    if dim == 1 and isinstance(Q, (tuple, list)) and len(Q) == 2 \
            and np.isscalar(Q[0]):
        return Cube((float(Q[0]),), float(Q[1]) - float(Q[0]))
    raise TypeError("Q must be a Cube (or an (a, b) interval in 1D)")


# ---------------------------------------------------------------------------
# B_p integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BpReport:
    value: float           # integral of phi(t)/t^{p+1} over [1, T]
    tail: float | None     # closed-form tail beyond T when available
    converges: bool | None # symbolic verdict for built-in kinds
    T: float

    @property
    def total(self):
        return self.value + (self.tail or 0.0)


def bp_integral(phi: YoungFn, p: float, T: float = 2.0 ** 30) -> BpReport:
    """Numeric B_p integral with symbolic convergence classification.

    Composite 16-node Gauss on dyadic panels [2^i, 2^{i+1}] up to T; the
    integrand phi(t) t^{-p-1} is smooth there.  Power-type kinds get a
    closed-form tail; the convergence flag compares growth exponents.
    """
    if p <= 1.0:
        raise ValueError("B_p needs p > 1")
    nodes16, weights16 = np.polynomial.legendre.leggauss(16)
    total = 0.0
    lo = 1.0
    while lo < T:
        hi = min(lo * 2.0, T)
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        t = mid + half * nodes16
        total += half * float(np.dot(weights16, phi(t) * t ** (-p - 1.0)))
        lo = hi

    tail = None
    converges = None
    if phi.kind in ("identity", "power", "bump_exponent"):
        r = phi.exponent
        c = phi.c if phi.kind != "identity" else 1.0
        converges = r < p
        if converges:
            tail = c * T ** (r - p) / (p - r)
    elif phi.kind == "power_log":
        converges = phi.r < p if phi.r != p else False
    elif phi.kind == "exp_minus_one":
        converges = False
    elif phi.kind == "legendre_of":
        base = phi.base
        if base.kind == "exp_minus_one":
            converges = True          # t log t growth, p > 1 integrates it
        elif base.exponent is not None and base.exponent > 1.0:
            rp = base.exponent / (base.exponent - 1.0)
            converges = rp < p if rp != p else None
    return BpReport(value=total, tail=tail, converges=converges, T=T)


# ---------------------------------------------------------------------------
# generalized Holder defect
# ---------------------------------------------------------------------------

def holder_defect(f, g, Q, phi: YoungFn) -> float:
    """2 ||f||_phi ||g||_comp(phi) - avg_Q(f g); nonnegative up to rounding."""
    if not (isinstance(f, GridFunction) and isinstance(g, GridFunction)):
        raise TypeError("holder_defect expects grid functions")
    if f.shape != g.shape or f.lo != g.lo or f.hi != g.hi:
        raise ValueError("f and g must share a grid")
    cube = _as_cube(Q, f.dim)
    span = f.span_of_cube(cube)
    prod = GridFunction((f.lo, f.hi), f.values * g.values)
    avg_fg = prod.cube_average(span)
    nf = luxemburg_norm(f, cube, phi)
    ng = luxemburg_norm(g, cube, complementary(phi))
    bound = 2.0 * nf * ng
    if math.isinf(bound):
        return math.inf
    return bound - avg_fg
