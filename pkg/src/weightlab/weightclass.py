"""Weight-class constants over finite cube families.

Every constant is the max of a per-cube product over a declared CubeFamily
and is therefore a lower bound of the corresponding supremum over all cubes.
Analytic 1D weights use exact segment masses; grid weights are treated as
piecewise-constant, so all their cube averages are exact as well.

Per-cube products, with avg the (mu-)average over Q and w_A(x) = w(Ax):

  Ap        (avg w) (avg w^{-1/(p-1)})^{p-1}
  Ap_mu     the same with mu-averages
  AAp       (avg w_A) (avg w^{-1/(p-1)})^{p-1}
  AA1       max over cells of M(w_A)/w  (field based, not per-cube)
  bump      (avg w_A)^{1/p} * ||w^{-1/p}||_{phi,Q}
  frac      (avg w_A^q)^{1/q} * (avg w^{-p'})^{1/p'}
  frac_bump (avg w_A^q)^{1/q} * ||w^{-1}||_{phi,Q}
  RH        (avg w^s)^{1/s} / (avg w)

The fractional products put the exponent q inside the first average and use
the plain dual weight w^{-1} in the norm factor; with that normalization the
per-cube identity frac(w, p, p, Q) = AAp(w^p, p, Q)^{1/p} is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .funcspace import (
    LEBESGUE,
    Cube,
    CubeFamily,
    GridFunction,
    Measure,
    Segment,
    SegmentWeight1D,
    SquareMatrix,
    compose_matrix,
    sample_to_grid,
)
from .maximal import hl_maximal, matrix_compose
from .young import YoungFn, luxemburg_norm, luxemburg_norm_of_values

__all__ = [
    "ClassSpec",
    "ConstantReport",
    "ap_product",
    "aap_product",
    "rh_ratio",
    "class_constant",
    "finite_order_reduction",
    "subset_mass_ratio_check",
    "rh_inclusion_check",
]

_KINDS = ("Ap", "AAp", "AA1", "bump", "frac", "frac_bump", "RH", "Ap_mu")


@dataclass(frozen=True)
class ClassSpec:
    """Which weight-class constant to estimate, with its parameters."""

    kind: str
    p: float = 2.0
    q: float | None = None
    s: float | None = None
    A: SquareMatrix | None = None
    phi: YoungFn | None = None
    measure: Measure = LEBESGUE

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown class kind {self.kind!r}")
        if self.kind == "AA1":
            if self.A is None:
                raise ValueError("AA1 needs a matrix")
        elif self.kind == "RH":
            if self.s is None or self.s <= 1.0:
                raise ValueError("RH needs s > 1")
        else:
            if not self.p > 1.0:
                raise ValueError(f"{self.kind} needs p > 1")
        if self.kind in ("AAp", "bump", "frac", "frac_bump") and self.A is None:
            raise ValueError(f"{self.kind} needs a matrix")
        if self.kind in ("bump", "frac_bump") and self.phi is None:
            raise ValueError(f"{self.kind} needs a Young function")
        if self.kind in ("frac", "frac_bump"):
            if self.q is None or self.q < self.p:
                raise ValueError("fractional kinds need q >= p")

    @classmethod
    def from_alpha(cls, kind: str, p: float, alpha: float, dim: int,
                   A=None, phi=None) -> "ClassSpec":
        """Fractional spec with q solved from 1/q = 1/p - alpha/n."""
        inv_q = 1.0 / p - alpha / dim
        if inv_q <= 0.0:
            raise ValueError("alpha too large: 1/p - alpha/n must be positive")
        return cls(kind, p=p, q=1.0 / inv_q, A=A, phi=phi)

    def describe(self) -> str:
        bits = [self.kind, f"p={self.p:g}"]
        if self.q is not None:
            bits.append(f"q={self.q:g}")
        if self.s is not None:
            bits.append(f"s={self.s:g}")
        if self.A is not None:
            bits.append(f"A={self.A.entries}")
        if self.phi is not None:
            bits.append(f"phi={self.phi.describe()}")
        if self.measure != LEBESGUE:
            bits.append(f"measure={self.measure.kind}")
        return " ".join(bits)


@dataclass
class ConstantReport:
    """Max of per-cube products over the family, with the cube attaining it."""

    value: float
    kind: str
    argmax: Cube | None
    family: dict
    witness: str | None = None
    trace: list | None = None
    extras: dict = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def to_json_dict(self) -> dict:
        out = {
            "value": self.value,
            "kind": self.kind,
            "family": self.family,
            "finite": self.finite,
        }
        if self.argmax is not None:
            out["argmax"] = {"corner": list(self.argmax.corner),
                             "side": self.argmax.side}
        if self.witness:
            out["witness"] = self.witness
        if self.trace is not None:
            out["trace"] = [
                {"corner": list(c.corner), "side": c.side, "value": v}
                for c, v in self.trace
            ]
        if self.extras:
            out["extras"] = self.extras
        return out


# ---------------------------------------------------------------------------
# per-cube products (analytic, exact masses)
# ---------------------------------------------------------------------------

def _interval(Q):
    if isinstance(Q, Cube):
        if Q.dim != 1:
            raise ValueError("analytic products are one dimensional")
        return Q.corner[0], Q.corner[0] + Q.side
    a, b = float(Q[0]), float(Q[1])
    if not b > a:
        raise ValueError("empty interval")
    return a, b


def _measure_length(measure: Measure, a: float, b: float) -> float:
    if measure.kind == "lebesgue":
        return b - a
    return measure.segment_mass(Segment(a, b, "power", c=1.0, gamma=0.0), a, b)


def _avg(w: SegmentWeight1D, a: float, b: float, measure: Measure) -> float:
    return w.mass(a, b, measure) / _measure_length(measure, a, b)


def _avg_power(w: SegmentWeight1D, e: float, a: float, b: float,
               measure: Measure, require_cover: bool):
    """(average of w^e over [a,b], witness); witness set when the value is
    infinite, either from a non-integrable power or from w vanishing on a
    part of [a,b] while e < 0."""
    if require_cover and not w.covers(a, b):
        return math.inf, f"w vanishes on part of [{a:g}, {b:g}] and e={e:g} < 0"
    powered, bad = w.try_powered(e)
    if powered is None:
        return math.inf, f"w^{e:g} non-integrable near x={bad.a:g}"
    return powered.mass(a, b, measure) / _measure_length(measure, a, b), None


def ap_product(w: SegmentWeight1D, Q, p: float,
               measure: Measure = LEBESGUE) -> float:
    """(avg_Q w)(avg_Q w^{-1/(p-1)})^{p-1} with exact masses."""
    if not p > 1.0:
        raise ValueError("ap_product needs p > 1")
    a, b = _interval(Q)
    dual, _ = _avg_power(w, -1.0 / (p - 1.0), a, b, measure, require_cover=True)
    if math.isinf(dual):
        return math.inf
    return _avg(w, a, b, measure) * dual ** (p - 1.0)


def aap_product(w: SegmentWeight1D, A, Q, p: float,
                measure: Measure = LEBESGUE) -> float:
    """(avg_Q w(A.))(avg_Q w^{-1/(p-1)})^{p-1} with exact masses."""
    if not p > 1.0:
        raise ValueError("aap_product needs p > 1")
    a, b = _interval(Q)
    wA = compose_matrix(w, A)
    dual, _ = _avg_power(w, -1.0 / (p - 1.0), a, b, measure, require_cover=True)
    if math.isinf(dual):
        return math.inf
    return _avg(wA, a, b, measure) * dual ** (p - 1.0)


def rh_ratio(w: SegmentWeight1D, Q, s: float,
             measure: Measure = LEBESGUE) -> float:
    """(avg_Q w^s)^{1/s} / (avg_Q w): the reverse Holder ratio at exponent s."""
    if not s > 1.0:
        raise ValueError("rh_ratio needs s > 1")
    a, b = _interval(Q)
    mean = _avg(w, a, b, measure)
    if mean == 0.0:
        return 0.0
    high, _ = _avg_power(w, s, a, b, measure, require_cover=False)
    if math.isinf(high):
        return math.inf
    return high ** (1.0 / s) / mean


# ---------------------------------------------------------------------------
# family sweeps
# ---------------------------------------------------------------------------

def class_constant(w, spec: ClassSpec, family: CubeFamily,
                   n_cells: int = 1024, trace: bool = False) -> ConstantReport:
    """Max of the spec's per-cube product over the family.

    w is a SegmentWeight1D (exact masses) or a GridFunction (exact averages
    of the stored piecewise-constant weight).  AA1 is field-based: the
    analytic weight is sampled to ``n_cells`` exact cell averages first.
    Any infinite per-cube value short-circuits with a witness.
    """
    if spec.kind == "AA1":
        return _aa1_constant(w, spec, family, n_cells)
    if isinstance(w, SegmentWeight1D):
        evaluate = _analytic_evaluator(w, spec)
    elif isinstance(w, GridFunction):
        evaluate = _grid_evaluator(w, spec, family)
    else:
        raise TypeError("w must be a SegmentWeight1D or GridFunction")

    best = -math.inf
    best_cube = None
    rows = [] if trace else None
    for Q in family.cubes():
        val, witness = evaluate(Q)
        if rows is not None:
            rows.append((Q, val))
        if math.isinf(val):
            return ConstantReport(math.inf, spec.kind, Q,
                                  family.to_json_dict(),
                                  witness=witness or "infinite per-cube product",
                                  trace=rows)
        if val > best or (val == best and best_cube is not None
                          and (Q.corner, Q.side) < (best_cube.corner, best_cube.side)):
            best, best_cube = val, Q
    return ConstantReport(best, spec.kind, best_cube, family.to_json_dict(),
                          trace=rows)


def _analytic_evaluator(w: SegmentWeight1D, spec: ClassSpec):
    mu = spec.measure
    p = spec.p
    if spec.kind in ("AAp", "bump", "frac", "frac_bump"):
        wA = compose_matrix(w, spec.A)
    if spec.kind in ("bump",):
        w_dual_root = w.try_powered(-1.0 / p)[0]
    if spec.kind in ("frac_bump",):
        w_inv = w.try_powered(-1.0)[0]

    def evaluate(Q: Cube):
        a, b = _interval(Q)
        if spec.kind == "Ap" or spec.kind == "Ap_mu":
            dual, why = _avg_power(w, -1.0 / (p - 1.0), a, b, mu, True)
            if math.isinf(dual):
                return math.inf, why
            return _avg(w, a, b, mu) * dual ** (p - 1.0), None
        if spec.kind == "AAp":
            dual, why = _avg_power(w, -1.0 / (p - 1.0), a, b, mu, True)
            if math.isinf(dual):
                return math.inf, why
            return _avg(wA, a, b, mu) * dual ** (p - 1.0), None
        if spec.kind == "RH":
            return rh_ratio(w, Q, spec.s, mu), None
        if spec.kind == "bump":
            lead = _avg(wA, a, b, mu) ** (1.0 / p)
            if w_dual_root is None or not w.covers(a, b):
                return math.inf, "w^{-1/p} non-integrable"
            nrm = luxemburg_norm(w_dual_root, (a, b), spec.phi)
            return lead * nrm, None
        # fractional kinds
        q = spec.q
        lead, why = _avg_power(wA, q, a, b, mu, False)
        if math.isinf(lead):
            return math.inf, why
        lead = lead ** (1.0 / q)
        if spec.kind == "frac":
            pp = p / (p - 1.0)
            dual, why = _avg_power(w, -pp, a, b, mu, True)
            if math.isinf(dual):
                return math.inf, why
            return lead * dual ** (1.0 / pp), None
        if w_inv is None or not w.covers(a, b):
            return math.inf, "w^{-1} non-integrable"
        return lead * luxemburg_norm(w_inv, (a, b), spec.phi), None

    return evaluate


def _grid_evaluator(w: GridFunction, spec: ClassSpec, family: CubeFamily):
    if spec.measure != LEBESGUE:
        raise ValueError("grid weights support the Lebesgue measure only")
    if not w.mask.all():
        raise ValueError("grid weight must be fully defined")
    p, q = spec.p, spec.q
    needs_dual = spec.kind in ("Ap", "AAp", "bump", "frac", "frac_bump")
    if needs_dual and (w.values <= 0).any():
        idx = tuple(int(i[0]) for i in np.nonzero(w.values <= 0))
        zero_witness = f"w vanishes at cell {idx}"
    else:
        zero_witness = None

    fields = {}

    def powered_field(e: float) -> GridFunction:
        if e not in fields:
            fields[e] = w if e == 1.0 else GridFunction(
                (w.lo, w.hi), w.values ** e)
        return fields[e]

    if spec.kind in ("AAp", "bump", "frac", "frac_bump"):
        wA = matrix_compose(w, spec.A.inverse(), out_box=(w.lo, w.hi),
                            n_out=w.shape, reduce="nearest")
        wA_vals = GridFunction((w.lo, w.hi), wA.values)
        if spec.kind in ("frac", "frac_bump"):
            wAq = GridFunction((w.lo, w.hi), wA.values ** q)
    else:
        wA_vals = None

    def avg_of(g: GridFunction, Q: Cube) -> float:
        return g.cube_average(g.span_of_cube(Q))

    def evaluate(Q: Cube):
        if zero_witness is not None:
            return math.inf, zero_witness
        if spec.kind == "Ap":
            return (avg_of(w, Q)
                    * avg_of(powered_field(-1.0 / (p - 1.0)), Q) ** (p - 1.0)), None
        if spec.kind == "AAp":
            return (avg_of(wA_vals, Q)
                    * avg_of(powered_field(-1.0 / (p - 1.0)), Q) ** (p - 1.0)), None
        if spec.kind == "RH":
            mean = avg_of(w, Q)
            if mean == 0.0:
                return 0.0, None
            return avg_of(powered_field(spec.s), Q) ** (1.0 / spec.s) / mean, None
        if spec.kind == "bump":
            span = w.span_of_cube(Q)
            vals = _span_values(powered_field(-1.0 / p), span)
            return (avg_of(wA_vals, Q) ** (1.0 / p)
                    * luxemburg_norm_of_values(vals, spec.phi)), None
        # fractional kinds
        lead = avg_of(wAq, Q) ** (1.0 / q)
        if spec.kind == "frac":
            pp = p / (p - 1.0)
            return lead * avg_of(powered_field(-pp), Q) ** (1.0 / pp), None
        span = w.span_of_cube(Q)
        vals = _span_values(powered_field(-1.0), span)
        return lead * luxemburg_norm_of_values(vals, spec.phi), None

    return evaluate


def _span_values(g: GridFunction, span):
    if g.dim == 1:
        (i0, i1), = span
        return g.values[i0:i1]
    (i0, i1), (j0, j1) = span
    return g.values[i0:i1, j0:j1].ravel()


def _aa1_constant(w, spec: ClassSpec, family: CubeFamily,
                  n_cells: int) -> ConstantReport:
    """max over cells of M(w_A)/w, both sides as exact cell averages."""
    box = (family.lo, family.hi)
    if isinstance(w, SegmentWeight1D):
        if family.dim != 1:
            raise ValueError("analytic AA1 is one dimensional")
        w_grid = sample_to_grid(w, box, n_cells)
        wA_grid = sample_to_grid(compose_matrix(w, spec.A), box, n_cells)
    else:
        w_grid = w
        wA_grid = matrix_compose(w, spec.A.inverse(), out_box=(w.lo, w.hi),
                                 n_out=w.shape, reduce="nearest")
        wA_grid = GridFunction((w.lo, w.hi), wA_grid.values)
    M = hl_maximal(wA_grid, family)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(w_grid.values > 0, M.values / w_grid.values,
                         np.where(M.values > 0, np.inf, 0.0))
    flat = int(np.argmax(ratio))
    idx = np.unravel_index(flat, ratio.shape)
    value = float(ratio[idx])
    center = tuple(w_grid.lo[d] + (idx[d] + 0.5) * w_grid.h[d]
                   for d in range(w_grid.dim))
    report = ConstantReport(value, "AA1", None, family.to_json_dict(),
                            extras={"argmax_cell_center": list(center)})
    if math.isinf(value):
        report.witness = f"w vanishes at cell centered {center}"
    return report


# ---------------------------------------------------------------------------
# membership and inclusion probes
# ---------------------------------------------------------------------------

def finite_order_reduction(w, A, p: float, family: CubeFamily,
                           n_cells: int = 1024, order_bound: int = 24) -> dict:
    """For A with A^k = I: [w]_{A_{A,p}}, [w]_{A_p} and sup_cells w(Ax)/w(x).

    When [w]_{A_{A,p}} is finite on the family, membership in the plain class
    plus the pointwise comparability of w(Ax) with w(x) should come along;
    the report carries all three numbers plus a consistency verdict instead
    of assuming it.  A without finite order yields applicable=False.
    """
    A = A if isinstance(A, SquareMatrix) else SquareMatrix.scalar(float(A), 1)
    k = A.order(bound=order_bound)
    out = {"order": k, "applicable": k is not None}
    if k is None:
        return out
    aap = class_constant(w, ClassSpec("AAp", p=p, A=A), family)
    ap = class_constant(w, ClassSpec("Ap", p=p), family)
    box = (family.lo, family.hi)
    if isinstance(w, SegmentWeight1D):
        w_grid = sample_to_grid(w, box, n_cells)
        wA_grid = sample_to_grid(compose_matrix(w, A), box, n_cells)
    else:
        w_grid = w
        g = matrix_compose(w, A.inverse(), out_box=(w.lo, w.hi),
                           n_out=w.shape, reduce="nearest")
        wA_grid = GridFunction((w.lo, w.hi), g.values)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(w_grid.values > 0, wA_grid.values / w_grid.values,
                         np.where(wA_grid.values > 0, np.inf, 1.0))
    ratio_bound = float(np.max(ratio))
    out.update({
        "aap_value": aap.value,
        "ap_value": ap.value,
        "ratio_bound": ratio_bound,
        "aap_report": aap,
        "ap_report": ap,
    })
    out["consistent"] = (not math.isfinite(aap.value)) or (
        math.isfinite(ap.value) and math.isfinite(ratio_bound))
    return out


def subset_mass_ratio_check(w, A, p: float, pairs, family: CubeFamily,
                            constant: float | None = None) -> dict:
    """Max over (S, Q) pairs of |S|/|Q| - [w]^{1/p} (w(S)/w_A(Q))^{1/p}.

    [w] is the A-composed class constant on the ambient family; the defect
    should never exceed rounding when Q belongs to the family and [w] is
    finite there.  Pairs are (S, Q) cubes with S inside Q.
    """
    A = A if isinstance(A, SquareMatrix) else SquareMatrix.scalar(float(A), 1)
    if constant is None:
        constant = class_constant(w, ClassSpec("AAp", p=p, A=A), family).value
    if not math.isfinite(constant):
        return {"constant": constant, "max_defect": math.nan, "defects": []}
    wA = compose_matrix(w, A)
    defects = []
    for S, Q in pairs:
        a, b = _interval(S)
        qa, qb = _interval(Q)
        if a < qa - 1e-12 or b > qb + 1e-12:
            raise ValueError("S must sit inside Q")
        ratio = (b - a) / (qb - qa)
        wS = w.mass(a, b)
        wAQ = wA.mass(qa, qb)
        if wAQ <= 0.0:
            raise ValueError("w_A has no mass on Q")
        defects.append(ratio - constant ** (1.0 / p) * (wS / wAQ) ** (1.0 / p))
    return {"constant": constant, "max_defect": max(defects), "defects": defects}


def rh_inclusion_check(w, A, p: float, eps: float, family: CubeFamily) -> dict:
    """Open-property bookkeeping: a reverse Holder bound on the dual weight
    lowers the exponent of the composed class.

    With s = (p-1)/(p-eps-1) and sigma = w^{-1/(p-1)}, each cube satisfies
    the exact identity

        aap(w, p-eps, Q) = rh(sigma, s, Q)^{p-1} * aap(w, p, Q),

    so the family constants obey [w]_{p-eps} <= [sigma]_{RH(s)}^{p-1} [w]_p.
    The report carries the three constants, the family-level slack and the
    worst per-cube identity defect (relative).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if not p > 1.0 + eps:
        raise ValueError("need p > 1 + eps so the lowered exponent stays > 1")
    A = A if isinstance(A, SquareMatrix) else SquareMatrix.scalar(float(A), 1)
    s = (p - 1.0) / (p - eps - 1.0)
    sigma, bad = w.try_powered(-1.0 / (p - 1.0))
    if sigma is None:
        return {"applicable": False,
                "reason": f"dual weight non-integrable near x={bad.a:g}"}
    rh_report = class_constant(sigma, ClassSpec("RH", s=s), family)
    base = class_constant(w, ClassSpec("AAp", p=p, A=A), family)
    lowered = class_constant(w, ClassSpec("AAp", p=p - eps, A=A), family)
    worst = 0.0
    for Q in family.cubes():
        lhs = aap_product(w, A, Q, p - eps)
        rhs = rh_ratio(sigma, Q, s) ** (p - 1.0) * aap_product(w, A, Q, p)
        if math.isinf(lhs) or math.isinf(rhs):
            if lhs != rhs:
                worst = math.inf
            continue
        scale = max(abs(lhs), abs(rhs), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
    slack = rh_report.value ** (p - 1.0) * base.value - lowered.value
    return {
        "applicable": True,
        "s": s,
        "rh_constant": rh_report.value,
        "aap_p": base.value,
        "aap_lowered": lowered.value,
        "family_slack": slack,
        "max_percube_defect": worst,
        "cubes_checked": family.count(),
    }
