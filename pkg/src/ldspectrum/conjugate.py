"""Extended-real numerics for sampled functions of one real variable.

Carries the Fenchel-Legendre transform g(t) = sup_x (t*x - f(x)), the closed
convex hull (= biconjugate) of a sampled function, and a convexity test.  Two
conjugation routes are kept behind one interface: a brute-force sup over all
grid points and a linear-time sweep over the lower convex hull; they must
produce identical values (this is property-tested, not assumed).

Infinity conventions follow :mod:`ldspectrum.extreal`: a point with value
``+inf`` never wins a supremum; a single ``-inf`` value forces the conjugate
to ``+inf`` everywhere and the hull to ``-inf`` everywhere.
"""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import extreal
from .extreal import INF, NEG_INF


@dataclass(frozen=True)
class Grid:
    """Uniform grid lo, lo+step, ..., hi (hi included)."""

    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and np.isfinite(self.step)):
            raise ValueError("invalid grid: endpoints and step must be finite")
        if self.step <= 0.0:
            raise ValueError("invalid grid: step must be positive")
        if self.hi < self.lo:
            raise ValueError("invalid grid: hi < lo")
        ratio = (self.hi - self.lo) / self.step
        if abs(ratio - round(ratio)) > 1e-6 * max(1.0, abs(ratio)):
            raise ValueError("invalid grid: span is not a whole number of steps")

    @property
    def count(self) -> int:
        return int(round((self.hi - self.lo) / self.step)) + 1

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "step": self.step}

    @classmethod
    def from_json(cls, d: dict) -> "Grid":
        return cls(float(d["lo"]), float(d["hi"]), float(d["step"]))


@dataclass
class SampledFunction:
    """A function of one real variable on a uniform grid, values in [-inf, inf]."""

    grid: Grid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = extreal.ensure_no_nan(self.values, "function values")
        if self.values.shape != (self.grid.count,):
            raise ValueError("value count does not match grid")

    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "value"])
        for x, v in zip(self.grid.points(), self.values):
            w.writerow([extreal.fmt(float(x)), extreal.fmt(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SampledFunction":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["x", "value"]:
            raise ValueError("expected header x,value")
        xs = np.array([extreal.parse(r[0]) for r in rows[1:]])
        vals = np.array([extreal.parse(r[1]) for r in rows[1:]])
        if len(xs) < 2:
            raise ValueError("need at least two rows to recover the grid")
        # infer the step from the span: adjacent differences of linspace points
        # carry rounding noise that would break exact re-emission
        step = (float(xs[-1]) - float(xs[0])) / (len(xs) - 1)
        return cls(Grid(float(xs[0]), float(xs[-1]), step), vals)

    def to_json(self) -> dict:
        return {
            "grid": self.grid.to_json(),
            "values": [extreal.to_jsonable(float(v)) for v in self.values],
        }

    @classmethod
    def from_json(cls, d: dict) -> "SampledFunction":
        grid = Grid.from_json(d["grid"])
        vals = np.array([extreal.from_jsonable(v) for v in d["values"]])
        return cls(grid, vals)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def lower_hull_vertices(xs: np.ndarray, ys: np.ndarray):
    """Indices of the lower convex hull of the points (xs ascending)."""
    idx: list[int] = []
    for j in range(len(xs)):
        while len(idx) >= 2:
            o, a = idx[-2], idx[-1]
            cross = (xs[a] - xs[o]) * (ys[j] - ys[o]) - (xs[j] - xs[o]) * (ys[a] - ys[o])
            if cross <= 0.0:
                idx.pop()
            else:
                break
        idx.append(j)
    return idx


def _conjugate_brute(xs, vals, thetas):
    scores = extreal.affine_minus(np.outer(thetas, xs), vals[None, :])
    return np.max(scores, axis=1)


def _conjugate_hull(xs, vals, thetas):
    finite = np.isfinite(vals)
    hx = xs[finite]
    hv = vals[finite]
    hull = lower_hull_vertices(hx, hv)
    hx, hv = hx[hull], hv[hull]
    out = np.empty(len(thetas))
    k = 0
    for i, t in enumerate(thetas):
        while k + 1 < len(hx) and t * hx[k + 1] - hv[k + 1] >= t * hx[k] - hv[k]:
            k += 1
        out[i] = t * hx[k] - hv[k]
    return out


def legendre_conjugate(f: SampledFunction, theta_grid: Grid, method: str = "fast") -> SampledFunction:
    """Fenchel-Legendre conjugate g(t) = max_x (t*x - f(x)) over the sample grid.

    ``method`` selects "fast" (hull sweep, O(|x| + |t|)) or "brute"
    (O(|x|*|t|)); both produce the same values.  The sup over a finite grid
    under-estimates the sup over the whole line for slopes outside the range
    supported by the data, so the result carries a ``theta_trust`` interval in
    its ``meta`` (slopes of the extreme hull edges).
    """
    thetas = theta_grid.points()
    vals = f.values
    if np.any(vals == NEG_INF):
        return SampledFunction(theta_grid, np.full(len(thetas), INF), {"forced_by_neg_inf": True})
    finite = np.isfinite(vals)
    nfin = int(finite.sum())
    if nfin == 0:
        return SampledFunction(theta_grid, np.full(len(thetas), NEG_INF), {"degenerate": True})

    xs = f.grid.points()
    if method == "brute":
        out = _conjugate_brute(xs, vals, thetas)
    elif method == "fast":
        out = _conjugate_hull(xs, vals, thetas)
    else:
        raise ValueError(f"unknown conjugation method {method!r}")

    meta: dict = {}
    if nfin == 1:
        meta["degenerate"] = True
        meta["theta_trust"] = (NEG_INF, INF)
    else:
        fx = xs[finite]
        fv = vals[finite]
        hull = lower_hull_vertices(fx, fv)
        if len(hull) >= 2:
            s_lo = (fv[hull[1]] - fv[hull[0]]) / (fx[hull[1]] - fx[hull[0]])
            s_hi = (fv[hull[-1]] - fv[hull[-2]]) / (fx[hull[-1]] - fx[hull[-2]])
            meta["theta_trust"] = (float(s_lo), float(s_hi))
        else:
            meta["theta_trust"] = (NEG_INF, INF)
    return SampledFunction(theta_grid, out, meta)


def conjugate_at(f: SampledFunction, t: float) -> float:
    """Conjugate value at a single slope t (brute sup, no grid needed)."""
    vals = f.values
    if np.any(vals == NEG_INF):
        return INF
    if not np.isfinite(vals).any():
        return NEG_INF
    return float(np.max(extreal.affine_minus(t * f.grid.points(), vals)))


def convex_hull_values(f: SampledFunction) -> np.ndarray:
    """Closed convex hull of the sampled points, evaluated back on the grid.

    This is the biconjugate in exact arithmetic: piecewise-linear through the
    lower hull vertices between the outermost finite samples, ``+inf``
    outside them, and identically ``-inf`` if any sample is ``-inf``.
    """
    vals = f.values
    if np.any(vals == NEG_INF):
        return np.full(len(vals), NEG_INF)
    finite = np.isfinite(vals)
    if not finite.any():
        return vals.copy()
    xs = f.grid.points()
    fx = xs[finite]
    fv = vals[finite]
    hull = lower_hull_vertices(fx, fv)
    hx, hv = fx[hull], fv[hull]
    out = np.full(len(vals), INF)
    inside = (xs >= fx[0]) & (xs <= fx[-1])
    out[inside] = np.interp(xs[inside], hx, hv)
    return out


def biconjugate(f: SampledFunction) -> SampledFunction:
    """(f*)* on the original grid: the numerical closed convex hull of f."""
    return SampledFunction(f.grid, convex_hull_values(f), dict(f.meta))


@dataclass(frozen=True)
class ConvexityCheck:
    ok: bool
    witness_x: float | None
    gap: float


def is_closed_convex(f: SampledFunction, tol: float | None = None) -> ConvexityCheck:
    """True iff f agrees with its own closed convex hull within tol.

    Default tol is 10 * grid step: sampling a genuinely convex function on a
    grid already incurs O(step) hull error at curved stretches.
    """
    if tol is None:
        tol = 10.0 * f.grid.step
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    hull = convex_hull_values(f)
    xs = f.grid.points()
    worst_gap = 0.0
    witness = None
    for x, a, b in zip(xs, f.values, hull):
        g = extreal.gap(float(a), float(b))
        if g > worst_gap:
            worst_gap = g
            witness = float(x)
    return ConvexityCheck(worst_gap <= tol, witness if worst_gap > tol else None, worst_gap)


def midpoint_convexity_gap(values: np.ndarray) -> float:
    """Worst violation of f(m) <= (f(m-1)+f(m+1))/2 on a uniform grid.

    0 means discretely convex.  Infinite neighbours are handled with the
    extended-real conventions (an interior point below two +inf neighbours is
    fine; +inf between finite values is a violation reported as +inf).
    """
    v = np.asarray(values, dtype=float)
    worst = 0.0
    for m in range(1, len(v) - 1):
        left, mid, right = v[m - 1], v[m], v[m + 1]
        if mid == NEG_INF:
            continue
        if left == INF or right == INF:
            continue
        if left == NEG_INF or right == NEG_INF:
            worst = INF if mid > NEG_INF else worst
            continue
        bound = 0.5 * (left + right)
        if mid == INF:
            return INF
        worst = max(worst, mid - bound)
    return worst
