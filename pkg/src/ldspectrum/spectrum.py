"""Finite-scale estimators for the shrinking-interval rate functions.

The target quantities are the liminf/limsup exponents of

    f_n(R) = -(1/n) log Pr{ Z_n in (R - pi_i, R + pi_i) },   pi_i = base^-i,

followed by the interval-shrinking limit i -> infinity.  Neither limit is
available at desk scale, so this module realizes them as:

* liminf/limsup  ->  min/max over the tail window of an increasing
  n-schedule (see :mod:`ldspectrum.tails`), with a stability diagnostic;
* i -> infinity  ->  the value at i_max, refined by default with a
  Richardson-style step in the interval width (the residual bias of the raw
  i_max value is |grad| * pi_{i_max}, which is above the acceptance budget
  near steep stretches; one extrapolation step removes the linear term).

The raw per-width values stay available in the result so the monotonicity-
in-i property can be checked as stated.
"""

import csv
import io
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import cumulant, extreal
from .conjugate import Grid
from .extreal import INF, NEG_INF
from .tails import tail_surrogates
from .sources import Source

SPREAD_FLOOR = 1e-3  # resolution floor: width refinement cannot see below this


@dataclass(frozen=True)
class ShrinkSchedule:
    """Protocol for the double limit: widths base^-i for i in [i_min, i_max],
    probed along a strictly increasing n-schedule whose tail window (last
    w_tail entries) feeds the liminf/limsup surrogates."""

    i_min: int
    i_max: int
    n_schedule: tuple[int, ...]
    base: float = 2.0
    w_tail: int = 5

    def __post_init__(self):
        if self.i_min < 1 or self.i_max < self.i_min:
            raise ValueError("need 1 <= i_min <= i_max")
        if self.base <= 1.0:
            raise ValueError("width base must exceed 1")
        ns = self.n_schedule
        if len(ns) < 2 or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] <= 0:
            raise ValueError("n_schedule must be strictly increasing positive integers")
        if ns[-1] < 100 * self.base**self.i_max:
            raise ValueError(
                "n_schedule too short for i_max: need last n >= 100 * base**i_max "
                "so the interval width dominates the noise scale of Z_n"
            )
        if not (2 <= self.w_tail <= len(ns)):
            raise ValueError("w_tail must be between 2 and the schedule length")

    def width(self, i: int) -> float:
        return float(self.base ** (-i))

    def i_values(self) -> range:
        return range(self.i_min, self.i_max + 1)

    @classmethod
    def default(
        cls,
        i_max: int = 5,
        n_max: int = 10_000,
        base: float = 2.0,
        anchors: int = 12,
        w_tail: int = 5,
    ) -> "ShrinkSchedule":
        """Geometric anchors up to n_max, each paired with its successor.

        The (m, m+1) pairing guarantees both parities appear in every tail
        window, which is what the nonstationary interleaved source needs for
        meaningful liminf/limsup surrogates.
        """
        n0 = max(50, int(np.ceil(100 * base**i_max / 32)))
        if n_max <= 2 * n0:
            raise ValueError("n_max too small for the default schedule")
        raw = np.unique(np.round(np.geomspace(n0, n_max, anchors)).astype(int))
        ns = sorted(set(raw) | {m + 1 for m in raw})
        return cls(1, i_max, tuple(int(m) for m in ns), base, w_tail)

    def to_json(self) -> dict:
        return {
            "i_min": self.i_min,
            "i_max": self.i_max,
            "n_schedule": list(self.n_schedule),
            "base": self.base,
            "w_tail": self.w_tail,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ShrinkSchedule":
        return cls(int(d["i_min"]), int(d["i_max"]), tuple(int(m) for m in d["n_schedule"]),
                   float(d.get("base", 2.0)), int(d.get("w_tail", 5)))


def _f_matrix(source: Source, rs: np.ndarray, schedule: ShrinkSchedule) -> np.ndarray:
    """f_n(R) for every schedule n (axis 0), width index (axis 1), grid point (axis 2)."""
    i_vals = list(schedule.i_values())
    out = np.empty((len(schedule.n_schedule), len(i_vals), len(rs)))
    for a, n in enumerate(schedule.n_schedule):
        for b, i in enumerate(i_vals):
            pi = schedule.width(i)
            logp = np.asarray(source.log_interval_prob(n, rs - pi, rs + pi))
            out[a, b] = np.where(logp == NEG_INF, INF, -logp / n)
    return out


def _refine_in_width(by_i: np.ndarray, base: float):
    """One extrapolation step in the width pi_i -> 0; returns (value, residual).

    by_i is the per-width surrogate sequence (ascending i).  The linear-
    in-width bias c*pi_i satisfies H_i + (H_i - H_{i-1})/(base-1) = H + O(pi^2),
    so the first difference supplies the correction and the defect of the
    second difference estimates the residual.
    """
    v1 = by_i[-1]
    if len(by_i) < 2 or not (np.isfinite(v1) and np.isfinite(by_i[-2])):
        return v1, 0.0
    d1 = v1 - by_i[-2]
    value = v1 + d1 / (base - 1.0)
    if len(by_i) >= 3 and np.isfinite(by_i[-3]):
        d0 = by_i[-2] - by_i[-3]
        residual = abs(d1 - d0 / base) / (base - 1.0)
    else:
        residual = abs(d1) / (base - 1.0)
    return value, residual


@dataclass
class PointRate:
    """Result of estimating the rate exponents at one (R, i) pair."""

    lower: float
    upper: float
    stab_lower: float
    stab_upper: float
    all_infinite: bool
    censored: bool = False
    tail_values: tuple[float, ...] = ()


def estimate_point_rate(
    source: Source,
    r: float,
    i: int,
    n_schedule,
    w_tail: int = 5,
    base: float = 2.0,
    method: str = "exact",
    mc_count: int = 1_000_000,
    seed: int = 0,
) -> PointRate:
    """liminf/limsup surrogates of f_n(R) at a single width index i.

    ``method="exact"`` uses the source's exact law.  ``method="mc"`` estimates
    the interval probability from ``mc_count`` draws per schedule entry
    (Wilson-scored); probabilities that fall below 30/count are censored at
    that resolution bound instead of being fabricated.
    """
    if i < 1:
        raise ValueError("width index i must be >= 1")
    pi = float(base) ** (-i)
    fs = []
    censored = False
    if method == "exact":
        for n in n_schedule:
            logp = float(np.asarray(source.log_interval_prob(n, r - pi, r + pi)))
            fs.append(INF if logp == NEG_INF else -logp / n)
    elif method == "mc":
        floor = 30.0 / mc_count
        for n in n_schedule:
            draws = source.sample(n, mc_count, seed)
            hits = int(np.count_nonzero((draws > r - pi) & (draws < r + pi)))
            phat = hits / mc_count
            if phat < floor:
                censored = True
                phat = floor
            fs.append(-np.log(phat) / n)
    else:
        raise ValueError(f"unknown estimation method {method!r}")
    lo, hi, s_lo, s_hi = tail_surrogates(np.array(fs), w_tail)
    all_inf = bool(np.all(np.isinf(fs)))
    return PointRate(lo, hi, s_lo, s_hi, all_inf, censored, tuple(fs[-w_tail:]))


@dataclass
class RateCurve:
    """Estimated lower/upper rate functions on a grid with diagnostics.

    ``lower_by_width``/``upper_by_width`` hold the raw per-width surrogates
    (rows ascend with i); ``lower``/``upper`` are the refined headline values.
    """

    grid: Grid
    lower: np.ndarray
    upper: np.ndarray
    spread_lower: np.ndarray
    spread_upper: np.ndarray
    i_max: int
    n_max: int
    lower_by_width: np.ndarray
    upper_by_width: np.ndarray
    i_values: tuple[int, ...]
    n_schedule: tuple[int, ...]
    w_tail: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["R", "H_lower", "H_upper", "spread_lower", "spread_upper", "i_max", "n_max"])
        for r, lo, hi, sl, su in zip(
            self.grid.points(), self.lower, self.upper, self.spread_lower, self.spread_upper
        ):
            w.writerow([
                extreal.fmt(float(r)), extreal.fmt(float(lo)), extreal.fmt(float(hi)),
                extreal.fmt(float(sl)), extreal.fmt(float(su)), self.i_max, self.n_max,
            ])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RateCurve":
        rows = list(csv.reader(io.StringIO(text)))
        header = ["R", "H_lower", "H_upper", "spread_lower", "spread_upper", "i_max", "n_max"]
        if not rows or rows[0] != header:
            raise ValueError("unexpected rate-curve CSV header")
        body = rows[1:]
        rs = np.array([extreal.parse(r[0]) for r in body])
        if len(rs) < 2:
            raise ValueError("need at least two rows")
        grid = Grid(float(rs[0]), float(rs[-1]), (float(rs[-1]) - float(rs[0])) / (len(rs) - 1))
        lower = np.array([extreal.parse(r[1]) for r in body])
        upper = np.array([extreal.parse(r[2]) for r in body])
        sl = np.array([extreal.parse(r[3]) for r in body])
        su = np.array([extreal.parse(r[4]) for r in body])
        i_max = int(body[0][5])
        n_max = int(body[0][6])
        return cls(grid, lower, upper, sl, su, i_max, n_max,
                   lower.reshape(1, -1), upper.reshape(1, -1), (i_max,), (n_max,), 1)


def estimate_rate_curve(
    source: Source,
    grid: Grid,
    schedule: ShrinkSchedule,
    refine: bool = True,
    threads: int = 1,
) -> RateCurve:
    """Estimate the lower/upper rate functions on ``grid``.

    Grid points are independent work items; ``threads`` splits the grid and
    reassembles in order, so results never depend on the thread count.
    """
    rs = grid.points()

    def run(chunk: np.ndarray):
        f = _f_matrix(source, chunk, schedule)
        lo, hi, stab_lo, stab_hi = tail_surrogates(f, schedule.w_tail)
        return lo, hi, stab_lo, stab_hi

    if threads > 1 and len(rs) > 1:
        parts = np.array_split(rs, min(threads, len(rs)))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, parts))
        lower_i = np.concatenate([r[0] for r in results], axis=1)
        upper_i = np.concatenate([r[1] for r in results], axis=1)
        stab_lo = np.concatenate([r[2] for r in results], axis=1)
        stab_hi = np.concatenate([r[3] for r in results], axis=1)
    else:
        lower_i, upper_i, stab_lo, stab_hi = run(rs)

    # per-width surrogates are indexed [i, R]; stability taken at i_max
    stab_lo = stab_lo[-1]
    stab_hi = stab_hi[-1]

    npts = len(rs)
    lower = np.empty(npts)
    upper = np.empty(npts)
    res_lo = np.zeros(npts)
    res_hi = np.zeros(npts)
    for j in range(npts):
        if refine:
            lower[j], res_lo[j] = _refine_in_width(lower_i[:, j], schedule.base)
            upper[j], res_hi[j] = _refine_in_width(upper_i[:, j], schedule.base)
        else:
            lower[j], upper[j] = lower_i[-1, j], upper_i[-1, j]
    # rate functions of probabilities are nonnegative; clip fp-level dips
    lower = np.where(np.isfinite(lower), np.maximum(lower, 0.0), lower)
    upper = np.where(np.isfinite(upper), np.maximum(upper, 0.0), upper)

    spread_lower = stab_lo + res_lo + SPREAD_FLOOR
    spread_upper = stab_hi + res_hi + SPREAD_FLOOR

    return RateCurve(
        grid=grid,
        lower=lower,
        upper=upper,
        spread_lower=spread_lower,
        spread_upper=spread_upper,
        i_max=schedule.i_max,
        n_max=int(schedule.n_schedule[-1]),
        lower_by_width=lower_i,
        upper_by_width=upper_i,
        i_values=tuple(schedule.i_values()),
        n_schedule=tuple(schedule.n_schedule),
        w_tail=schedule.w_tail,
    )


# ---------------------------------------------------------------------------
# tightness / convergence diagnostics
# ---------------------------------------------------------------------------

E_TIGHT_CONSISTENT = "E-TIGHT-CONSISTENT"
NOT_E_TIGHT = "NOT-E-TIGHT"
C_TIGHT_CONSISTENT = "C-TIGHT-CONSISTENT"
NOT_C_TIGHT = "NOT-C-TIGHT"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class TightnessReport:
    verdict: str
    k_schedule: tuple[float, ...]
    slopes: np.ndarray  # exceedance exponents per K (E) or per (K, theta) (C)
    floor: float
    thetas: tuple[float, ...] = ()
    k0: float | None = None


_DIVERGES = "diverges"
_STALLS = "stalls"
_UNCLEAR = "unclear"


def _trend(seq: np.ndarray, floor: float, stall_tol: float) -> str:
    """Classify a per-K sequence of exceedance exponents.

    Below the floor at the largest K is consistent with divergence to -inf;
    a stalled tail above the floor is the signature of escaping mass; a
    decrease that keeps accelerating is extrapolated as consistent.
    """
    seq = np.asarray(seq, dtype=float)
    last = seq[-1]
    if last <= floor:
        return _DIVERGES
    if len(seq) >= 2 and extreal.margin(seq[-2], last) <= stall_tol:
        return _STALLS
    if len(seq) >= 3:
        d_last = extreal.margin(last, seq[-2])
        d_prev = extreal.margin(seq[-2], seq[-3])
        if d_last <= d_prev < 0.0:
            return _DIVERGES
    return _UNCLEAR


def e_tightness_diagnostic(
    source: Source,
    k_schedule=(1.0, 2.0, 4.0, 8.0, 16.0),
    n_schedule=None,
    w_tail: int = 5,
    floor: float = -50.0,
    stall_tol: float = 0.1,
) -> TightnessReport:
    """Probe lim_K limsup_n (1/n) log Pr{|Z_n| > K} for divergence to -inf."""
    ks = tuple(float(k) for k in k_schedule)
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("K schedule must be increasing")
    if n_schedule is None:
        n_schedule = ShrinkSchedule.default().n_schedule
    slopes = np.empty(len(ks))
    for kk, k in enumerate(ks):
        seq = []
        for n in n_schedule:
            left = np.asarray(source.log_interval_prob(n, -INF, -k))
            right = np.asarray(source.log_interval_prob(n, k, INF))
            seq.append(float(np.logaddexp(left, right)) / n)
        _, hi, _, _ = tail_surrogates(np.array(seq), w_tail)
        slopes[kk] = hi
    trend = _trend(slopes, floor, stall_tol)
    verdict = {_DIVERGES: E_TIGHT_CONSISTENT, _STALLS: NOT_E_TIGHT, _UNCLEAR: INCONCLUSIVE}[trend]
    return TightnessReport(verdict, ks, slopes, floor)


def c_tightness_diagnostic(
    source: Source,
    theta_grid: Grid,
    k_schedule=(2.0, 4.0, 8.0, 16.0),
    n_schedule=None,
    w_tail: int = 5,
    floor: float = -50.0,
    stall_tol: float = 0.1,
) -> TightnessReport:
    """Probe the tail cumulant generating function for divergence to -inf.

    For every theta on the grid the limsup surrogate of the |z|>K restricted
    CGF must fall away as K grows; a single stalled theta is enough for
    NOT-C-TIGHT.
    """
    ks = tuple(float(k) for k in k_schedule)
    if n_schedule is None:
        n_schedule = ShrinkSchedule.default().n_schedule
    thetas = theta_grid.points()
    surrogate = np.empty((len(ks), len(thetas)))
    for kk, k in enumerate(ks):
        for tt, theta in enumerate(thetas):
            seq = [cumulant.tail_cgf(source, k, float(theta), n) for n in n_schedule]
            _, hi, _, _ = tail_surrogates(np.array(seq), w_tail)
            surrogate[kk, tt] = hi
    trends = [_trend(surrogate[:, tt], floor, stall_tol) for tt in range(len(thetas))]
    if any(t == _STALLS for t in trends):
        verdict = NOT_C_TIGHT
    elif all(t == _DIVERGES for t in trends):
        verdict = C_TIGHT_CONSISTENT
    else:
        verdict = INCONCLUSIVE
    below = [kk for kk in range(len(ks)) if np.all(surrogate[kk] <= floor)]
    k0 = ks[below[0]] if below else None
    return TightnessReport(verdict, ks, surrogate, floor, tuple(float(t) for t in thetas), k0)


@dataclass
class SigmaReport:
    """Outcome of the subsequence search for sigma-convergence.

    ``passed`` means "no violation found among the candidate subsequences";
    it is a falsification heuristic, never a proof.
    """

    passed: bool
    witness: str | None
    counterexample_r: float | None
    gamma: float
    candidates_tried: tuple[str, ...]


def sigma_convergence_diagnostic(
    source: Source,
    d: tuple[float, float],
    gamma: float,
    schedule: ShrinkSchedule,
    grid_step: float = 0.1,
    min_tail: int = 3,
) -> SigmaReport:
    """Search for one subsequence achieving the limsup uniformly up to gamma.

    Candidates are the full schedule and the odd/even parity classes (the
    natural suspects for interleaved constructions).  A candidate passes at a
    grid point if all its entries from some index on sit above the limsup
    surrogate minus gamma while at least ``min_tail`` entries remain.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    d_lo, d_hi = float(d[0]), float(d[1])
    if not d_lo < d_hi:
        raise ValueError("domain must be a nondegenerate closed interval")
    count = max(2, int(round((d_hi - d_lo) / grid_step)) + 1)
    rs = np.linspace(d_lo, d_hi, count)
    pi = schedule.width(schedule.i_max)
    f = np.empty((len(schedule.n_schedule), len(rs)))
    for a, n in enumerate(schedule.n_schedule):
        logp = np.asarray(source.log_interval_prob(n, rs - pi, rs + pi))
        f[a] = np.where(logp == NEG_INF, INF, -logp / n)
    _, limsup, _, _ = tail_surrogates(f, schedule.w_tail)

    ns = np.array(schedule.n_schedule)
    candidates = {
        "full-schedule": np.arange(len(ns)),
        "odd-n": np.nonzero(ns % 2 == 1)[0],
        "even-n": np.nonzero(ns % 2 == 0)[0],
    }
    first_violation: tuple[str, float] | None = None
    for name, idx in candidates.items():
        if len(idx) < min_tail:
            continue
        ok = True
        violator = None
        for j, r in enumerate(rs):
            target = limsup[j] - gamma  # +inf limsup demands +inf entries
            seq = f[idx, j]
            good = seq >= target
            # largest suffix of all-good entries
            bad = np.nonzero(~good)[0]
            suffix = len(seq) if len(bad) == 0 else len(seq) - bad[-1] - 1
            if suffix < min_tail:
                ok = False
                violator = float(r)
                break
        if ok:
            return SigmaReport(True, name, None, gamma, tuple(candidates))
        if first_violation is None:
            first_violation = (name, violator)
    return SigmaReport(False, None, first_violation[1] if first_violation else None,
                       gamma, tuple(candidates))
