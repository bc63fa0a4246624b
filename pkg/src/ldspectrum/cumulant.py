"""Full, window-truncated and tail cumulant generating functions.

For a window M = [m1, m2] the truncated CGF is

    phi_n^M(theta) = (1/n) log integral_M P_{Z_n}(dz) exp(n theta z),

computed by exact exponential tilting (the integrand spans thousands of
orders of magnitude at desk scale; quadrature is not trustworthy there).
The tail variant restricts to |z| > K instead.  Liminf/limsup surrogates
along the n-schedule use the same tail-window convention as the spectrum
estimators, so duality comparisons are like-for-like.

Conjugating the limsup curve gives the lower Cramer-Gartner-Ellis rate
function, conjugating the liminf curve the upper one; both are closed convex
by construction.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import extreal
from .conjugate import Grid, SampledFunction, legendre_conjugate
from .extreal import INF, NEG_INF
from .sources import Source
from .tails import tail_surrogates


@dataclass(frozen=True)
class TruncationWindow:
    """A closed interval [m1, m2], the symmetric case [-K, K], or the full line."""

    m1: float = NEG_INF
    m2: float = INF

    def __post_init__(self):
        if not self.m1 < self.m2:
            raise ValueError("invalid window: m1 must be < m2")

    @classmethod
    def interval(cls, m1: float, m2: float) -> "TruncationWindow":
        if not (np.isfinite(m1) and np.isfinite(m2)):
            raise ValueError("invalid window: interval endpoints must be finite")
        return cls(float(m1), float(m2))

    @classmethod
    def symmetric(cls, k: float) -> "TruncationWindow":
        if not k > 0:
            raise ValueError("invalid window: K must be positive")
        return cls(-float(k), float(k))

    @classmethod
    def full(cls) -> "TruncationWindow":
        return cls()

    @property
    def is_full(self) -> bool:
        return self.m1 == NEG_INF and self.m2 == INF

    def label(self) -> str:
        if self.is_full:
            return "full"
        if self.m1 == -self.m2:
            return f"K{self.m2:g}"
        return f"M{self.m1:g}_{self.m2:g}"

    def to_json(self):
        if self.is_full:
            return {"type": "full"}
        if self.m1 == -self.m2:
            return {"type": "symmetric", "k": self.m2}
        return {"type": "interval", "m1": self.m1, "m2": self.m2}

    @classmethod
    def from_json(cls, d: dict) -> "TruncationWindow":
        t = d.get("type")
        if t == "full":
            return cls.full()
        if t == "symmetric":
            return cls.symmetric(float(d["k"]))
        if t == "interval":
            return cls.interval(float(d["m1"]), float(d["m2"]))
        raise ValueError(f"unknown window type {t!r}")


def truncated_cgf(source: Source, window: TruncationWindow, theta: float, n: int) -> float:
    """phi_n^M(theta) over the closed window; -inf when the window has no mass."""
    n = int(n)
    if n <= 0:
        raise ValueError("n must be a positive integer")
    if window.is_full:
        return source.cgf(n, theta)
    return source.truncated_log_mgf(n, theta, window.m1, window.m2) / n


def tail_cgf(source: Source, k: float, theta: float, n: int) -> float:
    """CGF restricted to |z| > K: two tilted tails combined in log space."""
    if not k > 0:
        raise ValueError("K must be positive")
    n = int(n)
    if n <= 0:
        raise ValueError("n must be a positive integer")
    left = source.truncated_log_mgf(n, theta, NEG_INF, -k)
    right = source.truncated_log_mgf(n, theta, k, INF)
    return float(np.logaddexp(left, right)) / n


@dataclass
class CgfCurves:
    """liminf/limsup surrogates of phi_n (possibly truncated) on a theta grid."""

    theta_grid: Grid
    phi_lower: np.ndarray
    phi_upper: np.ndarray
    spread: np.ndarray
    window: TruncationWindow
    n_schedule: tuple[int, ...]
    w_tail: int

    def lower_function(self) -> SampledFunction:
        return SampledFunction(self.theta_grid, self.phi_lower.copy())

    def upper_function(self) -> SampledFunction:
        return SampledFunction(self.theta_grid, self.phi_upper.copy())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "phi_lower", "phi_upper", "spread"])
        for t, lo, hi, sp in zip(self.theta_grid.points(), self.phi_lower, self.phi_upper, self.spread):
            w.writerow([extreal.fmt(float(t)), extreal.fmt(float(lo)),
                        extreal.fmt(float(hi)), extreal.fmt(float(sp))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, window: TruncationWindow | None = None) -> "CgfCurves":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["theta", "phi_lower", "phi_upper", "spread"]:
            raise ValueError("unexpected CGF CSV header")
        body = rows[1:]
        ts = np.array([extreal.parse(r[0]) for r in body])
        if len(ts) < 2:
            raise ValueError("need at least two rows")
        grid = Grid(float(ts[0]), float(ts[-1]), (float(ts[-1]) - float(ts[0])) / (len(ts) - 1))
        lo = np.array([extreal.parse(r[1]) for r in body])
        hi = np.array([extreal.parse(r[2]) for r in body])
        sp = np.array([extreal.parse(r[3]) for r in body])
        return cls(grid, lo, hi, sp, window or TruncationWindow.full(), (), 0)


def cgf_curves(
    source: Source,
    window: TruncationWindow,
    theta_grid: Grid,
    n_schedule,
    w_tail: int = 5,
) -> CgfCurves:
    thetas = theta_grid.points()
    values = np.empty((len(n_schedule), len(thetas)))
    for a, n in enumerate(n_schedule):
        for b, theta in enumerate(thetas):
            values[a, b] = truncated_cgf(source, window, float(theta), n)
    lo, hi, stab_lo, stab_hi = tail_surrogates(values, w_tail)
    return CgfCurves(theta_grid, lo, hi, np.maximum(stab_lo, stab_hi), window,
                     tuple(int(n) for n in n_schedule), w_tail)


def rate_from_cgf(curves: CgfCurves, r_grid: Grid) -> tuple[SampledFunction, SampledFunction]:
    """Cramer-Gartner-Ellis rate pair (lower from phi_upper, upper from phi_lower)."""
    rate_lower = legendre_conjugate(curves.upper_function(), r_grid)
    rate_upper = legendre_conjugate(curves.lower_function(), r_grid)
    return rate_lower, rate_upper
