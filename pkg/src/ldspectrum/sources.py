"""Catalog of general real-valued source sequences {Z_n}.

Each bundled source exposes exact interval probabilities (in linear and log
space), exact cumulant generating functions, a deterministic sampler, and an
analytic rate-function oracle used by the tests.  The four kinds:

* gaussian_iid      -- Z_n is the arithmetic mean of i.i.d. N(mu, sigma^2),
                       so Z_n ~ N(mu, sigma^2/n);
* mixed             -- the alpha-weighted mixture of two such mean sequences
                       (stationary, not memoryless);
* interleaved       -- component 1 when n is odd, component 2 when n is even
                       (nonstationary);
* divergent_pm      -- Pr{Z_n = n} = Pr{Z_n = -n} = 1/2, the escaping-mass
                       counterexample whose rate functions are +inf
                       everywhere.

All operations are pure functions of their arguments; sampling streams are
pure functions of (source, n, count, seed) with per-n derived seeds so that
evaluation order and thread count can never change results.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from . import normal
from .extreal import INF, NEG_INF

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class SourceCapabilities:
    has_exact_law: bool
    has_exact_cgf: bool
    has_sampler: bool
    has_analytic_rate: bool


def _check_n(n: int) -> int:
    n = int(n)
    if n <= 0:
        raise ValueError("n must be a positive integer")
    return n


def _rng_for(seed: int, task: int) -> np.random.Generator:
    # one stream per logical task (here: per n), stable across platforms
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(int(task),))
    return np.random.default_rng(ss)


class Source:
    """Common surface of all bundled sources."""

    kind: str = "abstract"

    def capabilities(self) -> SourceCapabilities:
        return SourceCapabilities(True, True, True, True)

    # -- exact law ---------------------------------------------------------

    def log_interval_prob(self, n: int, lo, hi):
        """log Pr{Z_n in (lo, hi)} (open interval), vectorized over lo/hi."""
        raise NotImplementedError

    def interval_prob(self, n: int, lo: float, hi: float) -> float:
        logp = self.log_interval_prob(n, lo, hi)
        with np.errstate(over="ignore"):
            return float(np.exp(logp))

    def log_gamma_prob(self, n: int, intervals) -> float:
        """log Pr{Z_n in union of intervals}.

        ``intervals`` is a sequence of (lo, hi, closed_lo, closed_hi) tuples,
        assumed disjoint.  Endpoint flags only matter for atomic laws.
        """
        n = _check_n(n)
        terms = [self.log_interval_prob(n, lo, hi) for (lo, hi, _, _) in intervals if lo < hi]
        if not terms:
            return NEG_INF
        return float(logsumexp(terms))

    # -- exact CGF and tilted restrictions ----------------------------------

    def cgf(self, n: int, theta: float) -> float:
        """phi_n(theta) = (1/n) log E[exp(n * theta * Z_n)]."""
        raise NotImplementedError

    def truncated_log_mgf(self, n: int, theta: float, lo: float, hi: float) -> float:
        """log of the integral of exp(n*theta*z) over the closed window [lo, hi].

        -inf when the window carries no mass.  Implemented by exact
        exponential tilting, never by quadrature.
        """
        raise NotImplementedError

    # -- sampling ------------------------------------------------------------

    def sample(self, n: int, count: int, seed: int) -> np.ndarray:
        raise NotImplementedError

    # -- oracles -------------------------------------------------------------

    def analytic_rate(self) -> tuple[Callable, Callable]:
        """Closed-form (lower, upper) rate oracles; for tests only."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def label(self) -> str:
        return self.kind


@dataclass(frozen=True)
class GaussianIID(Source):
    mu: float
    sigma: float

    kind = "gaussian_iid"

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")

    def law(self, n: int) -> tuple[float, float]:
        n = _check_n(n)
        return self.mu, self.sigma / np.sqrt(n)

    def log_interval_prob(self, n, lo, hi):
        mean, sd = self.law(n)
        return normal.log_interval_prob(mean, sd, lo, hi)

    def cgf(self, n, theta):
        _check_n(n)
        if theta == 0.0:
            return 0.0
        return self.mu * theta + 0.5 * (self.sigma * theta) ** 2

    def truncated_log_mgf(self, n, theta, lo, hi):
        # exact tilt: integral = exp(n*phi(theta)) * Pr{N(mu + theta*sigma^2, sigma^2/n) in [lo,hi]}
        n = _check_n(n)
        mean, sd = self.law(n)
        tilted_mean = self.mu + theta * self.sigma**2
        return n * self.cgf(n, theta) + float(normal.log_interval_prob(tilted_mean, sd, lo, hi))

    def sample(self, n, count, seed):
        n = _check_n(n)
        if count <= 0:
            raise ValueError("count must be a positive integer")
        mean, sd = self.law(n)
        return _rng_for(seed, n).normal(mean, sd, size=int(count))

    def analytic_rate(self):
        def rate(r):
            r = np.asarray(r, dtype=float)
            out = (r - self.mu) ** 2 / (2.0 * self.sigma**2)
            return out if out.ndim else float(out)

        return rate, rate

    def to_json(self):
        return {"kind": self.kind, "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class MixedGaussian(Source):
    component1: GaussianIID
    component2: GaussianIID
    alpha1: float = 0.5
    alpha2: float = 0.5

    kind = "mixed"

    def __post_init__(self):
        if not (self.alpha1 > 0.0 and self.alpha2 > 0.0):
            raise ValueError("mixture weights must be positive")
        if abs(self.alpha1 + self.alpha2 - 1.0) > WEIGHT_TOL:
            raise ValueError("mixture weights must sum to 1")

    def _parts(self):
        return ((self.alpha1, self.component1), (self.alpha2, self.component2))

    def log_interval_prob(self, n, lo, hi):
        terms = np.stack(
            [np.log(a) + np.asarray(c.log_interval_prob(n, lo, hi)) for a, c in self._parts()]
        )
        out = logsumexp(terms, axis=0)
        return out if np.ndim(out) else float(out)

    def interval_prob(self, n, lo, hi):
        # kept as the literal weighted sum so the mixture identity holds bit-for-bit
        return self.alpha1 * self.component1.interval_prob(n, lo, hi) + self.alpha2 * self.component2.interval_prob(n, lo, hi)

    def cgf(self, n, theta):
        n = _check_n(n)
        if theta == 0.0:
            return 0.0
        # shift-by-max log-sum-exp: n*phi can reach +-1e4 at desk scale
        terms = [np.log(a) + n * c.cgf(n, theta) for a, c in self._parts()]
        return float(logsumexp(terms)) / n

    def truncated_log_mgf(self, n, theta, lo, hi):
        n = _check_n(n)
        terms = [np.log(a) + c.truncated_log_mgf(n, theta, lo, hi) for a, c in self._parts()]
        return float(logsumexp(terms))

    def sample(self, n, count, seed):
        n = _check_n(n)
        if count <= 0:
            raise ValueError("count must be a positive integer")
        rng = _rng_for(seed, n)
        pick = rng.random(int(count)) < self.alpha1
        m1, s1 = self.component1.law(n)
        m2, s2 = self.component2.law(n)
        draws = rng.normal(0.0, 1.0, size=int(count))
        return np.where(pick, m1 + s1 * draws, m2 + s2 * draws)

    def analytic_rate(self):
        r1, _ = self.component1.analytic_rate()
        r2, _ = self.component2.analytic_rate()

        def rate(r):
            return np.minimum(r1(r), r2(r))

        return rate, rate

    def to_json(self):
        return {
            "kind": self.kind,
            "components": [self.component1.to_json(), self.component2.to_json()],
            "weights": [self.alpha1, self.alpha2],
        }


@dataclass(frozen=True)
class InterleavedGaussian(Source):
    odd: GaussianIID
    even: GaussianIID

    kind = "interleaved"

    def active(self, n: int) -> GaussianIID:
        return self.odd if _check_n(n) % 2 == 1 else self.even

    def log_interval_prob(self, n, lo, hi):
        return self.active(n).log_interval_prob(n, lo, hi)

    def cgf(self, n, theta):
        return self.active(n).cgf(n, theta)

    def truncated_log_mgf(self, n, theta, lo, hi):
        return self.active(n).truncated_log_mgf(n, theta, lo, hi)

    def sample(self, n, count, seed):
        return self.active(n).sample(n, count, seed)

    def analytic_rate(self):
        r1, _ = self.odd.analytic_rate()
        r2, _ = self.even.analytic_rate()

        def lower(r):
            return np.minimum(r1(r), r2(r))

        def upper(r):
            return np.maximum(r1(r), r2(r))

        return lower, upper

    def to_json(self):
        return {"kind": self.kind, "odd": self.odd.to_json(), "even": self.even.to_json()}


@dataclass(frozen=True)
class DivergentPM(Source):
    """Two atoms escaping to +-n: Pr{Z_n = n} = Pr{Z_n = -n} = 1/2."""

    kind = "divergent_pm"

    def atoms(self, n: int) -> tuple[float, float]:
        n = _check_n(n)
        return (-float(n), float(n))

    def log_interval_prob(self, n, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if np.any(lo >= hi):
            raise ValueError("interval endpoints out of order")
        neg, pos = self.atoms(n)
        hits = ((lo < neg) & (neg < hi)).astype(float) + ((lo < pos) & (pos < hi)).astype(float)
        with np.errstate(divide="ignore"):
            out = np.log(0.5 * hits)
        return out if out.ndim else float(out)

    def log_gamma_prob(self, n, intervals):
        n = _check_n(n)
        mass = 0.0
        for atom in self.atoms(n):
            for lo, hi, clo, chi in intervals:
                if (lo < atom or (clo and lo == atom)) and (atom < hi or (chi and atom == hi)):
                    mass += 0.5
                    break
        return float(np.log(mass)) if mass > 0.0 else NEG_INF

    def cgf(self, n, theta):
        n = _check_n(n)
        if theta == 0.0:
            return 0.0
        # (1/n) log( (e^{n^2 t} + e^{-n^2 t}) / 2 ), shifted by the max exponent
        shift = n * n * abs(theta)
        return n * abs(theta) + (np.log1p(np.exp(-2.0 * shift)) - np.log(2.0)) / n

    def truncated_log_mgf(self, n, theta, lo, hi):
        n = _check_n(n)
        terms = [np.log(0.5) + n * theta * atom for atom in self.atoms(n) if lo <= atom <= hi]
        if not terms:
            return NEG_INF
        return float(logsumexp(terms))

    def sample(self, n, count, seed):
        n = _check_n(n)
        if count <= 0:
            raise ValueError("count must be a positive integer")
        signs = np.where(_rng_for(seed, n).random(int(count)) < 0.5, -1.0, 1.0)
        return signs * float(n)

    def analytic_rate(self):
        def rate(r):
            r = np.asarray(r, dtype=float)
            out = np.full(r.shape, INF)
            return out if out.ndim else INF

        return rate, rate

    def to_json(self):
        return {"kind": self.kind}


_KINDS = {
    "gaussian_iid": GaussianIID,
    "mixed": MixedGaussian,
    "interleaved": InterleavedGaussian,
    "divergent_pm": DivergentPM,
}


def source_from_json(d: dict) -> Source:
    kind = d.get("kind")
    if kind == "gaussian_iid":
        return GaussianIID(float(d["mu"]), float(d["sigma"]))
    if kind == "mixed":
        c1, c2 = (source_from_json(c) for c in d["components"])
        w1, w2 = (float(w) for w in d["weights"])
        return MixedGaussian(c1, c2, w1, w2)
    if kind == "interleaved":
        return InterleavedGaussian(source_from_json(d["odd"]), source_from_json(d["even"]))
    if kind == "divergent_pm":
        return DivergentPM()
    raise ValueError(f"unknown source kind {kind!r}")


# operation-style entry points over the catalog


def exact_interval_prob(source: Source, n: int, lo: float, hi: float) -> float:
    """Pr{Z_n in (lo, hi)} for the open interval; raises on lo >= hi."""
    if not lo < hi:
        raise ValueError("invalid interval: lo must be < hi")
    _check_n(n)
    return source.interval_prob(n, lo, hi)


def exact_cgf(source: Source, n: int, theta: float) -> float:
    _check_n(n)
    return source.cgf(n, theta)


def sample(source: Source, n: int, count: int, seed: int) -> np.ndarray:
    return source.sample(n, count, seed)


def analytic_rate(source: Source):
    return source.analytic_rate()
