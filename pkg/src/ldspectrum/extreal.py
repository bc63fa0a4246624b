"""Extended-real conventions shared across the package.

Extended reals are plain floats; ``+inf`` and ``-inf`` are legal, meaningful
values (rate functions at impossible points, log of zero mass) and must never
be replaced by large finite sentinels.  NaN is never a legal value: any
arithmetic that could produce one (inf - inf, 0 * inf) has to go through the
helpers below, which pin down the convex-analysis conventions:

* ``x + (+inf) = +inf`` for every ``x > -inf``;
* a supremum over the empty set is ``-inf``, an infimum is ``+inf``;
* ``t - f`` with ``f = +inf`` is ``-inf`` and with ``f = -inf`` is ``+inf``
  (the tilted-score convention used by Fenchel-Legendre suprema).
"""

import math

import numpy as np

INF = math.inf
NEG_INF = -math.inf


def is_finite(x: float) -> bool:
    return NEG_INF < x < INF


def affine_minus(linear, value):
    """``linear - value`` where ``linear`` is finite and ``value`` extended.

    Vectorized.  This is the inner term of a conjugate supremum: a point with
    value ``+inf`` contributes ``-inf`` (it can never win the sup), a point
    with value ``-inf`` forces the sup to ``+inf``.
    """
    linear = np.asarray(linear, dtype=float)
    value = np.asarray(value, dtype=float)
    out = np.where(value == INF, NEG_INF, np.where(value == NEG_INF, INF, linear - value))
    return out if out.ndim else float(out)


def margin(a: float, b: float) -> float:
    """Signed difference ``a - b`` with equal infinities collapsing to 0.

    Used for inequality margins in verification reports: ``+inf`` vs
    ``+inf`` means "both sides agree at infinity", margin 0, rather than NaN.
    """
    if a == b:
        return 0.0
    return a - b


def gap(a: float, b: float) -> float:
    """Absolute deviation |a - b| with equal infinities counting as 0."""
    return abs(margin(a, b))


def ensure_no_nan(values, name: str = "values") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if np.isnan(arr).any():
        raise ValueError(f"{name} must not contain NaN")
    return arr


def fmt(x: float) -> str:
    """Render an extended real as shortest round-trip text (inf/-inf literals)."""
    if x == INF:
        return "inf"
    if x == NEG_INF:
        return "-inf"
    return repr(float(x))


def parse(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise ValueError("NaN is not a legal extended-real value")
    return value


def to_jsonable(x: float):
    """JSON-safe form: finite values stay numbers, infinities become literals."""
    if x == INF:
        return "inf"
    if x == NEG_INF:
        return "-inf"
    return float(x)


def from_jsonable(v) -> float:
    if isinstance(v, str):
        return parse(v)
    return float(v)
