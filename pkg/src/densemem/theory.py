"""Closed-form capacity thresholds, the rate function and tail bounds.

All logarithms are natural. The central quantity is the Cramer rate
function of fair +/-1 sums,

    I(x) = ((1+x) log(1+x) + (1-x) log(1-x)) / 2,      x in [-1, 1],

with the convention 0 log 0 = 0 at the endpoints. The exponential-
interaction memory admits a load exponent up to

    alpha_star(rho) = I(1 - 2 rho) / 2

when retrieval must repair rho*N random errors in one pass, and the
degree-n polynomial memory stores N^(n-1) / (c_n log N) patterns with
c_n = 2 (2n-3)!!.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

__all__ = [
    "rate_function",
    "alpha_star",
    "double_factorial",
    "capacity_constant",
    "gaussian_even_moment",
    "polynomial_capacity",
    "binomial_tail_bound",
    "rademacher_tail_bound",
    "rademacher_exact_tail",
    "empirical_rademacher_rate",
    "ThresholdReport",
    "threshold_report",
]


def rate_function(x: float) -> float:
    """I(x) = ((1+x) log(1+x) + (1-x) log(1-x)) / 2 on [-1, 1].

    Even, convex, I(0) = 0, I(+/-1) = log 2. Uses log1p for accuracy
    near 0 and the 0 log 0 = 0 convention at the endpoints.
    """
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"rate function domain is [-1, 1], got {x}")
    plus = (1.0 + x) * math.log1p(x) if x > -1.0 else 0.0
    minus = (1.0 - x) * math.log1p(-x) if x < 1.0 else 0.0
    return 0.5 * (plus + minus)


def alpha_star(rho: float) -> float:
    """Largest load exponent alpha with M = exp(alpha N) + 1 retrievable
    from corruption radius rho*N in one synchronous pass: I(1-2*rho)/2."""
    if not 0.0 <= rho < 0.5:
        raise ValueError(f"rho must lie in [0, 1/2), got {rho}")
    return rate_function(1.0 - 2.0 * rho) / 2.0


def double_factorial(k: int) -> int:
    """k!! for odd k >= -1, with (-1)!! = 1."""
    if k < -1 or k % 2 == 0:
        raise ValueError(f"double factorial defined here for odd k >= -1, got {k}")
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def capacity_constant(n: int) -> int:
    """c_n = 2 (2n-3)!!, the threshold constant of the degree-n rule."""
    if n < 2:
        raise ValueError(f"interaction degree must be >= 2, got {n}")
    return 2 * double_factorial(2 * n - 3)


def gaussian_even_moment(l: int) -> int:
    """E Z^(2l) = (2l-1)!! for a standard normal Z."""
    if l < 1:
        raise ValueError(f"moment order l must be >= 1, got {l}")
    return double_factorial(2 * l - 1)


def polynomial_capacity(n_neurons: float, degree: int, c: float) -> float:
    """Pattern budget N^(n-1) / (c log N) of the degree-n rule."""
    if n_neurons < 2:
        raise ValueError(f"n_neurons must be >= 2, got {n_neurons}")
    if degree < 2:
        raise ValueError(f"degree must be >= 2, got {degree}")
    if c <= 0:
        raise ValueError(f"capacity constant must be positive, got {c}")
    return n_neurons ** (degree - 1) / (c * math.log(n_neurons))


def binomial_tail_bound(m: int, p: float, eps: float) -> float:
    """Upper tail of Binomial(m, p): P(S >= m(p+eps)) <= exp(-m eps^2 / (2(p+eps)))."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if p + eps > 1.0:
        raise ValueError(f"p + eps must not exceed 1, got {p + eps}")
    return math.exp(-m * eps * eps / (2.0 * (p + eps)))


def rademacher_tail_bound(m: int, x: float) -> float:
    """P(S_m >= m x) <= exp(-m I(x)) for a sum S_m of m fair +/-1 variables."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not 0.0 < x < 1.0:
        raise ValueError(f"x must lie in (0, 1), got {x}")
    return math.exp(-m * rate_function(x))


def rademacher_exact_tail(m: int, x: float) -> Fraction:
    """Exact P(S_m >= m x) by summing binomial weights; feasible for small m.

    S_m = 2 K - m with K ~ Binomial(m, 1/2), so the event is K >= m(1+x)/2.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    k_min = math.ceil(m * (1.0 + x) / 2.0)
    if k_min > m:
        return Fraction(0)
    hits = sum(math.comb(m, k) for k in range(max(k_min, 0), m + 1))
    return Fraction(hits, 2**m)


def empirical_rademacher_rate(m: int, x: float) -> float:
    """Finite-m rate -log P(S_m >= m x) / m; approaches I(x) as m grows."""
    tail = rademacher_exact_tail(m, x)
    if tail == 0:
        return math.inf
    return -math.log(tail) / m


@dataclass(frozen=True)
class ThresholdReport:
    """Capacity threshold summary for one query point."""

    rho: float | None = None
    alpha_star: float | None = None
    m_max: float | None = None
    n_neurons: int | None = None
    n_degree: int | None = None
    c_n: int | None = None
    polynomial_m: float | None = None

    def to_json(self) -> str:
        return json.dumps({k: v for k, v in asdict(self).items() if v is not None})

    def to_table(self) -> str:
        rows = [(k, repr(v)) for k, v in asdict(self).items() if v is not None]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def threshold_report(
    rho: float | None = None,
    n_degree: int | None = None,
    n_neurons: int | None = None,
) -> ThresholdReport:
    """Assemble the closed-form quantities for a (rho, degree, N) query."""
    if rho is None and n_degree is None:
        raise ValueError("need at least one of rho or n_degree")
    a = alpha_star(rho) if rho is not None else None
    m_max = None
    if a is not None and n_neurons is not None:
        m_max = math.exp(a * n_neurons)
    c = capacity_constant(n_degree) if n_degree is not None else None
    poly_m = None
    if n_degree is not None and n_neurons is not None:
        poly_m = polynomial_capacity(n_neurons, n_degree, capacity_constant(n_degree))
    return ThresholdReport(
        rho=rho,
        alpha_star=a,
        m_max=m_max,
        n_neurons=n_neurons,
        n_degree=n_degree,
        c_n=c,
        polynomial_m=poly_m,
    )
