"""Downstream statistics built on exact cumulant polynomials."""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import factorial
from typing import Sequence

from .algebra import LambdaPoly, stirling_first_signed
from .diagram import GraphSpec
from .engine import cumulant_poly, joint_cumulant, moment_poly
from .errors import DomainError
from .model import ModelConfig

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def hermite(k: int, x: float) -> float:
    """Probabilists' Hermite polynomial ``He_k(x)`` for ``k`` in {0,1,3,4,6}."""
    if k == 0:
        return 1.0
    if k == 1:
        return x
    x2 = x * x
    if k == 3:
        return x * (x2 - 3.0)
    if k == 4:
        return x2 * x2 - 6.0 * x2 + 3.0
    if k == 6:
        return x2 * x2 * x2 - 15.0 * x2 * x2 + 45.0 * x2 - 15.0
    raise DomainError(f"Hermite order {k} is not supported (use 0, 1, 3, 4 or 6)")


@dataclass(frozen=True)
class GramCharlierCoeffs:
    kappa1: float
    kappa2: float
    kappa3: float = 0.0
    kappa4: float = 0.0
    kappa5: float | None = None  # kept for completeness, unused by orders 2-4
    kappa6: float | None = None

    def __post_init__(self):
        if not self.kappa2 > 0:
            raise DomainError(f"kappa2 must be positive, got {self.kappa2}")

    @property
    def c3(self) -> float:
        return self.kappa3 / (6.0 * self.kappa2 ** 1.5)

    @property
    def c4(self) -> float:
        return self.kappa4 / (24.0 * self.kappa2 ** 2)

    @property
    def c6(self) -> float:
        k6 = self.kappa6 or 0.0
        return k6 / (720.0 * self.kappa2 ** 3) + self.kappa3 ** 2 / (72.0 * self.kappa2 ** 3)

    @classmethod
    def from_polys(cls, polys: Sequence[LambdaPoly], lam: float) -> "GramCharlierCoeffs":
        vals = [p.evaluate(lam) for p in polys]
        vals += [0.0] * (4 - len(vals))
        return cls(*vals[:4], *(vals[4:6]))


def gc_density(order: int, coeffs: GramCharlierCoeffs, x: float) -> float:
    """Gram-Charlier type-A density of order 2, 3 or 4 at ``x``."""
    if order not in (2, 3, 4):
        raise DomainError(f"Gram-Charlier order must be 2, 3 or 4, got {order}")
    s = math.sqrt(coeffs.kappa2)
    z = (x - coeffs.kappa1) / s
    corr = 1.0
    if order >= 3:
        corr += coeffs.c3 * hermite(3, z)
    if order == 4:
        corr += coeffs.c4 * hermite(4, z) + coeffs.c6 * hermite(6, z)
    return math.exp(-0.5 * z * z) / _SQRT_2PI * corr / s


def factorial_moments(raw_moments: Sequence) -> list:
    """Factorial moments ``E[X(X-1)...(X-n+1)]`` for ``n = 1..K``.

    ``raw_moments[k-1]`` is ``E[X^k]``; entries may be numbers or
    :class:`LambdaPoly`.
    """
    raw = list(raw_moments)
    if not raw:
        raise DomainError("at least one raw moment is required")
    out = []
    for n in range(1, len(raw) + 1):
        total = None
        for k in range(1, n + 1):
            term = raw[k - 1] * stirling_first_signed(n, k)
            total = term if total is None else total + term
        out.append(total)
    return out


@dataclass(frozen=True)
class SeriesEstimate:
    partial_sums: tuple[float, ...]
    last_gap: float

    @property
    def value(self) -> float:
        return self.partial_sums[-1]


def prob_count_equals(n: int, fact_moments: Sequence[float], truncation: int) -> SeriesEstimate:
    """Partial sums of ``P(X=n) = (1/n!) sum_i (-1)^i m_{n+i} / i!``.

    ``fact_moments[k-1]`` is ``m_k``; ``m_0 = 1`` is implied.  Convergence
    is not checked: the last gap ``|S_I - S_{I-1}|`` is only an indicator.
    """
    if n < 0 or truncation < 0:
        raise DomainError("n and the truncation must be non-negative")
    m = [1.0] + [float(v) for v in fact_moments]
    if n + truncation >= len(m):
        raise DomainError(f"need factorial moments up to order {n + truncation}, have {len(m) - 1}")
    sums, acc = [], 0.0
    for i in range(truncation + 1):
        acc += (-1) ** i * m[n + i] / factorial(i)
        sums.append(acc / factorial(n))
    gap = abs(sums[-1] - sums[-2]) if len(sums) > 1 else abs(sums[0])
    return SeriesEstimate(tuple(sums), gap)


def _positive(lam: float):
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")


def connectivity_lower_bound(spec: GraphSpec, model: ModelConfig, lam: float) -> float:
    """Second-moment bound ``P(N>0) >= (E N)^2 / E[N^2]``."""
    _positive(lam)
    m1 = moment_poly(1, spec, model).evaluate(lam)
    m2 = moment_poly(2, spec, model).evaluate(lam)
    if m2 <= 0:
        raise DomainError("second moment vanishes")
    return m1 * m1 / m2


def connectivity_series(spec: GraphSpec, model: ModelConfig, lam: float, order: int) -> SeriesEstimate:
    """Alternating-series estimate of ``P(N>0)`` from moments up to ``order``."""
    _positive(lam)
    if order < 1:
        raise DomainError("series order must be >= 1")
    raw = [moment_poly(k, spec, model).evaluate(lam) for k in range(1, order + 1)]
    s = prob_count_equals(0, factorial_moments(raw), order)
    return SeriesEstimate(tuple(1.0 - v for v in s.partial_sums), s.last_gap)


def berry_esseen_rate(r: int, lam: float) -> tuple[float, float]:
    """Kolmogorov-distance rate ``lam^(-1/(4r-2))`` and its exponent.

    The constant in front is unknown, so this is a rate, not a bound.
    """
    if r < 2:
        raise DomainError("r must be >= 2")
    _positive(lam)
    expo = 1.0 / (4 * r - 2)
    return lam ** -expo, expo


def joint_correlation(specs: Sequence[GraphSpec], model: ModelConfig, lam: float) -> float:
    """Correlation of two subgraph counts at intensity ``lam``."""
    _positive(lam)
    g1, g2 = _pair(specs)
    cov = joint_cumulant([g1, g2], model).value.evaluate(lam)
    v1 = cumulant_poly(2, g1, model).evaluate(lam)
    v2 = cumulant_poly(2, g2, model).evaluate(lam)
    if v1 <= 0 or v2 <= 0:
        raise DomainError("zero variance")
    return cov / math.sqrt(v1 * v2)


def limit_correlation(specs: Sequence[GraphSpec], model: ModelConfig) -> float:
    """Large-intensity limit of the correlation, from leading coefficients."""
    g1, g2 = _pair(specs)
    cov = joint_cumulant([g1, g2], model).value
    v1 = cumulant_poly(2, g1, model)
    v2 = cumulant_poly(2, g2, model)
    if cov.degree * 2 != v1.degree + v2.degree:
        return 0.0
    return float(cov.leading()) / math.sqrt(float(v1.leading()) * float(v2.leading()))


def _pair(specs):
    specs = list(specs)
    if len(specs) != 2:
        raise DomainError("correlation needs exactly two graph specs")
    return specs
