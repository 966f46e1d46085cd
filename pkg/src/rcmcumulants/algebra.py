"""Exact arithmetic over rational combinations of square roots.

:class:`AlgebraicScalar` represents ``sum_s q_s * sqrt(s)`` with ``s``
squarefree and ``q_s`` rational.  :class:`LambdaPoly` is a polynomial in the
intensity with scalar (or float) coefficients.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping

from .errors import DomainError

_TRIAL_LIMIT = 10**6


# ---------------------------------------------------------------------------
# squarefree decomposition
# ---------------------------------------------------------------------------


@lru_cache(maxsize=65536)
def square_part(n: int) -> tuple[int, int]:
    """Return ``(a, s)`` with ``n = a**2 * s`` and ``s`` squarefree.

    Trial division up to 10**6; any larger cofactor is handed to
    ``sympy.factorint``.
    """
    if n <= 0:
        raise DomainError(f"square_part needs a positive integer, got {n}")
    a, s = 1, 1
    m = n
    p = 2
    while p * p <= m and p <= _TRIAL_LIMIT:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            a *= p ** (e // 2)
            if e % 2:
                s *= p
        p += 1 if p == 2 else 2
    if m > 1:
        r = math.isqrt(m)
        if r * r == m:
            a *= r
        elif p * p > m:
            s *= m
        else:
            from sympy import factorint

            for q, e in factorint(m).items():
                a *= q ** (e // 2)
                if e % 2:
                    s *= q
    return a, s


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"expected a rational number, got {type(x).__name__}")


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------


class AlgebraicScalar:
    """Finite sum of ``rational * sqrt(squarefree)`` in canonical form."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | None = None):
        clean: dict[int, Fraction] = {}
        for s, q in (terms or {}).items():
            q = _as_fraction(q)
            if q == 0:
                continue
            a, t = square_part(int(s))
            q = q * a
            clean[t] = clean.get(t, Fraction(0)) + q
            if clean[t] == 0:
                del clean[t]
        self._terms = dict(sorted(clean.items()))
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[int, Fraction]) -> "AlgebraicScalar":
        obj = cls.__new__(cls)
        obj._terms = dict(sorted((s, q) for s, q in terms.items() if q != 0))
        obj._hash = None
        return obj

    @classmethod
    def rational(cls, q) -> "AlgebraicScalar":
        return cls({1: q})

    @classmethod
    def sqrt(cls, q) -> "AlgebraicScalar":
        """``sqrt(q)`` for a non-negative rational ``q``, rationalised.

        ``sqrt(a/b) = sqrt(a*b)/b``, so ``sqrt(12/7)`` becomes ``(2/7)*sqrt(21)``.
        """
        q = _as_fraction(q)
        if q < 0:
            raise DomainError("square root of a negative rational")
        if q == 0:
            return cls()
        return cls({q.numerator * q.denominator: Fraction(1, q.denominator)})

    @classmethod
    def inverse_sqrt(cls, n: int) -> "AlgebraicScalar":
        """``1/sqrt(n)`` normalised to ``sqrt(n)/n``."""
        if n <= 0:
            raise DomainError("inverse square root of a non-positive integer")
        return cls({n: Fraction(1, n)})

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(s == 1 for s in self._terms)

    def normalize(self) -> "AlgebraicScalar":
        # construction already canonicalises; kept for API symmetry
        return self

    # arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, AlgebraicScalar):
            return other
        if isinstance(other, (int, Fraction, Rational)):
            return AlgebraicScalar.rational(other)
        return None

    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self._terms)
        for s, q in o._terms.items():
            out[s] = out.get(s, Fraction(0)) + q
        return AlgebraicScalar._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicScalar._raw({s: -q for s, q in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, float):
            return float(self) - other
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        if isinstance(other, float):
            return other - float(self)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out: dict[int, Fraction] = {}
        for s1, q1 in self._terms.items():
            for s2, q2 in o._terms.items():
                # s1, s2 squarefree: sqrt(s1*s2) = g*sqrt((s1/g)*(s2/g))
                g = math.gcd(s1, s2)
                s = (s1 // g) * (s2 // g)
                out[s] = out.get(s, Fraction(0)) + q1 * q2 * g
        return AlgebraicScalar._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, float):
            return float(self) / other
        if isinstance(other, AlgebraicScalar):
            if not other.is_rational():
                raise DomainError("division is only defined by rational scalars")
            other = other._terms.get(1, Fraction(0))
        q = _as_fraction(other)
        if q == 0:
            raise DomainError("division by zero")
        return AlgebraicScalar._raw({s: v / q for s, v in self._terms.items()})

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise DomainError("scalar powers need a non-negative integer exponent")
        out = AlgebraicScalar.rational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # comparison / conversion ------------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __float__(self):
        return math.fsum(float(q) * math.sqrt(s) for s, q in self._terms.items())

    def __bool__(self):
        return bool(self._terms)

    def is_positive(self) -> bool:
        """Sign test; mixed signs are settled at 60 significant digits."""
        if not self._terms:
            return False
        pos = [(s, q) for s, q in self._terms.items() if q > 0]
        neg = [(s, -q) for s, q in self._terms.items() if q < 0]
        if not neg:
            return True
        if not pos:
            return False
        from mpmath import mp, mpf, sqrt as msqrt

        with mp.workdps(60):
            val = sum(mpf(q.numerator) / q.denominator * msqrt(s) for s, q in self._terms.items())
        return val > 0

    def to_json(self) -> list[dict]:
        return [{"sqrt": s, "num": q.numerator, "den": q.denominator} for s, q in self._terms.items()]

    @classmethod
    def from_json(cls, data: Iterable[Mapping]) -> "AlgebraicScalar":
        return cls({int(t["sqrt"]): Fraction(int(t["num"]), int(t["den"])) for t in data})

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for s, q in self._terms.items():
            if s == 1:
                parts.append(str(q))
            elif q == 1:
                parts.append(f"sqrt({s})")
            else:
                parts.append(f"{q}*sqrt({s})")
        return " + ".join(parts)


def inverse_power_sqrt(det: int, d: int) -> AlgebraicScalar:
    """``det ** (-d/2)`` as an exact scalar (rational when ``d`` is even)."""
    return _inverse_power_sqrt(int(det), int(d))


@lru_cache(maxsize=65536)
def _inverse_power_sqrt(det: int, d: int) -> AlgebraicScalar:
    if det <= 0:
        raise DomainError(f"determinant must be positive, got {det}")
    if d % 2 == 0:
        return AlgebraicScalar.rational(Fraction(1, det ** (d // 2)))
    # det^(-d/2) = sqrt(det) / det^((d+1)/2)
    return AlgebraicScalar({det: Fraction(1, det ** ((d + 1) // 2))})


# ---------------------------------------------------------------------------
# polynomials in lambda
# ---------------------------------------------------------------------------


def _is_zero(c) -> bool:
    if isinstance(c, AlgebraicScalar):
        return c.is_zero()
    return c == 0


class LambdaPoly:
    """Polynomial in the intensity with exact or float coefficients."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[int, object] | None = None):
        clean = {}
        for k, c in (coeffs or {}).items():
            k = int(k)
            if k < 0:
                raise DomainError("polynomial degrees must be non-negative")
            if not isinstance(c, (AlgebraicScalar, float)):
                c = AlgebraicScalar.rational(c)
            if not _is_zero(c):
                clean[k] = c
        self._coeffs = dict(sorted(clean.items()))

    @classmethod
    def monomial(cls, degree: int, coeff) -> "LambdaPoly":
        return cls({degree: coeff})

    @property
    def coeffs(self) -> dict[int, object]:
        return dict(self._coeffs)

    def __getitem__(self, k: int):
        return self._coeffs.get(k, AlgebraicScalar())

    @property
    def degree(self) -> int:
        return max(self._coeffs) if self._coeffs else -1

    @property
    def min_degree(self) -> int:
        return min(self._coeffs) if self._coeffs else -1

    def leading(self):
        return self._coeffs[self.degree]

    def is_zero(self) -> bool:
        return not self._coeffs

    def is_exact(self) -> bool:
        return all(isinstance(c, AlgebraicScalar) for c in self._coeffs.values())

    def _coerce(self, other):
        if isinstance(other, LambdaPoly):
            return other
        if isinstance(other, (int, Fraction, AlgebraicScalar, float)):
            return LambdaPoly({0: other})
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self._coeffs)
        for k, c in o._coeffs.items():
            out[k] = out[k] + c if k in out else c
        return LambdaPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LambdaPoly({k: -c for k, c in self._coeffs.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out: dict[int, object] = {}
        for k1, c1 in self._coeffs.items():
            for k2, c2 in o._coeffs.items():
                k = k1 + k2
                out[k] = out[k] + c1 * c2 if k in out else c1 * c2
        return LambdaPoly(out)

    __rmul__ = __mul__

    def scale(self, c) -> "LambdaPoly":
        return LambdaPoly({k: v * c for k, v in self._coeffs.items()})

    def __truediv__(self, q):
        return LambdaPoly({k: v / q for k, v in self._coeffs.items()})

    def __pow__(self, k: int):
        out = LambdaPoly({0: 1})
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._coeffs == o._coeffs

    def __hash__(self):
        return hash(tuple(self._coeffs.items()))

    def evaluate(self, lam: float) -> float:
        """Value at ``lam >= 0``; scalars are converted to float last."""
        lam = float(lam)
        if lam < 0:
            raise DomainError("the intensity must be non-negative")
        return math.fsum(float(c) * lam**k for k, c in self._coeffs.items())

    __call__ = evaluate

    def to_json(self) -> dict:
        return {str(k): (c.to_json() if isinstance(c, AlgebraicScalar) else float(c))
                for k, c in self._coeffs.items()}

    @classmethod
    def from_json(cls, data: Mapping) -> "LambdaPoly":
        return cls({int(k): (AlgebraicScalar.from_json(v) if isinstance(v, list) else float(v))
                    for k, v in data.items()})

    def __repr__(self):
        if not self._coeffs:
            return "0"
        return " + ".join(f"({c})*λ^{k}" for k, c in sorted(self._coeffs.items(), reverse=True))


# ---------------------------------------------------------------------------
# integer linear algebra and Stirling numbers
# ---------------------------------------------------------------------------


def det_fraction_free(M) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination with row pivoting."""
    A = [[int(x) for x in row] for row in M]
    k = len(A)
    if any(len(row) != k for row in A):
        raise DomainError("determinant needs a square matrix")
    if k == 0:
        return 1
    sign = 1
    prev = 1
    for s in range(k - 1):
        if A[s][s] == 0:
            swap = next((i for i in range(s + 1, k) if A[i][s] != 0), None)
            if swap is None:
                return 0
            A[s], A[swap] = A[swap], A[s]
            sign = -sign
        piv = A[s][s]
        for i in range(s + 1, k):
            for j in range(s + 1, k):
                A[i][j] = (piv * A[i][j] - A[i][s] * A[s][j]) // prev
        prev = piv
    return sign * A[k - 1][k - 1]


@lru_cache(maxsize=None)
def stirling_first_signed(n: int, k: int) -> int:
    """Signed Stirling number of the first kind ``s(n, k)``.

    ``x(x-1)...(x-n+1) = sum_k s(n,k) x**k``.
    """
    if n < 0 or k < 0:
        raise DomainError("Stirling numbers need non-negative arguments")
    if k > n:
        raise DomainError(f"s({n},{k}) is undefined for k > n")
    if n == 0:
        return 1 if k == 0 else 0
    if k == 0:
        return 0
    prev_k = stirling_first_signed(n - 1, k - 1) if k - 1 <= n - 1 else 0
    same_k = stirling_first_signed(n - 1, k) if k <= n - 1 else 0
    return prev_k - (n - 1) * same_k
