"""Real polynomials and rational functions in the Laplace variable ``s``.

Coefficients are stored in ascending powers of ``s``.  Both types are
immutable and hashable so that systems built from them can be used as cache
keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

# roots closer than this (relative) are treated as one cluster when
# looking for common factors
CLUSTER_RTOL = 1e-4
# cluster centroids closer than this (relative) cancel
CANCEL_RTOL = 1e-7
# conjugate pairs closer than this are symmetrized
CONJ_TOL = 1e-7
# highest-order coefficients below this fraction of the operand scale are
# rounding noise left by additions
CHOP_RTOL = 1e-14


def _trim(c: np.ndarray, atol: float = 0.0) -> np.ndarray:
    n = len(c)
    while n > 0 and abs(c[n - 1]) <= atol:
        n -= 1
    return c[:n]


def symmetrize_conjugates(roots: np.ndarray, tol: float = CONJ_TOL) -> np.ndarray:
    """Force a root set to be exactly closed under conjugation."""
    roots = np.asarray(roots, dtype=complex)
    out = roots.copy()
    used = np.zeros(len(roots), dtype=bool)
    for i, z in enumerate(roots):
        if used[i]:
            continue
        used[i] = True
        scale = max(1.0, abs(z))
        if abs(z.imag) <= tol * scale:
            out[i] = z.real
            continue
        cand = [j for j in range(len(roots)) if not used[j]]
        if not cand:
            continue
        dist = [abs(roots[j] - z.conjugate()) for j in cand]
        k = int(np.argmin(dist))
        if dist[k] <= tol * scale:
            j = cand[k]
            used[j] = True
            m = 0.5 * (z + roots[j].conjugate())
            out[i] = m
            out[j] = m.conjugate()
    return out


def sort_roots(roots: Iterable[complex]) -> np.ndarray:
    r = np.asarray(list(roots), dtype=complex)
    if r.size == 0:
        return r
    order = np.lexsort((r.imag, r.real))
    return r[order]


def cluster_roots(roots: np.ndarray, rtol: float = CLUSTER_RTOL) -> list[tuple[complex, int]]:
    """Group numerically split multiple roots; returns (centroid, multiplicity)."""
    groups: list[list[complex]] = []
    for z in sort_roots(roots):
        for g in groups:
            if abs(z - g[0]) <= rtol * max(1.0, abs(g[0])):
                g.append(z)
                break
        else:
            groups.append([z])
    return [(complex(np.mean(g)), len(g)) for g in groups]


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial, ascending coefficients, no trailing zeros.

    The zero polynomial has an empty coefficient tuple and degree -1.
    """

    coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        c = _trim(np.asarray(self.coeffs, dtype=float).ravel())
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        object.__setattr__(self, "coeffs", tuple(float(x) for x in c))

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: float = 1.0) -> "Polynomial":
        if len(roots) == 0:
            return cls((lead,))
        c = P.polyfromroots(symmetrize_conjugates(np.asarray(roots, dtype=complex)))
        return cls(tuple(lead * np.real(c)))

    @classmethod
    def constant(cls, value: float) -> "Polynomial":
        return cls((float(value),))

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.coeffs, dtype=float)
        a.flags.writeable = False
        return a

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def lead(self) -> float:
        return self.coeffs[-1] if self.coeffs else 0.0

    def __call__(self, s):
        if self.is_zero():
            return np.zeros_like(np.asarray(s, dtype=complex))
        return P.polyval(s, self.array)

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-x for x in self.coeffs))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        scale = max(np.abs(self.array).max(), np.abs(other.array).max())
        c = P.polyadd(self.array, other.array)
        return Polynomial(tuple(_trim(c, CHOP_RTOL * scale)))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float, np.floating)):
            return Polynomial(tuple(float(other) * self.array))
        if not isinstance(other, Polynomial):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return Polynomial()
        return Polynomial(tuple(P.polymul(self.array, other.array)))

    __rmul__ = __mul__

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero():
            return Polynomial(), Polynomial()
        q, r = P.polydiv(self.array, other.array)
        return Polynomial(tuple(q)), Polynomial(tuple(r))

    def roots(self) -> np.ndarray:
        """Roots via companion-matrix eigenvalues, conjugate-symmetrized."""
        if self.degree() < 1:
            return np.zeros(0, dtype=complex)
        # leading coefficient may be tiny after cancellation; the companion
        # matrix is still well defined
        r = P.polyroots(self.array).astype(complex)
        return sort_roots(symmetrize_conjugates(r))

    def allclose(self, other: "Polynomial", rtol: float = 1e-9, atol: float = 1e-12) -> bool:
        if self.degree() != other.degree():
            return False
        return bool(np.allclose(self.array, other.array, rtol=rtol, atol=atol))


def _common_factor(num_roots: np.ndarray, den_roots: np.ndarray) -> list[complex]:
    nc = cluster_roots(num_roots)
    dc = cluster_roots(den_roots)
    common: list[complex] = []
    taken = [0] * len(dc)
    for c, m in nc:
        for k, (d, md) in enumerate(dc):
            if taken[k] >= md:
                continue
            if abs(c - d) <= CANCEL_RTOL * max(1.0, abs(c), abs(d)):
                n = min(m, md - taken[k])
                common.extend([0.5 * (c + d)] * n)
                taken[k] += n
                break
    return common


@dataclass(frozen=True)
class RationalFunction:
    """Canonical ratio of real polynomials: coprime (to tolerance), monic denominator."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if self.den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        num, den = self.num, self.den
        if num.is_zero():
            num, den = Polynomial(), Polynomial((1.0,))
        elif den.degree() > 0 and num.degree() > 0:
            common = _common_factor(num.roots(), den.roots())
            if common:
                f = Polynomial.from_roots(common)
                num = num.divmod(f)[0]
                den = den.divmod(f)[0]
        lead = den.lead
        if lead != 1.0:
            num = num * (1.0 / lead)
            den = den * (1.0 / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def from_coeffs(cls, num: Sequence[float], den: Sequence[float] = (1.0,)) -> "RationalFunction":
        return cls(Polynomial(tuple(num)), Polynomial(tuple(den)))

    @classmethod
    def constant(cls, value: float) -> "RationalFunction":
        return cls(Polynomial.constant(value), Polynomial((1.0,)))

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        return self.num(s) / self.den(s)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_proper(self) -> bool:
        return self.num.degree() <= self.den.degree()

    def is_strictly_proper(self) -> bool:
        return self.num.degree() < self.den.degree()

    def is_constant(self) -> bool:
        return self.den.degree() == 0 and self.num.degree() <= 0

    def high_frequency_gain(self) -> float:
        """Value at s = infinity for proper functions."""
        if not self.is_proper():
            return float("inf")
        if self.num.degree() < self.den.degree():
            return 0.0
        return self.num.lead / self.den.lead

    def poles(self) -> np.ndarray:
        return self.den.roots()

    def zeros(self) -> np.ndarray:
        return self.num.roots()

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def __add__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        if self.den.allclose(other.den, rtol=0, atol=0):
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other) -> "RationalFunction":
        return self + (-_as_rf(other))

    def __rsub__(self, other) -> "RationalFunction":
        return _as_rf(other) - self

    def __mul__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def reciprocal(self) -> "RationalFunction":
        return RationalFunction.constant(1.0) / self

    def allclose(self, other: "RationalFunction", rtol: float = 1e-9, atol: float = 1e-12) -> bool:
        return self.num.allclose(other.num, rtol, atol) and self.den.allclose(other.den, rtol, atol)

    def __repr__(self) -> str:
        return f"RationalFunction(num={list(self.num.coeffs)}, den={list(self.den.coeffs)})"


def _as_rf(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(x, Polynomial((1.0,)))
    return RationalFunction.constant(float(x))
