"""Square LTI systems: transfer matrices, realizations and pole/zero structure."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import permutations
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.signal
from numpy.polynomial import polynomial as P

from .errors import (
    ImproperSystemError,
    NonsquareSystemError,
    PoleOnGridError,
    RankDeficientError,
    ZeroCrossCheckError,
)
from .polynomials import Polynomial, RationalFunction, sort_roots, symmetrize_conjugates

TOL_AXIS = 1e-9
# singular-value cutoff (relative) for numerical rank decisions
RANK_RTOL = 1e-9
# pencil eigenvalues beyond this magnitude are zeros at infinity
INFINITE_ZERO = 1e9
ZERO_MATCH_TOL = 1e-5
# pencil zeros beyond this multiple of the pole/zero scale are treated as near-infinite
FAR_ZERO_RATIO = 1e4


@dataclass(frozen=True)
class TransferMatrix:
    """Square matrix of canonical rational functions, ``G(s)``."""

    entries: tuple[tuple[RationalFunction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("transfer matrix must be a non-empty rectangular grid")
        if len(rows) != len(rows[0]):
            raise NonsquareSystemError(f"transfer matrix is {len(rows)}x{len(rows[0])}, must be square")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def siso(cls, num: Sequence[float], den: Sequence[float] = (1.0,)) -> "TransferMatrix":
        return cls(((RationalFunction.from_coeffs(num, den),),))

    @classmethod
    def from_coeffs(cls, num, den) -> "TransferMatrix":
        """Build from nested coefficient grids ``num[i][j]``, ``den[i][j]`` (ascending)."""
        return cls(tuple(
            tuple(RationalFunction.from_coeffs(n, d) for n, d in zip(nrow, drow))
            for nrow, drow in zip(num, den)
        ))

    @classmethod
    def static(cls, gain) -> "TransferMatrix":
        gain = np.atleast_2d(np.asarray(gain, dtype=float))
        return cls(tuple(tuple(RationalFunction.constant(x) for x in row) for row in gain))

    @property
    def p(self) -> int:
        return len(self.entries)

    def is_siso(self) -> bool:
        return self.p == 1

    def __getitem__(self, ij) -> RationalFunction:
        i, j = ij
        return self.entries[i][j]

    def __iter__(self):
        for row in self.entries:
            yield from row

    def __call__(self, s) -> np.ndarray:
        """Evaluate at complex points; result has shape ``s.shape + (p, p)``."""
        s = np.asarray(s, dtype=complex)
        out = np.empty(s.shape + (self.p, self.p), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, g in enumerate(row):
                out[..., i, j] = g(s)
        return out

    def is_proper(self) -> bool:
        return all(g.is_proper() for g in self)

    def feedthrough(self) -> np.ndarray:
        """``G(infinity)``; only meaningful for proper systems."""
        return np.array([[g.high_frequency_gain() for g in row] for row in self.entries])

    def map(self, fn) -> "TransferMatrix":
        return TransferMatrix(tuple(tuple(fn(i, j, g) for j, g in enumerate(row))
                                    for i, row in enumerate(self.entries)))

    def scale(self, k: float) -> "TransferMatrix":
        return self.map(lambda i, j, g: g * float(k))

    def affine(self, k1: float, k2: float) -> "TransferMatrix":
        """``k1*I + k2*G``."""
        return shift_by_alpha(self.scale(k2), -float(k1))

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        p = self.p
        return TransferMatrix(tuple(
            tuple(sum((self[i, k] * other[k, j] for k in range(1, p)), self[i, 0] * other[0, j])
                  for j in range(p))
            for i in range(p)))

    def coefficient_grids(self) -> tuple[list, list]:
        num = [[list(g.num.coeffs) or [0.0] for g in row] for row in self.entries]
        den = [[list(g.den.coeffs) for g in row] for row in self.entries]
        return num, den

    @cached_property
    def fingerprint(self) -> str:
        num, den = self.coefficient_grids()
        blob = json.dumps({"num": num, "den": den}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Realization ``C (sI - A)^-1 B + D``; ``n = 0`` encodes a static gain."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    minimal: bool = False

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        p, m = D.shape
        n = np.asarray(self.A).size and np.atleast_2d(np.asarray(self.A)).shape[0]
        A = np.asarray(self.A, dtype=float).reshape(n, n)
        B = np.asarray(self.B, dtype=float).reshape(n, m)
        C = np.asarray(self.C, dtype=float).reshape(p, n)
        for name, arr in (("A", A), ("B", B), ("C", C), ("D", D)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.D.shape[0]

    def __call__(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = np.empty(s.shape + self.D.shape, dtype=complex)
        eye = np.eye(self.n)
        for k, sk in np.ndenumerate(s):
            out[k] = self.D if self.n == 0 else self.C @ np.linalg.solve(sk * eye - self.A, self.B) + self.D
        return out

    def is_minimal(self, rtol: float = RANK_RTOL) -> bool:
        n = self.n
        if n == 0:
            return True
        return (_reachable_basis(self.A, self.B, rtol).shape[1] == n
                and _reachable_basis(self.A.T, self.C.T, rtol).shape[1] == n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateSpace):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in "ABCD")

    __hash__ = None


@dataclass(frozen=True)
class SystemClassification:
    proper: bool
    biproper: bool
    stable: bool
    has_axis_pole: bool
    n_p: int
    poles: tuple[complex, ...]
    normal_rank: int
    transmission_zeros: tuple[complex, ...]
    minimum_phase: bool
    p: int = field(default=1)

    @property
    def full_rank(self) -> bool:
        return self.normal_rank == self.p


# ---------------------------------------------------------------------------
# realization

def _reachable_basis(A: np.ndarray, B: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the reachable subspace (block Krylov staircase)."""
    n = A.shape[0]
    scale = max(np.linalg.norm(A, 2) if n else 0.0, np.linalg.norm(B, 2) if B.size else 0.0, 1.0)
    V = np.zeros((n, 0))
    W = B
    while V.shape[1] < n and W.size:
        for _ in range(2):
            W = W - V @ (V.T @ W)
        U, sv, _ = np.linalg.svd(W, full_matrices=False)
        k = int(np.sum(sv > rtol * scale))
        if k == 0:
            break
        k = min(k, n - V.shape[1])
        new = U[:, :k]
        V = np.hstack([V, new])
        W = A @ new
    return V


def minimal_realization(A, B, C, D, rtol: float = RANK_RTOL) -> StateSpace:
    """Kalman reduction: keep the reachable, then the observable part."""
    A, B, C, D = (np.atleast_2d(np.asarray(x, dtype=float)) for x in (A, B, C, D))
    if A.size == 0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, D.shape[1])), np.zeros((D.shape[0], 0)), D, minimal=True)
    V = _reachable_basis(A, B, rtol)
    A, B, C = V.T @ A @ V, V.T @ B, C @ V
    if A.shape[0]:
        W = _reachable_basis(A.T, C.T, rtol)
        A, B, C = W.T @ A @ W, W.T @ B, C @ W
    return StateSpace(A, B, C, D, minimal=True)


def _distinct_denominators(column: Sequence[RationalFunction]) -> list[Polynomial]:
    dens: list[Polynomial] = []
    for g in column:
        if g.den.degree() > 0 and not any(g.den.allclose(d) for d in dens):
            dens.append(g.den)
    return dens


def _column_common(column: Sequence[RationalFunction]) -> tuple[list[Polynomial], Polynomial]:
    """Numerators over the common denominator ``d`` of one column."""
    dens = _distinct_denominators(column)
    d = Polynomial((1.0,))
    for q in dens:
        d = d * q
    nums = []
    for g in column:
        cof = Polynomial((1.0,))
        matched = False
        for q in dens:
            if not matched and g.den.allclose(q):
                matched = True
                continue
            cof = cof * q
        nums.append(g.num * cof)
    return nums, d


def _column_realization(column: Sequence[RationalFunction]):
    """Controllable canonical form of one (proper) input column."""
    nums, d = _column_common(column)
    n = d.degree()
    p = len(column)
    C = np.zeros((p, n))
    D = np.zeros(p)
    for i, N in enumerate(nums):
        if N.is_zero():
            continue
        c = np.zeros(n + 1)
        c[:N.degree() + 1] = N.array
        D[i] = c[n]
        C[i, :] = c[:n] - D[i] * d.array[:n]
    A = np.zeros((n, n))
    if n:
        A[:-1, 1:] = np.eye(n - 1)
        A[-1, :] = -d.array[:n]
    B = np.zeros((n, 1))
    if n:
        B[-1, 0] = 1.0
    return A, B, C, D


def _proper_realization(entries) -> StateSpace:
    p = len(entries)
    blocks = [_column_realization([entries[i][j] for i in range(p)]) for j in range(p)]
    A = scipy.linalg.block_diag(*[b[0] for b in blocks]) if blocks else np.zeros((0, 0))
    n = sum(b[0].shape[0] for b in blocks)
    A = np.asarray(A).reshape(n, n)
    B = np.zeros((n, p))
    C = np.zeros((p, n))
    D = np.zeros((p, p))
    k = 0
    for j, (Aj, Bj, Cj, Dj) in enumerate(blocks):
        nj = Aj.shape[0]
        B[k:k + nj, j] = Bj[:, 0]
        C[:, k:k + nj] = Cj
        D[:, j] = Dj
        k += nj
    if n:
        # companion blocks of high-degree denominators are badly scaled;
        # a diagonal similarity keeps the rank decisions below meaningful
        A, (scl, _) = scipy.linalg.matrix_balance(A, permute=False, separate=True)
        B = B / scl[:, None]
        C = C * scl[None, :]
    return minimal_realization(A, B, C, D)


@lru_cache(maxsize=256)
def _strictly_proper_part_realization(G: TransferMatrix) -> StateSpace:
    def sp(g: RationalFunction) -> RationalFunction:
        if g.is_strictly_proper():
            return g
        return RationalFunction(g.num.divmod(g.den)[1], g.den)

    return _proper_realization([[sp(g) for g in row] for row in G.entries])


@lru_cache(maxsize=256)
def realize(G: TransferMatrix) -> StateSpace:
    """Minimal state-space realization of a proper transfer matrix."""
    if not G.is_proper():
        raise ImproperSystemError("cannot realize an improper transfer matrix")
    return _proper_realization(G.entries)


def _chop(c: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Zero the rounding noise that ss2tf leaves in high-order numerator terms."""
    c = np.array(c, dtype=float)
    c[np.abs(c) <= rtol * max(np.abs(c).max(), 1e-300)] = 0.0
    return c


def ss_to_tf(ss: StateSpace) -> TransferMatrix:
    p, m = ss.D.shape
    if p != m:
        raise NonsquareSystemError(f"state-space system is {p}x{m}, must be square")
    if ss.n == 0:
        return TransferMatrix.static(ss.D)
    cols = []
    for j in range(m):
        num, den = scipy.signal.ss2tf(ss.A, ss.B, ss.C, ss.D, input=j)
        cols.append([RationalFunction.from_coeffs(_chop(num[i][::-1]), den[::-1]) for i in range(p)])
    return TransferMatrix(tuple(tuple(cols[j][i] for j in range(m)) for i in range(p)))


# ---------------------------------------------------------------------------
# poles, zeros, rank

@lru_cache(maxsize=256)
def _poles(G: TransferMatrix) -> tuple[complex, ...]:
    if G.is_siso():
        return tuple(G[0, 0].poles())
    A = _strictly_proper_part_realization(G).A
    if A.size == 0:
        return ()
    ev = np.linalg.eigvals(A)
    return tuple(sort_roots(symmetrize_conjugates(ev)))


def poles(G: TransferMatrix) -> np.ndarray:
    """McMillan poles with multiplicity, sorted by real then imaginary part."""
    return np.array(_poles(G), dtype=complex)


def _test_points(G: TransferMatrix, count: int = 5) -> np.ndarray:
    rng = np.random.default_rng(20240611)
    pl = poles(G)
    scale = max(1.0, float(np.max(np.abs(pl))) if pl.size else 1.0)
    pts = []
    while len(pts) < count:
        z = scale * (rng.uniform(-1.5, 1.5) + 1j * rng.uniform(0.3, 1.5))
        if pl.size == 0 or np.min(np.abs(pl - z)) > 1e-2 * scale:
            pts.append(z)
    return np.array(pts)


def _numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def normal_rank(G: TransferMatrix) -> int:
    """Rank over the rational-function field, via random evaluation points."""
    return max(_numerical_rank(M) for M in G(_test_points(G)))


@lru_cache(maxsize=256)
def _test_values(G: TransferMatrix) -> np.ndarray:
    return G(_test_points(G))


def shifted_rank_deficient(G: TransferMatrix, alpha: float) -> bool:
    """Whether ``G - alpha*I`` loses normal rank."""
    vals = _test_values(G) - alpha * np.eye(G.p)
    return max(_numerical_rank(M) for M in vals) < G.p


def _column_numerators(G: TransferMatrix) -> tuple[list[list[Polynomial]], list[Polynomial]]:
    """Write ``G = N(s) diag(d_j)^-1`` with polynomial ``N``."""
    p = G.p
    cols = [_column_common([G[i, j] for i in range(p)]) for j in range(p)]
    N = [[cols[j][0][i] for j in range(p)] for i in range(p)]
    return N, [c[1] for c in cols]


def _poly_det(N: list[list[Polynomial]]) -> Polynomial:
    p = len(N)
    total = Polynomial()
    for perm in permutations(range(p)):
        sign = round(np.linalg.det(np.eye(p)[list(perm)]))
        term = Polynomial((float(sign),))
        for i, j in enumerate(perm):
            term = term * N[i][j]
        total = total + term
    return total


def determinant(G: TransferMatrix) -> RationalFunction:
    """Rational determinant ``det N(s) / prod d_j`` with one cancellation pass."""
    if G.p == 1:
        return G[0, 0]
    N, dcols = _column_numerators(G)
    den = Polynomial((1.0,))
    for d in dcols:
        den = den * d
    return RationalFunction(_poly_det(N), den)


def _minor(G: TransferMatrix, i: int, j: int) -> TransferMatrix:
    return TransferMatrix(tuple(
        tuple(g for c, g in enumerate(row) if c != j)
        for r, row in enumerate(G.entries) if r != i))


def invert(G: TransferMatrix) -> TransferMatrix:
    """Algebraic inverse (may be improper).  Raises RankDeficientError."""
    if normal_rank(G) < G.p:
        raise RankDeficientError("transfer matrix does not have full normal rank")
    if G.is_siso():
        return TransferMatrix(((G[0, 0].reciprocal(),),))
    det = determinant(G)
    p = G.p
    inv = [[None] * p for _ in range(p)]
    for i in range(p):
        for j in range(p):
            cof = determinant(_minor(G, i, j)) * float((-1) ** (i + j))
            inv[j][i] = cof / det
    return TransferMatrix(tuple(tuple(row) for row in inv))


def _pencil_zeros(ss: StateSpace) -> np.ndarray:
    n, p = ss.n, ss.p
    if n == 0:
        return np.zeros(0, dtype=complex)
    if np.linalg.cond(ss.D) < 1e8:
        z = np.linalg.eigvals(ss.A - ss.B @ np.linalg.solve(ss.D, ss.C))
    else:
        M = np.block([[ss.A, ss.B], [ss.C, ss.D]])
        N = scipy.linalg.block_diag(np.eye(n), np.zeros((p, p)))
        a, b = scipy.linalg.eig(M, N, right=False, homogeneous_eigvals=True)
        finite = np.abs(b) * INFINITE_ZERO > np.abs(a)
        z = a[finite] / b[finite]
    return sort_roots(symmetrize_conjugates(z))


def _match_multiset(a: np.ndarray, b: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Greedy match; returns the unmatched parts of ``a`` and ``b``."""
    b = list(b)
    left = []
    for z in a:
        if b:
            d = np.abs(np.asarray(b) - z)
            k = int(np.argmin(d))
            if d[k] <= tol * max(1.0, abs(z)):
                b.pop(k)
                continue
        left.append(z)
    return np.array(left, dtype=complex), np.array(b, dtype=complex)


def _cross_check_zeros(G: TransferMatrix, pencil: np.ndarray) -> None:
    det_zeros = determinant(G).zeros()
    missing, extra = _match_multiset(det_zeros, pencil, ZERO_MATCH_TOL)
    if missing.size:
        raise ZeroCrossCheckError(f"determinant zeros {missing} not found by the pencil route")
    # zeros hidden in det G coincide with poles (pole/zero at the same point)
    unexplained, _ = _match_multiset(extra, poles(G), ZERO_MATCH_TOL)
    # a nearly singular feedthrough puts zeros near infinity; the polynomial
    # determinant loses them to rounding, so only finite-scale ones must agree
    known = np.concatenate([np.abs(det_zeros), np.abs(poles(G)), [1.0]])
    unexplained = unexplained[np.abs(unexplained) < FAR_ZERO_RATIO * known.max()]
    if unexplained.size:
        raise ZeroCrossCheckError(f"pencil zeros {unexplained} are neither det zeros nor poles")


def transmission_zeros(G: TransferMatrix, cross_check: bool = True) -> np.ndarray:
    """Finite transmission zeros.  Raises RankDeficientError."""
    if G.is_siso():
        if G[0, 0].is_zero():
            raise RankDeficientError("zero transfer function")
        return G[0, 0].zeros()
    if normal_rank(G) < G.p:
        raise RankDeficientError("transfer matrix does not have full normal rank")
    if not G.is_proper():
        return poles(invert(G))
    z = _pencil_zeros(realize(G))
    if cross_check:
        _cross_check_zeros(G, z)
    return z


def shift_by_alpha(G: TransferMatrix, alpha: float) -> TransferMatrix:
    """``G - alpha*I``."""
    alpha = float(alpha)
    if alpha == 0.0:
        return G
    return G.map(lambda i, j, g: g - alpha if i == j else g)


def shifted_zeros(G: TransferMatrix, alpha: float) -> np.ndarray:
    """Transmission zeros of ``G - alpha*I`` without rebuilding the system.

    Caller must rule out rank deficiency first.
    """
    if G.is_siso():
        g = G[0, 0]
        # no relative chopping here: a tiny leading term is a real zero near infinity
        return Polynomial(tuple(P.polysub(g.num.array, float(alpha) * g.den.array))).roots()
    if not G.is_proper():
        return transmission_zeros(shift_by_alpha(G, alpha), cross_check=False)
    ss = realize(G)
    shifted = StateSpace(ss.A, ss.B, ss.C, ss.D - alpha * np.eye(G.p))
    return _pencil_zeros(shifted)


def is_minimum_phase_zeros(zeros: np.ndarray) -> bool:
    return bool(np.all(np.real(zeros) < -TOL_AXIS))


def classify(G: TransferMatrix) -> SystemClassification:
    pl = poles(G)
    proper = G.is_proper()
    biproper = proper and _numerical_rank(G.feedthrough()) == G.p
    re = pl.real
    has_axis_pole = bool(np.any(np.abs(re) <= TOL_AXIS))
    stable = proper and bool(np.all(re < -TOL_AXIS))
    n_p = int(np.sum(re > TOL_AXIS))
    rank = normal_rank(G)
    if rank == G.p:
        zeros = transmission_zeros(G)
        mp = is_minimum_phase_zeros(zeros)
    else:
        zeros = np.zeros(0, dtype=complex)
        mp = False
    return SystemClassification(
        proper=proper, biproper=biproper, stable=stable, has_axis_pole=has_axis_pole,
        n_p=n_p, poles=tuple(pl), normal_rank=rank, transmission_zeros=tuple(zeros),
        minimum_phase=mp, p=G.p)


def axis_pole_frequencies(G: TransferMatrix) -> np.ndarray:
    """Nonnegative frequencies of imaginary-axis poles (deduplicated)."""
    pl = poles(G)
    w = np.abs(pl[np.abs(pl.real) <= TOL_AXIS].imag)
    if w.size == 0:
        return w
    w = np.sort(w)
    keep = [w[0]]
    for x in w[1:]:
        if x - keep[-1] > 1e-7 * max(1.0, x):
            keep.append(x)
    return np.array(keep)


def freq_response(G: TransferMatrix, omega: float) -> np.ndarray:
    """``G(j*omega)``.  Raises PoleOnGridError on an imaginary-axis pole."""
    s = 1j * float(omega)
    pl = poles(G)
    axis = pl[np.abs(pl.real) <= TOL_AXIS]
    if axis.size and np.min(np.abs(axis - s)) < TOL_AXIS:
        raise PoleOnGridError(f"j*{omega} is a pole of the system")
    return G(s)
