"""Soft and hard SRG regions as intersections of real-centred annuli.

A region is stored as a finite grid of centres ``alpha`` with inner radii
``r`` and outer radii ``R`` (``R`` may be ``inf``).  Because only finitely
many annuli are intersected, a computed region always contains the exact one.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import SoftRequiresStableError
from .lti import (
    TOL_AXIS,
    TransferMatrix,
    axis_pole_frequencies,
    classify,
    is_minimum_phase_zeros,
    poles,
    shifted_rank_deficient,
    shifted_zeros,
)

TOL_BAND = 1e-6
TOL_DIST = 1e-6
TOL_MARGIN = 1e-6
N_DIR = 720
ALPHA_CAP = 100.0

INSIDE, BOUNDARY_BAND, OUTSIDE = "inside", "boundary_band", "outside"
_STATUS = (INSIDE, BOUNDARY_BAND, OUTSIDE)

# inner radius reasons
SIGMA_MIN, NON_MINIMUM_PHASE, RANK_DEFICIENT = "sigma_min", "non_minimum_phase", "rank_deficient"
# outer radius reasons
SIGMA_MAX, UNSTABLE, IMPROPER = "sigma_max", "unstable", "improper"


@dataclass(frozen=True)
class FrequencyGrid:
    """Log-spaced scan of ``omega >= 0`` plus refinement near pole frequencies."""

    lo: float = 1e-4
    hi: float = 1e6
    count: int = 2000
    polish_iters: int = 50

    def describe(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "count": self.count, "polish_iters": self.polish_iters}


@dataclass(frozen=True)
class AlphaGrid:
    """Uniform grid of annulus centres; bounds default to the response extent."""

    lo: float | None = None
    hi: float | None = None
    count: int = 801
    augment: bool = True
    values: tuple[float, ...] | None = None


@dataclass(frozen=True)
class RadiusPair:
    alpha: float
    r: float
    R: float
    r_reason: str = SIGMA_MIN
    R_reason: str = SIGMA_MAX

    def __post_init__(self):
        if self.r_reason in (NON_MINIMUM_PHASE, RANK_DEFICIENT) and self.r != 0.0:
            raise ValueError(f"r must be 0 when reason is {self.r_reason}")
        if self.R_reason != SIGMA_MAX and not math.isinf(self.R):
            raise ValueError(f"R must be infinite when reason is {self.R_reason}")


class InnerRadius(NamedTuple):
    value: float
    reason: str


@dataclass(frozen=True)
class AffineGains:
    """Loop transformation ``k1 + k2 * L``."""

    k1: float = 0.0
    k2: float = 1.0

    def __post_init__(self):
        if self.k2 == 0:
            raise ValueError("k2 must be nonzero")

    def inverse(self) -> "AffineGains":
        return AffineGains(-self.k1 / self.k2, 1.0 / self.k2)


@dataclass(frozen=True)
class MembershipVerdict:
    status: str
    witness_alpha: float | None = None
    excess: float = 0.0

    def __post_init__(self):
        if self.status == OUTSIDE and self.witness_alpha is None:
            raise ValueError("an outside verdict needs a witness alpha")


@dataclass(frozen=True, eq=False)
class SrgRegion:
    alphas: np.ndarray
    r: np.ndarray
    R: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)
    r_reason: tuple[str, ...] = ()
    R_reason: tuple[str, ...] = ()

    def __post_init__(self):
        a = np.array(self.alphas, dtype=float)
        r = np.array(self.r, dtype=float)
        R = np.array(self.R, dtype=float)
        if not (a.ndim == r.ndim == R.ndim == 1 and len(a) == len(r) == len(R)):
            raise ValueError("alphas, r and R must be equal-length vectors")
        if len(a) < 2:
            raise ValueError("a region needs at least two annuli")
        if np.any(np.diff(a) <= 0):
            raise ValueError("alphas must be strictly increasing")
        if np.any(r < 0) or np.any(R < r) or np.any(np.isnan(R)) or np.any(np.isnan(r)):
            raise ValueError("radii must satisfy 0 <= r <= R")
        if self.kind not in ("soft", "hard"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.kind == "hard":
            inf = np.isinf(R)
            if inf.any() and not inf.all():
                raise ValueError("hard region must have all-finite or all-infinite outer radii")
        for name, arr in (("alphas", a), ("r", r), ("R", R)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        n = len(a)
        object.__setattr__(self, "r_reason", tuple(self.r_reason) or (SIGMA_MIN,) * n)
        object.__setattr__(self, "R_reason", tuple(self.R_reason) or (SIGMA_MAX,) * n)

    def __len__(self) -> int:
        return len(self.alphas)

    def pairs(self) -> list[RadiusPair]:
        return [RadiusPair(float(a), float(r), float(R), rr, Rr)
                for a, r, R, rr, Rr in zip(self.alphas, self.r, self.R, self.r_reason, self.R_reason)]

    @property
    def bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.R)))

    def same_as(self, other: "SrgRegion") -> bool:
        return (self.kind == other.kind and np.array_equal(self.alphas, other.alphas)
                and np.array_equal(self.r, other.r) and np.array_equal(self.R, other.R))


# ---------------------------------------------------------------------------
# frequency sweep and singular-value extrema

def _threads() -> int:
    try:
        n = int(os.environ.get("SRG_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _pmap(fn, items: list) -> list:
    n = _threads()
    if n <= 1 or len(items) < 64:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


@dataclass(frozen=True, eq=False)
class _Sweep:
    omegas: np.ndarray
    values: np.ndarray          # (n, p, p)
    feedthrough: np.ndarray | None   # G(inf) for proper systems
    axis_freqs: np.ndarray


@lru_cache(maxsize=64)
def _sweep(G: TransferMatrix, grid: FrequencyGrid) -> _Sweep:
    w = [np.logspace(math.log10(grid.lo), math.log10(grid.hi), grid.count)]
    axis = axis_pole_frequencies(G)
    for pl in poles(G):
        c = abs(pl.imag)
        if abs(pl.real) <= TOL_AXIS:
            off = max(1.0, c) * np.logspace(-8, -1, 29)
            w.append(c + off)
            w.append(c - off)
        elif c > 0:
            width = max(abs(pl.real), 1e-6 * c)
            w.append(c + width * np.linspace(-8, 8, 33))
    w.append([0.0])
    w = np.unique(np.concatenate(w))
    w = w[w >= 0]
    for c in axis:
        w = w[np.abs(w - c) > 1e-12 * max(1.0, c)]
    values = G(1j * w)
    D = G.feedthrough() if G.is_proper() else None
    return _Sweep(w, values, D, axis)


def _singular_values(M: np.ndarray) -> np.ndarray:
    """Singular values along the last two axes, descending; abs() for 1x1."""
    if M.shape[-1] == 1:
        return np.abs(M[..., 0, 0])[..., None]
    if M.shape[-1] == 2:
        # closed form; the small one via |det|/sigma_max keeps relative accuracy
        fro2 = np.sum(np.abs(M) ** 2, axis=(-2, -1))
        det = np.abs(M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0])
        disc = np.sqrt(np.maximum(fro2 * fro2 - 4.0 * det * det, 0.0))
        smax = np.sqrt(0.5 * (fro2 + disc))
        with np.errstate(invalid="ignore", divide="ignore"):
            smin = np.where(smax > 0, det / smax, 0.0)
        return np.stack([smax, smin], axis=-1)
    return np.linalg.svd(M, compute_uv=False)


def _sigma_at(G: TransferMatrix, omegas: np.ndarray, alphas: np.ndarray, which: int) -> np.ndarray:
    M = G(1j * omegas) - alphas[:, None, None] * np.eye(G.p)
    with np.errstate(invalid="ignore"):
        sv = _singular_values(M)
    out = sv[:, which]
    return np.where(np.isfinite(out), out, np.inf)


def _golden(G, alphas, a, b, which, sign, iters):
    """Vectorized golden-section search of ``sign*sigma`` over ``[a, b]``."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a = a.copy()
    b = b.copy()
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc = sign * _sigma_at(G, c, alphas, which)
    fd = sign * _sigma_at(G, d, alphas, which)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        newc = np.where(left, b - g * (b - a), d)
        newd = np.where(left, c, a + g * (b - a))
        x = np.where(left, newc, newd)
        fx = sign * _sigma_at(G, x, alphas, which)
        fc, fd = np.where(left, fx, fd), np.where(left, fc, fx)
        c, d = newc, newd
    return sign * np.minimum(fc, fd)


def _extremum(G: TransferMatrix, sw: _Sweep, alphas: np.ndarray, grid: FrequencyGrid, kind: str) -> np.ndarray:
    which, sign = (-1, 1.0) if kind == "min" else (0, -1.0)
    n_w = len(sw.omegas)
    out = np.empty(len(alphas))
    chunk = max(1, 2_000_000 // (n_w * G.p * G.p))
    eye = np.eye(G.p)
    for k in range(0, len(alphas), chunk):
        al = alphas[k:k + chunk]
        M = sw.values[None] - al[:, None, None, None] * eye
        with np.errstate(invalid="ignore"):
            sv = _singular_values(M)[..., which]
        sv = np.where(np.isfinite(sv), sv, np.inf)
        idx = np.argmin(sign * sv, axis=1)
        best = sv[np.arange(len(al)), idx]
        lo = sw.omegas[np.maximum(idx - 1, 0)]
        hi = sw.omegas[np.minimum(idx + 1, n_w - 1)]
        polished = _golden(G, al, lo, hi, which, sign, grid.polish_iters)
        best = np.where(sign * polished < sign * best, polished, best)
        if sw.feedthrough is not None:
            lim = _singular_values(sw.feedthrough[None] - al[:, None, None] * eye)[:, which]
            best = np.where(sign * lim < sign * best, lim, best)
        out[k:k + chunk] = best
    return out


def _sigma_extrema_many(G: TransferMatrix, alphas: np.ndarray, grid: FrequencyGrid):
    alphas = np.asarray(alphas, dtype=float)
    sw = _sweep(G, grid)
    smin = _extremum(G, sw, alphas, grid, "min")
    if not G.is_proper() or sw.axis_freqs.size:
        smax = np.full(len(alphas), np.inf)
    else:
        smax = _extremum(G, sw, alphas, grid, "max")
    return smin, smax


def sigma_extrema(G: TransferMatrix, alpha: float, grid: FrequencyGrid = FrequencyGrid()) -> tuple[float, float]:
    """Infimum and supremum over frequency of the extreme singular values of ``G(jw) - alpha*I``."""
    smin, smax = _sigma_extrema_many(G, np.array([float(alpha)]), grid)
    return float(smin[0]), float(smax[0])


# ---------------------------------------------------------------------------
# hard radii

def _phase_status(G: TransferMatrix, alpha: float) -> str:
    if shifted_rank_deficient(G, alpha):
        return RANK_DEFICIENT
    if is_minimum_phase_zeros(shifted_zeros(G, alpha)):
        return SIGMA_MIN
    return NON_MINIMUM_PHASE


def _outer_reason(G: TransferMatrix) -> str:
    c = classify(G)
    if c.stable:
        return SIGMA_MAX
    return UNSTABLE if c.proper else IMPROPER


def hard_radius_R(G: TransferMatrix, alpha: float, grid: FrequencyGrid = FrequencyGrid()) -> float:
    """Smallest upper bound on the truncated gain of ``G - alpha*I``."""
    if _outer_reason(G) != SIGMA_MAX:
        return math.inf
    return sigma_extrema(G, alpha, grid)[1]


def hard_radius_r(G: TransferMatrix, alpha: float, grid: FrequencyGrid = FrequencyGrid()) -> InnerRadius:
    """Largest lower bound on the truncated gain of ``G - alpha*I``."""
    status = _phase_status(G, alpha)
    if status != SIGMA_MIN:
        return InnerRadius(0.0, status)
    return InnerRadius(sigma_extrema(G, alpha, grid)[0], SIGMA_MIN)


def hard_radii(G: TransferMatrix, alpha: float, grid: FrequencyGrid = FrequencyGrid()) -> RadiusPair:
    inner = hard_radius_r(G, alpha, grid)
    reason = _outer_reason(G)
    R = hard_radius_R(G, alpha, grid)
    return RadiusPair(float(alpha), inner.value, max(R, inner.value), inner.reason, reason)


# ---------------------------------------------------------------------------
# region assembly

def _default_alpha_range(G: TransferMatrix, grid: FrequencyGrid) -> tuple[float, float]:
    sw = _sweep(G, grid)
    V = sw.values
    H = 0.5 * (V + np.conj(np.swapaxes(V, -1, -2)))
    with np.errstate(invalid="ignore"):
        ev = np.linalg.eigvalsh(H[np.all(np.isfinite(H), axis=(1, 2))])
    ev = ev[np.isfinite(ev)]
    if sw.feedthrough is not None:
        ev = np.concatenate([ev.ravel(), np.linalg.eigvalsh(0.5 * (sw.feedthrough + sw.feedthrough.T))])
    ev = np.clip(ev, -ALPHA_CAP, ALPHA_CAP)
    lo, hi = float(ev.min()), float(ev.max())
    width = hi - lo
    return min(lo - 0.25 * width, -2.0), max(hi + 0.25 * width, 2.0)


def _bisect_transition(G: TransferMatrix, a: float, b: float, sa: str, sb: str) -> list[float]:
    """Shrink ``[a, b]`` to adjacent floats across which the status flips."""
    for _ in range(80):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        sm = _phase_status(G, m)
        if sm == sa:
            a = m
        else:
            b, sb = m, sm
    return [a, b]


def _alpha_values(G: TransferMatrix, agrid: AlphaGrid, wgrid: FrequencyGrid) -> np.ndarray:
    if agrid.values is not None:
        return np.unique(np.asarray(agrid.values, dtype=float))
    lo, hi = agrid.lo, agrid.hi
    if lo is None or hi is None:
        dlo, dhi = _default_alpha_range(G, wgrid)
        lo = dlo if lo is None else lo
        hi = dhi if hi is None else hi
    return np.linspace(lo, hi, agrid.count)


@lru_cache(maxsize=64)
def build_region(G: TransferMatrix, kind: str = "hard", agrid: AlphaGrid = AlphaGrid(),
                 wgrid: FrequencyGrid = FrequencyGrid(), require_stable: bool = True) -> SrgRegion:
    """Assemble the soft or hard region of ``G`` on a finite alpha grid.

    ``require_stable=False`` builds the SISO hull of the frequency response
    for unstable systems (radii from the response extrema, no stability gate).
    """
    if kind not in ("soft", "hard"):
        raise ValueError(f"unknown region kind {kind!r}")
    cls = classify(G)
    if kind == "soft" and require_stable and not cls.stable:
        raise SoftRequiresStableError("the soft region is only defined here for stable systems")
    alphas = _alpha_values(G, agrid, wgrid)
    n_aug = 0
    if kind == "hard":
        status = _pmap(lambda a: _phase_status(G, float(a)), list(alphas))
        if agrid.augment and agrid.values is None:
            extra = []
            for i in range(len(alphas) - 1):
                if status[i] != status[i + 1]:
                    extra += _bisect_transition(G, float(alphas[i]), float(alphas[i + 1]), status[i], status[i + 1])
            if extra:
                n_aug = len(extra)
                alphas = np.unique(np.concatenate([alphas, extra]))
                status = _pmap(lambda a: _phase_status(G, float(a)), list(alphas))
    smin, smax = _sigma_extrema_many(G, alphas, wgrid)
    if kind == "hard":
        r = np.where(np.array(status) == SIGMA_MIN, smin, 0.0)
        outer = _outer_reason(G)
        R = smax if outer == SIGMA_MAX else np.full(len(alphas), np.inf)
        r_reason = tuple(status)
        R_reason = (outer,) * len(alphas)
    else:
        r, R = smin, smax
        r_reason = (SIGMA_MIN,) * len(alphas)
        R_reason = (SIGMA_MAX,) * len(alphas)
    R = np.maximum(R, r)
    meta = {
        "alpha_range": [float(alphas[0]), float(alphas[-1])],
        "alpha_count": int(len(alphas)),
        "augmented": n_aug,
        "omega_grid": wgrid.describe(),
        "fingerprint": G.fingerprint,
    }
    return SrgRegion(alphas, r, R, kind, meta, r_reason, R_reason)


# ---------------------------------------------------------------------------
# queries

@dataclass(frozen=True, eq=False)
class _Constraints:
    """Disk constraints ``|z-c| <= rho`` (sign +1) or ``>= rho`` (sign -1) and
    half-planes ``orient*(Re z - h) >= 0``; each violation measure is 1-Lipschitz."""

    c: np.ndarray
    rho: np.ndarray
    sign: np.ndarray
    alpha: np.ndarray
    h: np.ndarray
    orient: np.ndarray
    h_alpha: np.ndarray

    def excess(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Largest violation per point and the alpha responsible for it."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        ex = np.full(flat.shape, -np.inf)
        wit = np.full(flat.shape, np.nan)
        K = len(self.c) + len(self.h)
        if K == 0:
            return ex.reshape(z.shape), wit.reshape(z.shape)
        step = max(1, 4_000_000 // K)
        for k in range(0, len(flat), step):
            q = flat[k:k + step, None]
            parts = []
            if len(self.c):
                parts.append(self.sign * (np.abs(q - self.c) - self.rho))
            if len(self.h):
                parts.append(self.orient * (self.h - q.real))
            v = np.concatenate(parts, axis=1)
            j = np.argmax(v, axis=1)
            ex[k:k + step] = v[np.arange(len(j)), j]
            wit[k:k + step] = np.concatenate([self.alpha, self.h_alpha])[j]
        return ex.reshape(z.shape), wit.reshape(z.shape)


_EMPTY = np.zeros(0)


def _direct_constraints(region: SrgRegion) -> _Constraints:
    a, r, R = region.alphas, region.r, region.R
    fin = np.isfinite(R)
    pos = r > 0
    c = np.concatenate([a[fin], a[pos]])
    return _Constraints(c, np.concatenate([R[fin], r[pos]]),
                        np.concatenate([np.ones(fin.sum()), -np.ones(pos.sum())]),
                        c.copy(), _EMPTY, _EMPTY, _EMPTY)


def _inverse_constraints(region: SrgRegion) -> _Constraints:
    """The same annuli pushed through ``z -> 1/conj(z)``."""
    cs, rhos, signs, al, hs, ors, hal = [], [], [], [], [], [], []
    a, r, R = region.alphas, region.r, region.R
    items = [(x, y, 1.0) for x, y in zip(a, R) if np.isfinite(y)]
    items += [(x, y, -1.0) for x, y in zip(a, r) if y > 0]
    for alpha, rho, sign in items:
        gap = alpha * alpha - rho * rho
        if abs(abs(alpha) - rho) <= 1e-12 * max(1.0, rho):
            # circle through the origin maps to the line Re w = 1/(2 alpha)
            hs.append(1.0 / (2.0 * alpha))
            ors.append(sign * np.sign(alpha))
            hal.append(alpha)
            continue
        c = alpha / gap
        rr = rho / abs(gap)
        # a disk containing the origin maps to the outside of its image circle
        s = sign if gap > 0 else -sign
        cs.append(c)
        rhos.append(rr)
        signs.append(s)
        al.append(alpha)
    arr = lambda v: np.array(v, dtype=float)
    return _Constraints(arr(cs), arr(rhos), arr(signs), arr(al), arr(hs), arr(ors), arr(hal))


def _constraints(region: SrgRegion, inverse: bool = False) -> _Constraints:
    key = "_inv_constraints" if inverse else "_constraints"
    cached = region.__dict__.get(key)
    if cached is None:
        cached = _inverse_constraints(region) if inverse else _direct_constraints(region)
        object.__setattr__(region, key, cached)
    return cached


def _status_codes(ex: np.ndarray, z: np.ndarray) -> np.ndarray:
    slack = 1e-12 * (1.0 + np.abs(z))
    return np.where(ex <= slack, 0, np.where(ex <= TOL_BAND, 1, 2))


def excess(region: SrgRegion, z) -> np.ndarray:
    """Largest annulus violation at ``z`` (negative inside); a lower bound on the distance."""
    return _constraints(region).excess(np.asarray(z, dtype=complex))[0]


def membership_codes(region: SrgRegion, z) -> np.ndarray:
    """Vectorized membership: 0 inside, 1 boundary band, 2 outside."""
    z = np.asarray(z, dtype=complex)
    ex, _ = _constraints(region).excess(z)
    return _status_codes(ex, z)


def membership(region: SrgRegion, z: complex) -> MembershipVerdict:
    z = complex(z)
    ex, wit = _constraints(region).excess(np.array([z]))
    code = int(_status_codes(ex, np.array([z]))[0])
    status = _STATUS[code]
    witness = float(wit[0]) if code == 2 else None
    return MembershipVerdict(status, witness, float(ex[0]))


def inverse_point(z: complex) -> complex:
    """Mobius inverse ``r e^{j phi} -> (1/r) e^{j phi}``."""
    z = complex(z)
    return z / (abs(z) ** 2)


def mobius_inverse_membership(region: SrgRegion, z: complex) -> MembershipVerdict:
    """Membership of ``z`` in the inverted region, i.e. of ``inv(z)`` in the region."""
    z = complex(z)
    if z == 0:
        # inv(0) is the point at infinity: inside iff no outer disk is finite
        fin = np.isfinite(region.R)
        if not fin.any():
            return MembershipVerdict(INSIDE)
        return MembershipVerdict(OUTSIDE, float(region.alphas[np.argmax(fin)]), math.inf)
    return membership(region, inverse_point(z))


def inverse_membership_codes(region: SrgRegion, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    ex, _ = _constraints(region, inverse=True).excess(z)
    return _status_codes(ex, z)


def transform(region: SrgRegion, g: AffineGains) -> SrgRegion:
    """Region of ``k1 + k2*G``: centres map affinely, radii scale by ``|k2|``."""
    a = g.k1 + g.k2 * region.alphas
    r = abs(g.k2) * region.r
    R = abs(g.k2) * region.R
    rr, Rr = region.r_reason, region.R_reason
    if g.k2 < 0:
        a, r, R, rr, Rr = a[::-1], r[::-1], R[::-1], rr[::-1], Rr[::-1]
    a, keep = np.unique(a, return_inverse=True)
    if len(a) < len(keep):
        # centres merged by rounding: intersect the annuli sharing a centre
        r2 = np.zeros(len(a))
        R2 = np.full(len(a), np.inf)
        np.maximum.at(r2, keep, r)
        np.minimum.at(R2, keep, R)
        pick = {}
        for i, k in enumerate(keep):
            if k not in pick or r[i] > r[pick[k]]:
                pick[k] = i
        rr = tuple(rr[pick[k]] for k in range(len(a)))
        Rr = tuple(Rr[pick[k]] for k in range(len(a)))
        r, R = r2, np.maximum(R2, r2)
    meta = dict(region.meta)
    meta["gains"] = [g.k1, g.k2] if "gains" not in meta else meta["gains"] + [g.k1, g.k2]
    return SrgRegion(a, r, R, region.kind, meta, rr, Rr)


def distance_to_point(region: SrgRegion, z0: complex, inverse: bool = False,
                      n_dir: int = N_DIR, tol: float = TOL_DIST, max_iter: int = 4000) -> float:
    """Distance from ``z0`` to the region (or its Mobius inverse) by radial search.

    Each of ``n_dir`` rays is marched outward in steps equal to the current
    annulus violation, which never overshoots the region because the
    violation is 1-Lipschitz and bounds the distance from below.
    """
    z0 = complex(z0)
    cons = _constraints(region, inverse)
    e0 = float(cons.excess(np.array([z0]))[0][0])
    if e0 <= TOL_BAND:
        return 0.0
    finite = np.concatenate([np.abs(cons.c) + cons.rho, np.abs(cons.h)])
    rho_max = 1e3 * (1.0 + abs(z0) + (float(finite.max()) if finite.size else 0.0))
    dirs = np.exp(2j * np.pi * np.arange(n_dir) / n_dir)
    rho = np.zeros(n_dir)
    active = np.ones(n_dir, dtype=bool)
    best = math.inf
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        e = cons.excess(z0 + rho[idx] * dirs[idx])[0]
        hit = e <= tol
        if hit.any():
            best = min(best, float(rho[idx][hit].min()))
        rho[idx] = rho[idx] + np.where(hit, 0.0, e)
        active[idx[hit]] = False
        active &= (rho < rho_max) & (rho < best)
    return max(best, e0) if math.isfinite(best) else e0


def real_axis_holes(region: SrgRegion, lo: float, hi: float, n: int = 4001) -> list[tuple[float, float]]:
    """Maximal real intervals strictly inside ``(lo, hi)`` that are outside the region."""
    x = np.linspace(lo, hi, n)
    out = membership_codes(region, x) == 2
    holes = []
    i = 0
    while i < n:
        if out[i]:
            j = i
            while j + 1 < n and out[j + 1]:
                j += 1
            if i > 0 and j < n - 1:
                holes.append((float(x[i]), float(x[j])))
            i = j + 1
        else:
            i += 1
    return holes


# ---------------------------------------------------------------------------
# stability

@dataclass(frozen=True)
class StabilityReport:
    stable_certified: bool
    margin: float
    sensitivity_bound: float
    gain_bound: float
    r_minus_one: float
    gains: AffineGains

    def as_dict(self) -> dict:
        fmt = lambda x: "inf" if math.isinf(x) else x
        return {
            "stable_certified": self.stable_certified,
            "margin": fmt(self.margin),
            "sensitivity_bound": fmt(self.sensitivity_bound),
            "gain_bound": fmt(self.gain_bound),
            "r_minus_one": fmt(self.r_minus_one),
            "k1": self.gains.k1,
            "k2": self.gains.k2,
        }


def stability_report(L: TransferMatrix, gains: AffineGains | None = None,
                     region: SrgRegion | None = None, wgrid: FrequencyGrid = FrequencyGrid()) -> StabilityReport:
    """Certify the unit-feedback loop around ``k1 + k2*L`` from the hard region of ``L``.

    Certification is sufficient only: an uncertified loop may still be stable.
    """
    gains = gains or AffineGains()
    if region is None:
        region = build_region(L, "hard", wgrid=wgrid)
    moved = transform(region, gains)
    verdict = membership(moved, -1.0)
    margin = distance_to_point(moved, -1.0) if verdict.status == OUTSIDE else 0.0
    # -1 for the transformed loop is this centre for L itself
    alpha = (-1.0 - gains.k1) / gains.k2
    r = abs(gains.k2) * hard_radius_r(L, alpha, wgrid).value
    sens = 1.0 / r if r > 0 else math.inf
    dinv = distance_to_point(moved, -1.0, inverse=True) if verdict.status == OUTSIDE else 0.0
    gain = 1.0 / dinv if dinv > 0 else math.inf
    certified = verdict.status == OUTSIDE and margin > TOL_MARGIN
    return StabilityReport(certified, margin, sens, gain, r, gains)
