"""Nyquist contour, winding numbers and a closed-loop eigenvalue oracle.

The contour runs up the imaginary axis from ``-jR`` to ``jR``, detouring to
the right around imaginary-axis poles, and closes along ``R e^{j phi}`` with
``phi`` going from ``pi/2`` down to ``-pi/2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import IllPosedError, OnCurveError, SchemaError
from .lti import TOL_AXIS, TransferMatrix, axis_pole_frequencies, classify, poles, realize
from .region import OUTSIDE, TOL_BAND, SrgRegion, build_region, membership_codes

RESIDUAL_TOL = 0.1
MAX_ROUNDS = 40

# contour pieces
AXIS, INDENT, ARC = 0, 1, 2


@dataclass(frozen=True)
class ContourSpec:
    big_radius: float | None = None
    indent_radius: float | None = None
    max_angle_step: float = 0.01

    def resolve(self, G: TransferMatrix) -> "ContourSpec":
        """Fill unset radii from the pole scale of ``G``."""
        pl = poles(G)
        scale = max(1.0, float(np.max(np.abs(pl)))) if pl.size else 1.0
        R = self.big_radius if self.big_radius is not None else 1e6 * scale
        eps = self.indent_radius if self.indent_radius is not None else 1e-3 * scale
        if not 0 < eps < R:
            raise ValueError("need 0 < indent_radius < big_radius")
        w = _signed_axis_poles(G)
        if len(w) > 1 and eps >= 0.5 * float(np.min(np.diff(w))):
            raise ValueError("indent_radius must be below half the spacing of axis poles")
        return ContourSpec(R, eps, self.max_angle_step)


@dataclass(frozen=True, eq=False)
class NyquistTrace:
    """Samples ``L(s_k)`` along the contour; ``pieces``/``params`` locate each ``s_k``."""

    samples: np.ndarray
    contour_points: np.ndarray
    pieces: np.ndarray
    params: np.ndarray
    anchors: np.ndarray   # per sample: pole frequency for indentations, else 0
    spec: ContourSpec

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class WindingResult:
    N: int
    n_p: int
    n_z: int
    residual: float = 0.0

    def __post_init__(self):
        if self.n_z != self.N + self.n_p:
            raise ValueError("n_z must equal N + n_p")


def _signed_axis_poles(G: TransferMatrix) -> np.ndarray:
    w = axis_pole_frequencies(G)
    return np.unique(np.concatenate([-w, w]))


def _points(pieces, params, anchors, R, eps) -> np.ndarray:
    s = np.empty(len(params), dtype=complex)
    ax = pieces == AXIS
    s[ax] = 1j * params[ax]
    ind = pieces == INDENT
    s[ind] = 1j * anchors[ind] + eps * np.exp(1j * params[ind])
    arc = pieces == ARC
    s[arc] = R * np.exp(1j * params[arc])
    return s


def _evaluate(G: TransferMatrix, s: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return G(s)[..., 0, 0]


def _build(G, pieces, params, anchors, spec) -> NyquistTrace:
    s = _points(pieces, params, anchors, spec.big_radius, spec.indent_radius)
    vals = _evaluate(G, s)
    for a in (vals, s, pieces, params, anchors):
        a.flags.writeable = False
    return NyquistTrace(vals, s, pieces, params, anchors, spec)


def nyquist_trace(G: TransferMatrix, spec: ContourSpec = ContourSpec()) -> NyquistTrace:
    if G.p != 1:
        raise SchemaError("the Nyquist trace is defined for SISO systems only")
    spec = spec.resolve(G)
    return _initial_trace(G, spec)


@lru_cache(maxsize=32)
def _initial_trace(G: TransferMatrix, spec: ContourSpec) -> NyquistTrace:
    R, eps = spec.big_radius, spec.indent_radius
    axis = _signed_axis_poles(G)
    # axis intervals between indentations
    cuts = [-R]
    for w in axis:
        cuts += [w - eps, w + eps]
    cuts.append(R)
    mags = np.logspace(-6, math.log10(R), 3000)
    cand = [mags, -mags, [0.0]]
    for pl in poles(G):
        c = pl.imag
        width = max(abs(pl.real), 1e-3 * eps)
        cand.append(c + width * np.linspace(-10, 10, 81))
    cand = np.unique(np.concatenate(cand))
    pieces, params, anchors = [], [], []
    for k in range(0, len(cuts), 2):
        a, b = cuts[k], cuts[k + 1]
        w = cand[(cand > a) & (cand < b)]
        w = np.concatenate([[a], w, [b]])
        pieces.append(np.full(len(w), AXIS))
        params.append(w)
        anchors.append(np.zeros(len(w)))
        if k // 2 < len(axis):
            th = np.linspace(-np.pi / 2, np.pi / 2, 129)
            pieces.append(np.full(len(th), INDENT))
            params.append(th)
            anchors.append(np.full(len(th), axis[k // 2]))
    phi = np.linspace(np.pi / 2, -np.pi / 2, 257)
    pieces.append(np.full(len(phi), ARC))
    params.append(phi)
    anchors.append(np.zeros(len(phi)))
    return _build(G, np.concatenate(pieces), np.concatenate(params), np.concatenate(anchors), spec)


def _refine(G: TransferMatrix, tr: NyquistTrace, bad: np.ndarray) -> NyquistTrace:
    """New trace with a midpoint inserted in every flagged segment (``k -> k+1``)."""
    same = tr.pieces[:-1] == tr.pieces[1:]
    same &= tr.anchors[:-1] == tr.anchors[1:]
    seg = np.flatnonzero(bad & same)
    if seg.size == 0:
        return tr
    mid_t = 0.5 * (tr.params[seg] + tr.params[seg + 1])
    order = np.argsort(np.concatenate([np.arange(len(tr)), seg + 0.5]), kind="stable")
    pieces = np.concatenate([tr.pieces, tr.pieces[seg]])[order]
    params = np.concatenate([tr.params, mid_t])[order]
    anchors = np.concatenate([tr.anchors, tr.anchors[seg]])[order]
    s = _points(tr.pieces[seg], mid_t, tr.anchors[seg], tr.spec.big_radius, tr.spec.indent_radius)
    vals = np.concatenate([tr.samples, _evaluate(G, s)])[order]
    pts = np.concatenate([tr.contour_points, s])[order]
    for a in (vals, pts, pieces, params, anchors):
        a.flags.writeable = False
    return NyquistTrace(vals, pts, pieces, params, anchors, tr.spec)


def _increments(samples: np.ndarray, z: np.ndarray) -> np.ndarray:
    d = samples[None, :] - z[:, None]
    with np.errstate(invalid="ignore"):
        return np.angle(d[:, 1:] * np.conj(d[:, :-1]))


def winding_numbers(G: TransferMatrix, z, spec: ContourSpec = ContourSpec(),
                    on_curve: str = "raise") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Clockwise encirclement counts for many query points.

    Returns ``(N, residual, near)`` where ``near`` marks queries within
    ``TOL_BAND`` of the trace.  With ``on_curve="raise"`` such a query raises
    instead; with ``"mask"`` its ``N`` is left at 0.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    tr = nyquist_trace(G, spec)
    step = tr.spec.max_angle_step
    N = np.zeros(len(z), dtype=int)
    resid = np.zeros(len(z))
    near = np.zeros(len(z), dtype=bool)
    active = np.arange(len(z))
    for rnd in range(MAX_ROUNDS + 1):
        if active.size == 0:
            break
        bad = np.zeros(len(tr) - 1, dtype=bool)
        done = []
        chunk = max(1, 4_000_000 // len(tr))
        for k in range(0, active.size, chunk):
            idx = active[k:k + chunk]
            zz = z[idx]
            dist = np.min(np.abs(tr.samples[None, :] - zz[:, None]), axis=1)
            close = dist < TOL_BAND
            if close.any() and on_curve == "raise":
                raise OnCurveError(f"query {zz[close][0]} lies on the Nyquist trace")
            near[idx[close]] = True
            inc = _increments(tr.samples, zz)
            inc = np.where(np.isfinite(inc), inc, 0.0)
            total = inc.sum(axis=1)
            wind = total / (2 * np.pi)
            Nk = np.rint(wind)
            rk = np.abs(total - 2 * np.pi * Nk)
            coarse = np.abs(inc) > step
            ok = (~coarse.any(axis=1) & (rk < RESIDUAL_TOL)) | close | (rnd == MAX_ROUNDS)
            N[idx] = -Nk.astype(int)
            resid[idx] = rk
            bad |= coarse[~ok].any(axis=0)
            done.append(idx[ok])
        finished = np.concatenate(done) if done else np.zeros(0, dtype=int)
        active = np.setdiff1d(active, finished)
        if active.size:
            tr = _refine(G, tr, bad)
    N[near] = 0
    return N, resid, near


def winding_number(G: TransferMatrix, z: complex, spec: ContourSpec = ContourSpec()) -> WindingResult:
    N, resid, _ = winding_numbers(G, np.array([complex(z)]), spec)
    n_p = classify(G).n_p
    return WindingResult(int(N[0]), n_p, int(N[0]) + n_p, float(resid[0]))


def soft_hull(G: TransferMatrix) -> SrgRegion:
    """Soft region of a SISO system built without the stability gate."""
    return build_region(G, "soft", require_stable=False)


def extended_srg_codes(G: TransferMatrix, z, soft_region: SrgRegion | None = None,
                       spec: ContourSpec = ContourSpec()) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized extended-SRG membership; returns ``(member, near_curve)``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    soft_region = soft_region if soft_region is not None else soft_hull(G)
    member = membership_codes(soft_region, z) < 2
    rest = np.flatnonzero(~member)
    near = np.zeros(len(z), dtype=bool)
    if rest.size:
        N, _, nr = winding_numbers(G, z[rest], spec, on_curve="mask")
        member[rest] = (N + classify(G).n_p) > 0
        near[rest] = nr
    return member, near


def extended_srg_membership(G: TransferMatrix, z: complex, soft_region: SrgRegion | None = None,
                            spec: ContourSpec = ContourSpec()) -> bool:
    """True iff ``z`` is in the soft hull or is encircled by the closed-loop zero count."""
    soft_region = soft_region if soft_region is not None else soft_hull(G)
    from .region import membership
    if membership(soft_region, z).status != OUTSIDE:
        return True
    return winding_number(G, z, spec).n_z > 0


def closed_loop_matrix(L: TransferMatrix, k: float) -> np.ndarray:
    """State matrix of the loop ``u = -k y`` around a minimal realization of ``L``."""
    ss = realize(L)
    M = np.eye(ss.p) + k * ss.D
    if np.linalg.cond(M) > 1e12:
        raise IllPosedError("I + k*D is singular; the loop is not well posed")
    if ss.n == 0:
        return np.zeros((0, 0))
    return ss.A - k * ss.B @ np.linalg.solve(M, ss.C)


def closed_loop_rhp_count(L: TransferMatrix, k: float) -> int:
    """Number of closed-loop eigenvalues with real part above ``-TOL_AXIS``."""
    ev = np.linalg.eigvals(closed_loop_matrix(L, k))
    return int(np.sum(ev.real >= -TOL_AXIS))


def closed_loop_stable_oracle(L: TransferMatrix, k: float = 1.0) -> bool:
    return closed_loop_rhp_count(L, k) == 0


def write_trace_csv(trace: NyquistTrace, path) -> None:
    """Dump ``piece, parameter, Re L, Im L`` rows; parameter is omega on the axis."""
    names = {AXIS: "axis", INDENT: "indent", ARC: "arc"}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["piece", "parameter", "re", "im"])
        for p, t, v in zip(trace.pieces, trace.params, trace.samples):
            w.writerow([names[int(p)], repr(float(t)), repr(float(v.real)), repr(float(v.imag))])
