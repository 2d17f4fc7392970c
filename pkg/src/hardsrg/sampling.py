"""Empirical SRG points from simulated, truncated input pairs.

A pair ``(u1, u2)`` is pushed through the system from zero initial state;
by linearity only ``du = u1 - u2`` needs simulating, and by causality one run
to the longest horizon serves every shorter truncation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, signal

from .errors import DegeneratePairError, HorizonOverflowError
from .lti import StateSpace, TransferMatrix, realize
from .region import SrgRegion, excess

TOL_INCLUSION = 1e-3
OVERFLOW = 1e12
PAIR_CHUNK = 50


@dataclass(frozen=True)
class SignalSpec:
    """Input signal on ``[0, horizon_T]``.

    ``kind`` is ``"sinusoid"`` (``omega``, ``phase``), ``"multisine"``
    (``components`` of ``(omega, amplitude, phase)``) or ``"filtered_noise"``
    (``seed``, ``bandwidth`` in rad/s).  ``direction`` gives a complex weight
    per input channel; channel ``i`` carries ``|d_i| * wave(t + arg d_i / omega)``
    for periodic kinds.  Noise uses independent channels.
    """

    kind: str
    horizon_T: float
    step_h: float | None = None
    omega: float = 1.0
    phase: float = 0.0
    components: tuple[tuple[float, float, float], ...] = ()
    seed: int = 0
    bandwidth: float = 1.0
    direction: tuple[complex, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("sinusoid", "multisine", "filtered_noise", "zero"):
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.horizon_T <= 0:
            raise ValueError("horizon_T must be positive")
        if self.step_h is not None and not 0 < self.step_h <= self.horizon_T / 64:
            raise ValueError("step_h must lie in (0, horizon_T/64]")
        if self.kind == "multisine":
            w = [c[0] for c in self.components]
            if not w or len(set(w)) != len(w):
                raise ValueError("multisine needs distinct frequencies")

    def max_frequency(self) -> float:
        if self.kind == "sinusoid":
            return abs(self.omega)
        if self.kind == "multisine":
            return max(abs(c[0]) for c in self.components)
        if self.kind == "filtered_noise":
            return self.bandwidth
        return 0.0

    def values(self, t: np.ndarray, p: int) -> np.ndarray:
        """Samples at times ``t`` (uniform, starting at 0), shape ``(len(t), p)``."""
        d = np.ones(p, dtype=complex) if self.direction is None else np.asarray(self.direction, dtype=complex)
        if d.shape != (p,):
            raise ValueError(f"direction must have {p} entries")
        if self.kind == "zero":
            return np.zeros((len(t), p))
        if self.kind == "filtered_noise":
            h = t[1] - t[0]
            rng = np.random.default_rng(self.seed)
            white = rng.standard_normal((len(t), p))
            wn = min(self.bandwidth * h / np.pi, 0.99)
            sos = signal.butter(4, wn, output="sos")
            return signal.sosfilt(sos, white, axis=0) * np.abs(d)
        comps = [(self.omega, 1.0, self.phase)] if self.kind == "sinusoid" else self.components
        out = np.zeros((len(t), p))
        for w, amp, ph in comps:
            out += amp * np.abs(d) * np.sin(w * t[:, None] + ph + np.angle(d))
        return out


@dataclass(frozen=True)
class SrgSample:
    gain: float
    angle: float
    T: float

    @property
    def point_pair(self) -> tuple[complex, complex]:
        z = self.gain * np.exp(1j * self.angle)
        return complex(z), complex(np.conj(z))


@dataclass
class InclusionReport:
    n_samples: int
    n_violations: int
    worst_margin: float
    samples: list[SrgSample] = field(default_factory=list, repr=False)
    inside: list[bool] = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {"n_samples": self.n_samples, "n_violations": self.n_violations,
                "worst_margin": self.worst_margin}


def default_step(ss: StateSpace, omega_max: float = 0.0) -> float:
    wp = float(np.max(np.abs(np.linalg.eigvals(ss.A).imag))) if ss.n else 0.0
    w = max(omega_max, wp)
    return min(1e-2, 1.0 / (50.0 * w)) if w > 0 else 1e-2


def check_horizon(ss: StateSpace, T: float) -> None:
    if ss.n == 0:
        return
    lam = float(np.max(np.linalg.eigvals(ss.A).real))
    if lam > 0 and lam * T >= math.log(OVERFLOW):
        raise HorizonOverflowError(
            f"horizon {T} would grow the state past {OVERFLOW:g}; use T < {math.log(OVERFLOW) / lam:.3g}")


def _discretize(ss: StateSpace, h: float):
    """First-order-hold discretization: exact for piecewise-linear inputs."""
    n, m = ss.n, ss.B.shape[1]
    M = np.zeros((n + 2 * m, n + 2 * m))
    M[:n, :n] = ss.A
    M[:n, n:n + m] = ss.B
    M[n:n + m, n + m:] = np.eye(m)
    E = linalg.expm(M * h)
    return E[:n, :n], E[:n, n:n + m], E[:n, n + m:]


def _response(ss: StateSpace, u: np.ndarray, h: float) -> np.ndarray:
    """Zero-state response to sampled inputs ``u`` of shape ``(batch, K, m)``."""
    y = u @ ss.D.T
    if ss.n == 0:
        return y
    Phi, G1, G2 = _discretize(ss, h)
    du = np.diff(u, axis=1) / h
    drive = u[:, :-1] @ G1.T + du @ G2.T
    x = np.zeros((u.shape[0], ss.n))
    C = ss.C.T
    PhiT = Phi.T
    for k in range(1, u.shape[1]):
        x = x @ PhiT + drive[:, k - 1]
        y[:, k] += x @ C
    return y


def simulate(ss: StateSpace, u: SignalSpec) -> tuple[np.ndarray, np.ndarray]:
    """Sampled zero-state response ``(t, y)`` on ``[0, horizon_T]``."""
    check_horizon(ss, u.horizon_T)
    h = u.step_h or default_step(ss, u.max_frequency())
    t = _time_grid(u.horizon_T, h)
    uv = u.values(t, ss.p)
    return t, _response(ss, uv[None], t[1] - t[0])[0]


def _time_grid(T: float, h: float) -> np.ndarray:
    K = max(64, int(math.ceil(T / h)))
    return np.linspace(0.0, T, K + 1)


def _cumtrapz(f: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(f)
    out[..., 1:] = np.cumsum(0.5 * h * (f[..., 1:] + f[..., :-1]), axis=-1)
    return out


def _samples_at(du: np.ndarray, dy: np.ndarray, t: np.ndarray, Ts) -> list[list[SrgSample]]:
    h = t[1] - t[0]
    uu = _cumtrapz(np.sum(du * du, axis=-1), h)
    yy = _cumtrapz(np.sum(dy * dy, axis=-1), h)
    uy = _cumtrapz(np.sum(du * dy, axis=-1), h)
    rows = []
    for b in range(du.shape[0]):
        row = []
        for T in Ts:
            k = int(np.searchsorted(t, T - 1e-9 * h))
            nu, ny = math.sqrt(uu[b, k]), math.sqrt(max(yy[b, k], 0.0))
            if nu <= 1e-12:
                raise DegeneratePairError(f"inputs coincide on [0, {T}]")
            c = uy[b, k] / (nu * ny) if ny > 0 else 1.0
            row.append(SrgSample(ny / nu, float(np.arccos(np.clip(c, -1.0, 1.0))), float(t[k])))
        rows.append(row)
    return rows


def srg_sample(G: TransferMatrix, u1: SignalSpec, u2: SignalSpec, T: float,
               step_h: float | None = None) -> SrgSample:
    """Gain and angle of the truncated pair ``(u1, u2)`` on ``[0, T]``."""
    ss = realize(G)
    check_horizon(ss, T)
    h = step_h or u1.step_h or u2.step_h or default_step(ss, max(u1.max_frequency(), u2.max_frequency()))
    t = _time_grid(T, h)
    du = (u1.values(t, ss.p) - u2.values(t, ss.p))[None]
    dy = _response(ss, du, t[1] - t[0])
    return _samples_at(du, dy, t, [T])[0][0]


def random_signal(rng: np.random.Generator, T: float, p: int) -> SignalSpec:
    """A random sinusoid, multisine or band-limited noise input."""
    kind = rng.choice(["sinusoid", "multisine", "filtered_noise"])
    d = tuple(rng.standard_normal(p) * np.exp(2j * np.pi * rng.random(p)))
    if kind == "sinusoid":
        return SignalSpec("sinusoid", T, omega=float(10 ** rng.uniform(-1.3, 0.7)),
                          phase=float(2 * np.pi * rng.random()), direction=d)
    if kind == "multisine":
        w = np.sort(10 ** rng.uniform(-1.3, 0.7, 3))
        comps = tuple((float(a), float(b), float(c))
                      for a, b, c in zip(w, rng.uniform(0.2, 1.0, 3), 2 * np.pi * rng.random(3)))
        return SignalSpec("multisine", T, components=comps, direction=d)
    return SignalSpec("filtered_noise", T, seed=int(rng.integers(2**31)),
                      bandwidth=float(10 ** rng.uniform(-0.3, 0.7)), direction=d)


def validate_inclusion(G: TransferMatrix, region: SrgRegion, n_pairs: int, Ts, seed: int = 0) -> InclusionReport:
    """Check that sampled SRG points (and their conjugates) lie in ``region``."""
    ss = realize(G)
    Ts = sorted(float(T) for T in Ts)
    Tmax = Ts[-1]
    check_horizon(ss, Tmax)
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n_pairs):
        u1 = random_signal(rng, Tmax, ss.p)
        u2 = random_signal(rng, Tmax, ss.p) if rng.random() < 0.7 else SignalSpec("zero", Tmax)
        pairs.append((u1, u2))
    wmax = max(max(a.max_frequency(), b.max_frequency()) for a, b in pairs)
    t = _time_grid(Tmax, default_step(ss, wmax))
    samples: list[SrgSample] = []
    for k in range(0, n_pairs, PAIR_CHUNK):
        chunk = pairs[k:k + PAIR_CHUNK]
        du = np.stack([a.values(t, ss.p) - b.values(t, ss.p) for a, b in chunk])
        dy = _response(ss, du, t[1] - t[0])
        for row in _samples_at(du, dy, t, Ts):
            samples.extend(row)
    z = np.array([s.point_pair for s in samples]).ravel()
    ex = excess(region, z).reshape(-1, 2).max(axis=1)
    mag = np.abs(z).reshape(-1, 2)[:, 0]
    bad = ex > TOL_INCLUSION * (1.0 + mag)
    return InclusionReport(len(samples), int(bad.sum()), float(ex.max()) if len(ex) else -math.inf,
                           samples, [bool(not b) for b in bad])


def write_samples_csv(report: InclusionReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["T", "gain", "angle", "inside"])
        for s, ok in zip(report.samples, report.inside):
            w.writerow([repr(s.T), repr(s.gain), repr(s.angle), int(ok)])
