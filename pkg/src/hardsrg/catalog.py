"""Reference systems used by the examples, tests and CLI."""

from __future__ import annotations

from numpy.polynomial import polynomial as P

from .lti import TransferMatrix
from .polynomials import Polynomial, RationalFunction


def _rf(num_roots, den_roots, gain: float = 1.0) -> RationalFunction:
    return RationalFunction(Polynomial.from_roots(num_roots, gain), Polynomial.from_roots(den_roots))


def g1() -> TransferMatrix:
    """Lightly damped second-order lowpass."""
    return TransferMatrix.siso([1.0], [1.0, 1.0, 1.0])


def g2() -> TransferMatrix:
    """Integrator in series with a first-order lag."""
    return TransferMatrix.siso([1.0], [0.0, 1.0, 1.0])


def g3() -> TransferMatrix:
    """Open-loop unstable pole at +2 with a fast lag."""
    den = P.polymul([-2.0, 1.0], [1.0, 0.1])
    return TransferMatrix.siso([3.0], den)


def g4() -> TransferMatrix:
    """Stable 2x2 with first-order entries."""
    return TransferMatrix([[_rf([], [-1]), _rf([], [-2])],
                           [_rf([], [-4]), _rf([], [-3])]])


def _g5_block():
    return [[_rf([-7], [1]), _rf([5], [-2, -2])],
            [_rf([], [-4, -4, -4]), _rf([0], [-3, -3])]]


def g5() -> TransferMatrix:
    """Unstable non-minimum-phase 2x2."""
    return TransferMatrix(_g5_block())


def g6() -> TransferMatrix:
    """3x3 extension of ``g5`` with an integrator."""
    a, b = _g5_block()
    return TransferMatrix([a + [_rf([], [-1.5])],
                           b + [_rf([], [-1.2])],
                           [_rf([], [-1], 2.0), _rf([], [-9]), _rf([], [0])]])


FIXTURES = {"G1": g1, "G2": g2, "G3": g3, "G4": g4, "G5": g5, "G6": g6}


def fixture(name: str) -> TransferMatrix:
    try:
        return FIXTURES[name.upper()]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
