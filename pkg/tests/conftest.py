import numpy as np
import pytest

from hardsrg.catalog import FIXTURES
from hardsrg.lti import TransferMatrix


@pytest.fixture(scope="session")
def systems() -> dict[str, TransferMatrix]:
    return {name: make() for name, make in FIXTURES.items()}


def siso(num, den) -> TransferMatrix:
    return TransferMatrix.siso(num, den)


def random_rational(rng: np.random.Generator, max_degree: int = 4, unstable: bool = True):
    """Random real-rational SISO entry with mixed pole/zero locations."""
    from hardsrg.polynomials import Polynomial, RationalFunction

    dn = int(rng.integers(1, max_degree + 1))
    right = 1.5 if unstable else -0.2
    poles = []
    while len(poles) < dn:
        if dn - len(poles) >= 2 and rng.random() < 0.4:
            c = complex(rng.uniform(-3.0, min(right, 1.0)), rng.uniform(0.2, 3.0))
            poles += [c, c.conjugate()]
        else:
            poles.append(rng.uniform(-4.0, right))
    zeros = list(rng.uniform(-4.0, 3.0, int(rng.integers(0, dn + 1))))
    return RationalFunction(Polynomial.from_roots(zeros, rng.uniform(-3, 3) or 1.0), Polynomial.from_roots(poles))


def random_state_space(rng: np.random.Generator, p: int = 2, max_order: int = 4):
    """Random square state-space system with mixed stable and unstable modes."""
    from hardsrg.lti import StateSpace

    n = int(rng.integers(1, max_order + 1))
    A = rng.standard_normal((n, n)) - rng.uniform(0.0, 2.5) * np.eye(n)
    return StateSpace(A, rng.standard_normal((n, p)), rng.standard_normal((p, n)),
                      rng.standard_normal((p, p)) * rng.uniform(0.0, 1.0))


ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
