import math

import numpy as np
import pytest
from scipy import integrate as sci

from deltareg.mollifier import get_mollifier

# Frozen from 40-digit mpmath quadrature of the unnormalized bump
# exp(-1/(1-u^2)) on (-1, 1), computed independently of the package.
BUMP_NORM = 2.252283621043581010
BUMP_PHI0 = 0.8285688398691051517
BUMP_SELF_ENERGY = 0.6751168130096975290
BUMP_NORMALIZED_NORM = 0.8147986993046353048

GAUSS_PHI0 = 1 / math.sqrt(2 * math.pi)
GAUSS_SELF_ENERGY = 1 / (2 * math.sqrt(math.pi))
# G(1) - G(-1) for the standard normal CDF G.
ONE_SIGMA_MASS = 0.6826894921370858972

SELF_ENERGY = {"gaussian": GAUSS_SELF_ENERGY, "bump": BUMP_SELF_ENERGY}


def scipy_modified_integral(cfg, eps, x1_lo, x1_hi):
    """Direct nested scipy quadrature of |f * delta_eps|^2, independent of deltareg."""
    s, x0 = cfg.sigma_x, cfg.x0

    def integrand(x2, x1):
        f2 = np.exp((x0 ** 2 - 2 * x1 ** 2 - 2 * x2 ** 2) / (8 * s ** 2)) / (math.sqrt(2 * math.pi) * s)
        u = (x1 - x2 + x0) / eps
        return f2 * (math.exp(-u * u / 2) / math.sqrt(2 * math.pi) / eps) ** 2

    def inner(x1):
        c = x1 + x0
        return sci.quad(integrand, c - 12 * eps, c + 12 * eps, args=(x1,),
                        points=[c], epsabs=1e-13, epsrel=1e-12, limit=200)[0]

    return sci.quad(inner, x1_lo, x1_hi, epsabs=1e-12, epsrel=1e-11, limit=200)[0]


@pytest.fixture(params=["gaussian", "bump"])
def mollifier(request):
    return get_mollifier(request.param)


@pytest.fixture
def gauss():
    return get_mollifier("gaussian")


@pytest.fixture
def bump():
    return get_mollifier("bump")


@pytest.fixture
def rng():
    return np.random.default_rng(20081018)


# Acceptance criteria append (number, name, passed, detail) here; the
# summary hook prints one line per criterion after the run.
ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, name, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d} {name}: {detail}")
