"""Regularized EPR position-entangled states and their probability integrals.

The sharply correlated two-particle state h * delta(x1 - x2 + x0) is
replaced by its mollified representative; at any fixed eps every integral
below is finite, and the eps -> 0 behaviour is read off with
:mod:`deltareg.asymptotics`.

States covered:

* the bare delta ridge, whose squared norm over any x1-interval is
  (length) * C_phi / eps;
* the Gaussian-modulated ridge f * delta_eps, whose norm still diverges
  like C_phi / eps but whose probability ratios converge;
* the delta-free envelope f alone, which factorizes into independent
  marginals;
* delta_eps / sqrt(delta_eps(0)), whose norm is finite but depends on the
  kernel.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from .asymptotics import (
    DEFAULT_EPS_MAX,
    DEFAULT_EPS_MIN,
    DEFAULT_POINTS,
    Classification,
    classify,
    sweep,
)
from .genfunc import (
    GeneralizedFunction1D,
    GeneralizedFunction2D,
    TestFunction,
    delta,
    delta_line_2d,
    embed_smooth_2d,
    integrate_gf,
    integrate_gf2d,
    multiply,
    pair,
)
from .mollifier import Mollifier, get_mollifier
from .quadrature import Gaussian, QuadratureConfig, integrate_1d, window

__all__ = [
    "EprConfig",
    "ProbabilityReport",
    "IndependenceReport",
    "envelope",
    "ridge_marginal",
    "modified_limit_target",
    "delta_sq_box_integral",
    "relative_probability_unmodified",
    "modified_norm",
    "modified_relative_probability",
    "psi_prime_independence",
    "entangled_covariance",
    "normalized_delta_norm",
    "association_check",
]

# Windows standing in for +-infinity extend this many sigma_x past -x0/2.
INFINITY_SIGMAS = 12.0


@dataclass(frozen=True)
class EprConfig:
    x0: float = 2.0
    sigma_x: float = 1.0
    a: float = -2.0
    b: float = 0.0
    L: float = 10.0
    mollifier: Mollifier = field(default_factory=lambda: get_mollifier("gaussian"))
    h: float = 1.0

    def __post_init__(self):
        if isinstance(self.mollifier, str):
            object.__setattr__(self, "mollifier", get_mollifier(self.mollifier))
        if not self.sigma_x > 0:
            raise ValueError("sigma_x must be positive")
        if self.a > self.b:
            raise ValueError("interval requires a <= b")
        if not self.L > 0:
            raise ValueError("L must be positive")

    def infinite_window(self) -> tuple[float, float]:
        c = -self.x0 / 2
        half = abs(self.x0) / 2 + INFINITY_SIGMAS * self.sigma_x
        return c - half, c + half


@dataclass(frozen=True)
class ProbabilityReport:
    numerator: float
    denominator: float
    ratio: float
    epsilon: float
    L: float | None = None
    numerator_error: float = 0.0
    denominator_error: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class IndependenceReport:
    covariance: float
    max_conditional_variation: float
    mean_x1: float
    mean_x2: float
    variance_x1: float
    variance_x2: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_eps(eps):
    if not eps > 0:
        raise ValueError("eps must be positive")


def _check_ridge_scale(cfg: EprConfig, eps: float):
    _check_eps(eps)
    if eps > cfg.sigma_x / 10 * (1 + 1e-12):
        raise ValueError(
            f"eps={eps:g} exceeds sigma_x/10={cfg.sigma_x / 10:g}; the ridge "
            "width must be well below the envelope width"
        )


def _envelope_fn(cfg: EprConfig) -> Callable:
    s2 = cfg.sigma_x ** 2
    pref = (math.sqrt(2 * math.pi) * cfg.sigma_x) ** -0.5
    x0 = cfg.x0

    def f(x1, x2):
        return pref * np.exp((x0 * x0 - 2 * x1 * x1 - 2 * np.square(x2)) / (16 * s2))

    return f


def envelope(cfg: EprConfig) -> GeneralizedFunction2D:
    """The Gaussian envelope f(x1, x2) of the minimally modified state."""
    # exp(-x**2 / (8 sigma**2)) in each variable: Gaussian scale 2 sigma.
    d = Gaussian(0.0, 2 * cfg.sigma_x)
    return embed_smooth_2d(_envelope_fn(cfg), d, d)


def ridge_marginal(cfg: EprConfig, x1):
    """f**2 restricted to the ridge x2 = x1 + x0, as a function of x1."""
    f = _envelope_fn(cfg)
    x1 = np.asarray(x1, dtype=float)
    return np.square(f(x1, x1 + cfg.x0))


def _gauss_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def modified_limit_target(cfg: EprConfig) -> float:
    """eps -> 0 limit of the modified relative probability: a normal CDF difference."""
    c = -cfg.x0 / 2
    return _gauss_cdf((cfg.b - c) / cfg.sigma_x) - _gauss_cdf((cfg.a - c) / cfg.sigma_x)


def _unmodified_state(cfg: EprConfig) -> GeneralizedFunction2D:
    return delta_line_2d(cfg.mollifier, cfg.x0, cfg.h)


def _modified_state(cfg: EprConfig) -> GeneralizedFunction2D:
    return multiply(envelope(cfg), delta_line_2d(cfg.mollifier, cfg.x0, cfg.h))


def delta_sq_box_integral(
    cfg: EprConfig,
    eps: float,
    interval: tuple[float, float] | None = None,
    quad: QuadratureConfig | None = None,
    x2_range: tuple[float, float] | None = None,
) -> float:
    """Integral of delta_eps(x1 - x2 + x0)**2 over x1 in [a, b], x2 over the line."""
    _check_eps(eps)
    lo, hi = interval if interval is not None else (cfg.a, cfg.b)
    d = delta_line_2d(cfg.mollifier, cfg.x0)
    res = integrate_gf2d(d * d, eps, (lo, hi), x2_range, quad)
    return res.require("delta-squared box integral")


def relative_probability_unmodified(
    cfg: EprConfig,
    eps: float,
    quad: QuadratureConfig | None = None,
    box_denominator: bool = False,
) -> ProbabilityReport:
    """Regularized relative probability of particle 1 in [a, b] for the bare ridge.

    The denominator integrates x1 over [-L, L] and x2 over the whole line,
    or over [-L, L] as well when ``box_denominator`` is set.
    """
    _check_eps(eps)
    if not cfg.L > max(abs(cfg.a), abs(cfg.b)) + 10 * eps:
        raise ValueError("need L > max(|a|, |b|) + 10 eps")
    psi = _unmodified_state(cfg)
    sq = psi * psi
    num = integrate_gf2d(sq, eps, (cfg.a, cfg.b), None, quad)
    x2 = (-cfg.L, cfg.L) if box_denominator else None
    den = integrate_gf2d(sq, eps, (-cfg.L, cfg.L), x2, quad)
    n = num.require("numerator")
    d = den.require("denominator")
    return ProbabilityReport(n, d, n / d, eps, cfg.L, num.error_estimate, den.error_estimate)


def _modified_integral(cfg, eps, x1_range, quad):
    psi = _modified_state(cfg)
    return integrate_gf2d(psi * psi, eps, x1_range, None, quad)


def modified_norm(cfg: EprConfig, eps: float, quad: QuadratureConfig | None = None) -> float:
    """Squared norm of f * delta_eps over the plane (diverges like C_phi / eps)."""
    _check_ridge_scale(cfg, eps)
    return _modified_integral(cfg, eps, None, quad).require("modified norm")


def modified_relative_probability(
    cfg: EprConfig, eps: float, quad: QuadratureConfig | None = None
) -> ProbabilityReport:
    _check_ridge_scale(cfg, eps)
    lo, hi = cfg.a, cfg.b
    wlo, whi = cfg.infinite_window()
    if math.isinf(lo):
        lo = wlo
    if math.isinf(hi):
        hi = whi
    num = _modified_integral(cfg, eps, (lo, hi), quad)
    den = _modified_integral(cfg, eps, None, quad)
    n = num.require("numerator")
    d = den.require("denominator")
    return ProbabilityReport(n, d, n / d, eps, None, num.error_estimate, den.error_estimate)


def _moments(g: GeneralizedFunction2D, eps: float, quad):
    """Means, variances and covariance of the density proportional to g."""
    quad = quad or QuadratureConfig()
    z = integrate_gf2d(g, eps, cfg=quad).require("normalization")
    # Moments are divided by z, so their absolute accuracy is relative to z.
    mq = replace(quad, abs_tol=max(quad.abs_tol, quad.rel_tol * abs(z)))

    def moment(weight):
        w = embed_smooth_2d(weight)
        return integrate_gf2d(multiply(g, w), eps, cfg=mq).require("moment") / z

    m1 = moment(lambda a, b: a + 0 * b)
    m2 = moment(lambda a, b: b)
    v1 = moment(lambda a, b: (a - m1) ** 2 + 0 * b)
    v2 = moment(lambda a, b: (b - m2) ** 2)
    cov = moment(lambda a, b: (a - m1) * (b - m2))
    return m1, m2, v1, v2, cov


def psi_prime_independence(
    cfg: EprConfig,
    quad: QuadratureConfig | None = None,
    n_x1: int = 9,
    n_x2: int = 41,
) -> IndependenceReport:
    """Covariance and conditional-density spread of the delta-free state.

    The conditional density p(x2 | x1) is computed at ``n_x1`` probes in
    [-2 sigma, 2 sigma] on a grid of ``n_x2`` x2 values; the reported
    variation is the largest spread across probes at any x2.
    """
    env = envelope(cfg)
    density = env * env
    m1, m2, v1, v2, cov = _moments(density, 1.0, quad)

    quad = quad or QuadratureConfig()
    s = cfg.sigma_x
    x2_grid = np.linspace(-6 * s, 6 * s, n_x2)
    cond = []
    for x1 in np.linspace(-2 * s, 2 * s, n_x1):
        row = lambda x2, x1=x1: density(1.0, x1, x2)
        lo, hi = window(density.decay_x2(1.0, x1), quad.truncation_tail_tol)
        marg = integrate_1d(row, lo, hi, quad).require("conditional normalization")
        cond.append(row(x2_grid) / marg)
    cond = np.array(cond)
    variation = float(np.max(cond.max(axis=0) - cond.min(axis=0)))
    return IndependenceReport(cov, variation, m1, m2, v1, v2)


def entangled_covariance(
    cfg: EprConfig, eps: float = 1e-2, quad: QuadratureConfig | None = None
) -> float:
    """Cov(x1, x2) under |f * delta_eps|**2, about sigma_x**2 on the ridge."""
    _check_ridge_scale(cfg, eps)
    psi = _modified_state(cfg)
    return _moments(psi * psi, eps, quad)[4]


def normalized_delta_family(m: Mollifier) -> GeneralizedFunction1D:
    """delta_eps(x) / sqrt(delta_eps(0))."""
    d = delta(m)
    rep = d.representative

    return GeneralizedFunction1D(
        lambda eps, x: rep(eps, x) / math.sqrt(rep(eps, 0.0)),
        d.decay,
        d.ridges,
    )


def normalized_delta_norm(
    m: Mollifier, eps: float, quad: QuadratureConfig | None = None
) -> float:
    """Squared norm of delta_eps / sqrt(delta_eps(0)); equals C_phi / phi(0)."""
    _check_eps(eps)
    g = normalized_delta_family(m)
    return integrate_gf(g * g, eps, cfg=quad).require("normalized delta norm")


def association_check(
    psi: TestFunction,
    m: Mollifier,
    eps_max: float = DEFAULT_EPS_MAX,
    eps_min: float = DEFAULT_EPS_MIN,
    n: int = DEFAULT_POINTS,
    quad: QuadratureConfig | None = None,
) -> Classification:
    """Classify <delta_eps**2, psi> as eps -> 0."""
    d = delta(m)
    sq = d * d
    s = sweep(lambda e: pair(sq, psi, e, quad), eps_max, eps_min, n)
    return classify(s)
