"""Classify the eps -> 0 behaviour of scalar quantities F(eps).

Values are sampled on a descending geometric grid and a power law
F ~ C * eps**p is fitted in log-log space. The fitted exponent drives the
verdict: divergent (p < 0), convergent to a finite limit (p ~ 0, Cauchy
stable), convergent to zero (p > 0), or indeterminate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .quadrature import QuadratureError

__all__ = [
    "EpsilonSweep",
    "PowerLawFit",
    "Classification",
    "FitError",
    "sweep",
    "evaluate_grid",
    "fit_power_law",
    "classify",
]

DEFAULT_EPS_MAX = 1e-1
DEFAULT_EPS_MIN = 1e-4
DEFAULT_POINTS = 13
DEFAULT_ORDER_TOL = 0.1
DEFAULT_CAUCHY_TOL = 1e-4
DEFAULT_ZERO_TOL = 1e-12
MIN_FIT_POINTS = 4
MIN_R_SQUARED = 0.999


class FitError(ValueError):
    """The log-log fit is undefined for the given values."""


@dataclass(frozen=True)
class EpsilonSweep:
    epsilons: np.ndarray
    values: np.ndarray
    failures: tuple[int, ...] = ()

    @property
    def converged(self) -> np.ndarray:
        mask = np.ones(len(self.epsilons), dtype=bool)
        mask[list(self.failures)] = False
        return mask

    def valid(self) -> tuple[np.ndarray, np.ndarray]:
        mask = self.converged
        return self.epsilons[mask], self.values[mask]

    def rows(self):
        """(epsilon, value, converged) rows in ascending grid index."""
        return list(zip(self.epsilons.tolist(), self.values.tolist(), self.converged.tolist()))


@dataclass(frozen=True)
class PowerLawFit:
    order: float
    log_constant: float
    r_squared: float
    residual_max: float

    @property
    def constant(self) -> float:
        return math.exp(self.log_constant)


@dataclass(frozen=True)
class Classification:
    kind: Literal["divergent", "convergent", "indeterminate"]
    order: float | None = None
    limit: float | None = None
    fit: PowerLawFit | None = field(default=None, compare=False)
    reason: str = ""

    def __str__(self):
        if self.kind == "divergent":
            return f"Divergent({self.order:.4g})"
        if self.kind == "convergent":
            return f"Convergent({self.limit:.10g})"
        return "Indeterminate"


def geometric_grid(eps_max: float, eps_min: float, n: int) -> np.ndarray:
    return np.geomspace(eps_max, eps_min, n)


def sweep(
    F: Callable[[float], float],
    eps_max: float = DEFAULT_EPS_MAX,
    eps_min: float = DEFAULT_EPS_MIN,
    n: int = DEFAULT_POINTS,
) -> EpsilonSweep:
    """Evaluate ``F`` on a descending geometric grid.

    Points raising :class:`QuadratureError` or returning non-finite values
    are recorded as failures; if every point fails a ``RuntimeError`` is
    raised.
    """
    if not eps_max > eps_min > 0:
        raise ValueError("need eps_max > eps_min > 0")
    if n < MIN_FIT_POINTS:
        raise ValueError(f"need at least {MIN_FIT_POINTS} grid points, got {n}")
    return evaluate_grid(F, geometric_grid(eps_max, eps_min, n))


def evaluate_grid(F: Callable[[float], float], eps: np.ndarray) -> EpsilonSweep:
    """Evaluate ``F`` at each grid point, recording failures instead of raising."""
    eps = np.asarray(eps, dtype=float)
    n = len(eps)
    values = np.full(n, np.nan)
    failures = []
    for i, e in enumerate(eps):
        try:
            v = float(F(float(e)))
        except QuadratureError:
            failures.append(i)
            continue
        if not math.isfinite(v):
            failures.append(i)
            continue
        values[i] = v
    if len(failures) == n:
        raise RuntimeError("every grid point failed to evaluate")
    return EpsilonSweep(eps, values, tuple(failures))


def fit_power_law(s: EpsilonSweep) -> PowerLawFit:
    """Least-squares line through (ln eps, ln |F|)."""
    eps, vals = s.valid()
    if len(eps) < MIN_FIT_POINTS:
        raise FitError(f"need at least {MIN_FIT_POINTS} valid points, got {len(eps)}")
    if np.any(vals == 0) or not (np.all(vals > 0) or np.all(vals < 0)):
        raise FitError("values contain zeros or change sign; fit the shifted sequence")
    x = np.log(eps)
    y = np.log(np.abs(vals))
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (intercept + slope * x)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    r2 = min(1.0, max(0.0, r2))
    return PowerLawFit(float(slope), float(intercept), r2, float(np.max(np.abs(resid))))


def classify(
    s: EpsilonSweep,
    order_tol: float = DEFAULT_ORDER_TOL,
    cauchy_tol: float = DEFAULT_CAUCHY_TOL,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> Classification:
    """Divergent, Convergent or Indeterminate verdict for a sweep.

    Sequences that are identically zero within ``zero_tol``, or that decay
    as a clean positive power of eps, are Convergent with limit 0.
    """
    eps, vals = s.valid()
    if len(eps) < 3:
        return Classification("indeterminate", reason="too few valid points")
    if np.all(np.abs(vals) <= zero_tol):
        return Classification("convergent", limit=0.0, reason="identically zero")
    try:
        fit = fit_power_law(s)
    except FitError as exc:
        return Classification("indeterminate", reason=str(exc))
    if fit.order <= -order_tol and fit.r_squared >= MIN_R_SQUARED:
        return Classification("divergent", order=fit.order, fit=fit)
    if abs(fit.order) < order_tol:
        last = vals[-3:]
        ref = abs(last[-1])
        if np.max(np.abs(last - last[-1])) <= cauchy_tol * ref:
            return Classification("convergent", order=fit.order, limit=float(vals[-1]), fit=fit)
        return Classification("indeterminate", fit=fit, reason="not Cauchy-stable")
    if fit.order >= order_tol and fit.r_squared >= MIN_R_SQUARED:
        return Classification("convergent", order=fit.order, limit=0.0, fit=fit)
    return Classification("indeterminate", fit=fit, reason="no clean power law")
