"""Smooth unit-mass kernels that regularize the Dirac delta.

A mollifier phi generates the family delta_eps(x) = phi(x / eps) / eps.
Two kernels are provided: the standard normal density, which has unbounded
support, and the classical compact bump exp(-1 / (1 - u**2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

from .quadrature import Compact, Decay, Gaussian, QuadratureConfig, integrate_1d

if TYPE_CHECKING:
    from .genfunc import GeneralizedFunction1D

__all__ = ["Kind", "Mollifier", "get_mollifier", "phi", "self_energy", "scaled_delta"]

# Gaussian tail mass beyond |u| = 12 is below 1e-30.
GAUSSIAN_TRUNCATION = 12.0

_CONSTANTS_CFG = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-13)


class Kind(str, Enum):
    GAUSSIAN = "gaussian"
    BUMP = "bump"


def _gaussian(u):
    return np.exp(-0.5 * np.square(u)) / math.sqrt(2.0 * math.pi)


def _bump_unnormalized(u):
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    out = np.zeros_like(u)
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


@dataclass(frozen=True)
class Mollifier:
    """Immutable kernel with its analytic constants cached at construction.

    ``support_radius`` is ``None`` for unbounded kernels. For the Gaussian,
    ``window_radius`` records the quadrature truncation |u| <= 12.
    """

    kind: Kind
    support_radius: float | None
    window_radius: float
    norm_constant: float = field(repr=False)
    value_at_zero: float = 0.0
    self_energy: float = 0.0

    def __call__(self, u):
        return phi(self, u)

    def decay(self, center: float = 0.0, width: float = 1.0) -> Decay:
        """Decay hint for u -> phi((u - center) / width)."""
        if self.support_radius is None:
            return Gaussian(center, width)
        r = self.support_radius * width
        return Compact(center - r, center + r)

    def ridge_points(self, center: float, width: float) -> list[float]:
        """Forced breakpoints resolving phi((x - center) / width)."""
        if self.support_radius is not None:
            return [center - width, center, center + width]
        return [center + k * width for k in (-8, -4, -2, -1, 0, 1, 2, 4, 8)]


def phi(m: Mollifier, u):
    """Kernel value at ``u`` (scalar or array)."""
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=float)
    if m.kind is Kind.GAUSSIAN:
        out = _gaussian(u)
    else:
        out = m.norm_constant * _bump_unnormalized(np.atleast_1d(u)).reshape(u.shape)
    return float(out) if scalar else out


def self_energy(m: Mollifier) -> float:
    """C_phi = integral of phi**2, so that integral of delta_eps**2 is C_phi / eps."""
    return m.self_energy


def _quad_over_kernel(f, radius):
    res = integrate_1d(f, -radius, radius, _CONSTANTS_CFG, points=(0.0,))
    return res.require("mollifier constant")


@lru_cache(maxsize=None)
def get_mollifier(kind: str | Kind) -> Mollifier:
    """Build (once) the named kernel."""
    kind = Kind(kind)
    if kind is Kind.GAUSSIAN:
        radius = GAUSSIAN_TRUNCATION
        norm = 1.0
        support = None
        proto = Mollifier(kind, support, radius, norm)
    else:
        radius = 1.0
        support = 1.0
        norm = 1.0 / _quad_over_kernel(_bump_unnormalized, radius)
        proto = Mollifier(kind, support, radius, norm)
    c_phi = _quad_over_kernel(lambda u: np.square(phi(proto, u)), radius)
    return Mollifier(kind, support, radius, norm, phi(proto, 0.0), c_phi)


def scaled_delta(m: Mollifier, shift: float = 0.0) -> "GeneralizedFunction1D":
    """The family delta_eps(x - shift) = phi((x - shift) / eps) / eps."""
    from .genfunc import delta

    return delta(m, shift)
