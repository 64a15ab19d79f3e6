"""Regularized generalized functions as lazily evaluated epsilon-families.

A generalized function is represented by its smooth representative
R(eps, x); products, sums and shifts compose representatives without
sampling, so a product like delta_eps**2 exists at every eps even though
it has no distributional limit.

Each object also carries a decay hint (a function of eps) and the ridges
where it concentrates. Quadrature uses both: the hint chooses the finite
window and the ridges seed breakpoints so peaks of width O(eps) are never
stepped over.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .mollifier import Mollifier
from .quadrature import (
    BOUNDED,
    Decay,
    QuadratureConfig,
    QuadratureResult,
    integrate_1d,
    integrate_2d,
    integrate_improper,
    looser,
    shifted,
    tighter,
    window,
)

__all__ = [
    "Ridge",
    "GeneralizedFunction1D",
    "GeneralizedFunction2D",
    "TestFunction",
    "embed_smooth_1d",
    "embed_smooth_2d",
    "delta",
    "delta_line_2d",
    "multiply",
    "pair",
    "point_eval",
    "integrate_gf",
    "integrate_gf2d",
]


@dataclass(frozen=True)
class Ridge:
    """A peak at ``center`` of width ``width * eps`` shaped by ``kernel``.

    In 2D, ``center`` is the offset c of the line x2 = x1 + c.
    """

    center: float
    width: float
    kernel: Mollifier

    def points(self, eps: float, offset: float = 0.0) -> list[float]:
        return self.kernel.ridge_points(self.center + offset, self.width * eps)

    def shifted(self, c: float) -> "Ridge":
        return Ridge(self.center + c, self.width, self.kernel)


def _const_decay(d: Decay):
    return lambda eps: d


def _merge_ridges(r1, r2):
    return tuple(dict.fromkeys((*r1, *r2)))


@dataclass(frozen=True)
class GeneralizedFunction1D:
    representative: Callable[[float, np.ndarray], np.ndarray]
    decay: Callable[[float], Decay]
    ridges: tuple[Ridge, ...] = ()

    def __call__(self, eps, x):
        return self.representative(eps, x)

    def points(self, eps: float) -> list[float]:
        return [p for r in self.ridges for p in r.points(eps)]

    def __mul__(self, other):
        if isinstance(other, GeneralizedFunction1D):
            return multiply(self, other)
        alpha = float(other)
        rep = self.representative
        return GeneralizedFunction1D(lambda eps, x: alpha * rep(eps, x), self.decay, self.ridges)

    __rmul__ = __mul__

    def __add__(self, other: "GeneralizedFunction1D") -> "GeneralizedFunction1D":
        f, g = self.representative, other.representative
        d1, d2 = self.decay, other.decay
        return GeneralizedFunction1D(
            lambda eps, x: f(eps, x) + g(eps, x),
            lambda eps: looser(d1(eps), d2(eps)),
            _merge_ridges(self.ridges, other.ridges),
        )

    def __neg__(self):
        return -1.0 * self

    def __sub__(self, other):
        return self + (-other)

    def __pow__(self, n: int):
        if n < 1 or int(n) != n:
            raise ValueError("only positive integer powers are supported")
        out = self
        for _ in range(int(n) - 1):
            out = multiply(out, self)
        return out

    def shift(self, c: float) -> "GeneralizedFunction1D":
        """x -> R(eps, x - c)."""
        f, d = self.representative, self.decay
        return GeneralizedFunction1D(
            lambda eps, x: f(eps, np.asarray(x) - c),
            lambda eps: shifted(d(eps), c),
            tuple(r.shifted(c) for r in self.ridges),
        )


@dataclass(frozen=True)
class GeneralizedFunction2D:
    """Two-variable family R(eps, x1, x2).

    ``decay_x1(eps)`` bounds the x1 behaviour; ``decay_x2(eps, x1)`` bounds
    x2 at fixed x1. Ridges are lines x2 = x1 + center.
    """

    representative: Callable[[float, float, np.ndarray], np.ndarray]
    decay_x1: Callable[[float], Decay]
    decay_x2: Callable[[float, float], Decay]
    ridges: tuple[Ridge, ...] = ()

    def __call__(self, eps, x1, x2):
        return self.representative(eps, x1, x2)

    def inner_points(self, eps: float, x1: float) -> list[float]:
        return [p for r in self.ridges for p in r.points(eps, offset=x1)]

    def __mul__(self, other):
        if isinstance(other, GeneralizedFunction2D):
            return multiply(self, other)
        alpha = float(other)
        rep = self.representative
        return GeneralizedFunction2D(
            lambda eps, x1, x2: alpha * rep(eps, x1, x2),
            self.decay_x1, self.decay_x2, self.ridges,
        )

    __rmul__ = __mul__

    def __add__(self, other: "GeneralizedFunction2D") -> "GeneralizedFunction2D":
        f, g = self.representative, other.representative
        return GeneralizedFunction2D(
            lambda eps, x1, x2: f(eps, x1, x2) + g(eps, x1, x2),
            lambda eps: looser(self.decay_x1(eps), other.decay_x1(eps)),
            lambda eps, x1: looser(self.decay_x2(eps, x1), other.decay_x2(eps, x1)),
            _merge_ridges(self.ridges, other.ridges),
        )

    def __pow__(self, n: int):
        if n < 1 or int(n) != n:
            raise ValueError("only positive integer powers are supported")
        out = self
        for _ in range(int(n) - 1):
            out = multiply(out, self)
        return out


@dataclass(frozen=True)
class TestFunction:
    """A smooth function paired against generalized functions."""

    __test__ = False  # not a pytest class

    evaluation: Callable[[np.ndarray], np.ndarray]
    decay: Decay = BOUNDED

    def __call__(self, x):
        return self.evaluation(x)


def embed_smooth_1d(f: Callable, decay: Decay = BOUNDED) -> GeneralizedFunction1D:
    """Constant-in-eps embedding of a smooth function."""
    return GeneralizedFunction1D(
        lambda eps, x: np.broadcast_to(f(np.asarray(x, dtype=float)), np.shape(x)) * 1.0,
        _const_decay(decay),
    )


def embed_smooth_2d(
    f: Callable, decay_x1: Decay = BOUNDED, decay_x2: Decay = BOUNDED
) -> GeneralizedFunction2D:
    def rep(eps, x1, x2):
        x2 = np.asarray(x2, dtype=float)
        return np.broadcast_to(f(x1, x2), np.broadcast(x1, x2).shape) * 1.0

    return GeneralizedFunction2D(rep, _const_decay(decay_x1), lambda eps, x1: decay_x2)


def delta(m: Mollifier, shift: float = 0.0) -> GeneralizedFunction1D:
    """delta_eps(x - shift) = phi((x - shift) / eps) / eps."""

    def rep(eps, x):
        return m((np.asarray(x, dtype=float) - shift) / eps) / eps

    return GeneralizedFunction1D(
        rep, lambda eps: m.decay(shift, eps), (Ridge(shift, 1.0, m),)
    )


def delta_line_2d(m: Mollifier, x0: float, h: float = 1.0) -> GeneralizedFunction2D:
    """h * delta_eps(x1 - x2 + x0), concentrated on the line x2 = x1 + x0."""

    def rep(eps, x1, x2):
        return h * m((x1 - np.asarray(x2, dtype=float) + x0) / eps) / eps

    return GeneralizedFunction2D(
        rep,
        _const_decay(BOUNDED),
        lambda eps, x1: m.decay(x1 + x0, eps),
        (Ridge(x0, 1.0, m),),
    )


def multiply(g, h):
    """Pointwise product of representatives (1D x 1D or 2D x 2D)."""
    if isinstance(g, GeneralizedFunction1D) and isinstance(h, GeneralizedFunction1D):
        f1, f2 = g.representative, h.representative
        d1, d2 = g.decay, h.decay
        return GeneralizedFunction1D(
            lambda eps, x: f1(eps, x) * f2(eps, x),
            lambda eps: tighter(d1(eps), d2(eps)),
            _merge_ridges(g.ridges, h.ridges),
        )
    if isinstance(g, GeneralizedFunction2D) and isinstance(h, GeneralizedFunction2D):
        f1, f2 = g.representative, h.representative
        return GeneralizedFunction2D(
            lambda eps, x1, x2: f1(eps, x1, x2) * f2(eps, x1, x2),
            lambda eps: tighter(g.decay_x1(eps), h.decay_x1(eps)),
            lambda eps, x1: tighter(g.decay_x2(eps, x1), h.decay_x2(eps, x1)),
            _merge_ridges(g.ridges, h.ridges),
        )
    raise TypeError("multiply needs two generalized functions of the same arity")


def point_eval(g: GeneralizedFunction1D, eps: float, x: float) -> float:
    if not eps > 0:
        raise ValueError("eps must be positive")
    return float(g(eps, np.float64(x)))


def _clip_points(points: Sequence[float], lo: float, hi: float) -> list[float]:
    return [p for p in points if lo < p < hi]


def integrate_gf(
    g: GeneralizedFunction1D,
    eps: float,
    interval: tuple[float, float] | None = None,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """Integral of R(eps, .) over ``interval`` or, by default, the real line."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    f = lambda x: g(eps, x)
    pts = g.points(eps)
    if interval is None:
        return integrate_improper(f, cfg, g.decay(eps), pts)
    return integrate_1d(f, interval[0], interval[1], cfg, pts)


def pair(
    g: GeneralizedFunction1D,
    psi: TestFunction,
    eps: float,
    cfg: QuadratureConfig | None = None,
) -> float:
    """<R(eps, .), psi> over the real line.

    Raises :class:`~deltareg.quadrature.QuadratureError` on non-convergence.
    """
    prod = multiply(g, GeneralizedFunction1D(lambda e, x: psi(x), _const_decay(psi.decay)))
    return integrate_gf(prod, eps, cfg=cfg).require("pairing")


def integrate_gf2d(
    g: GeneralizedFunction2D,
    eps: float,
    x1_range: tuple[float, float] | None = None,
    x2_range: tuple[float, float] | None = None,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """Iterated integral of R(eps, x1, x2); ``None`` ranges mean the whole line."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    cfg = cfg or QuadratureConfig()
    if x1_range is None:
        x1_range = window(g.decay_x1(eps), cfg.truncation_tail_tol)
    inner = x2_range if x2_range is not None else (lambda x1: g.decay_x2(eps, x1))

    def x2_points(x1):
        return g.inner_points(eps, x1)

    # A ridge x2 = x1 + c crosses a finite x2 boundary at x1 = bound - c.
    x1_points = []
    if x2_range is not None:
        for r in g.ridges:
            for bound in x2_range:
                x1_points += r.kernel.ridge_points(bound - r.center, r.width * eps)
    x1_points = _clip_points(x1_points, *x1_range)
    return integrate_2d(
        lambda x1, x2: g(eps, x1, x2), x1_range, inner, cfg, x1_points, x2_points
    )
