"""Adaptive Gauss-Kronrod quadrature in one and two dimensions.

The 1D driver is a global adaptive scheme in the style of QUADPACK's QAG:
every subinterval carries a 15-point Kronrod estimate and the embedded
7-point Gauss estimate, and the subinterval with the largest error is
bisected until the summed error meets the tolerance. Integrals over the
real line are truncated to a window derived from a decay hint.

Integrands are vectorized: they receive a 1D numpy array of abscissae and
return an array of the same shape.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "QuadratureConfig",
    "QuadratureResult",
    "QuadratureError",
    "DivergentIntegralError",
    "Gaussian",
    "Compact",
    "Bounded",
    "Decay",
    "BOUNDED",
    "window",
    "tighter",
    "looser",
    "integrate_1d",
    "integrate_improper",
    "integrate_2d",
]

# Kronrod 15-point abscissae (non-negative half) and weights, with the
# embedded 7-point Gauss weights at the odd-indexed nodes.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[1:7:2] = _WG[:-1][:3]
_GWEIGHTS[7] = _WG[-1]
_GWEIGHTS[9:14:2] = _WG[:-1][::-1][:3]

_EPS = np.finfo(float).eps
_MAX_INTERVALS = 5000
_MAX_OUTER_INTERVALS = 400
# Inner integrals run this much tighter so their folded error estimates
# do not dominate outer integrals that cancel to near zero.
_INNER_TIGHTENING = 1e-2


class QuadratureError(RuntimeError):
    """Raised when a quadrature that must converge did not."""

    def __init__(self, message: str, result: "QuadratureResult | None" = None):
        super().__init__(message)
        self.result = result


class DivergentIntegralError(ValueError):
    """An improper integral was requested for an integrand with no decay."""


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_depth: int = 60
    truncation_tail_tol: float = 1e-12

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if not 0 < self.truncation_tail_tol < 1:
            raise ValueError("truncation_tail_tol must lie in (0, 1)")

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool

    def require(self, what: str = "integral") -> float:
        """Return the value, raising :class:`QuadratureError` if unconverged."""
        if not self.converged:
            raise QuadratureError(
                f"{what} did not converge (value={self.value!r}, "
                f"error estimate={self.error_estimate!r})",
                self,
            )
        return self.value


# -- decay hints -------------------------------------------------------------


@dataclass(frozen=True)
class Gaussian:
    """|f(x)| is bounded by a multiple of exp(-(x - center)**2 / (2 scale**2))."""

    center: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("Gaussian decay scale must be positive")


@dataclass(frozen=True)
class Compact:
    """f vanishes outside [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if self.a > self.b:
            raise ValueError("Compact decay requires a <= b")


@dataclass(frozen=True)
class Bounded:
    """No decay information: f is merely bounded."""


BOUNDED = Bounded()
Decay = Union[Gaussian, Compact, Bounded]


def _gaussian_halfwidth(tail_tol: float) -> float:
    # Normalized tail mass erfc(k/sqrt2) < tail_tol; never narrower than 12
    # scale units, the kernel truncation used throughout the package.
    k = math.sqrt(2.0 * math.log(1.0 / tail_tol)) + 3.0
    return max(12.0, k)


def window(decay: Decay, tail_tol: float = 1e-12) -> tuple[float, float]:
    """Finite interval outside which the hinted integrand has negligible mass."""
    if isinstance(decay, Compact):
        return decay.a, decay.b
    if isinstance(decay, Gaussian):
        h = _gaussian_halfwidth(tail_tol) * decay.scale
        return decay.center - h, decay.center + h
    raise DivergentIntegralError(
        "bounded integrand on an infinite range: the improper integral is "
        "not guaranteed to be finite"
    )


def _as_gaussian(d: Compact) -> Gaussian:
    half = 0.5 * (d.b - d.a)
    return Gaussian(0.5 * (d.a + d.b), max(half / 12.0, 1e-300))


def tighter(d1: Decay, d2: Decay) -> Decay:
    """Decay hint for the product of two hinted functions."""
    if isinstance(d1, Bounded):
        return d2
    if isinstance(d2, Bounded):
        return d1
    if isinstance(d1, Compact) and isinstance(d2, Compact):
        a, b = max(d1.a, d2.a), min(d1.b, d2.b)
        if a > b:
            a = b = 0.5 * (a + b)
        return Compact(a, b)
    if isinstance(d1, Compact):
        return d1
    if isinstance(d2, Compact):
        return d2
    # Product of two Gaussian bounds is a Gaussian bound with summed precision.
    p1, p2 = d1.scale ** -2, d2.scale ** -2
    center = (p1 * d1.center + p2 * d2.center) / (p1 + p2)
    return Gaussian(center, (p1 + p2) ** -0.5)


def looser(d1: Decay, d2: Decay) -> Decay:
    """Decay hint for the sum of two hinted functions."""
    if isinstance(d1, Bounded) or isinstance(d2, Bounded):
        return BOUNDED
    if isinstance(d1, Compact) and isinstance(d2, Compact):
        return Compact(min(d1.a, d2.a), max(d1.b, d2.b))
    g1 = _as_gaussian(d1) if isinstance(d1, Compact) else d1
    g2 = _as_gaussian(d2) if isinstance(d2, Compact) else d2
    # The window of the result covers both windows.
    center = 0.5 * (g1.center + g2.center)
    scale = max(g1.scale, g2.scale) + 0.5 * abs(g1.center - g2.center)
    return Gaussian(center, scale)


def shifted(decay: Decay, c: float) -> Decay:
    if isinstance(decay, Gaussian):
        return Gaussian(decay.center + c, decay.scale)
    if isinstance(decay, Compact):
        return Compact(decay.a + c, decay.b + c)
    return decay


# -- 1D ---------------------------------------------------------------------


def _gk15(f, a, b, with_errors):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * _NODES
    out = f(x)
    if with_errors:
        y, inner_err = out
        inner_err = np.asarray(inner_err, dtype=float)
    else:
        y, inner_err = out, None
    y = np.broadcast_to(np.asarray(y, dtype=float), x.shape)
    if not np.all(np.isfinite(y)):
        raise FloatingPointError(f"integrand not finite on [{a}, {b}]")
    kron = half * float(np.dot(_KWEIGHTS, y))
    gauss = half * float(np.dot(_GWEIGHTS, y))
    absh = abs(half)
    resabs = absh * float(np.dot(_KWEIGHTS, np.abs(y)))
    resasc = absh * float(np.dot(_KWEIGHTS, np.abs(y - kron / (2 * half))))
    err = abs(kron - gauss)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > np.finfo(float).tiny / (50 * _EPS):
        err = max(err, 50 * _EPS * resabs)
    if inner_err is not None:
        err += absh * float(np.dot(_KWEIGHTS, inner_err))
    return kron, err


def _adaptive(
    f, a, b, cfg, points=(), with_errors=False, max_intervals=_MAX_INTERVALS
) -> QuadratureResult:
    if a > b:
        raise ValueError(f"integration bounds out of order: a={a} > b={b}")
    if a == b:
        return QuadratureResult(0.0, 0.0, 0, True)
    cuts = sorted({float(p) for p in points if a < p < b})
    edges = [a, *cuts, b]
    heap = []  # (-err, seq, a, b, value, err, depth)
    total = 0.0
    total_err = 0.0
    evals = 0
    seq = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = _gk15(f, lo, hi, with_errors)
        evals += 15
        total += v
        total_err += e
        heapq.heappush(heap, (-e, seq, lo, hi, v, e, 0))
        seq += 1
    frozen_err = 0.0
    frozen_val = 0.0
    while heap and total_err > cfg.target(total):
        if seq > max_intervals:
            break
        _, _, lo, hi, v, e, depth = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if depth >= cfg.max_depth or not lo < mid < hi:
            # Cannot refine further; keep its contribution and move on.
            frozen_val += v
            frozen_err += e
            continue
        v1, e1 = _gk15(f, lo, mid, with_errors)
        v2, e2 = _gk15(f, mid, hi, with_errors)
        evals += 30
        total += v1 + v2 - v
        total_err += e1 + e2 - e
        heapq.heappush(heap, (-e1, seq, lo, mid, v1, e1, depth + 1))
        heapq.heappush(heap, (-e2, seq + 1, mid, hi, v2, e2, depth + 1))
        seq += 2
    # Re-sum from the pieces so the result does not carry drift from the
    # running updates.
    pieces = sorted((item[2], item[4], item[5]) for item in heap)
    value = math.fsum(p[1] for p in pieces) + frozen_val
    err = math.fsum(p[2] for p in pieces) + frozen_err
    return QuadratureResult(value, err, evals, err <= cfg.target(value))


def _vectorize(f):
    # Scalar-only integrands are evaluated node by node.
    def g(x):
        try:
            y = f(x)
        except TypeError:
            y = None
        if y is None or np.ndim(y) == 0:
            return np.array([float(f(xi)) for xi in x])
        return y
    return g


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadratureConfig | None = None,
    points: Sequence[float] = (),
) -> QuadratureResult:
    """Integrate ``f`` over ``[a, b]``.

    ``points`` are forced initial breakpoints; narrow peaks inside the
    interval must be listed here so the first pass cannot step over them.
    A result that misses the tolerance is returned with ``converged=False``.
    """
    cfg = cfg or QuadratureConfig()
    return _adaptive(_vectorize(f), float(a), float(b), cfg, points)


def integrate_improper(
    f: Callable[[np.ndarray], np.ndarray],
    cfg: QuadratureConfig | None = None,
    decay_hint: Decay = BOUNDED,
    points: Sequence[float] = (),
) -> QuadratureResult:
    """Integrate ``f`` over the real line using ``decay_hint`` to truncate.

    Raises :class:`DivergentIntegralError` for a :class:`Bounded` hint.
    """
    cfg = cfg or QuadratureConfig()
    lo, hi = window(decay_hint, cfg.truncation_tail_tol)
    return _adaptive(_vectorize(f), lo, hi, cfg, points)


# -- 2D ---------------------------------------------------------------------

Range = Union[tuple[float, float], Gaussian, Compact, Bounded]


def _resolve(rng, tail_tol):
    if isinstance(rng, (Gaussian, Compact, Bounded)):
        return window(rng, tail_tol)
    lo, hi = rng
    return float(lo), float(hi)


def integrate_2d(
    f: Callable[[float, np.ndarray], np.ndarray],
    x1_range: Range,
    x2_range: Union[Range, Callable[[float], Range]],
    cfg: QuadratureConfig | None = None,
    x1_points: Sequence[float] = (),
    x2_points: Callable[[float], Sequence[float]] | None = None,
) -> QuadratureResult:
    """Iterated integral of ``f(x1, x2)``: inner over x2, outer over x1.

    ``f`` is called with a scalar ``x1`` and an array of ``x2`` values.
    Either range may be an explicit ``(lo, hi)`` pair or a decay hint for the
    whole line; ``x2_range`` may also be a callable of ``x1`` returning one,
    which is how per-x1 decay hints for a moving ridge are supplied.
    ``x2_points(x1)`` gives the forced inner breakpoints at each ``x1``.

    Inner error estimates are folded into the outer estimate, and an inner
    failure marks the whole result unconverged.
    """
    cfg = cfg or QuadratureConfig()
    inner_cfg = replace(
        cfg,
        abs_tol=cfg.abs_tol * _INNER_TIGHTENING,
        rel_tol=cfg.rel_tol * _INNER_TIGHTENING,
    )
    lo1, hi1 = _resolve(x1_range, cfg.truncation_tail_tol)
    inner_range = x2_range if callable(x2_range) else (lambda _x1: x2_range)
    inner_points = x2_points or (lambda _x1: ())
    state = {"evals": 0, "ok": True}

    def outer(x1s):
        vals = np.empty_like(x1s)
        errs = np.empty_like(x1s)
        for i, x1 in enumerate(x1s):
            x1 = float(x1)
            lo2, hi2 = _resolve(inner_range(x1), cfg.truncation_tail_tol)
            res = _adaptive(
                _vectorize(lambda x2: f(x1, x2)), lo2, hi2, inner_cfg, inner_points(x1)
            )
            state["evals"] += res.evaluations
            state["ok"] &= res.converged
            vals[i] = res.value
            errs[i] = res.error_estimate
        return vals, errs

    res = _adaptive(
        outer, lo1, hi1, cfg, x1_points, with_errors=True,
        max_intervals=_MAX_OUTER_INTERVALS,
    )
    return QuadratureResult(
        res.value,
        res.error_estimate,
        state["evals"],
        res.converged and state["ok"],
    )
