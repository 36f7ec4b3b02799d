"""Deterministic adaptive quadrature with endpoint-truncation extrapolation.

Integrals over the open unit interval (or square) with integrable endpoint
singularities are computed as: adaptive 15-point Gauss--Kronrod on a truncated
domain, plus a tail correction obtained by halving the truncation level a few
times and accelerating the resulting sequence (Aitken's delta-squared, i.e.
Richardson with estimated ratio).  The strip masses added by each halving also
power the divergence test: if they stop shrinking geometrically the integral
is declared nonconvergent rather than silently truncated.

Everything is deterministic: panels are summed in domain order with
compensated summation, never in refinement order.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NonconvergenceError

__all__ = ["QuadratureConfig", "gk15_fixed", "graded_breaks", "integrate_1d", "integrate_2d",
           "integrate_open01", "integrate_square_open"]

# 15-point Kronrod extension of 7-point Gauss (positive half, descending).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
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

# Full 15-node arrays on [-1, 1].
_NODES = np.concatenate((-_XGK[:-1], _XGK[::-1]))
_W_KRONROD = np.concatenate((_WGK[:-1], _WGK[::-1]))
# Gauss nodes sit at the odd positions of the Kronrod set.
_W_GAUSS = np.zeros(15)
_W_GAUSS[1:14:2] = np.concatenate((_WG[:-1], _WG[::-1]))

_DIVERGENCE_RATIO = 0.98
# The open-domain wrappers drive the panel integrals this much below the
# requested tolerance so that the summed error estimate still meets it.
_INNER_TIGHTENING = 20.0


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and budgets for the adaptive integrators."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    edge_epsilon: float = 1e-6
    max_subdivisions: int = 6000
    extrapolation_levels: int = 8

    def __post_init__(self):
        if not (0.0 < self.edge_epsilon < 1e-2):
            raise ValueError(f"edge_epsilon must lie in (0, 1e-2), got {self.edge_epsilon}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1 or self.extrapolation_levels < 0:
            raise ValueError("budgets must be positive")


def gk15_fixed(f, a: float, b: float) -> tuple[float, float]:
    """One Gauss--Kronrod panel on [a, b]; returns (value, error estimate)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    y = np.asarray(f(mid + half * _NODES), dtype=float)
    ik = half * float(np.dot(_W_KRONROD, y))
    ig = half * float(np.dot(_W_GAUSS, y))
    return ik, abs(ik - ig)


def _tolerance(cfg: QuadratureConfig, value: float, scale: float = 0.0) -> float:
    return max(cfg.abs_tol, cfg.rel_tol * max(abs(value), abs(scale)))


def graded_breaks(lo: float, hi: float) -> list[float]:
    """Breakpoints geometrically refined toward 0 and 1 inside (lo, hi).

    Power-type endpoint singularities are nearly scale-free on each decade
    cell, so a decade-graded initial mesh makes the embedded rule accurate
    per cell where uniform bisection would grind.
    """
    pts = {lo, hi}
    t = lo
    while t < 0.1:
        t *= 10.0
        if lo < t < hi:
            pts.add(t)
    s = 1.0 - hi
    while s < 0.1:
        s *= 10.0
        if lo < 1.0 - s < hi:
            pts.add(1.0 - s)
    return sorted(pts)


def integrate_1d(f, a: float, b: float, cfg: QuadratureConfig, scale: float = 0.0,
                 breaks=None, raise_on_stall: bool = True) -> tuple[float, float]:
    """Adaptive panel-bisection integral of a vectorized integrand on [a, b].

    ``scale`` loosens the relative tolerance for pieces of a larger integral:
    the error target is max(abs_tol, rel_tol * max(|value|, scale)).
    ``breaks`` seeds the initial partition (must start at a and end at b).
    With ``raise_on_stall`` off, a budget-exhausted result is returned with
    its (honest) error estimate instead of raising; callers that extrapolate
    apply their own final tolerance check.
    """
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError(f"bad interval [{a}, {b}]")
    if breaks is None:
        breaks = [a, b]
    # heap of (-error, left, right, value); floats give a deterministic order
    heap = []
    for pa, pb in zip(breaks, breaks[1:]):
        val, err = gk15_fixed(f, pa, pb)
        heap.append((-err, pa, pb, val))
    heapq.heapify(heap)
    while len(heap) < cfg.max_subdivisions:
        total_val = math.fsum(p[3] for p in heap)
        total_err = math.fsum(-p[0] for p in heap)
        if total_err <= _tolerance(cfg, total_val, scale):
            break
        neg_err, pa, pb, _ = heapq.heappop(heap)
        pm = 0.5 * (pa + pb)
        if pm <= pa or pm >= pb:  # interval at floating-point resolution
            heapq.heappush(heap, (neg_err, pa, pb, _))
            break
        v1, e1 = gk15_fixed(f, pa, pm)
        v2, e2 = gk15_fixed(f, pm, pb)
        heapq.heappush(heap, (-e1, pa, pm, v1))
        heapq.heappush(heap, (-e2, pm, pb, v2))
    panels = sorted(heap, key=lambda p: p[1])
    value = math.fsum(p[3] for p in panels)
    error = math.fsum(-p[0] for p in panels)
    if raise_on_stall and error > _tolerance(cfg, value, scale):
        raise NonconvergenceError(
            f"1-D quadrature on [{a}, {b}] stalled at error {error:.3e} "
            f"after {len(panels)} panels (tolerance {_tolerance(cfg, value, scale):.3e})"
        )
    return value, error


def _gk15_panel_2d(f, x0, x1, y0, y1) -> tuple[float, float]:
    hx, mx = 0.5 * (x1 - x0), 0.5 * (x0 + x1)
    hy, my = 0.5 * (y1 - y0), 0.5 * (y0 + y1)
    xs = mx + hx * _NODES
    ys = my + hy * _NODES
    z = np.asarray(f(xs[:, None], ys[None, :]), dtype=float)
    ikk = hx * hy * float(_W_KRONROD @ z @ _W_KRONROD)
    igg = hx * hy * float(_W_GAUSS @ z @ _W_GAUSS)
    return ikk, abs(ikk - igg)


def integrate_2d(f, xspan, yspan, cfg: QuadratureConfig, scale: float = 0.0,
                 xbreaks=None, ybreaks=None, raise_on_stall: bool = True) -> tuple[float, float]:
    """Adaptive tensor Gauss--Kronrod integral over a rectangle.

    ``f`` must accept broadcastable arrays (column of x against row of y).
    The worst panel (by embedded-rule discrepancy) is split into quadrants.
    ``xbreaks``/``ybreaks`` seed the initial partition along each axis.
    """
    x0, x1 = map(float, xspan)
    y0, y1 = map(float, yspan)
    if not (x0 < x1 and y0 < y1):
        raise ValueError(f"bad rectangle [{x0},{x1}]x[{y0},{y1}]")
    if xbreaks is None:
        xbreaks = [x0, x1]
    if ybreaks is None:
        ybreaks = [y0, y1]
    heap = []
    for pa, pb in zip(xbreaks, xbreaks[1:]):
        for pc, pd in zip(ybreaks, ybreaks[1:]):
            val, err = _gk15_panel_2d(f, pa, pb, pc, pd)
            heap.append((-err, pa, pb, pc, pd, val))
    heapq.heapify(heap)
    while len(heap) < cfg.max_subdivisions:
        total_val = math.fsum(p[5] for p in heap)
        total_err = math.fsum(-p[0] for p in heap)
        if total_err <= _tolerance(cfg, total_val, scale):
            break
        _, a, b, c, d, _v = heapq.heappop(heap)
        mx, my = 0.5 * (a + b), 0.5 * (c + d)
        if mx <= a or mx >= b or my <= c or my >= d:
            heapq.heappush(heap, (_, a, b, c, d, _v))
            break
        for qa, qb, qc, qd in ((a, mx, c, my), (mx, b, c, my), (a, mx, my, d), (mx, b, my, d)):
            v, e = _gk15_panel_2d(f, qa, qb, qc, qd)
            heapq.heappush(heap, (-e, qa, qb, qc, qd, v))
    panels = sorted(heap, key=lambda p: (p[1], p[3]))
    value = math.fsum(p[5] for p in panels)
    error = math.fsum(-p[0] for p in panels)
    if raise_on_stall and error > _tolerance(cfg, value, scale):
        raise NonconvergenceError(
            f"2-D quadrature stalled at error {error:.3e} after {len(panels)} panels"
        )
    return value, error


def _aitken_last(seq: list[float]) -> tuple[float, float]:
    """Accelerate a convergent sequence; return (limit estimate, residual estimate)."""
    cur = list(seq)
    residual = abs(cur[-1] - cur[-2]) if len(cur) >= 2 else 0.0
    while len(cur) >= 3:
        nxt = []
        for i in range(len(cur) - 2):
            d2 = cur[i + 2] - 2.0 * cur[i + 1] + cur[i]
            d1 = cur[i + 2] - cur[i + 1]
            if abs(d2) <= 1e-300 or not math.isfinite(d2):
                nxt.append(cur[i + 2])
            else:
                nxt.append(cur[i + 2] - d1 * d1 / d2)
        residual = abs(nxt[-1] - cur[-1]) if nxt else residual
        if len(nxt) >= 2:
            residual = min(residual, abs(nxt[-1] - nxt[-2]))
        cur = nxt
    return cur[-1], residual


def _tail_limit(strips: list[float], floor: float, what: str) -> tuple[float, float]:
    """Total mass of one endpoint tail from its successive halving strips.

    Each halving of the truncation level contributes a strip; for a tail with
    an integrable power/slow singularity the strips shrink geometrically, so
    the cumulative sums are accelerated to their limit.  A shrink factor at or
    above the divergence threshold raises instead.  Returns (limit of the
    remaining tail mass, residual estimate).
    """
    if all(abs(s) <= floor for s in strips):
        return math.fsum(strips), abs(strips[-1]) if strips else 0.0
    for prev, cur in zip(strips, strips[1:]):
        if abs(cur) <= floor:
            continue  # shrunk into the noise: converged
        if abs(prev) > 0 and abs(cur) / abs(prev) >= _DIVERGENCE_RATIO:
            raise NonconvergenceError(
                f"{what}: successive endpoint strips shrink by factor "
                f"{abs(cur) / abs(prev):.4f} >= {_DIVERGENCE_RATIO}; the tail "
                "integral is divergent or too close to divergence to resolve"
            )
    partial = 0.0
    seq = [0.0]
    for s in strips:
        partial += s
        seq.append(partial)
    return _aitken_last(seq)


def integrate_open01(f, cfg: QuadratureConfig) -> tuple[float, float, dict]:
    """Integral of a vectorized integrand over the open interval (0, 1).

    The integrand may blow up (integrably) at either endpoint: the adaptive
    core runs on the truncated interval and each endpoint's remaining mass is
    extrapolated separately from truncation-halving strips.  Raises when a
    tail looks divergent or the final error estimate misses the tolerance.
    Returns (value, estimated error, diagnostics).
    """
    eps = cfg.edge_epsilon
    inner = replace(cfg, abs_tol=cfg.abs_tol / _INNER_TIGHTENING, rel_tol=cfg.rel_tol / _INNER_TIGHTENING)
    base, quad_err = integrate_1d(f, eps, 1.0 - eps, inner,
                                  breaks=graded_breaks(eps, 1.0 - eps), raise_on_stall=False)
    lefts, rights = [], []
    for _ in range(cfg.extrapolation_levels):
        nxt = eps * 0.5
        left, le = integrate_1d(f, nxt, eps, inner, scale=base, raise_on_stall=False)
        right, re_ = integrate_1d(f, 1.0 - eps, 1.0 - nxt, inner, scale=base, raise_on_stall=False)
        lefts.append(left)
        rights.append(right)
        quad_err += le + re_
        eps = nxt
    floor = 0.01 * _tolerance(cfg, base)
    left_tail, left_res = _tail_limit(lefts, floor, "lower endpoint of (0,1)")
    right_tail, right_res = _tail_limit(rights, floor, "upper endpoint of (0,1)")
    value = base + left_tail + right_tail
    est_error = quad_err + left_res + right_res
    if est_error > _tolerance(cfg, value):
        raise NonconvergenceError(
            f"open-interval integral: error estimate {est_error:.3e} exceeds "
            f"tolerance {_tolerance(cfg, value):.3e} after {cfg.extrapolation_levels} "
            "truncation halvings"
        )
    diagnostics = {
        "truncation_levels": cfg.extrapolation_levels,
        "last_strip": (lefts[-1] + rights[-1]) if lefts else 0.0,
        "extrapolation_residual": left_res + right_res,
    }
    return value, est_error, diagnostics


def integrate_square_open(f, cfg: QuadratureConfig) -> tuple[float, float, dict]:
    """Double integral of a vectorized kernel over the open square (0, 1)^2.

    Same truncation-and-accelerate scheme as ``integrate_open01``; each
    halving adds a frame decomposed into four side strips, and each side's
    strip family is extrapolated separately.
    """
    eps = cfg.edge_epsilon
    inner = replace(cfg, abs_tol=cfg.abs_tol / _INNER_TIGHTENING, rel_tol=cfg.rel_tol / _INNER_TIGHTENING)
    g = graded_breaks(eps, 1.0 - eps)
    base, quad_err = integrate_2d(f, (eps, 1.0 - eps), (eps, 1.0 - eps), inner,
                                  xbreaks=g, ybreaks=g, raise_on_stall=False)
    sides: list[list[float]] = [[], [], [], []]
    for _ in range(cfg.extrapolation_levels):
        nxt = eps * 0.5
        lo, hi = nxt, 1.0 - nxt
        long_breaks = graded_breaks(lo, hi)
        mid_breaks = graded_breaks(eps, 1.0 - eps)
        parts = (
            ((lo, eps), (lo, hi), None, long_breaks),                 # left strip, full height
            ((1.0 - eps, hi), (lo, hi), None, long_breaks),           # right strip, full height
            ((eps, 1.0 - eps), (lo, eps), mid_breaks, None),          # bottom strip
            ((eps, 1.0 - eps), (1.0 - eps, hi), mid_breaks, None),    # top strip
        )
        for side, (xs, ys, xb, yb) in enumerate(parts):
            v, e = integrate_2d(f, xs, ys, inner, scale=base, xbreaks=xb, ybreaks=yb,
                                raise_on_stall=False)
            sides[side].append(v)
            quad_err += e
        eps = nxt
    floor = 0.01 * _tolerance(cfg, base)
    names = ("left edge", "right edge", "bottom edge", "top edge")
    value = base
    residual = 0.0
    last_frame = 0.0
    for side, name in enumerate(names):
        tail, res = _tail_limit(sides[side], floor, f"{name} of (0,1)^2")
        value += tail
        residual += res
        last_frame += sides[side][-1] if sides[side] else 0.0
    est_error = quad_err + residual
    if est_error > _tolerance(cfg, value):
        raise NonconvergenceError(
            f"open-square integral: error estimate {est_error:.3e} exceeds "
            f"tolerance {_tolerance(cfg, value):.3e} after {cfg.extrapolation_levels} "
            "truncation halvings"
        )
    diagnostics = {
        "truncation_levels": cfg.extrapolation_levels,
        "last_frame": last_frame,
        "extrapolation_residual": residual,
    }
    return value, est_error, diagnostics
