"""Asymptotic variance of the paired-sample cost estimator, with confidence intervals.

Standardized by sqrt(n), the estimation error of the matched-pairs cost converges
to a centred normal law whose variance is a double integral over the unit square:
the cost gradient composed with the two quantile functions, contracted against the
covariance of the joint quantile bridge.  Writing h_X = f o F^{-1}, h_Y = g o G^{-1}
for the quantile densities and Pi for the copula of a pair, the covariance kernel
has marginal blocks (min(u,v) - uv) / (h(u) h(v)) and cross blocks
(Pi(u,v) - uv) / (h_X(u) h_Y(v)).

``sigma2`` evaluates the integral term by term with adaptive quadrature, after a
cheap one-dimensional guard that detects the infinite-variance regime from the tail
growth of the cost slope against each quantile density.  Semi-closed forms cover
the common special cases (independent samples with squared distance, location-scale
families, Gaussian marginals), ``plug_in_sigma2`` estimates the same quantity from
one paired sample alone, and ``confidence_interval`` turns any of these into a
normal-theory interval.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtri

from .costs import Cost, PowerCost, QuantileCost
from .coupling import Comonotone, Countermonotone, Coupling, Independent, copula_cdf
from .distributions import Distribution, Gaussian, reflect
from .errors import DegenerateSampleError, NonconvergenceError, UnsupportedCostError
from .estimate import PairedSample
from .quadrature import QuadratureConfig, integrate_open01, integrate_square_open

__all__ = [
    "DEFAULT_VARIANCE_CONFIG",
    "VarianceResult",
    "variance_kernel",
    "sigma2",
    "sigma2_one_sample",
    "sigma2_w2_independent",
    "sigma2_location_scale",
    "sigma2_gaussian",
    "plug_in_sigma2",
    "confidence_interval",
]

#: Looser than the quadrature defaults: the variance kernels carry corner
#: singularities in all four 1/h factors, and the downstream uses (CI widths,
#: cross-checks against replicate variances) never need more than ~1e-4 relative.
DEFAULT_VARIANCE_CONFIG = QuadratureConfig(abs_tol=1e-7, rel_tol=1e-5)

_MOMENT_CONFIG = QuadratureConfig()

_METHODS = frozenset({
    "quadrature",
    "closed_form_gaussian",
    "closed_form_location_scale",
    "closed_form_w2_independent",
    "plug_in",
})

#: Negative totals larger than this cannot be blamed on roundoff: the kernel is a
#: covariance quadratic form, so a materially negative integral means the
#: quadrature failed.
_CLAMP_LIMIT = 1e-8

#: Stand-in for overflowed guard integrand values; keeps the divergence detector
#: working (huge strips with ratio ~1) without poisoning the arithmetic with inf.
_GUARD_CEILING = 1e300

_SEPARATION_PROBES = (1e-6, 1e-4, 1e-2, 1.0 - 1e-2, 1.0 - 1e-4, 1.0 - 1e-6)


@dataclass(frozen=True)
class VarianceResult:
    """An asymptotic-variance value with its provenance and error estimate."""

    value: float
    est_error: float
    method: str
    diagnostics: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not (self.value >= 0.0):
            raise ValueError(f"a variance is nonnegative, got {self.value}")
        if not (self.est_error >= 0.0):
            raise ValueError(f"error estimate must be nonnegative, got {self.est_error}")
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {sorted(_METHODS)}")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "est_error": self.est_error,
            "method": self.method,
            "diagnostics": self.diagnostics,
        }


# --- kernel pieces ------------------------------------------------------------


def _bridge(u, v):
    """Brownian-bridge covariance min(u,v) - uv, as u(1-v) for u <= v (no cancellation)."""
    ua, va = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    return np.where(ua <= va, ua * (1.0 - va), va * (1.0 - ua))


def _copula_excess(cp: Coupling, u, v):
    """Pi(u,v) - uv in a cancellation-resistant form for the standard couplings."""
    ua, va = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if isinstance(cp, Independent):
        return np.zeros(np.broadcast_shapes(ua.shape, va.shape))
    if isinstance(cp, Comonotone):
        return _bridge(ua, va)
    if isinstance(cp, Countermonotone):
        return np.where(ua + va >= 1.0, -(1.0 - ua) * (1.0 - va), -ua * va)
    return np.asarray(copula_cdf(cp, ua, va), dtype=float) - ua * va


def _slope_over_density(F: Distribution, G: Distribution, c: Cost, which: int):
    """u -> (partial_x or partial_y) c(F^{-1}(u), G^{-1}(u)) / h(u), h of the matching marginal."""
    law = F if which == 0 else G

    def p(u):
        ua = np.asarray(u, dtype=float)
        g = c.gradient(F.quantile(ua), G.quantile(ua))[which]
        return np.asarray(g, dtype=float) / np.asarray(law.density_quantile(ua), dtype=float)

    return p


def _kernel_terms(F: Distribution, G: Distribution, c: Cost, cp: Coupling):
    """The four summands of grad(u) Sigma(u,v) grad(v), each with its own corner profile."""
    px = _slope_over_density(F, G, c, 0)
    py = _slope_over_density(F, G, c, 1)

    def a1(u, v):
        return px(u) * px(v) * _bridge(u, v)

    def a2(u, v):
        return px(u) * py(v) * _copula_excess(cp, u, v)

    def a3(u, v):
        return py(u) * px(v) * _copula_excess(cp, v, u)

    def a4(u, v):
        return py(u) * py(v) * _bridge(u, v)

    return a1, a2, a3, a4


def variance_kernel(F: Distribution, G: Distribution, c: Cost, cp: Coupling):
    """Pointwise integrand (u, v) -> grad(u) Sigma(u,v) grad(v) of the variance integral.

    Exposed for diagnostics and symmetry checks; ``sigma2`` integrates the four terms
    separately rather than through this sum.
    """
    terms = _kernel_terms(F, G, c, cp)

    def kernel(u, v):
        a1, a2, a3, a4 = (t(u, v) for t in terms)
        return a1 + a2 + a3 + a4

    return kernel


# --- divergence guard and degeneracy warning ----------------------------------


def _heavier_right(F: Distribution, G: Distribution) -> Distribution | None:
    """The marginal with the heavier right tail; None when both are bounded above.

    An unbounded support always beats a bounded one; between two unbounded laws the
    deep quantile decides.
    """
    f_inf = math.isinf(F.support()[1])
    g_inf = math.isinf(G.support()[1])
    if not f_inf and not g_inf:
        return None
    if f_inf != g_inf:
        return F if f_inf else G
    u = 1.0 - 1e-8
    return F if float(F.quantile(u)) >= float(G.quantile(u)) else G


def _slope_tail_integral(heavy: Distribution, law: Distribution, c: Cost,
                         q: QuadratureConfig) -> float:
    """J = int rho'(heavy quantile(u)) sqrt(1-u) / h_law(u) du over the right tail.

    The window starts where the heavy quantile clears 1, so the radial slope is
    evaluated at safely positive distances.  Divergence of this one-dimensional
    integral is the cheap certificate that the two-dimensional variance integral
    has a non-integrable tail.  Only the convergence verdict matters -- the value
    is a diagnostic -- so the quadrature runs at a coarse relative tolerance with
    deep truncation halvings: convergent-but-slow tails (mass decaying like a
    small power of 1-u) would otherwise fail the accuracy check, not because they
    diverge but because their tail mass is expensive to pin down.
    """
    q = replace(q, rel_tol=max(q.rel_tol, 1e-3),
                extrapolation_levels=max(q.extrapolation_levels, 12))
    ubar = max(0.5, float(heavy.cdf(1.0)))
    span = 1.0 - ubar

    def f(t):
        ta = np.asarray(t, dtype=float)
        u = ubar + span * ta
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            vals = (np.asarray(c.rho_prime(np.asarray(heavy.quantile(u), dtype=float)), dtype=float)
                    * np.sqrt(span * (1.0 - ta))
                    / np.asarray(law.density_quantile(u), dtype=float)) * span
        return np.where(np.isfinite(vals), vals, _GUARD_CEILING)

    value, _, _ = integrate_open01(f, q)
    return value


def _tail_guard(F: Distribution, G: Distribution, c: Cost, q: QuadratureConfig,
                which: tuple[str, ...]) -> dict:
    """Run the divergence guard for each relevant (tail side, marginal density) pair.

    Returns the finite guard integrals keyed like ``"right_x"``; raises
    NonconvergenceError as soon as one diverges, signalling an infinite asymptotic
    variance before any two-dimensional work is spent.  Tail sides where both
    supports are bounded need no guard: every kernel factor stays integrable there.
    """
    out: dict[str, float] = {}
    for side, (A, B) in (("right", (F, G)), ("left", (reflect(F), reflect(G)))):
        heavy = _heavier_right(A, B)
        if heavy is None:
            continue
        for key in which:
            law = A if key == "x" else B
            try:
                out[f"{side}_{key}"] = _slope_tail_integral(heavy, law, c, q)
            except NonconvergenceError as exc:
                marginal = "first" if key == "x" else "second"
                raise NonconvergenceError(
                    f"asymptotic variance diverges: the {side}-tail integral of the cost "
                    f"slope against the {marginal} quantile density is not integrable (or "
                    "too close to divergence to resolve), so the variance double integral "
                    "is infinite for this cost/tail pairing"
                ) from exc
    return out


def _warn_if_tails_meet(F: Distribution, G: Distribution) -> None:
    """Warn when the quantile gap vanishes somewhere in the tails.

    The first-order theory needs the marginals to stay apart in the tails; as they
    coalesce the normal limit degenerates (for F = G every kernel term is 0 and the
    fluctuation lives at a different scale entirely).
    """
    us = np.asarray(_SEPARATION_PROBES)
    fq = np.asarray(F.quantile(us), dtype=float)
    gq = np.asarray(G.quantile(us), dtype=float)
    gap = np.abs(fq - gq) / (1.0 + np.abs(fq) + np.abs(gq))
    if float(np.min(gap)) < 1e-8:
        warnings.warn(
            "marginals nearly coincide in a tail; the asymptotic variance degenerates "
            "and the normal approximation is unreliable near F = G",
            UserWarning,
            stacklevel=3,
        )


def _require_gradient(c: Cost) -> None:
    if isinstance(c, QuantileCost):
        raise UnsupportedCostError(
            "the quantile (pinball) cost has no gradient off the diagonal, so the "
            "normal-limit variance is not defined for it"
        )


def _clamped(total: float, err: float, what: str) -> tuple[float, float, float]:
    """Enforce nonnegativity: tiny negatives are roundoff, large ones are failures."""
    if total < -_CLAMP_LIMIT:
        raise NonconvergenceError(
            f"{what} came out {total:.3e} < -{_CLAMP_LIMIT:.0e}; the kernel is a "
            "covariance form, so a negative of this size means the quadrature failed"
        )
    if total < 0.0:
        return 0.0, err - total, -total
    return total, err, 0.0


# --- population variances -----------------------------------------------------


def sigma2(F: Distribution, G: Distribution, c: Cost, cp: Coupling,
           q: QuadratureConfig | None = None) -> VarianceResult:
    """Asymptotic variance of sqrt(n) times the estimation error of the paired cost.

    Integrates the four terms of ``variance_kernel`` separately over the open unit
    square -- each has its own corner profile, so the adaptive mesh works less per
    term than on their sum -- after the one-dimensional tail guard.  The coupling
    enters only through the cross terms, which vanish identically for independent
    pairs.

    Raises NonconvergenceError when the guard or the quadrature detects divergence
    (infinite variance) and UnsupportedCostError for costs without the gradient and
    radial-slope machinery.
    """
    if q is None:
        q = DEFAULT_VARIANCE_CONFIG
    _require_gradient(c)
    _warn_if_tails_meet(F, G)
    guard = _tail_guard(F, G, c, q, ("x", "y"))
    term_diag: dict[str, dict] = {}
    values, errors = [], []
    for name, f in zip(("a1", "a2", "a3", "a4"), _kernel_terms(F, G, c, cp)):
        v, e, d = integrate_square_open(f, q)
        values.append(v)
        errors.append(e)
        term_diag[name] = {"value": v, "est_error": e, **d}
    value, err, clamp = _clamped(math.fsum(values), math.fsum(errors), "variance integral")
    return VarianceResult(value, err, "quadrature",
                          {"terms": term_diag, "tail_guard": guard, "clamp": clamp})


def sigma2_one_sample(F: Distribution, G: Distribution, c: Cost, side: str = "x",
                      q: QuadratureConfig | None = None) -> VarianceResult:
    """Variance when only one sample is random and the other marginal is known.

    For side "x" the limit of sqrt(n)(W(F_n, G) - W(F, G)) is centred normal with
    variance iint d(u) (min(u,v)-uv)/(h(u)h(v)) d(v) du dv, where d is the matching
    partial slope of the cost along the quantile diagonal and h the same marginal's
    quantile density.  The slope factor is applied at *both* arguments: the limit is
    the variance of a mean-zero Gaussian integral, hence a quadratic functional of d,
    and under independent pairing the two sides must add up to the two-sample value.
    Cross-validated against replicate variances in simulation.
    """
    if side not in ("x", "y"):
        raise ValueError(f"side must be 'x' or 'y', got {side!r}")
    if q is None:
        q = DEFAULT_VARIANCE_CONFIG
    _require_gradient(c)
    _warn_if_tails_meet(F, G)
    guard = _tail_guard(F, G, c, q, (side,))
    d = _slope_over_density(F, G, c, 0 if side == "x" else 1)

    def kernel(u, v):
        return d(u) * d(v) * _bridge(u, v)

    v, e, diag = integrate_square_open(kernel, q)
    value, err, clamp = _clamped(v, e, "one-sample variance integral")
    return VarianceResult(value, err, "quadrature",
                          {"side": side, "tail_guard": guard, "clamp": clamp, **diag})


def sigma2_w2_independent(F: Distribution, G: Distribution,
                          q: QuadratureConfig | None = None) -> VarianceResult:
    """Variance for independent samples under squared distance, by its reduced kernel.

    With c(x,y) = (x-y)^2 the gradient along the quantile diagonal is
    (2 tau, -2 tau), tau = F^{-1} - G^{-1}, and independence kills the cross terms,
    leaving 4 iint tau(u) tau(v) [K_X + K_Y](u, v) du dv with K the bridge covariance
    over each squared quantile density.  Agrees with the general ``sigma2`` route
    within combined tolerances; kept separate because the reduced kernel is both a
    useful cross-check and noticeably cheaper.
    """
    if q is None:
        q = DEFAULT_VARIANCE_CONFIG
    c = PowerCost(2.0)
    _warn_if_tails_meet(F, G)
    guard = _tail_guard(F, G, c, q, ("x", "y"))

    def tau(u):
        ua = np.asarray(u, dtype=float)
        return np.asarray(F.quantile(ua), dtype=float) - np.asarray(G.quantile(ua), dtype=float)

    def part(law):
        def kernel(u, v):
            hu = np.asarray(law.density_quantile(np.asarray(u, dtype=float)), dtype=float)
            hv = np.asarray(law.density_quantile(np.asarray(v, dtype=float)), dtype=float)
            return 4.0 * tau(u) * tau(v) * _bridge(u, v) / (hu * hv)

        return integrate_square_open(kernel, q)

    vx, ex, dx = part(F)
    vy, ey, dy = part(G)
    value, err, clamp = _clamped(vx + vy, ex + ey, "independent-sample variance integral")
    return VarianceResult(value, err, "closed_form_w2_independent",
                          {"x_part": {"value": vx, "est_error": ex, **dx},
                           "y_part": {"value": vy, "est_error": ey, **dy},
                           "tail_guard": guard, "clamp": clamp})


def _moment(base: Distribution, power: int, q: QuadratureConfig) -> tuple[float, float]:
    def f(u):
        return np.asarray(base.quantile(np.asarray(u, dtype=float)), dtype=float) ** power

    value, err, _ = integrate_open01(f, q)
    return value, err


def sigma2_location_scale(base: Distribution, a: float, b: float,
                          a_prime: float, b_prime: float,
                          q: QuadratureConfig | None = None) -> VarianceResult:
    """Closed form for two members of one location-scale family under independence.

    For marginals with quantiles a X + b and a' X + b' built from a symmetric,
    unit-variance generator X, the independent squared-distance variance collapses to
    4 (a^2 + a'^2) ((b - b')^2 + V4/4 (a - a')^2), with V4 = var(X^2) under the
    generator.  The generator's symmetry and unit variance are verified numerically
    (|mean| and |var - 1| below 1e-6 by quadrature) and V4 is computed the same way.
    """
    if not (a > 0 and a_prime > 0):
        raise ValueError(f"scales must be positive, got a={a}, a'={a_prime}")
    if q is None:
        q = _MOMENT_CONFIG
    probe = np.linspace(0.005, 0.495, 50)
    lo = np.asarray(base.quantile(probe), dtype=float)
    hi = np.asarray(base.quantile(1.0 - probe), dtype=float)
    asym = float(np.max(np.abs(lo + hi) / (1.0 + np.abs(hi))))
    if asym >= 1e-6:
        raise ValueError(
            f"generator must be symmetric about 0; quantile mismatch up to {asym:.3e}")
    mean, mean_err = _moment(base, 1, q)
    if abs(mean) >= 1e-6:
        raise ValueError(f"generator must be centred; quadrature mean {mean:.3e}")
    second, second_err = _moment(base, 2, q)
    if abs(second - mean * mean - 1.0) >= 1e-6:
        raise ValueError(
            f"generator must have unit variance; quadrature variance {second - mean * mean:.8f}")
    fourth, fourth_err = _moment(base, 4, q)
    v4 = fourth - second * second
    v4_err = fourth_err + 2.0 * abs(second) * second_err
    scale = a * a + a_prime * a_prime
    delta = a - a_prime
    value = 4.0 * scale * ((b - b_prime) ** 2 + 0.25 * v4 * delta * delta)
    return VarianceResult(value, scale * delta * delta * v4_err, "closed_form_location_scale",
                          {"v4": v4, "generator_mean": mean,
                           "generator_variance": second - mean * mean})


def sigma2_gaussian(F: Gaussian, G: Gaussian) -> VarianceResult:
    """Exact variance for two Gaussian marginals under independent pairing.

    4 (s_F^2 + s_G^2) (m_F - m_G)^2 + 2 (s_F^2 + s_G^2) (s_F - s_G)^2; the Gaussian
    generator has V4 = 2, which turns the location-scale form into this one.
    """
    if not (isinstance(F, Gaussian) and isinstance(G, Gaussian)):
        raise TypeError("closed form is specific to Gaussian marginals")
    s2 = F.sd * F.sd + G.sd * G.sd
    value = 4.0 * s2 * (F.mean - G.mean) ** 2 + 2.0 * s2 * (F.sd - G.sd) ** 2
    return VarianceResult(value, 0.0, "closed_form_gaussian", {})


# --- plug-in estimation from one paired sample ---------------------------------


def _kde_at(data: np.ndarray, points: np.ndarray, bw: float) -> np.ndarray:
    """Gaussian kernel density estimate of ``data`` evaluated at ``points``."""
    out = np.zeros(points.size)
    block = max(1, (1 << 22) // max(points.size, 1))
    for start in range(0, data.size, block):
        z = (points[:, None] - data[None, start:start + block]) / bw
        out += np.exp(-0.5 * z * z).sum(axis=1)
    return out / (data.size * bw * math.sqrt(2.0 * math.pi))


def _rank_copula_excess(rx: np.ndarray, ry: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Empirical copula minus uv on the grid, from normalized bivariate rank counts."""
    n = rx.size
    m = u.size
    ax = np.searchsorted(u, rx / n, side="left")
    ay = np.searchsorted(u, ry / n, side="left")
    counts = np.zeros((m + 1, m + 1))
    np.add.at(counts, (ax, ay), 1.0)
    cop = counts.cumsum(axis=0).cumsum(axis=1)[:m, :m] / n
    return cop - u[:, None] * u[None, :]


def _plug_in_quadform(xs: np.ndarray, ys: np.ndarray, rx: np.ndarray, ry: np.ndarray,
                      c: Cost, bwx: float, bwy: float, eps: float, m: int) -> float:
    n = xs.size
    du = (1.0 - 2.0 * eps) / m
    u = eps + (np.arange(m) + 0.5) * du
    idx = np.clip(np.ceil(u * n).astype(int), 1, n) - 1
    fq = xs[idx]
    gq = ys[idx]
    hx = _kde_at(xs, fq, bwx)
    hy = _kde_at(ys, gq, bwy)
    gx, gy = c.gradient(fq, gq)
    px = np.asarray(gx, dtype=float) / hx
    py = np.asarray(gy, dtype=float) / hy
    bridge = _bridge(u[:, None], u[None, :])
    excess = _rank_copula_excess(rx, ry, u)
    total = (px @ bridge @ px + px @ excess @ py + py @ excess.T @ px + py @ bridge @ py)
    return float(total * du * du)


def _ranks(column: np.ndarray) -> np.ndarray:
    r = np.empty(column.size, dtype=float)
    r[np.argsort(column, kind="stable")] = np.arange(1, column.size + 1)
    return r


def plug_in_sigma2(s: PairedSample, c: Cost, bandwidth: float | None = None,
                   eps: float | None = None) -> VarianceResult:
    """Plug-in estimate of ``sigma2`` built entirely from one paired sample.

    Every population ingredient is replaced by its empirical counterpart on a
    256-point midpoint grid over (eps, 1 - eps): empirical quantiles; Gaussian-kernel
    density estimates evaluated at those quantiles (bandwidth 1.06 sd n^{-1/5} per
    column unless given); and normalized bivariate rank counts for the copula.  The
    trimming eps defaults to n^{-1/4} -- the same window schedule as the trimmed
    estimator -- since the extreme grid cells are exactly where empirical quantile
    densities are hopeless.

    ``est_error`` reports only a grid-discretization proxy (the change when the grid
    is halved); sampling error is not included, use replicate spread for that.
    Raises DegenerateSampleError when a column is constant.
    """
    n = s.n
    if n < 50:
        raise ValueError(f"plug-in variance needs at least 50 pairs, got {n}")
    xs = np.asarray(s.xs, dtype=float)
    ys = np.asarray(s.ys, dtype=float)
    for name, col in (("x", xs), ("y", ys)):
        if float(np.min(col)) == float(np.max(col)):
            raise DegenerateSampleError(
                f"{name} column is constant; its quantile density cannot be estimated")
    if eps is None:
        eps = float(n) ** -0.25
    if not (0.0 < eps < 0.5):
        raise ValueError(f"eps must lie in (0, 0.5), got {eps}")
    if bandwidth is not None and not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    bwx = bandwidth if bandwidth is not None else 1.06 * float(np.std(xs, ddof=1)) * n ** -0.2
    bwy = bandwidth if bandwidth is not None else 1.06 * float(np.std(ys, ddof=1)) * n ** -0.2
    xs_sorted = np.sort(xs)
    ys_sorted = np.sort(ys)
    rx = _ranks(xs)
    ry = _ranks(ys)
    full = _plug_in_quadform(xs_sorted, ys_sorted, rx, ry, c, bwx, bwy, eps, 256)
    half = _plug_in_quadform(xs_sorted, ys_sorted, rx, ry, c, bwx, bwy, eps, 128)
    clamp = max(0.0, -full)
    return VarianceResult(max(full, 0.0), abs(full - half) + clamp, "plug_in",
                          {"bandwidth_x": bwx, "bandwidth_y": bwy, "eps": eps,
                           "grid": 256, "clamp": clamp})


# --- confidence intervals -------------------------------------------------------


def confidence_interval(point: float, sigma2: float, n: int,
                        level: float = 0.95) -> tuple[float, float]:
    """Normal-theory interval point -/+ z_{(1+level)/2} sqrt(sigma2 / n)."""
    if not (0.0 < level < 1.0):
        raise ValueError(f"level must lie in (0, 1), got {level}")
    if n < 1:
        raise ValueError(f"need at least one pair, got n={n}")
    if not (sigma2 >= 0.0):
        raise ValueError(f"variance must be nonnegative, got {sigma2}")
    z = float(ndtri(0.5 * (1.0 + level)))
    half = z * math.sqrt(sigma2 / n)
    return (point - half, point + half)
