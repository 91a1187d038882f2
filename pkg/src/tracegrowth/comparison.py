"""Comparison profiles and the pointwise/domain comparison checks.

A profile is the solution h of h'' + K h = 0 with h(0) = 0, h'(0) = 1 for an
even continuous curvature bound K, together with the first positive zero r0
of h and the validity radius mu_bound: the supremum of t such that both

    h'(t)/h(t) > alpha(t)   and   alpha'(t) >= -(h'/h)^2 - K(t)

hold on all of (0, t].  The second condition says exactly that h'/h - alpha
is non-increasing, which is what the growth estimates consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, TYPE_CHECKING

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from tracegrowth.errors import ProfileDomain

if TYPE_CHECKING:  # pragma: no cover - typing only, avoids an import cycle
    from tracegrowth.fields import OperatorField
    from tracegrowth.geometry import ImmersionChart

__all__ = [
    "CurvatureBound",
    "constant_curvature",
    "flat_curvature",
    "hyperbolic_curvature",
    "spherical_curvature",
    "tabulated_curvature",
    "AlphaFunction",
    "zero_alpha",
    "constant_alpha",
    "inverse_shifted_alpha",
    "trace_ratio_alpha",
    "ComparisonProfile",
    "solve_profile",
    "pointwise_comparison_residual",
    "DomainComparison",
    "domain_comparison_check",
]

_OVERFLOW_GUARD = 1e150


@dataclass(frozen=True)
class CurvatureBound:
    """Even continuous curvature bound t -> K(t)."""

    value: Callable[[np.ndarray], np.ndarray]
    label: str
    constant: float | None = None

    def __call__(self, t):
        return self.value(np.abs(np.asarray(t, dtype=float)))


def constant_curvature(k: float, label: str | None = None) -> CurvatureBound:
    k = float(k)
    return CurvatureBound(
        value=lambda t: np.full_like(np.asarray(t, dtype=float), k),
        label=label or f"constant({k})",
        constant=k,
    )


def flat_curvature() -> CurvatureBound:
    return constant_curvature(0.0, "flat")


def hyperbolic_curvature(c: float) -> CurvatureBound:
    if c <= 0:
        raise ValueError("hyperbolic curvature needs c > 0")
    return constant_curvature(-c * c, f"hyperbolic({c})")


def spherical_curvature(c: float) -> CurvatureBound:
    if c <= 0:
        raise ValueError("spherical curvature needs c > 0")
    return constant_curvature(c * c, f"spherical({c})")


def tabulated_curvature(points, values, label: str = "table") -> CurvatureBound:
    """General even K given by linear interpolation of sample points."""
    pts = np.asarray(points, dtype=float)
    vals = np.asarray(values, dtype=float)
    if pts.ndim != 1 or pts.shape != vals.shape or pts.size < 2:
        raise ValueError("need matching 1-d point/value tables with at least 2 rows")
    if np.any(np.diff(pts) <= 0):
        raise ValueError("table points must be strictly increasing")
    return CurvatureBound(
        value=lambda t: np.interp(np.abs(t), pts, vals),
        label=label,
    )


@dataclass(frozen=True)
class AlphaFunction:
    """Nonnegative C^1 weight alpha with derivative and exact integral."""

    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    integral: Callable[[float, np.ndarray], np.ndarray]
    label: str
    constant: float | None = None

    def __call__(self, t):
        return self.value(np.asarray(t, dtype=float))


def zero_alpha() -> AlphaFunction:
    return AlphaFunction(
        value=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        derivative=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        integral=lambda a, b: np.zeros_like(np.asarray(b, dtype=float)),
        label="zero",
        constant=0.0,
    )


def constant_alpha(kappa: float) -> AlphaFunction:
    kappa = float(kappa)
    if kappa < 0:
        raise ValueError("alpha must be nonnegative")
    return AlphaFunction(
        value=lambda t: np.full_like(np.asarray(t, dtype=float), kappa),
        derivative=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        integral=lambda a, b: kappa * (np.asarray(b, dtype=float) - a),
        label=f"constant({kappa})",
        constant=kappa,
    )


def inverse_shifted_alpha(eps: float) -> AlphaFunction:
    """alpha(t) = 1 / (t + eps), the weight behind logarithmic growth."""
    eps = float(eps)
    if eps <= 0:
        raise ValueError("shift must be positive")
    return AlphaFunction(
        value=lambda t: 1.0 / (np.asarray(t, dtype=float) + eps),
        derivative=lambda t: -1.0 / (np.asarray(t, dtype=float) + eps) ** 2,
        integral=lambda a, b: np.log((np.asarray(b, dtype=float) + eps) / (a + eps)),
        label=f"inverse_shifted({eps})",
    )


def trace_ratio_alpha(c: float, m: int) -> AlphaFunction:
    """Constant alpha = (m - 1) c / m used with curvature bound -c^2."""
    if m < 1:
        raise ValueError("dimension must be positive")
    alpha = constant_alpha((m - 1) * float(c) / m)
    return AlphaFunction(
        value=alpha.value,
        derivative=alpha.derivative,
        integral=alpha.integral,
        label=f"trace_ratio(c={c}, m={m})",
        constant=alpha.constant,
    )


@dataclass(frozen=True)
class ComparisonProfile:
    """Solved profile with dense output and its validity radii.

    ``r0`` is the first positive zero of h (+inf when h never vanishes on the
    solved window) and ``mu_bound`` the validity radius described in the
    module docstring.  Unbounded values use the ``math.inf`` sentinel, so all
    comparisons against them are total.
    """

    kappa: CurvatureBound
    alpha: AlphaFunction
    t_grid: np.ndarray
    h_values: np.ndarray
    hp_values: np.ndarray
    r0: float
    mu_bound: float
    step: float
    truncated: bool
    _h_spline: CubicHermiteSpline = field(repr=False)
    _hp_spline: CubicHermiteSpline = field(repr=False)

    @property
    def t_max(self) -> float:
        return float(self.t_grid[-1])

    def _check_domain(self, t) -> np.ndarray:
        arr = np.asarray(t, dtype=float)
        slack = 1e-9 * (1.0 + self.t_max)
        if np.any(arr < -slack) or np.any(arr > self.t_max + slack):
            raise ProfileDomain(
                f"radius outside the solved window [0, {self.t_max}] for profile "
                f"K={self.kappa.label}"
            )
        return np.clip(arr, 0.0, self.t_max)

    def h(self, t):
        return self._h_spline(self._check_domain(t))

    def h_prime(self, t):
        return self._hp_spline(self._check_domain(t))

    def log_derivative(self, t):
        """h'(t)/h(t); only meaningful for 0 < t < r0."""
        arr = self._check_domain(t)
        return self._hp_spline(arr) / self._h_spline(arr)

    def domain_limit(self) -> float:
        """Largest radius usable in growth estimates."""
        return min(self.mu_bound, self.r0, self.t_max)


def _rk4_profile(kappa: CurvatureBound, t_max: float, step: float):
    """Fixed-step classical fourth-order integration of h'' = -K h."""
    n_steps = max(2, int(math.ceil(t_max / step)))
    ts = [0.0]
    hs = [0.0]
    hps = [1.0]
    t, h, hp = 0.0, 0.0, 1.0

    def rhs(t_val, h_val, hp_val):
        return hp_val, -float(kappa(t_val)) * h_val

    truncated = False
    for _ in range(n_steps):
        dt = min(step, t_max - t)
        if dt <= 0:
            break
        k1h, k1p = rhs(t, h, hp)
        k2h, k2p = rhs(t + dt / 2, h + dt / 2 * k1h, hp + dt / 2 * k1p)
        k3h, k3p = rhs(t + dt / 2, h + dt / 2 * k2h, hp + dt / 2 * k2p)
        k4h, k4p = rhs(t + dt, h + dt * k3h, hp + dt * k3p)
        h = h + dt / 6 * (k1h + 2 * k2h + 2 * k3h + k4h)
        hp = hp + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        t = t + dt
        if not (math.isfinite(h) and math.isfinite(hp)) or max(abs(h), abs(hp)) > _OVERFLOW_GUARD:
            truncated = True
            break
        ts.append(t)
        hs.append(h)
        hps.append(hp)
    return np.asarray(ts), np.asarray(hs), np.asarray(hps), truncated


def solve_profile(
    kappa: CurvatureBound,
    alpha: AlphaFunction,
    t_max: float = 20.0,
    step: float = 1e-3,
) -> ComparisonProfile:
    """Solve the profile equation and locate r0 and mu_bound.

    mu_bound is found by scanning two sign functions on the solve grid and
    refining the first crossing by bisection:

      phi(t) = h'(t) - alpha(t) h(t)                (positive iff h'/h > alpha)
      psi(t) = alpha'(t) h^2 + h'^2 + K(t) h^2      (nonnegative iff the ratio
                                                     h'/h - alpha is non-increasing)

    When neither fails up to the solved window and h stays positive, the
    profile is declared unbounded (mu_bound = +inf); conditions were then
    verified on the whole solved window.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if t_max <= step:
        raise ValueError("t_max must exceed the step size")
    t, h, hp, truncated = _rk4_profile(kappa, t_max, step)
    hpp = -np.asarray(kappa(t)) * h
    h_spline = CubicHermiteSpline(t, h, hp)
    hp_spline = CubicHermiteSpline(t, hp, hpp)

    # First positive zero of h.
    r0 = math.inf
    positive = h[1:] > 0
    if not positive.all():
        first_bad = 1 + int(np.argmin(positive))
        lo, hi = t[first_bad - 1], t[first_bad]
        if h[first_bad] == 0.0:
            r0 = float(t[first_bad])
        else:
            r0 = float(brentq(h_spline, lo, hi, xtol=1e-12))

    # Validity radius: first failure of either condition on (0, min(r0, t_max)].
    alpha_v = np.asarray(alpha(t))
    alpha_d = np.asarray(alpha.derivative(t))
    kap = np.asarray(kappa(t))
    phi = hp - alpha_v * h
    psi = alpha_d * h * h + hp * hp + kap * h * h
    scan_end = min(r0, float(t[-1]))
    inside = (t > 0) & (t <= scan_end)

    def first_crossing(failed, fn) -> float:
        bad = inside & failed
        if not bad.any():
            return math.inf
        idx = int(np.argmax(bad))
        lo = float(t[max(idx - 1, 0)])
        hi = float(t[idx])
        try:
            return float(brentq(fn, lo, hi, xtol=1e-12))
        except ValueError:
            # No sign change inside the bracket (grid point sits on the zero).
            return hi

    mu_phi = first_crossing(
        phi <= 0, lambda x: hp_spline(x) - float(alpha(x)) * h_spline(x)
    )
    mu_psi = first_crossing(
        psi < 0,
        lambda x: float(alpha.derivative(x)) * h_spline(x) ** 2
        + hp_spline(x) ** 2
        + float(kappa(x)) * h_spline(x) ** 2,
    )
    mu_bound = min(mu_phi, mu_psi, r0)

    return ComparisonProfile(
        kappa=kappa,
        alpha=alpha,
        t_grid=t,
        h_values=h,
        hp_values=hp,
        r0=r0,
        mu_bound=mu_bound,
        step=step,
        truncated=truncated,
        _h_spline=h_spline,
        _hp_spline=hp_spline,
    )


def pointwise_comparison_residual(
    chart: "ImmersionChart",
    field_phi: "OperatorField",
    profile: ComparisonProfile,
    u,
):
    """Signed residual D_Phi(h(r) grad r) - h'(r) tr Phi at parameter points.

    Nonnegative (up to discretization error) whenever the ambient radial
    curvature is bounded above by the profile curvature and Phi is positive
    semidefinite; vanishes when the ambient realizes the profile curvature
    exactly.  Raises :class:`ProfileDomain` outside the validity window.
    """
    from tracegrowth import fields as field_ops
    from tracegrowth.geometry import radial_vector_field

    radial = chart.radial(u)
    limit = profile.domain_limit()
    if np.any(radial.r >= limit):
        raise ProfileDomain(f"radius {float(np.max(radial.r))} >= validity limit {limit}")

    def radial_field(c, uu):
        return radial_vector_field(c, uu, profile)

    divergence = field_ops.phi_divergence(field_phi, radial_field, u)
    trace = field_phi.trace(u)
    return divergence - profile.h_prime(radial.r) * trace


@dataclass(frozen=True)
class DomainComparison:
    """Boundary flux versus bulk lower bound over a nested family of balls."""

    mu: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def slack(self) -> np.ndarray:
        return self.lhs - self.rhs

    def worst_relative_slack(self) -> float:
        scale = 1.0 + np.abs(self.rhs)
        return float(np.min(self.slack / scale))


def domain_comparison_check(
    chart: "ImmersionChart",
    field_phi: "OperatorField",
    profile: ComparisonProfile,
    ball,
    mu_values=None,
) -> DomainComparison:
    """Check the integral comparison over geodesic balls of a meshed chart.

    lhs(mu): boundary flux of h(r) <Phi grad r, nu>, computed by coarea, i.e.
    as the mu-derivative of the cumulative ball integral of the flux aligned
    with the discrete distance gradient.  rhs(mu): cell quadrature of
    h'(r) tr Phi - h(r) |H_Phi + div Phi|.  The flux should dominate up to
    discretization slack.
    """
    from tracegrowth import fields as field_ops
    from tracegrowth.errors import InsufficientResolution

    sample = field_ops.sample(field_phi, ball.nodes_u, frame=ball.frames)
    radial_grad_coords = ball.radial_gradient_coords()
    rho_grad_covector = ball.distance_gradient_covector()

    h_r = profile.h(ball.r)
    hp_r = profile.h_prime(ball.r)
    phi_grad_r = np.einsum("...ij,...j->...i", sample.phi, radial_grad_coords)
    flux = h_r * np.einsum("...i,...i->...", phi_grad_r, rho_grad_covector)

    drive = sample.phi_mean_curvature + sample.divergence_ambient
    drive_norm = chart.ambient.norm(drive)
    bulk = hp_r * sample.trace - h_r * drive_norm

    if mu_values is None:
        mu_values = ball.default_mu_grid()
    mu_values = np.asarray(mu_values, dtype=float)

    dmu = 2.0 * ball.median_edge
    cumulative_flux = ball.cumulative(flux)
    band = cumulative_flux(mu_values + dmu) - cumulative_flux(mu_values - dmu)
    counts = ball.count_within(mu_values + dmu) - ball.count_within(mu_values - dmu)
    if np.any(counts < 8):
        raise InsufficientResolution(
            "fewer than 8 boundary cells in the coarea band; refine the mesh"
        )
    lhs = band / (2.0 * dmu)
    rhs = ball.cumulative(bulk)(mu_values)
    return DomainComparison(mu=mu_values, lhs=lhs, rhs=rhs)
