"""Operator fields on a chart and their first-order calculus.

An operator field assigns to each parameter point a metric-self-adjoint
operator on the tangent space, held in mixed (chart-frame) components.  The
module computes its covariant derivative, divergence, trace-weighted mean
curvature, weighted divergence of ambient vector fields, the square operator
f -> D_Phi(grad f), and the identity that relates an integrable
distribution's projection field to the mean curvature of its leaves.

Derivatives of field components are taken by central differences and
corrected with the chart's connection coefficients; derivatives of ambient
vector fields are taken along the chart and projected tangentially.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from tracegrowth.errors import (
    DegenerateDistribution,
    NotPositiveSemidefinite,
    UnsupportedOperation,
)
from tracegrowth.geometry import FrameData, ImmersionChart, ParamDomain
from tracegrowth.symop import elementary_symmetric_table

__all__ = [
    "ScalarField",
    "exp_neg_radial",
    "scalar_from_callable",
    "OperatorField",
    "identity_field",
    "scalar_identity_field",
    "newton_shape_field",
    "distribution_projection_field",
    "FieldSample",
    "sample",
    "phi_divergence",
    "tangent_divergence",
    "PropositionResiduals",
    "proposition_residuals",
    "cheng_yau",
    "codazzi_residual",
    "newton_divergence_check",
    "FoliationCheck",
    "foliation_identity_residual",
    "proposition_suite",
]


@dataclass(frozen=True)
class ScalarField:
    """Scalar function of chart parameters with optional analytic gradient.

    ``value(chart, u)`` returns (...); when ``gradient`` is absent the chart
    coordinates of the intrinsic gradient are obtained by central
    differences of the value.
    """

    value: Callable[[ImmersionChart, np.ndarray], np.ndarray]
    gradient: Callable[[ImmersionChart, np.ndarray, FrameData], np.ndarray] | None = None
    fd_step: float = 1e-5
    label: str = "scalar"

    def __call__(self, chart, u):
        return np.asarray(self.value(chart, np.asarray(u, dtype=float)), dtype=float)

    def grad_coords(self, chart, u, frame: FrameData) -> np.ndarray:
        if self.gradient is not None:
            return np.asarray(self.gradient(chart, u, frame), dtype=float)
        u = np.asarray(u, dtype=float)
        h = self.fd_step * (1.0 + np.max(np.abs(u), axis=-1))
        partials = []
        for i in range(chart.dim):
            up, um = u.copy(), u.copy()
            up[..., i] += h
            um[..., i] -= h
            partials.append((self(chart, up) - self(chart, um)) / (2.0 * h))
        covector = np.stack(partials, axis=-1)
        return np.einsum("...ij,...j->...i", frame.metric_inv, covector)


def scalar_from_callable(fn, gradient=None, label="scalar") -> ScalarField:
    return ScalarField(value=lambda chart, u: fn(u), gradient=gradient, label=label)


def exp_neg_radial(rate: float = 1.0) -> ScalarField:
    """exp(-rate * r) with r the ambient distance to the chart base point.

    The gradient is analytic, -rate * value * grad r; the radial direction
    is undefined at the base point itself.
    """

    def value(chart, u):
        return np.exp(-rate * chart.radial_distance(u))

    def gradient(chart, u, frame):
        radial = chart.radial(u)
        val = np.exp(-rate * radial.r)
        return (-rate * val)[..., None] * radial.grad_coords

    return ScalarField(value=value, gradient=gradient, label=f"exp_neg_radial({rate})")


@dataclass(frozen=True)
class OperatorField:
    """Chart-point to operator assignment in mixed components.

    ``eval_fn(chart, u, frame_or_None)`` returns the (..., m, m) mixed
    components; the matrix g @ phi must be symmetric.  ``positivity_tol``
    is the slack for the positivity check; presets derived from second
    derivatives of the chart carry a looser default than analytic ones,
    matching their finite-difference noise floor.
    """

    chart: ImmersionChart
    eval_fn: Callable = field(repr=False)
    label: str = "field"
    positivity_required: bool = False
    positivity_tol: float = 1e-9
    fd_step: float = 2e-3

    def components(self, u, frame: FrameData | None = None) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return np.asarray(self.eval_fn(self.chart, u, frame), dtype=float)

    def trace(self, u, frame: FrameData | None = None) -> np.ndarray:
        return np.einsum("...ii->...", self.components(u, frame))

    def eigenvalues(self, u, frame: FrameData | None = None) -> np.ndarray:
        """Eigenvalues with respect to the induced metric (ascending)."""
        frame = frame if frame is not None else self.chart.frame(u)
        phi = self.components(u, frame)
        return _metric_eigenvalues(phi, frame)


def _metric_eigenvalues(phi: np.ndarray, frame: FrameData) -> np.ndarray:
    sym = np.einsum("...ik,...kj->...ij", frame.metric, phi)
    sym = (sym + np.swapaxes(sym, -1, -2)) / 2.0
    chol = frame.metric_cholesky
    half = np.linalg.solve(chol, sym)
    white = np.swapaxes(np.linalg.solve(chol, np.swapaxes(half, -1, -2)), -1, -2)
    white = (white + np.swapaxes(white, -1, -2)) / 2.0
    return np.linalg.eigvalsh(white)


def identity_field(chart: ImmersionChart) -> OperatorField:
    def eval_fn(c, u, frame):
        shape = u.shape[:-1] + (c.dim, c.dim)
        return np.broadcast_to(np.eye(c.dim), shape).copy()

    return OperatorField(
        chart=chart, eval_fn=eval_fn, label="identity", positivity_required=True
    )


def scalar_identity_field(
    chart: ImmersionChart, scalar: ScalarField, exponent: float = 1.0
) -> OperatorField:
    """Phi = lambda^s I for a nonnegative scalar field lambda."""

    def eval_fn(c, u, frame):
        lam = np.asarray(scalar(c, u)) ** exponent
        eye = np.eye(c.dim)
        return lam[..., None, None] * eye

    return OperatorField(
        chart=chart,
        eval_fn=eval_fn,
        label=f"{scalar.label}^{exponent} * identity",
        positivity_required=True,
    )


def _newton_mixed(shape_mixed: np.ndarray, shape_sym: np.ndarray, j: int) -> np.ndarray:
    """Batched Newton recursion on mixed shape-operator components."""
    m = shape_mixed.shape[-1]
    lam = np.linalg.eigvalsh(shape_sym)
    s_table = elementary_symmetric_table(lam)
    eye = np.eye(m)
    p = np.broadcast_to(eye, shape_mixed.shape).copy()
    for k in range(1, j + 1):
        p = s_table[..., k, None, None] * eye - np.einsum(
            "...ik,...kj->...ij", shape_mixed, p
        )
    return p


def newton_shape_field(chart: ImmersionChart, j: int, sign: float = 1.0) -> OperatorField:
    """Newton operator of the shape operator, P_j(A), as an operator field.

    Only hypersurface charts carry a shape operator.  ``sign`` premultiplies
    the result (use -1 when S_j is negative so the field stays positive
    semidefinite).  The positivity slack reflects the second-derivative
    noise floor of finite-difference shape operators.
    """
    if j < 0:
        raise ValueError("Newton index must be nonnegative")

    def eval_fn(c, u, frame):
        frame = frame if frame is not None else c.frame(u)
        if frame.shape_operator is None:
            raise UnsupportedOperation(
                "Newton operator fields need a codimension-one chart"
            )
        return sign * _newton_mixed(frame.shape_operator, frame.shape_operator_sym, j)

    return OperatorField(
        chart=chart,
        eval_fn=eval_fn,
        label=f"newton({j})",
        positivity_required=False,
        positivity_tol=1e-6,
        fd_step=5e-3,
    )


def distribution_projection_field(
    chart: ImmersionChart, spanning: Sequence[Callable]
) -> OperatorField:
    """Orthogonal projection onto the span of the given tangent fields.

    Each spanning field maps (chart, u) to (..., m) coordinate components.
    Raises :class:`DegenerateDistribution` when the fields become linearly
    dependent at an evaluation point.
    """
    if len(spanning) < 1:
        raise ValueError("need at least one spanning field")

    def eval_fn(c, u, frame):
        frame = frame if frame is not None else c.frame(u)
        vecs = np.stack([np.asarray(fn(c, u), dtype=float) for fn in spanning], axis=-1)
        gram = np.einsum("...ia,...ij,...jb->...ab", vecs, frame.metric, vecs)
        scale = np.einsum("...aa->...", gram) / len(spanning)
        det = np.linalg.det(gram)
        if np.any(det <= 1e-12 * (1.0 + scale) ** len(spanning)):
            raise DegenerateDistribution(
                "spanning fields are linearly dependent at an evaluation point"
            )
        gram_inv = np.linalg.inv(gram)
        vg = np.einsum("...ja,...jk->...ak", vecs, frame.metric)
        return np.einsum("...ia,...ab,...bk->...ik", vecs, gram_inv, vg)

    return OperatorField(
        chart=chart,
        eval_fn=eval_fn,
        label=f"distribution({len(spanning)})",
        positivity_required=True,
        positivity_tol=1e-8,
    )


@dataclass(frozen=True)
class FieldSample:
    """Operator field data at a batch of points.

    ``grad_phi`` holds the covariant derivative components indexed
    [k, j, i] for (nabla_i Phi)(e_j) = Phi^k_{j;i} e_k.  The divergence is
    given both as chart coordinates of a tangent vector and as an ambient
    vector; the trace-weighted mean curvature is an ambient normal vector.
    """

    frame: FrameData
    phi: np.ndarray
    trace: np.ndarray
    grad_phi: np.ndarray
    divergence_coords: np.ndarray
    divergence_ambient: np.ndarray
    phi_mean_curvature: np.ndarray

    @property
    def divergence_norm(self) -> np.ndarray:
        return self.frame.metric_norm(self.divergence_coords)


def _component_derivatives(field_phi: OperatorField, u: np.ndarray) -> np.ndarray:
    m = field_phi.chart.dim
    h = field_phi.fd_step * (1.0 + np.max(np.abs(u), axis=-1))
    parts = []
    for i in range(m):
        up, um = u.copy(), u.copy()
        up[..., i] += h
        um[..., i] -= h
        parts.append(
            (field_phi.components(up) - field_phi.components(um)) / (2.0 * h[..., None, None])
        )
    return np.stack(parts, axis=-1)  # (..., k, j, i)


def sample(field_phi: OperatorField, u, frame: FrameData | None = None) -> FieldSample:
    """Evaluate the field with its covariant derivative and derived vectors."""
    chart = field_phi.chart
    u = np.atleast_1d(np.asarray(u, dtype=float))
    frame = frame if frame is not None else chart.frame(u)
    phi = field_phi.components(u, frame)
    trace = np.einsum("...ii->...", phi)

    if field_phi.positivity_required:
        eigs = _metric_eigenvalues(phi, frame)
        scale = 1.0 + np.max(np.abs(eigs), axis=-1)
        bad = eigs[..., 0] < -field_phi.positivity_tol * scale
        if np.any(bad):
            flat = np.argwhere(np.atleast_1d(bad))
            worst = tuple(flat[0])
            raise NotPositiveSemidefinite(
                f"field '{field_phi.label}' has a negative eigenvalue "
                f"{float(np.atleast_1d(eigs[..., 0])[tuple(flat[0])])} at parameter "
                f"{np.atleast_2d(u)[worst[0] if len(worst) else 0]}",
                location=np.atleast_2d(u)[worst[0] if len(worst) else 0],
            )

    partials = _component_derivatives(field_phi, u)
    gamma = frame.christoffels
    correction = np.einsum("...kil,...lj->...kji", gamma, phi) - np.einsum(
        "...lij,...kl->...kji", gamma, phi
    )
    grad_phi = partials + correction

    div_covector = np.einsum("...iji->...j", grad_phi)
    div_coords = np.einsum("...ij,...j->...i", frame.metric_inv, div_covector)
    div_ambient = frame.to_ambient(div_coords)
    h_phi = np.einsum("...ki,...ij,...kjn->...n", phi, frame.metric_inv, frame.second_form)

    return FieldSample(
        frame=frame,
        phi=phi,
        trace=trace,
        grad_phi=grad_phi,
        divergence_coords=div_coords,
        divergence_ambient=div_ambient,
        phi_mean_curvature=h_phi,
    )


def _ambient_field_derivatives(chart: ImmersionChart, X, u: np.ndarray) -> np.ndarray:
    """Coordinate derivatives of an ambient vector field along the chart."""
    h = chart.step_at(u)
    parts = []
    for i in range(chart.dim):
        up, um = u.copy(), u.copy()
        up[..., i] += h
        um[..., i] -= h
        xp = np.asarray(X(chart, up), dtype=float)
        xm = np.asarray(X(chart, um), dtype=float)
        parts.append((xp - xm) / (2.0 * h[..., None]))
    return np.stack(parts, axis=-1)  # (..., n, i)


def phi_divergence(field_phi: OperatorField, X, u, frame: FrameData | None = None):
    """Trace of z -> Phi (nabla_z X)^tangential for an ambient field X.

    ``X(chart, u)`` must be evaluable in a stencil neighborhood and return
    ambient vectors along the chart.  Reduces to the intrinsic divergence of
    X when Phi is the identity and X is tangent.
    """
    chart = field_phi.chart
    u = np.atleast_1d(np.asarray(u, dtype=float))
    frame = frame if frame is not None else chart.frame(u)
    derivs = _ambient_field_derivatives(chart, X, u)
    phi = field_phi.components(u, frame)
    covectors = np.einsum(
        "...nj,n,...ni->...ji", frame.jacobian, chart.ambient.metric_diag, derivs
    )
    tangential = np.einsum("...jk,...ki->...ji", frame.metric_inv, covectors)
    return np.einsum("...ij,...ji->...", phi, tangential)


def tangent_divergence(chart: ImmersionChart, Y_coords, u, frame: FrameData | None = None):
    """Intrinsic divergence of a tangent field given in chart coordinates."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    frame = frame if frame is not None else chart.frame(u)
    h = chart.step_at(u)
    partial_trace = np.zeros(u.shape[:-1])
    for i in range(chart.dim):
        up, um = u.copy(), u.copy()
        up[..., i] += h
        um[..., i] -= h
        diff = (np.asarray(Y_coords(chart, up)) - np.asarray(Y_coords(chart, um))) / (
            2.0 * h[..., None]
        )
        partial_trace = partial_trace + diff[..., i]
    y0 = np.asarray(Y_coords(chart, u))
    return partial_trace + np.einsum("...kkl,...l->...", frame.christoffels, y0)


@dataclass(frozen=True)
class PropositionResiduals:
    """Absolute residuals of the three weighted-divergence identities."""

    r_a: np.ndarray
    r_b: np.ndarray
    r_c: np.ndarray

    def max(self) -> float:
        return float(max(np.max(self.r_a), np.max(self.r_b), np.max(self.r_c)))


def proposition_residuals(
    field_phi: OperatorField, X, u, scalar_f: ScalarField | None = None
) -> PropositionResiduals:
    """Residuals of the identities tying D_Phi to tangential parts.

    (a) D_Phi X = D_Phi X^T - <H_Phi, X>
    (b) D_Phi (f X) = f D_Phi X + <Phi X^T, grad f>
    (c) D_Phi X = div(Phi X^T) - <H_Phi + div Phi, X>

    ``scalar_f`` feeds identity (b); when omitted a generic smooth scalar is
    used.
    """
    chart = field_phi.chart
    u = np.atleast_1d(np.asarray(u, dtype=float))
    frame = chart.frame(u)
    s = sample(field_phi, u, frame=frame)
    gdiag = chart.ambient.metric_diag
    x_val = np.asarray(X(chart, u), dtype=float)

    d_phi_x = phi_divergence(field_phi, X, u, frame=frame)

    def x_tangent(c, uu):
        f = c.frame(uu)
        return f.project_tangent(np.asarray(X(c, uu), dtype=float))

    d_phi_xt = phi_divergence(field_phi, x_tangent, u, frame=frame)
    pair_h_x = np.einsum("...n,n,...n->...", s.phi_mean_curvature, gdiag, x_val)
    r_a = np.abs(d_phi_x - (d_phi_xt - pair_h_x))

    if scalar_f is None:
        scalar_f = scalar_from_callable(
            lambda uu: 1.0 + np.sin(uu[..., 0]) * np.cos(uu[..., -1] / 2.0), label="probe"
        )

    def f_times_x(c, uu):
        return np.asarray(scalar_f(c, uu))[..., None] * np.asarray(X(c, uu), dtype=float)

    d_phi_fx = phi_divergence(field_phi, f_times_x, u, frame=frame)
    f0 = np.asarray(scalar_f(chart, u))
    grad_f = frame.to_ambient(scalar_f.grad_coords(chart, u, frame))
    phi_xt = frame.to_ambient(
        np.einsum("...ij,...j->...i", s.phi, frame.tangent_coords(x_val))
    )
    r_b = np.abs(d_phi_fx - (f0 * d_phi_x + np.einsum("...n,n,...n->...", phi_xt, gdiag, grad_f)))

    def phi_xt_coords(c, uu):
        f = c.frame(uu)
        phi_here = field_phi.components(uu, f)
        return np.einsum(
            "...ij,...j->...i", phi_here, f.tangent_coords(np.asarray(X(c, uu), dtype=float))
        )

    div_phi_xt = tangent_divergence(chart, phi_xt_coords, u, frame=frame)
    drive = s.phi_mean_curvature + s.divergence_ambient
    r_c = np.abs(d_phi_x - (div_phi_xt - np.einsum("...n,n,...n->...", drive, gdiag, x_val)))
    return PropositionResiduals(r_a=r_a, r_b=r_b, r_c=r_c)


def cheng_yau(field_phi: OperatorField, f: ScalarField, u):
    """Square operator: D_Phi applied to the tangent lift of grad f."""

    def grad_field(c, uu):
        frame = c.frame(uu)
        return frame.to_ambient(f.grad_coords(c, uu, frame))

    return phi_divergence(field_phi, grad_field, u)


def codazzi_residual(field_b: OperatorField, u, x_coords, y_coords):
    """Symmetry defect |(nabla_X B) Y - (nabla_Y B) X| in the induced metric."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    s = sample(field_b, u)
    x = np.asarray(x_coords, dtype=float)
    y = np.asarray(y_coords, dtype=float)
    defect = np.einsum("...kji,...i,...j->...k", s.grad_phi, x, y) - np.einsum(
        "...kji,...i,...j->...k", s.grad_phi, y, x
    )
    return s.frame.metric_norm(defect)


def newton_divergence_check(chart: ImmersionChart, j: int, u, sign: float = 1.0):
    """Metric norm of div P_j of the shape operator; zero for shape
    operators satisfying the symmetry of their covariant derivative."""
    field_pj = newton_shape_field(chart, j, sign=sign)
    s = sample(field_pj, u)
    return s.divergence_norm


def _flow_map(chart: ImmersionChart, spanning: Sequence[Callable], u0: np.ndarray, n_steps: int):
    def flow(t):
        t = np.asarray(t, dtype=float)
        u = np.broadcast_to(u0, t.shape[:-1] + u0.shape).copy()
        for a, field_a in enumerate(spanning):
            dt = t[..., a] / n_steps
            for _ in range(n_steps):
                k1 = np.asarray(field_a(chart, u), dtype=float)
                k2 = np.asarray(field_a(chart, u + 0.5 * dt[..., None] * k1), dtype=float)
                k3 = np.asarray(field_a(chart, u + 0.5 * dt[..., None] * k2), dtype=float)
                k4 = np.asarray(field_a(chart, u + dt[..., None] * k3), dtype=float)
                u = u + dt[..., None] / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        return u

    return flow


@dataclass(frozen=True)
class FoliationCheck:
    """Both sides of the leaf mean-curvature identity at a point."""

    leaf_trace: np.ndarray
    field_side: np.ndarray
    residual: np.ndarray


def foliation_identity_residual(
    chart: ImmersionChart, spanning: Sequence[Callable], u, n_steps: int = 8
) -> FoliationCheck:
    """Compare tr II of a leaf with div P_D + H_{P_D} of its projection field.

    The leaf through u is parametrized locally by composing fixed-step
    fourth-order flows of the spanning fields; its mean curvature vector in
    the ambient space comes from the standard frame pipeline applied to that
    parametrization, entirely independent of the operator-field route on the
    right-hand side.
    """
    u0 = np.asarray(u, dtype=float)
    if u0.ndim != 1:
        raise ValueError("foliation check expects a single parameter point")
    k = len(spanning)
    proj_field = distribution_projection_field(chart, spanning)
    s = sample(proj_field, u0)
    field_side = s.divergence_ambient + s.phi_mean_curvature

    flow = _flow_map(chart, spanning, u0, n_steps)
    leaf = ImmersionChart(
        ambient=chart.ambient,
        dim=k,
        map_fn=lambda t: chart.map(flow(t)),
        domain=ParamDomain.box([(-1.0, 1.0)] * k),
        base_point=np.zeros(k),
        fd_step=chart.fd_step,
        name=f"{chart.name}-leaf",
    )
    leaf_frame = leaf.frame(np.zeros(k))
    leaf_trace = np.einsum(
        "...ij,...ijn->...n", leaf_frame.metric_inv, leaf_frame.second_form
    )[0]
    residual = chart.ambient.norm(leaf_trace - field_side)
    return FoliationCheck(leaf_trace=leaf_trace, field_side=field_side, residual=residual)


def proposition_suite(seed: int, count: int, charts: Sequence[ImmersionChart]) -> dict:
    """Randomized residual checks of the weighted-divergence identities.

    Draws random interior points, cycling operator presets and random
    polynomial ambient fields; reports the largest residual of each
    identity, normalized by 1 + local magnitudes.
    """
    rng = np.random.default_rng(seed)
    worst = {"r_a": 0.0, "r_b": 0.0, "r_c": 0.0}
    for index in range(count):
        chart = charts[index % len(charts)]
        lo = chart.domain.lower + 0.15 * chart.domain.lengths()
        hi = chart.domain.upper - 0.15 * chart.domain.lengths()
        u = lo + rng.uniform(0.05, 0.95, size=chart.dim) * (hi - lo)
        if chart.validity is not None and not bool(chart.validity(u)):
            continue
        presets = [
            identity_field(chart),
            scalar_identity_field(
                chart,
                scalar_from_callable(lambda uu: 1.5 + np.sin(uu[..., 0]), label="sin"),
            ),
        ]
        frame = chart.frame(u)
        if frame.shape_operator is not None:
            presets.append(newton_shape_field(chart, 1))
        field_phi = presets[index % len(presets)]
        coeffs = rng.uniform(-1.0, 1.0, size=(chart.ambient.coord_dim, 3))

        def poly_field(c, uu, coeffs=coeffs):
            x = c.map(uu)
            raw = (
                coeffs[:, 0]
                + coeffs[:, 1] * x[..., :1]
                + coeffs[:, 2] * np.roll(x, 1, axis=-1) * 0.5
            )
            return c.ambient.tangent_project(x, raw)

        res = proposition_residuals(field_phi, poly_field, u)
        trace = float(np.max(np.abs(field_phi.trace(u))))
        x_mag = float(np.max(np.linalg.norm(poly_field(chart, u[None]), axis=-1)))
        scale = 1.0 + trace + x_mag
        worst["r_a"] = max(worst["r_a"], float(np.max(res.r_a)) / scale)
        worst["r_b"] = max(worst["r_b"], float(np.max(res.r_b)) / scale)
        worst["r_c"] = max(worst["r_c"], float(np.max(res.r_c)) / scale)
    worst["count"] = count
    return worst
