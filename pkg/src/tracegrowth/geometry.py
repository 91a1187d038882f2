"""Parametrized immersions into model ambient spaces.

Charts are plain evaluable maps u -> ambient coordinates; first and second
fundamental data come from central finite differences of the map.  Two
ambients are supported: Euclidean space, and hyperbolic space of curvature
-c^2 realized on the hyperboloid sheet {<x, x>_L = -1/c^2, x_0 > 0} inside
Minkowski coordinates with signature (-, +, ..., +).  Both have closed-form
distance and radial gradient, which is all the comparison machinery needs.

Every operation accepts batched parameter points: an array of shape
(..., m) produces outputs with matching leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from tracegrowth.errors import DegenerateChart, ProfileDomain, SingularRadialField

__all__ = [
    "AmbientSpace",
    "EuclideanSpace",
    "HyperbolicSpace",
    "ParamDomain",
    "ImmersionChart",
    "FrameData",
    "RadialData",
    "frame_at",
    "ambient_radial",
    "radial_vector_field",
]

_RANK_TOL = 1e-6


class AmbientSpace:
    """Common interface of the supported model spaces."""

    coord_dim: int
    manifold_dim: int
    metric_diag: np.ndarray

    def pairing(self, a, b):
        return np.einsum("...n,n,...n->...", np.asarray(a), self.metric_diag, np.asarray(b))

    def norm(self, v):
        sq = self.pairing(v, v)
        return np.sqrt(np.clip(sq, 0.0, None))

    def curvature(self, r):
        raise NotImplementedError

    @property
    def injectivity_radius(self) -> float:
        return math.inf

    def distance(self, x, y):
        raise NotImplementedError

    def radial_gradient(self, x, base):
        raise NotImplementedError

    def tangent_project(self, x, v):
        """Project an ambient-coordinate vector into the manifold tangent
        space at x (identity for Euclidean space)."""
        raise NotImplementedError


@dataclass(frozen=True)
class EuclideanSpace(AmbientSpace):
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("ambient dimension must be at least 2")

    @property
    def coord_dim(self) -> int:
        return self.n

    @property
    def manifold_dim(self) -> int:
        return self.n

    @property
    def metric_diag(self) -> np.ndarray:
        return np.ones(self.n)

    def curvature(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def distance(self, x, y):
        return np.linalg.norm(np.asarray(x) - np.asarray(y), axis=-1)

    def radial_gradient(self, x, base):
        diff = np.asarray(x) - np.asarray(base)
        dist = np.linalg.norm(diff, axis=-1, keepdims=True)
        return diff / dist

    def tangent_project(self, x, v):
        return np.asarray(v)


@dataclass(frozen=True)
class HyperbolicSpace(AmbientSpace):
    """Hyperbolic n-space of curvature -c^2 on the hyperboloid sheet."""

    n: int
    c: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("ambient dimension must be at least 2")
        if self.c <= 0:
            raise ValueError("curvature scale c must be positive")

    @property
    def coord_dim(self) -> int:
        return self.n + 1

    @property
    def manifold_dim(self) -> int:
        return self.n

    @property
    def metric_diag(self) -> np.ndarray:
        diag = np.ones(self.n + 1)
        diag[0] = -1.0
        return diag

    def curvature(self, r):
        return np.full_like(np.asarray(r, dtype=float), -self.c * self.c)

    def base_point(self) -> np.ndarray:
        x = np.zeros(self.n + 1)
        x[0] = 1.0 / self.c
        return x

    def sheet_residual(self, x):
        """<x, x>_L + 1/c^2; zero exactly on the model sheet."""
        return self.pairing(x, x) + 1.0 / self.c**2

    def distance(self, x, y):
        s = -self.c**2 * self.pairing(x, y)
        return np.arccosh(np.clip(s, 1.0, None)) / self.c

    def radial_gradient(self, x, base):
        # grad r = c (s x - base) / sqrt(s^2 - 1) with s = -c^2 <x, base>_L.
        s = -self.c**2 * self.pairing(x, base)
        s = np.asarray(s)[..., None]
        return self.c * (s * np.asarray(x) - np.asarray(base)) / np.sqrt(s * s - 1.0)

    def tangent_project(self, x, v):
        # Remove the component along the position vector (timelike normal).
        coeff = self.c**2 * self.pairing(v, x)
        return np.asarray(v) + np.asarray(coeff)[..., None] * np.asarray(x)


@dataclass(frozen=True)
class ParamDomain:
    """Axis-aligned parameter box, with optional periodic axes."""

    lower: np.ndarray
    upper: np.ndarray
    periodic: tuple

    @classmethod
    def box(cls, bounds, periodic=None) -> "ParamDomain":
        lower = np.asarray([b[0] for b in bounds], dtype=float)
        upper = np.asarray([b[1] for b in bounds], dtype=float)
        if np.any(upper <= lower):
            raise ValueError("upper bounds must exceed lower bounds")
        if periodic is None:
            periodic = (False,) * len(bounds)
        return cls(lower=lower, upper=upper, periodic=tuple(bool(p) for p in periodic))

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def lengths(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, u, margin: float = 0.0) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        ok = np.ones(u.shape[:-1], dtype=bool)
        for axis in range(self.dim):
            if self.periodic[axis]:
                continue
            ok &= (u[..., axis] >= self.lower[axis] + margin) & (
                u[..., axis] <= self.upper[axis] - margin
            )
        return ok


@dataclass(frozen=True)
class FrameData:
    """First/second fundamental data of a chart at a batch of points.

    Shapes, with (...) the batch: point (..., m), position (..., n),
    jacobian (..., n, m), metric (..., m, m), christoffels (..., m, m, m)
    indexed [k, i, j] for Gamma^k_ij, second_form (..., m, m, n) with the
    ambient-vector values of II, normal_frame (..., n, codim).  For
    hypersurfaces the shape operator is provided both in chart coordinates
    (mixed components) and as a symmetric matrix in a metric-orthonormal
    frame.
    """

    chart: "ImmersionChart" = field(repr=False)
    point: np.ndarray
    position: np.ndarray
    jacobian: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    metric_cholesky: np.ndarray
    christoffels: np.ndarray
    second_form: np.ndarray
    mean_curvature: np.ndarray
    normal_frame: np.ndarray
    shape_operator: np.ndarray | None
    shape_operator_sym: np.ndarray | None

    @property
    def codim(self) -> int:
        return self.normal_frame.shape[-1]

    def tangent_coords(self, v):
        """Chart coordinates of the tangential part of an ambient vector."""
        covector = np.einsum(
            "...ni,n,...n->...i", self.jacobian, self.chart.ambient.metric_diag, np.asarray(v)
        )
        return np.einsum("...ij,...j->...i", self.metric_inv, covector)

    def to_ambient(self, coords):
        return np.einsum("...ni,...i->...n", self.jacobian, np.asarray(coords))

    def project_tangent(self, v):
        return self.to_ambient(self.tangent_coords(v))

    def normal_component(self, v):
        ambient_tangent = self.chart.ambient.tangent_project(self.position, np.asarray(v))
        return ambient_tangent - self.project_tangent(v)

    def metric_norm(self, coords):
        sq = np.einsum("...i,...ij,...j->...", np.asarray(coords), self.metric, np.asarray(coords))
        return np.sqrt(np.clip(sq, 0.0, None))

    def covector_norm(self, covector):
        sq = np.einsum(
            "...i,...ij,...j->...", np.asarray(covector), self.metric_inv, np.asarray(covector)
        )
        return np.sqrt(np.clip(sq, 0.0, None))


@dataclass(frozen=True)
class RadialData:
    """Ambient distance from the chart base point and its gradients."""

    r: np.ndarray
    grad_ambient: np.ndarray
    grad_tangent: np.ndarray
    grad_coords: np.ndarray

    def tangent_norm(self, frame: FrameData):
        return frame.metric_norm(self.grad_coords)


def _levi_civita_4():
    eps = np.zeros((4, 4, 4, 4))
    import itertools

    for perm in itertools.permutations(range(4)):
        sign = 1.0
        perm_list = list(perm)
        for i in range(4):
            for j in range(i + 1, 4):
                if perm_list[i] > perm_list[j]:
                    sign = -sign
        eps[perm] = sign
    return eps


_EPS4 = _levi_civita_4()


@dataclass(frozen=True)
class ImmersionChart:
    """Immersion u -> ambient coordinates with finite-difference stencils.

    ``map_fn`` must accept arrays of shape (..., dim) and return (..., n)
    ambient coordinates; it must be evaluable slightly outside the parameter
    box (the differencing stencil reaches over the edge, and periodic maps
    simply wrap).  ``normal_sign`` fixes the orientation of the unit normal
    on hypersurface charts so shape-operator signs are stable across a chart.
    ``validity`` optionally masks a sub-region of the box (nodes outside it
    are dropped from meshes).
    """

    ambient: AmbientSpace
    dim: int
    map_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    domain: ParamDomain
    base_point: np.ndarray
    fd_step: float = 1e-4
    normal_sign: float = 1.0
    validity: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    name: str = "chart"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("chart dimension must be at least 1")
        if self.domain.dim != self.dim:
            raise ValueError("parameter domain dimension mismatch")
        if self.fd_step <= 0:
            raise ValueError("finite-difference step must be positive")

    def map(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        x = np.asarray(self.map_fn(u), dtype=float)
        if x.shape[-1] != self.ambient.coord_dim:
            raise ValueError(
                f"chart map returned {x.shape[-1]} coordinates, ambient has "
                f"{self.ambient.coord_dim}"
            )
        return x

    def base_position(self) -> np.ndarray:
        return self.map(self.base_point)

    def step_at(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return self.fd_step * (1.0 + np.max(np.abs(u), axis=-1))

    def frame(self, u) -> FrameData:
        return frame_at(self, u)

    def radial(self, u) -> RadialData:
        return ambient_radial(self, u)

    def radial_distance(self, u) -> np.ndarray:
        """Ambient distance to the base point, defined also at the base."""
        return self.ambient.distance(self.map(u), self.base_position())

    def with_fd_step(self, fd_step: float) -> "ImmersionChart":
        return ImmersionChart(
            ambient=self.ambient,
            dim=self.dim,
            map_fn=self.map_fn,
            domain=self.domain,
            base_point=self.base_point,
            fd_step=fd_step,
            normal_sign=self.normal_sign,
            validity=self.validity,
            name=self.name,
        )


def _first_derivatives(chart: ImmersionChart, u: np.ndarray, h: np.ndarray) -> np.ndarray:
    m = chart.dim
    cols = []
    for i in range(m):
        up = u.copy()
        um = u.copy()
        up[..., i] += h
        um[..., i] -= h
        cols.append((chart.map(up) - chart.map(um)) / (2.0 * h[..., None]))
    return np.stack(cols, axis=-1)


def _second_derivatives(
    chart: ImmersionChart, u: np.ndarray, x: np.ndarray, h: np.ndarray
) -> np.ndarray:
    m = chart.dim
    n = x.shape[-1]
    out = np.zeros(u.shape[:-1] + (m, m, n))
    h_col = h[..., None]
    for i in range(m):
        up = u.copy()
        um = u.copy()
        up[..., i] += h
        um[..., i] -= h
        out[..., i, i, :] = (chart.map(up) - 2.0 * x + chart.map(um)) / h_col**2
    for i in range(m):
        for j in range(i + 1, m):
            upp = u.copy()
            upm = u.copy()
            ump = u.copy()
            umm = u.copy()
            upp[..., i] += h
            upp[..., j] += h
            upm[..., i] += h
            upm[..., j] -= h
            ump[..., i] -= h
            ump[..., j] += h
            umm[..., i] -= h
            umm[..., j] -= h
            mixed = (chart.map(upp) - chart.map(upm) - chart.map(ump) + chart.map(umm)) / (
                4.0 * h_col**2
            )
            out[..., i, j, :] = mixed
            out[..., j, i, :] = mixed
    return out


def _normal_frame(chart: ImmersionChart, x: np.ndarray, jac: np.ndarray, frame_like) -> np.ndarray:
    """Orthonormal basis of the normal space of the chart inside the ambient
    manifold tangent space.  Hypersurface cases get a globally oriented
    normal (cross product or its Lorentzian analogue) scaled by the chart's
    ``normal_sign``; higher codimension falls back to Gram-Schmidt without a
    sign convention."""
    ambient = chart.ambient
    m = chart.dim
    codim = ambient.manifold_dim - m
    batch = x.shape[:-1]
    n = ambient.coord_dim
    if codim == 0:
        return np.zeros(batch + (n, 0))

    if codim == 1 and isinstance(ambient, EuclideanSpace) and n == 3 and m == 2:
        nu = np.cross(jac[..., :, 0], jac[..., :, 1])
        nu = nu / np.linalg.norm(nu, axis=-1, keepdims=True)
        return (chart.normal_sign * nu)[..., None]

    if codim == 1 and isinstance(ambient, HyperbolicSpace) and n == 4 and m == 2:
        # Lorentzian Hodge dual of x ^ J1 ^ J2 gives a spacelike vector
        # orthogonal to the sheet position and both tangents.
        w = np.einsum("abcd,...a,...b,...c->...d", _EPS4, x, jac[..., :, 0], jac[..., :, 1])
        nu = w / ambient.metric_diag
        norm = ambient.norm(nu)
        nu = nu / norm[..., None]
        return (chart.normal_sign * nu)[..., None]

    # Generic Gram-Schmidt over coordinate candidates.  Uniform acceptance
    # across the batch is required (charts whose normal spaces align with
    # different coordinate candidates per point are not supported here).
    accepted = []
    for k in range(n):
        cand = np.zeros(batch + (n,))
        cand[..., k] = 1.0
        cand = ambient.tangent_project(x, cand)
        cand = cand - frame_like.project_tangent(cand) if frame_like else cand
        for prev in accepted:
            coeff = ambient.pairing(cand, prev)
            cand = cand - coeff[..., None] * prev
        norms = ambient.norm(cand)
        if np.min(norms) > 1e-8:
            accepted.append(cand / norms[..., None])
        if len(accepted) == codim:
            break
    if len(accepted) != codim:
        raise DegenerateChart("could not assemble a normal frame uniformly over the batch")
    return np.stack(accepted, axis=-1)


def frame_at(chart: ImmersionChart, u) -> FrameData:
    """Fundamental forms, connection coefficients, and normal data at u.

    Raises :class:`DegenerateChart` when the differential drops rank or the
    induced metric fails to be positive definite at any point of the batch.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape[-1] != chart.dim:
        raise ValueError(f"expected parameter points with {chart.dim} coordinates")
    h = chart.step_at(u)
    x = chart.map(u)
    jac = _first_derivatives(chart, u, h)
    gdiag = chart.ambient.metric_diag
    metric = np.einsum("...ni,n,...nj->...ij", jac, gdiag, jac)
    metric = (metric + np.swapaxes(metric, -1, -2)) / 2.0

    eigvals = np.linalg.eigvalsh(metric)
    min_eigs = eigvals[..., 0]
    if np.min(min_eigs) <= _RANK_TOL**2:
        if min_eigs.ndim == 0:
            location = u
        else:
            worst = np.unravel_index(int(np.argmin(min_eigs)), min_eigs.shape)
            location = u[worst]
        raise DegenerateChart(
            f"chart '{chart.name}' differential is rank deficient near parameter {location}"
        )
    metric_inv = np.linalg.inv(metric)
    chol = np.linalg.cholesky(metric)

    d2 = _second_derivatives(chart, u, x, h)
    # Gamma^k_ij from the ambient pairing of second and first derivatives.
    jt_g = np.einsum("...ni,n->...in", jac, gdiag)
    gamma = np.einsum("...kl,...ln,...ijn->...kij", metric_inv, jt_g, d2)

    d2_tangent = chart.ambient.tangent_project(x[..., None, None, :], d2)
    second_form = d2_tangent - np.einsum("...kij,...nk->...ijn", gamma, jac)
    mean_curvature = np.einsum("...ij,...ijn->...n", metric_inv, second_form)

    data = FrameData(
        chart=chart,
        point=u,
        position=x,
        jacobian=jac,
        metric=metric,
        metric_inv=metric_inv,
        metric_cholesky=chol,
        christoffels=gamma,
        second_form=second_form,
        mean_curvature=mean_curvature,
        normal_frame=np.zeros(x.shape[:-1] + (x.shape[-1], 0)),
        shape_operator=None,
        shape_operator_sym=None,
    )
    normal = _normal_frame(chart, x, jac, data)

    shape_mixed = None
    shape_sym = None
    if normal.shape[-1] == 1:
        nu = normal[..., 0]
        b = np.einsum("...ijn,n,...n->...ij", second_form, gdiag, nu)
        b = (b + np.swapaxes(b, -1, -2)) / 2.0
        shape_mixed = np.einsum("...ik,...kj->...ij", metric_inv, b)
        half = np.linalg.solve(chol, b)
        shape_sym = np.swapaxes(np.linalg.solve(chol, np.swapaxes(half, -1, -2)), -1, -2)
        shape_sym = (shape_sym + np.swapaxes(shape_sym, -1, -2)) / 2.0

    return FrameData(
        chart=chart,
        point=u,
        position=x,
        jacobian=jac,
        metric=metric,
        metric_inv=metric_inv,
        metric_cholesky=chol,
        christoffels=gamma,
        second_form=second_form,
        mean_curvature=mean_curvature,
        normal_frame=normal,
        shape_operator=shape_mixed,
        shape_operator_sym=shape_sym,
    )


def ambient_radial(chart: ImmersionChart, u) -> RadialData:
    """Ambient distance to the base point with its ambient and tangential
    gradients.  Raises :class:`SingularRadialField` at the base point."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    x = chart.map(u)
    base = chart.base_position()
    r = chart.ambient.distance(x, base)
    if np.any(r <= 1e-9 * (1.0 + np.linalg.norm(base))):
        raise SingularRadialField("radial gradient undefined at the base point")
    grad_ambient = chart.ambient.radial_gradient(x, base)
    frame = chart.frame(u)
    grad_coords = frame.tangent_coords(grad_ambient)
    grad_tangent = frame.to_ambient(grad_coords)
    return RadialData(
        r=r,
        grad_ambient=grad_ambient,
        grad_tangent=grad_tangent,
        grad_coords=grad_coords,
    )


def radial_vector_field(chart: ImmersionChart, u, profile) -> np.ndarray:
    """The ambient field h(r) grad r evaluated along the chart.

    ``profile`` must expose ``h`` and ``r0``; radii at or beyond the first
    zero of h raise :class:`ProfileDomain`.
    """
    radial = ambient_radial(chart, u)
    if np.any(radial.r >= profile.r0):
        raise ProfileDomain(
            f"radius {float(np.max(radial.r))} is not below the first profile zero {profile.r0}"
        )
    return np.asarray(profile.h(radial.r))[..., None] * radial.grad_ambient
