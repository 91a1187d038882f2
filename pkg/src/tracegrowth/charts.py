"""Built-in chart parametrizations, selectable by name.

Surfaces in Euclidean 3-space plus a totally geodesic hyperbolic plane
inside hyperbolic 3-space.  Orientation conventions (``normal_sign``) are
chosen per chart so the shape operators carry the signs the bundled
scenarios rely on (for example, the unit cylinder gets principal curvatures
{1, 0} rather than {-1, 0}).
"""

from __future__ import annotations

import numpy as np

from tracegrowth.errors import UnsupportedOperation
from tracegrowth.geometry import (
    EuclideanSpace,
    HyperbolicSpace,
    ImmersionChart,
    ParamDomain,
)

__all__ = [
    "plane_chart",
    "cylinder_chart",
    "sphere_chart",
    "catenoid_chart",
    "helicoid_chart",
    "parabola_graph_chart",
    "hyperbolic_plane_chart",
    "chart_by_name",
    "CHART_BUILDERS",
]


def plane_chart(half_width: float = 10.0) -> ImmersionChart:
    """Flat plane u -> (u1, u2, 0)."""

    def mapping(u):
        u = np.asarray(u, dtype=float)
        zeros = np.zeros(u.shape[:-1] + (1,))
        return np.concatenate([u, zeros], axis=-1)

    return ImmersionChart(
        ambient=EuclideanSpace(3),
        dim=2,
        map_fn=mapping,
        domain=ParamDomain.box([(-half_width, half_width)] * 2),
        base_point=np.zeros(2),
        name="plane",
    )


def cylinder_chart(half_height: float = 16.5) -> ImmersionChart:
    """Unit cylinder (cos u1, sin u1, u2); inward normal so S_1 = 1."""

    def mapping(u):
        u = np.asarray(u, dtype=float)
        return np.stack([np.cos(u[..., 0]), np.sin(u[..., 0]), u[..., 1]], axis=-1)

    return ImmersionChart(
        ambient=EuclideanSpace(3),
        dim=2,
        map_fn=mapping,
        domain=ParamDomain.box(
            [(0.0, 2.0 * np.pi), (-half_height, half_height)], periodic=(True, False)
        ),
        base_point=np.zeros(2),
        normal_sign=-1.0,
        name="cylinder",
    )


def sphere_chart(radius: float = 1.0, polar_margin: float = 0.35) -> ImmersionChart:
    """Round sphere in colatitude/longitude away from the poles; inward
    normal so principal curvatures are +1/radius."""

    def mapping(u):
        u = np.asarray(u, dtype=float)
        phi, theta = u[..., 0], u[..., 1]
        return radius * np.stack(
            [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)], axis=-1
        )

    return ImmersionChart(
        ambient=EuclideanSpace(3),
        dim=2,
        map_fn=mapping,
        domain=ParamDomain.box(
            [(polar_margin, np.pi - polar_margin), (0.0, 2.0 * np.pi)],
            periodic=(False, True),
        ),
        base_point=np.array([np.pi / 2.0, 0.0]),
        normal_sign=-1.0,
        name="sphere",
    )


def catenoid_chart(v_max: float = 2.6) -> ImmersionChart:
    """Catenoid (cosh v cos theta, cosh v sin theta, v)."""

    def mapping(u):
        u = np.asarray(u, dtype=float)
        theta, v = u[..., 0], u[..., 1]
        ch = np.cosh(v)
        return np.stack([ch * np.cos(theta), ch * np.sin(theta), v], axis=-1)

    return ImmersionChart(
        ambient=EuclideanSpace(3),
        dim=2,
        map_fn=mapping,
        domain=ParamDomain.box(
            [(0.0, 2.0 * np.pi), (-v_max, v_max)], periodic=(True, False)
        ),
        base_point=np.zeros(2),
        name="catenoid",
    )


def helicoid_chart(u_max: float = 4.0, v_max: float = 5.0) -> ImmersionChart:
    """Helicoid (u cos v, u sin v, v)."""

    def mapping(u):
        u = np.asarray(u, dtype=float)
        s, v = u[..., 0], u[..., 1]
        return np.stack([s * np.cos(v), s * np.sin(v), v], axis=-1)

    return ImmersionChart(
        ambient=EuclideanSpace(3),
        dim=2,
        map_fn=mapping,
        domain=ParamDomain.box([(-u_max, u_max), (-v_max, v_max)]),
        base_point=np.zeros(2),
        name="helicoid",
    )


def parabola_graph_chart(half_width: float = 6.0) -> ImmersionChart:
    """Graph surface (u1, u2, u1^2)."""

    def mapping(u):
        u = np.asarray(u, dtype=float)
        return np.stack([u[..., 0], u[..., 1], u[..., 0] ** 2], axis=-1)

    return ImmersionChart(
        ambient=EuclideanSpace(3),
        dim=2,
        map_fn=mapping,
        domain=ParamDomain.box([(-half_width, half_width)] * 2),
        base_point=np.zeros(2),
        name="parabola_graph",
    )


def hyperbolic_plane_chart(c: float = 1.0, disk_radius: float = 0.995) -> ImmersionChart:
    """Totally geodesic hyperbolic plane inside hyperbolic 3-space.

    The parameter is a point of the unit-disk conformal model, mapped onto
    the hyperboloid sheet with last spatial coordinate zero.  The usable
    region is the disk |u| < disk_radius inside the parameter box, exposed
    via the chart validity mask; the intrinsic reach from the center is
    (2/c) artanh(disk_radius).
    """
    if not 0 < disk_radius < 1:
        raise UnsupportedOperation("disk radius must lie in (0, 1)")

    def mapping(u):
        u = np.asarray(u, dtype=float)
        sq = np.sum(u * u, axis=-1)
        denom = 1.0 - sq
        x0 = (1.0 + sq) / denom / c
        x1 = 2.0 * u[..., 0] / denom / c
        x2 = 2.0 * u[..., 1] / denom / c
        x3 = np.zeros_like(x0)
        return np.stack([x0, x1, x2, x3], axis=-1)

    def validity(u):
        u = np.asarray(u, dtype=float)
        return np.sum(u * u, axis=-1) < disk_radius**2

    return ImmersionChart(
        ambient=HyperbolicSpace(3, c),
        dim=2,
        map_fn=mapping,
        domain=ParamDomain.box([(-disk_radius, disk_radius)] * 2),
        base_point=np.zeros(2),
        validity=validity,
        name="hyperbolic_plane",
    )


CHART_BUILDERS = {
    "plane": plane_chart,
    "cylinder": cylinder_chart,
    "sphere": sphere_chart,
    "catenoid": catenoid_chart,
    "helicoid": helicoid_chart,
    "parabola_graph": parabola_graph_chart,
    "hyperbolic_plane": hyperbolic_plane_chart,
}


def chart_by_name(name: str, **kwargs) -> ImmersionChart:
    try:
        builder = CHART_BUILDERS[name]
    except KeyError:
        raise UnsupportedOperation(
            f"unknown chart '{name}'; available: {sorted(CHART_BUILDERS)}"
        ) from None
    return builder(**kwargs)
