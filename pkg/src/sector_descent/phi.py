"""The sector functional: normalized first moments of spherical sectors.

phi(S, u) = (2/omega_n) * integral over S of <theta, u>^+ d sigma.  The
positive part makes the functional total in u; when u lies in the dual
sector the integrand is nonnegative and the superscript is inactive.

Three evaluation routes are kept deliberately distinct so they can be
tested against each other: closed forms (n=2 arcs and circular caps),
exact boundary-integral projection (n=3 polygons), and grid quadrature
with adaptive refinement along the sector boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .cones import Sector, normal_cone_at_vertex, _in_convex_hull
from .sphere import (
    build_quadrature,
    projected_polygon_area,
    sphere_measure,
    triangle_areas,
    unit_vector,
)

__all__ = [
    "PhiResult",
    "phi",
    "santalo_lower_bound",
    "capbody_width_gradient",
    "sector_first_moment",
    "integrate_over_sector",
]


@dataclass(frozen=True)
class PhiResult:
    value: float
    method: str
    error_estimate: float

    def __float__(self):
        return self.value


def phi(sector, u, method=None, level=5):
    """Evaluate the sector functional at unit direction u.

    Dispatch order is closed-form, then exact projection, then quadrature;
    ``method`` forces a specific route.  The chosen route and an error
    estimate are reported alongside the value.
    """
    u = unit_vector(u)
    if method is None:
        if sector.cone.kind == "circular":
            method = "closed-form"
        elif sector.n == 3 and sector.is_polygonal:
            method = "exact-projection"
        else:
            method = "quadrature"
    if method == "closed-form":
        return _phi_closed_form(sector, u)
    if method == "exact-projection":
        if sector.n != 3 or not sector.is_polygonal:
            raise ValueError("exact projection requires a polygonal sector on S^2")
        area = projected_polygon_area(sector.polygon, u)
        return PhiResult(2.0 * area / sphere_measure(3), "exact-projection", 1e-12)
    if method == "quadrature":
        val = _phi_quadrature(sector, u, level)
        coarse = _phi_quadrature(sector, u, max(1, level - 1))
        return PhiResult(val, "quadrature", abs(val - coarse))
    raise ValueError(f"unknown phi method {method!r}")


def _phi_closed_form(sector, u):
    if sector.cone.kind != "circular":
        raise ValueError("no closed form for this sector")
    axis, alpha = sector.cone.axis, sector.cone.opening
    if alpha <= 0.0:
        raise ValueError("empty sector")
    if sector.n == 2:
        psi = math.atan2(axis[1], axis[0])
        zeta = math.atan2(u[1], u[0])
        t1, t2 = psi - alpha, psi + alpha
        # place zeta within pi of the arc midpoint before clipping
        zeta += round((psi - zeta) / (2.0 * math.pi)) * 2.0 * math.pi
        a = max(t1, zeta - math.pi / 2)
        b = min(t2, zeta + math.pi / 2)
        val = (math.sin(b - zeta) - math.sin(a - zeta)) / math.pi if b > a else 0.0
        return PhiResult(max(val, 0.0), "closed-form", 1e-15)
    if sector.n == 3:
        beta = math.acos(min(1.0, max(-1.0, float(np.dot(axis, u)))))
        cb, sb = math.cos(beta), math.sin(beta)

        def longitude_integral(phi_ang):
            c = math.cos(phi_ang) * cb
            d = math.sin(phi_ang) * sb
            if c >= d:
                return 2.0 * math.pi * c
            if c <= -d:
                return 0.0
            eta0 = math.acos(-c / d)
            return 2.0 * (c * eta0 + d * math.sin(eta0))

        breaks = [t for t in (math.pi / 2 - beta, math.pi / 2 + beta) if 0.0 < t < alpha]
        val, err = integrate.quad(
            lambda t: longitude_integral(t) * math.sin(t),
            0.0,
            alpha,
            points=breaks or None,
            limit=200,
            epsabs=1e-12,
        )
        return PhiResult(2.0 * val / sphere_measure(3), "closed-form", 2.0 * err / sphere_measure(3))
    raise ValueError("closed forms cover n in {2, 3}")


# ---------------------------------------------------------------------------
# quadrature with boundary refinement


def _membership_slack(sector, points):
    """Signed proxy for distance inside the sector (positive means inside)."""
    pts = np.atleast_2d(points)
    if sector.cone.kind == "circular":
        ang = np.arccos(np.clip(pts @ sector.cone.axis, -1.0, 1.0))
        return np.sin(np.clip(sector.cone.opening - ang, -math.pi / 2, math.pi / 2))
    normals = sector.polygon.edge_normals()
    return np.min(pts @ normals.T, axis=1)


def integrate_over_sector(grid, sector, f, depth=5):
    """Integral of f over the sector using the grid's triangulation.

    Cells well inside or outside (relative to their circumradius) are taken
    whole or skipped; cells near the boundary are subdivided ``depth`` times
    and leaves contribute by centroid membership.
    """
    if grid.n == 2:
        return _integrate_over_arc(grid, sector, f)
    if grid.cells is None:
        raise ValueError("grid carries no cells; rebuild with build_quadrature(3, level)")
    tris = grid.cells
    full, boundary = _classify_cells(sector, tris)
    total = _smooth_cells_integral(f, tris[full])
    if np.any(boundary):
        total += _refine_cell(sector, f, tris[boundary], depth)
    return total


def _classify_cells(sector, tris):
    cen = tris.sum(axis=1)
    cen /= np.linalg.norm(cen, axis=1)[:, None]
    dots = np.einsum("tvj,tj->tv", tris, cen)
    rad = np.arccos(np.clip(dots.min(axis=1), -1.0, 1.0))
    sin_rad = np.sin(np.minimum(rad, math.pi / 2))
    slack = _membership_slack(sector, cen)
    full = slack >= sin_rad
    out = slack <= -sin_rad
    return full, ~(full | out)


def _smooth_cells_integral(f, tris):
    if len(tris) == 0:
        return 0.0
    areas = triangle_areas(tris)
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    total = 0.0
    for m in (a + b, b + c, c + a):
        m = m / np.linalg.norm(m, axis=1)[:, None]
        total += float(np.dot(areas, np.asarray(f(m), dtype=float))) / 3.0
    return total


def _refine_cell(sector, f, tris, depth):
    """Recursive boundary refinement; leaves contribute by centroid membership."""
    full, boundary = _classify_cells(sector, tris)
    total = _smooth_cells_integral(f, tris[full])
    pending = tris[boundary]
    if len(pending) == 0:
        return total
    if depth == 0:
        cen = pending.sum(axis=1)
        cen /= np.linalg.norm(cen, axis=1)[:, None]
        inside = _membership_slack(sector, cen) >= 0.0
        if np.any(inside):
            total += _smooth_cells_integral(f, pending[inside])
        return total
    from .sphere import _subdivide_once

    return total + _refine_cell(sector, f, _subdivide_once(pending), depth - 1)


def _integrate_over_arc(grid, sector, f):
    """n=2: exact fractional weights from interval overlap with the arc."""
    axis, alpha = sector.cone.axis, sector.cone.opening
    mid = math.atan2(axis[1], axis[0])
    lo, hi = mid - alpha, mid + alpha
    count = len(grid.nodes)
    h = 2.0 * math.pi / count
    ang = np.arctan2(grid.nodes[:, 1], grid.nodes[:, 0])
    cell_lo = ang - h / 2
    cell_hi = ang + h / 2
    shift = np.round((mid - ang) / (2.0 * math.pi)) * 2.0 * math.pi
    cell_lo = cell_lo + shift
    cell_hi = cell_hi + shift
    overlap = np.clip(np.minimum(cell_hi, hi) - np.maximum(cell_lo, lo), 0.0, h)
    vals = np.asarray(f(grid.nodes), dtype=float)
    return float(np.dot(overlap, vals))


_GRID_CACHE = {}


def _grid(n, level):
    key = (n, level)
    if key not in _GRID_CACHE:
        _GRID_CACHE[key] = build_quadrature(n, level)
    return _GRID_CACHE[key]


def _phi_quadrature(sector, u, level):
    grid = _grid(sector.n, level)
    val = integrate_over_sector(grid, sector, lambda pts: np.maximum(pts @ u, 0.0))
    return 2.0 * val / sphere_measure(sector.n)


# ---------------------------------------------------------------------------


def santalo_lower_bound(n):
    """Dimension-only positive lower bound for the sector functional.

    (omega_{n-1} / (omega_n (n-1))) * n^(-n/2), with omega_k the measure of
    S^(k-1) from the Gamma-function formula.
    """
    if n < 2:
        raise ValueError("bound defined for n >= 2")
    return sphere_measure(n - 1) / (sphere_measure(n) * (n - 1)) * n ** (-n / 2.0)


def sector_first_moment(sector):
    """Exact integral of theta over the sector (a vector in R^3)."""
    if sector.n != 3:
        raise ValueError("first moments implemented on S^2")
    if sector.cone.kind == "circular":
        return math.pi * math.sin(sector.cone.opening) ** 2 * sector.cone.axis
    return sector.polygon.first_moment()


def capbody_width_gradient(points, p, tol=1e-9):
    """Gradient of the cap-body mean width p -> w(co(K u {p})) at outer p.

    Equals 2/omega_3 times the first moment of the normal-cone sector of the
    cap body at p.  Raises for p inside or on the hull of K, where the cap
    body degenerates to K itself and the growth rate is zero or one-sided.
    """
    pts = np.asarray(points, dtype=float)
    p = np.asarray(p, dtype=float)
    if _in_convex_hull(pts, p, tol=1e-9):
        raise ValueError("gradient undefined/zero regime: p inside or on the hull")
    ncone = normal_cone_at_vertex(np.vstack([pts, p]), p, tol=tol)
    sector = Sector(ncone.cone)
    return 2.0 / sphere_measure(3) * sector_first_moment(sector)
