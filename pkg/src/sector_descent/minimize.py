"""Minimization of the sector functional over dual-containing sectors.

The feasible class consists of sectors containing their dual, with the
direction argument constrained to the dual sector.  The search families are
parameterized subclasses (spherical polygons with up to 8 vertices, circular
caps, and arcs for n=2), so the optimizer claims agreement with the known
extremal values plus minimizer-shape recovery, not global optimality over
all sectors.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from .cones import (
    ConvexCone,
    Sector,
    class_c_residual,
    cone_contains,
    dual_cone,
    in_class_c,
    is_self_dual,
    spherical_hull,
    spherical_width_profile,
)
from .phi import phi, santalo_lower_bound
from .sphere import geodesic_distance, slerp, unit_vector

__all__ = [
    "MinimizationProblem",
    "MinimizationReport",
    "minimize_phi",
    "self_dual_snap",
    "blaschke_lebesgue_area",
    "cap_family_sweep",
    "distance_to_orthant",
]

PENALTY_WEIGHT = 1e3
SIMPLEX_TOL = 1e-8
MAX_EVALS_PER_START = 50_000


@dataclass(frozen=True)
class MinimizationProblem:
    """Specification of one constrained minimization run."""

    n: int
    family: str  # "polygons", "caps", or "arcs"
    k: int = 6
    restarts: int = 20
    seed: int = 0
    constraint_tol: float = 1e-6

    def __post_init__(self):
        if self.family not in ("polygons", "caps", "arcs"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "arcs" and self.n != 2:
            raise ValueError("arcs are the n=2 family")
        if self.family in ("polygons", "caps") and self.n != 3:
            raise ValueError("polygons and caps are n=3 families")
        if not 3 <= self.k <= 8 and self.family == "polygons":
            raise ValueError("polygon family supports 3 <= k <= 8 vertices")


@dataclass
class MinimizationReport:
    problem: MinimizationProblem
    best_value: float
    best_sector: Sector
    best_u: np.ndarray
    feasibility_residual: float
    u_residual: float
    dist_to_orthant: float | None
    trace: list = field(default_factory=list)  # (restart, iter, value, residual)
    restart_values: list = field(default_factory=list)

    def to_json(self):
        payload = {
            "value": self.best_value,
            "sector": json.loads(self.best_sector.to_json()),
            "u": [float(x) for x in self.best_u],
            "dist_to_orthant": self.dist_to_orthant,
            "feasibility_residual": self.feasibility_residual,
            "u_residual": self.u_residual,
            "restarts": self.restart_values,
        }
        return json.dumps(payload, sort_keys=True)

    def trace_rows(self):
        return [
            {"restart": r, "iter": i, "value": v, "residual": res}
            for (r, i, v, res) in self.trace
        ]


# ---------------------------------------------------------------------------
# parameterizations


def _sector_from_params_polygon(x, k):
    """k vertices from (colat, lon) pairs; the sector is their spherical hull."""
    pts = []
    for j in range(k):
        colat, lon = x[2 * j], x[2 * j + 1]
        pts.append(
            np.array(
                [
                    math.cos(colat),
                    math.sin(colat) * math.cos(lon),
                    math.sin(colat) * math.sin(lon),
                ]
            )
        )
    rays = spherical_hull(pts)
    if len(rays) < 3:
        raise ValueError("degenerate polygon")
    return Sector(ConvexCone.from_generators(rays)), pts


def _u_from_params(x):
    colat, lon = x
    return np.array(
        [
            math.cos(colat),
            math.sin(colat) * math.cos(lon),
            math.sin(colat) * math.sin(lon),
        ]
    )


def _hemisphere_residual(pts):
    # vertices must stay in the closed hemisphere around e1 (the search frame)
    return sum(max(0.0, -p[0]) for p in pts)


def _u_in_dual_residual(sector, u):
    try:
        gens = sector.cone.generators()
    except ValueError:
        gens = sector.cone.boundary_samples()
    return max(0.0, -min(float(np.dot(u, g)) for g in gens))


def _polygon_objective(x, k):
    """Fast penalty objective: value + weight * feasibility residual.

    Works directly on vertex arrays: spherical hull by angular scan around
    the vertex mean, dual-containment residual from the edge-normal Gram
    matrix, and the functional from the exact boundary first moment (no
    hemisphere clipping is needed while u stays in the dual).
    """
    pts = np.empty((k, 3))
    colat = x[0 : 2 * k : 2]
    lon = x[1 : 2 * k : 2]
    pts[:, 0] = np.cos(colat)
    pts[:, 1] = np.sin(colat) * np.cos(lon)
    pts[:, 2] = np.sin(colat) * np.sin(lon)
    u = _u_from_params(x[2 * k :])
    hemi_res = float(np.sum(np.maximum(0.0, -pts[:, 0]))) + max(0.0, -u[0])
    verts = _hull_ccw(pts)
    if verts is None or len(verts) < 3:
        return 10.0 + PENALTY_WEIGHT * (hemi_res + 1.0), math.inf
    V = np.asarray(verts)
    rolled = np.roll(V, -1, axis=0)
    normals = np.cross(V, rolled)
    nn = np.linalg.norm(normals, axis=1)
    if np.min(nn) < 1e-14:
        return 10.0 + PENALTY_WEIGHT * (hemi_res + 1.0), math.inf
    normals = normals / nn[:, None]
    # dual containment: every edge normal must satisfy every edge constraint
    class_res = max(0.0, -float(np.min(normals @ normals.T)))
    u_res = max(0.0, -float(np.min(V @ u)))
    residual = class_res + u_res + hemi_res
    if u_res == 0.0:
        cosd = np.clip(np.einsum("ij,ij->i", V, rolled), -1.0, 1.0)
        delta = np.arccos(cosd)
        sind = np.maximum(np.sin(delta), 1e-15)
        w = (rolled - V * cosd[:, None]) / sind[:, None]
        moment = 0.5 * np.einsum("i,ij->j", delta, np.cross(V, w))
        value = float(np.dot(moment, u)) / (2.0 * math.pi)
    else:
        sector = Sector(ConvexCone.from_generators(list(V)))
        value = phi(sector, u).value
    return value + PENALTY_WEIGHT * residual, residual


def _hull_ccw(pts, tol=1e-12):
    """Spherical hull of a small blob of points, ordered ccw around their mean."""
    c = pts.sum(axis=0)
    nc = np.linalg.norm(c)
    if nc < 1e-9:
        return None
    c = c / nc
    if float(np.min(pts @ c)) <= 1e-9:
        return None
    probe = np.zeros(3)
    probe[int(np.argmin(np.abs(c)))] = 1.0
    b1 = np.cross(c, probe)
    b1 /= np.linalg.norm(b1)
    b2 = np.cross(c, b1)
    ang = np.arctan2(pts @ b2, pts @ b1)
    ring = [pts[i] for i in np.argsort(ang)]
    changed = True
    while changed and len(ring) > 2:
        changed = False
        m = len(ring)
        for i in range(m):
            a = ring[(i - 1) % m]
            b = ring[i]
            cc = ring[(i + 1) % m]
            n = np.cross(a, cc)
            nnrm = float(np.linalg.norm(n))
            if nnrm < 1e-14:
                if float(np.dot(a, cc)) > 0:
                    ring.pop(i)
                    changed = True
                    break
                continue
            if float(np.dot(b, n)) / nnrm >= -tol:
                ring.pop(i)
                changed = True
                break
    return ring


def _arc_objective(x):
    length, zeta = x
    residual = 0.0
    if length < math.pi / 2:
        residual += math.pi / 2 - length
    if length > math.pi:
        residual += length - math.pi
    lo, hi = length - math.pi / 2, math.pi / 2
    if zeta < lo:
        residual += lo - zeta
    if zeta > hi:
        residual += zeta - hi
    ln = min(max(length, 0.05), math.pi)
    sector = Sector.arc_2d(0.0, ln)
    u = np.array([math.cos(zeta), math.sin(zeta)])
    value = phi(sector, u).value
    return value + PENALTY_WEIGHT * residual, residual


def _cap_objective(x):
    opening, beta = x
    residual = 0.0
    if opening < math.pi / 4:
        residual += math.pi / 4 - opening
    if opening > math.pi / 2:
        residual += opening - math.pi / 2
    if beta < 0.0:
        residual += -beta
    if beta > math.pi / 2 - opening:
        residual += beta - (math.pi / 2 - opening)
    op = min(max(opening, 0.05), math.pi / 2)
    # closed form: the first moment points along the axis
    value = 0.5 * math.sin(op) ** 2 * math.cos(max(beta, 0.0))
    return value + PENALTY_WEIGHT * residual, residual


# ---------------------------------------------------------------------------
# feasible starts


def _random_feasible_start(problem, rng, max_tries=10_000):
    if problem.family == "arcs":
        for _ in range(max_tries):
            length = rng.uniform(math.pi / 2, math.pi)
            zeta = rng.uniform(length - math.pi / 2, math.pi / 2)
            return np.array([length, zeta])
    if problem.family == "caps":
        for _ in range(max_tries):
            opening = rng.uniform(math.pi / 4, math.pi / 2)
            beta = rng.uniform(0.0, math.pi / 2 - opening)
            return np.array([opening, beta])
    k = problem.k
    for _ in range(max_tries):
        x = np.empty(2 * k + 2)
        lons = np.sort(rng.uniform(0.0, 2.0 * math.pi, k))
        colats = rng.uniform(0.7, math.pi / 2, k)
        x[0 : 2 * k : 2] = colats
        x[1 : 2 * k : 2] = lons
        try:
            sector, pts = _sector_from_params_polygon(x[: 2 * k], k)
        except ValueError:
            continue
        if not in_class_c(sector, tol=problem.constraint_tol):
            continue
        # start u at the dual barycenter
        try:
            dual_rays = dual_cone(sector.cone).boundary_samples()
        except ValueError:
            continue
        u = unit_vector(np.sum(dual_rays, axis=0))
        x[2 * k] = math.acos(min(1.0, max(-1.0, u[0])))
        x[2 * k + 1] = math.atan2(u[2], u[1])
        return x
    raise RuntimeError("no feasible start found within the rejection budget")


# ---------------------------------------------------------------------------
# the optimizer


def _run_single_start(problem, restart_index):
    rng = np.random.default_rng(np.random.SeedSequence([problem.seed, restart_index]))
    x0 = _random_feasible_start(problem, rng)
    k = problem.k
    if problem.family == "polygons":
        fun = lambda x: _polygon_objective(x, k)[0]
        residual_of = lambda x: _polygon_objective(x, k)[1]
    elif problem.family == "arcs":
        fun = lambda x: _arc_objective(x)[0]
        residual_of = lambda x: _arc_objective(x)[1]
    else:
        fun = lambda x: _cap_objective(x)[0]
        residual_of = lambda x: _cap_objective(x)[1]
    iterates = []

    def callback(xk):
        iterates.append((len(iterates), float(fun(xk)), float(residual_of(xk))))

    res = scipy_minimize(
        fun,
        x0,
        method="Nelder-Mead",
        callback=callback,
        options={
            "xatol": SIMPLEX_TOL,
            "fatol": 1e-12,
            "maxfev": MAX_EVALS_PER_START,
            "adaptive": True,
        },
    )
    return res.x, float(res.fun), residual_of(res.x), iterates


def minimize_phi(problem):
    """Multi-start Nelder-Mead over the chosen family with penalty feasibility.

    Restarts are independent and seeded deterministically; the best restart
    wins with ties broken by the lowest restart index.  Worker count is
    capped by the SECTOR_DESCENT_THREADS environment variable (serial by
    default).
    """
    workers = int(os.environ.get("SECTOR_DESCENT_THREADS", "1"))
    results = []
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [
                pool.submit(_run_single_start, problem, r)
                for r in range(problem.restarts)
            ]
            results = [f.result() for f in futs]
    else:
        results = [_run_single_start(problem, r) for r in range(problem.restarts)]
    best_r = min(range(len(results)), key=lambda r: (results[r][1], r))
    x, value, residual, _ = results[best_r]
    trace = []
    for r, (_, _, _, iterates) in enumerate(results):
        for (i, v, res) in iterates:
            trace.append((r, i, v, res))
    if problem.family == "polygons":
        sector, _ = _sector_from_params_polygon(x[: 2 * problem.k], problem.k)
        u = _u_from_params(x[2 * problem.k :])
        dist = distance_to_orthant(sector)
    elif problem.family == "arcs":
        length = float(np.clip(x[0], 0.05, math.pi))
        sector = Sector.arc_2d(0.0, length)
        u = np.array([math.cos(x[1]), math.sin(x[1])])
        dist = None
    else:
        opening = float(np.clip(x[0], 0.05, math.pi / 2))
        sector = Sector.circular(np.array([1.0, 0.0, 0.0]), opening)
        beta = float(max(x[1], 0.0))
        u = np.array([math.cos(beta), math.sin(beta), 0.0])
        dist = None
    value_clean = phi(sector, u).value
    report = MinimizationReport(
        problem=problem,
        best_value=value_clean,
        best_sector=sector,
        best_u=u,
        feasibility_residual=class_c_residual(sector),
        u_residual=_u_in_dual_residual(sector, u),
        dist_to_orthant=dist,
        trace=trace,
        restart_values=[v for (_, v, _, _) in results],
    )
    return report


def cap_family_sweep(samples=2000):
    """Closed-form sweep of the cap family: min over opening and u-colatitude.

    For a cap the functional is (sin^2(opening)/2) * cos(beta) with beta at
    most pi/2 - opening, so the minimum sits on the boundary; the sweep
    confirms it numerically and returns (min value, argmin opening).
    """
    best, arg = math.inf, None
    for opening in np.linspace(math.pi / 4, math.pi / 2, samples):
        beta = math.pi / 2 - opening
        val = 0.5 * math.sin(opening) ** 2 * math.cos(beta)
        if val < best:
            best, arg = float(val), float(opening)
    return best, arg


# ---------------------------------------------------------------------------
# self-dual snap


def self_dual_snap(sector, tol=1e-6, max_iters=200):
    """Shrink a dual-containing sector onto a self-dual one.

    Circular sectors converge by the opening midpoint in one step.  For
    polygons each iteration matches the vertices with the dual's vertices
    (best cyclic alignment) and replaces them with geodesic midpoints; the
    blend stays inside the current sector since both endpoints do, giving a
    monotone shrink.  Raises on non-convergence.
    """
    if not in_class_c(sector, tol=1e-6):
        raise ValueError("sector does not contain its dual")
    cone = sector.cone
    if cone.kind == "circular":
        opening = cone.opening
        for _ in range(max_iters):
            if abs(opening - math.pi / 4) <= tol:
                break
            opening = 0.5 * (opening + (math.pi / 2 - opening))
        out = Sector.circular(cone.axis, opening)
        if not is_self_dual(out, tol=tol):
            raise RuntimeError("snap failed to converge on the circular family")
        return out
    current = [np.asarray(v) for v in sector.polygon.vertices]
    for it in range(max_iters):
        s = Sector(ConvexCone.from_generators(current))
        if is_self_dual(s, tol=tol):
            return s
        dual_rays = [np.asarray(g) for g in dual_cone(s.cone).generators()]
        blend_t = 0.5
        for _ in range(6):
            blended = _blend_vertices(current, dual_rays, blend_t)
            try:
                cand = Sector(ConvexCone.from_generators(blended))
            except ValueError:
                blend_t *= 0.5
                continue
            if in_class_c(cand, tol=1e-6):
                current = [np.asarray(v) for v in cand.polygon.vertices]
                break
            blend_t *= 0.5
        else:
            raise RuntimeError("snap stalled: no class-preserving blend step")
    s = Sector(ConvexCone.from_generators(current))
    if not is_self_dual(s, tol=tol):
        raise RuntimeError(f"self-dual snap did not converge in {max_iters} iterations")
    return s


def _blend_vertices(verts, dual_rays, t):
    """Slerp each vertex toward its best-aligned dual ray (cyclic matching)."""
    k, kd = len(verts), len(dual_rays)
    if kd == 0:
        raise ValueError("dual has no rays")
    best_cost, best_assign = math.inf, None
    # try all cyclic offsets of the (angle-ordered) shorter list
    for off in range(kd):
        assign = [dual_rays[(j + off) % kd] for j in range(k)]
        cost = sum(geodesic_distance(v, a) for v, a in zip(verts, assign))
        if cost < best_cost:
            best_cost, best_assign = cost, assign
    out = []
    for v, a in zip(verts, best_assign):
        if geodesic_distance(v, a) < 1e-14:
            out.append(v)
        else:
            out.append(slerp(v, a, t))
    return out


# ---------------------------------------------------------------------------
# area comparison


def blaschke_lebesgue_area(sector, profile_tol=1e-3):
    """Spherical area of a constant-width-pi/2 sector, relative to the extremum.

    Polygons use the interior-angle excess; caps use 2 pi (1 - cos opening).
    Returns (area, area - pi/2); the deficit term is nonnegative for the
    constant-width family, vanishing exactly at the three-right-angle
    triangle.
    """
    prof = spherical_width_profile(sector, samples=128)
    vals = np.array([v for _, v in prof])
    if np.max(np.abs(vals - math.pi / 2)) > profile_tol:
        raise ValueError("sector does not have constant width pi/2 at the stated tol")
    area = sector.area()
    return area, area - math.pi / 2


# ---------------------------------------------------------------------------
# distance to the extremal sector


def distance_to_orthant(sector, boundary_samples=96):
    """Hausdorff distance (geodesic) from the sector to the nearest orthant sector.

    Minimized over rotations: a Procrustes fit of three spread vertices
    seeds a Nelder-Mead refinement over the rotation vector.
    """
    if sector.cone.kind == "circular":
        raise ValueError("distance to orthant is defined for polygonal sectors")
    verts = [np.asarray(v) for v in sector.polygon.vertices]
    anchors = _spread_triple(verts)
    target = np.eye(3)
    M = sum(np.outer(a, t) for a, t in zip(anchors, target.T))
    U, _, Vt = np.linalg.svd(M)
    R0 = (U @ Vt).T
    if np.linalg.det(R0) < 0:
        U[:, -1] *= -1
        R0 = (U @ Vt).T

    pts_s = sector.polygon.boundary_points(boundary_samples)

    def hausdorff_for(rotvec):
        R = _rotation_from_vector(rotvec) @ R0
        oct_sector = Sector.orthant(R.T)
        return _hausdorff(sector, oct_sector, pts_s, boundary_samples)

    best = math.inf
    for start in (np.zeros(3), np.array([0.2, 0.0, 0.0]), np.array([0.0, 0.2, -0.1])):
        res = scipy_minimize(
            hausdorff_for,
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-9, "maxfev": 2000},
        )
        best = min(best, float(res.fun))
    return best


def _spread_triple(verts):
    if len(verts) == 3:
        return verts
    best, trio = -1.0, verts[:3]
    m = len(verts)
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                spread = min(
                    geodesic_distance(verts[i], verts[j]),
                    geodesic_distance(verts[i], verts[k]),
                    geodesic_distance(verts[j], verts[k]),
                )
                if spread > best:
                    best, trio = spread, [verts[i], verts[j], verts[k]]
    return trio


def _rotation_from_vector(v):
    angle = float(np.linalg.norm(v))
    if angle < 1e-14:
        return np.eye(3)
    axis = np.asarray(v) / angle
    K = np.array(
        [[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]]
    )
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)


def _point_to_sector_distance(p, sector):
    if sector.contains_direction(p, tol=1e-12):
        return 0.0
    poly = sector.polygon
    best = min(geodesic_distance(p, v) for v in poly.vertices)
    for arc in poly.edges():
        d = arc.length
        if d < 1e-14:
            continue
        a_e, w_e = arc.tangent_basis()
        # closest point on the great circle, checked against the arc span
        proj = np.dot(p, a_e) * a_e + np.dot(p, w_e) * w_e
        nrm = np.linalg.norm(proj)
        if nrm < 1e-14:
            continue
        c = proj / nrm
        t = math.atan2(float(np.dot(c, w_e)), float(np.dot(c, a_e)))
        if 0.0 <= t <= d:
            best = min(best, geodesic_distance(p, c))
    return best


def _hausdorff(sector_a, sector_b, pts_a, samples):
    pts_b = sector_b.polygon.boundary_points(samples)
    d_ab = max(_point_to_sector_distance(p, sector_b) for p in pts_a)
    d_ba = max(_point_to_sector_distance(p, sector_a) for p in pts_b)
    return max(d_ab, d_ba)
