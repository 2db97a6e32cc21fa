"""Closed convex cones in R^n, duality, and sectors (cone intersect sphere).

A cone is held in one of three representations:

* generators: extreme unit rays (V-rep), canonicalized on construction;
* halfspaces: unit vectors h with the cone {x : <x, h> >= 0 for all h};
* circular: unit axis plus opening angle in [0, pi/2] (opening pi/2 is a
  halfspace, opening 0 a single ray).

Duality swaps generators and halfspaces on the same vector set and maps a
circular opening alpha to pi/2 - alpha.  In n=2 every cone is canonicalized
to circular form, which makes 2-d duality exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .sphere import (
    SphericalPolygon,
    geodesic_distance,
    separating_direction,
    unit_vector,
)

POLY_TOL = 1e-9
CIRC_TOL = 1e-6
MERGE_ANGLE = 1e-8
RIM_SAMPLES = 720

__all__ = [
    "ConvexCone",
    "Sector",
    "NormalConeResult",
    "dual_cone",
    "cone_contains",
    "cone_equal",
    "in_class_c",
    "is_self_dual",
    "normal_cone_at_vertex",
    "tangent_cone_at_vertex",
    "class_c_residual",
    "spherical_width_profile",
    "is_constant_width",
    "spherical_hull",
]


def _dedupe_rays(rays, angle_tol=MERGE_ANGLE):
    out = []
    for r in rays:
        if all(geodesic_distance(r, s) > angle_tol for s in out):
            out.append(r)
    return out


def spherical_hull(points, tol=1e-12):
    """Extreme rays of cone(points), ordered ccw around an interior direction.

    Points must lie in a closed halfspace.  Returns a list of unit vectors;
    raises if the configuration spans more than a hemisphere.
    """
    pts = [unit_vector(p) for p in points]
    pts = _dedupe_rays(pts)
    if len(pts) == 1:
        return pts
    rank = np.linalg.matrix_rank(np.asarray(pts), tol=1e-10)
    if rank == 1:
        if len(pts) > 1:
            raise ValueError("antipodal ray pair spans a line, not a pointed cone")
        return pts
    if rank == 2:
        _, _, vt = np.linalg.svd(np.asarray(pts))
        return spherical_hull_in_plane(np.asarray(pts), unit_vector(vt[2]))
    center = separating_direction(pts)
    proj_ok = [p for p in pts if np.linalg.norm(p - center * np.dot(p, center)) > 1e-9]
    if len(proj_ok) != len(pts):
        # a point sits at the ordering pole; tilt the pole away from it
        others = [p for p in pts if np.linalg.norm(p - center * np.dot(p, center)) > 1e-9]
        center = unit_vector(center + 0.05 * unit_vector(np.sum(others, axis=0)))
        if min(float(np.dot(p, center)) for p in pts) < -1e-9:
            raise ValueError("could not find an ordering pole")
    ref = pts[0] - center * np.dot(pts[0], center)
    if np.linalg.norm(ref) < 1e-9:
        alt = pts[1] if len(pts) > 1 else np.eye(3)[0]
        ref = alt - center * np.dot(alt, center)
    b1 = unit_vector(ref)
    b2 = np.cross(center, b1)
    ang = [math.atan2(float(np.dot(p, b2)), float(np.dot(p, b1))) for p in pts]
    order = np.argsort(ang)
    ring = [pts[i] for i in order]
    if len(ring) == 2:
        return ring
    # Graham-style scan on the ring: drop any vertex on the inner side of its
    # neighbors' geodesic (inward normal of ccw edge a->c is a x c)
    changed = True
    while changed and len(ring) > 2:
        changed = False
        m = len(ring)
        for i in range(m):
            a = ring[(i - 1) % m]
            b = ring[i]
            c = ring[(i + 1) % m]
            n = np.cross(a, c)
            nn = np.linalg.norm(n)
            if nn < 1e-14:
                # a and c (anti)parallel: if parallel, b decides nothing; drop dup
                if np.dot(a, c) > 0:
                    ring.pop(i)
                    changed = True
                    break
                continue
            if np.dot(b, n) / nn >= -tol:
                ring.pop(i)
                changed = True
                break
    return ring


class ConvexCone:
    """Closed convex cone contained in a closed halfspace of R^n."""

    def __init__(self, kind, vectors=None, axis=None, opening=None, n=None):
        if kind not in ("generators", "halfspaces", "circular"):
            raise ValueError(f"unknown cone kind {kind!r}")
        self.kind = kind
        if kind == "circular":
            self.axis = unit_vector(axis)
            self.opening = float(opening)
            if not (0.0 <= self.opening <= math.pi / 2 + 1e-12):
                raise ValueError("circular opening must lie in [0, pi/2]")
            self.opening = min(self.opening, math.pi / 2)
            self.n = len(self.axis)
            self.vectors = None
        else:
            vecs = np.array([unit_vector(v) for v in vectors])
            if vecs.size == 0:
                raise ValueError("empty vector set")
            self.n = vecs.shape[1]
            if self.n == 2:
                # canonicalize every 2-d cone to circular (exact duality)
                axis, opening = _vectors_to_arc(vecs, kind)
                self.kind = "circular"
                self.axis = axis
                self.opening = opening
                self.vectors = None
                return
            if kind == "generators":
                vecs = np.array(spherical_hull(vecs))
            else:
                vecs = np.array(_dedupe_rays(list(vecs)))
            self.vectors = vecs
            self.axis = None
            self.opening = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_generators(cls, rays):
        return cls("generators", vectors=rays)

    @classmethod
    def from_halfspaces(cls, normals):
        return cls("halfspaces", vectors=normals)

    @classmethod
    def circular(cls, axis, opening):
        return cls("circular", axis=axis, opening=opening)

    @classmethod
    def orthant(cls, rotation=None):
        rays = np.eye(3) if rotation is None else np.asarray(rotation)
        return cls.from_generators(rays)

    def __repr__(self):
        if self.kind == "circular":
            return f"ConvexCone(circular, axis={self.axis.round(4)}, opening={self.opening:.6f})"
        return f"ConvexCone({self.kind}, {len(self.vectors)} vectors, n={self.n})"

    # -- basic queries -------------------------------------------------------

    def contains_direction(self, x, tol=POLY_TOL):
        """Membership of the unit direction x, within tol."""
        x = unit_vector(x)
        return self.violation(x) <= tol

    def violation(self, x):
        """How far the unit direction x sits outside the cone (0 if inside).

        Circular/halfspace reps give exact constraint slack; generator reps
        use the nonnegative-least-squares distance to cone(generators).
        """
        x = np.asarray(x, dtype=float)
        if self.kind == "circular":
            return max(0.0, geodesic_distance(x, self.axis) - self.opening)
        if self.kind == "halfspaces":
            return max(0.0, -float(np.min(self.vectors @ x)))
        A = self.vectors.T
        coef, _ = nnls(A, x)
        # recompute the residual: scipy's reported rnorm is unreliable
        return float(np.linalg.norm(A @ coef - x))

    def generators(self):
        """Extreme unit rays (V-rep).  Raises for cones with lineality."""
        if self.kind == "generators":
            return [v.copy() for v in self.vectors]
        if self.kind == "circular":
            if self.opening >= math.pi / 2 - 1e-12:
                raise ValueError("a halfspace cone has no extreme rays")
            if self.opening <= 1e-12:
                return [self.axis.copy()]
            raise ValueError("a full circular cone has no finite generator set")
        return _rays_from_halfspaces(self.vectors)

    def halfspaces(self):
        """Unit normals h of a representation {x : <x,h> >= 0}."""
        if self.kind == "halfspaces":
            return [v.copy() for v in self.vectors]
        if self.kind == "circular":
            raise ValueError("circular cones have no finite halfspace set")
        return _halfspaces_from_rays(self.vectors)

    def boundary_samples(self, count=RIM_SAMPLES):
        """Unit directions that certify containment when all lie in a target cone."""
        if self.kind == "circular":
            if self.n == 2:
                a = math.atan2(self.axis[1], self.axis[0])
                return [
                    np.array([math.cos(a - self.opening), math.sin(a - self.opening)]),
                    np.array([math.cos(a + self.opening), math.sin(a + self.opening)]),
                ]
            b1, b2 = _orthobasis(self.axis)
            ts = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
            rim = (
                math.cos(self.opening) * self.axis[None, :]
                + math.sin(self.opening)
                * (np.cos(ts)[:, None] * b1 + np.sin(ts)[:, None] * b2)
            )
            return list(rim)
        try:
            return self.generators()
        except ValueError:
            raise ValueError("cannot sample a cone with lineality in this representation")

    def is_pointed(self, tol=1e-9):
        if self.kind == "circular":
            return self.opening < math.pi / 2 - tol
        try:
            gens = self.generators()
        except ValueError:
            return False
        for g in gens:
            if self.violation(-np.asarray(g)) <= tol:
                return False
        return True

    def to_json(self):
        if self.kind == "circular":
            return json.dumps(
                {"kind": "circular", "axis": list(self.axis), "opening": self.opening}
            )
        return json.dumps({"kind": self.kind, "vectors": [list(v) for v in self.vectors]})

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        if obj["kind"] == "circular":
            return cls.circular(obj["axis"], obj["opening"])
        return cls(obj["kind"], vectors=obj["vectors"])


def _vectors_to_arc(vecs, kind):
    """Collapse a 2-d generator/halfspace set to (axis, half-opening)."""
    angles = np.arctan2(vecs[:, 1], vecs[:, 0])
    if kind == "halfspaces":
        # each normal h constrains directions to [h - pi/2, h + pi/2]
        lo = angles - math.pi / 2
        hi = angles + math.pi / 2
        a, b = _intersect_angular_intervals(lo, hi)
    else:
        a, b = _angular_hull(angles)
    if b - a > math.pi + 1e-9:
        raise ValueError("2-d cone spans more than a halfplane")
    mid = 0.5 * (a + b)
    return np.array([math.cos(mid), math.sin(mid)]), min((b - a) / 2.0, math.pi / 2)


def _angular_hull(angles):
    """Smallest interval [a, b] (mod 2pi) containing all angles, b - a <= pi."""
    ang = np.sort(np.mod(angles, 2.0 * math.pi))
    m = len(ang)
    if m == 1:
        return float(ang[0]), float(ang[0])
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2.0 * math.pi]]))
    k = int(np.argmax(gaps))
    start = float(ang[(k + 1) % m])
    width = 2.0 * math.pi - float(gaps[k])
    if width > math.pi + 1e-9:
        raise ValueError("2-d directions span more than a halfplane")
    return start, start + width


def _intersect_angular_intervals(los, his):
    lo, hi = float(los[0]), float(his[0])
    for a, b in zip(los[1:], his[1:]):
        # shift (a, b) near the current interval before intersecting
        mid = 0.5 * (lo + hi)
        shift = round((mid - 0.5 * (a + b)) / (2.0 * math.pi)) * 2.0 * math.pi
        a, b = a + shift, b + shift
        lo, hi = max(lo, a), min(hi, b)
        if hi < lo - 1e-12:
            raise ValueError("halfspace cone in 2-d is empty")
    return lo, hi


def _orthobasis(axis):
    a = np.asarray(axis, dtype=float)
    probe = np.eye(3)[int(np.argmin(np.abs(a)))]
    b1 = unit_vector(np.cross(a, probe))
    b2 = np.cross(a, b1)
    return b1, b2


def _halfspaces_from_rays(rays, tol=1e-10):
    """Facet normals of a 3-d cone given by generators (rank-aware)."""
    G = np.asarray(rays, dtype=float)
    if G.shape[0] == 1:
        g = G[0]
        b1, b2 = _orthobasis(g)
        return [g, b1, -b1, b2, -b2]
    rank = np.linalg.matrix_rank(G, tol=1e-10)
    if rank == 1:
        return _halfspaces_from_rays([G[0]])
    if rank == 2:
        # planar cone: the plane itself plus the in-plane wedge boundaries
        _, _, vt = np.linalg.svd(G - 0.0)
        n = vt[2]
        ring = spherical_hull_in_plane(G, n)
        out = [n, -n]
        a, b = ring[0], ring[-1]
        na = unit_vector(np.cross(n, a))
        if min(float(np.dot(g, na)) for g in G) < -1e-9:
            na = -na
        nb = unit_vector(np.cross(n, b))
        if min(float(np.dot(g, nb)) for g in G) < -1e-9:
            nb = -nb
        out.extend([na, nb])
        return out
    normals = []
    m = len(G)
    mins = []
    for i in range(m):
        for j in range(i + 1, m):
            c = np.cross(G[i], G[j])
            nc = np.linalg.norm(c)
            if nc < 1e-12:
                continue
            c = c / nc
            lo = float(np.min(G @ c))
            if lo >= -tol:
                normals.append(c)
            elif float(np.max(G @ c)) <= tol:
                normals.append(-c)
    return _dedupe_rays(normals)


def spherical_hull_in_plane(points, normal):
    """Order coplanar unit rays by angle in their plane; return the extreme pair span."""
    b_ref = None
    for p in points:
        q = p - normal * np.dot(p, normal)
        if np.linalg.norm(q) > 1e-9:
            b_ref = unit_vector(q)
            break
    if b_ref is None:
        raise ValueError("points collapse onto the plane normal")
    b2 = np.cross(normal, b_ref)
    ang = [math.atan2(float(np.dot(p, b2)), float(np.dot(p, b_ref))) for p in points]
    a, b = _angular_hull(np.array(ang))
    lo = math.cos(a) * b_ref + math.sin(a) * b2
    hi = math.cos(b) * b_ref + math.sin(b) * b2
    return [unit_vector(lo), unit_vector(hi)]


def _rays_from_halfspaces(normals, tol=1e-10):
    """Extreme rays of {x : <x,h> >= 0} in R^3 via active-pair enumeration."""
    H = np.asarray(normals, dtype=float)
    cands = []
    m = len(H)
    for i in range(m):
        for j in range(i + 1, m):
            c = np.cross(H[i], H[j])
            nc = np.linalg.norm(c)
            if nc < 1e-12:
                continue
            c = c / nc
            if float(np.min(H @ c)) >= -tol:
                cands.append(c)
            if float(np.min(H @ -c)) >= -tol:
                cands.append(-c)
    if not cands:
        # single halfspace or empty-interior intersection: no extreme rays
        raise ValueError("cone has no extreme rays in this halfspace set")
    cands = _dedupe_rays(cands)
    if len(cands) <= 2:
        return cands
    return spherical_hull(cands)


# ---------------------------------------------------------------------------
# duality and containment


def dual_cone(c):
    """Dual cone {y : <y, x> >= 0 for all x in C}.

    Generator and halfspace representations swap on the same vector set;
    Circular(axis, alpha) maps to Circular(axis, pi/2 - alpha).  The input
    must be contained in a closed halfspace (otherwise the dual sector is
    empty and no Sector-level reasoning applies).
    """
    if c.kind == "circular":
        return ConvexCone.circular(c.axis, math.pi / 2 - c.opening)
    if c.kind == "generators":
        if not _in_closed_halfspace(c):
            raise ValueError("cone spans more than a halfspace; dual sector is empty")
        return ConvexCone.from_halfspaces(c.vectors)
    return ConvexCone.from_generators(c.vectors)


def _in_closed_halfspace(c):
    if c.kind != "generators":
        return True
    s = c.vectors.sum(axis=0)
    if np.linalg.norm(s) < 1e-12:
        return False
    return c.violation(unit_vector(s)) < math.pi  # generators() construction validated it


def cone_contains(outer, inner, tol=None):
    """Whether ``inner`` is a subset of ``outer``, with a violating witness.

    Returns (flag, witness): witness is None when contained, otherwise a
    unit direction of ``inner`` outside ``outer``.  Polyhedral inner cones
    are certified on their extreme rays; circular inner cones on a dense
    rim sample (plus the axis).
    """
    if tol is None:
        tol = CIRC_TOL if "circular" in (outer.kind, inner.kind) else POLY_TOL
    if outer.kind == "circular" and inner.kind == "circular":
        gap = geodesic_distance(outer.axis, inner.axis) + inner.opening - outer.opening
        if gap <= tol:
            return True, None
        b1, _ = _orthobasis_nd(outer.axis, inner.axis)
        w = _rotate_toward(inner.axis, b1, inner.opening)
        return False, w
    probes = list(inner.boundary_samples())
    if inner.kind == "circular":
        probes.append(inner.axis)
    worst, witness = 0.0, None
    for p in probes:
        v = outer.violation(np.asarray(p, dtype=float))
        if v > worst:
            worst, witness = v, np.asarray(p)
    if worst <= tol:
        return True, None
    return False, witness


def _orthobasis_nd(a, b):
    """A unit vector orthogonal to a, preferring the (a, b) plane."""
    q = np.asarray(b, dtype=float) - np.asarray(a, dtype=float) * float(np.dot(a, b))
    if np.linalg.norm(q) > 1e-9:
        u = unit_vector(q)
    else:
        probe = np.zeros(len(a))
        probe[int(np.argmin(np.abs(a)))] = 1.0
        u = unit_vector(probe - np.asarray(a) * float(np.dot(a, probe)))
    return u, None


def _rotate_toward(x, direction, angle):
    return unit_vector(math.cos(angle) * np.asarray(x) + math.sin(angle) * direction)


def cone_equal(a, b, tol=None):
    ab, _ = cone_contains(a, b, tol)
    ba, _ = cone_contains(b, a, tol)
    return ab and ba


# ---------------------------------------------------------------------------
# sectors


class Sector:
    """Intersection of a convex cone with the unit sphere, inside a hemisphere."""

    def __init__(self, cone):
        self.cone = cone
        self.n = cone.n
        self._polygon = None
        if cone.kind == "generators" and cone.n == 3:
            rays = cone.generators()
            self._polygon = _polygon_from_rays(rays)
        elif cone.kind == "halfspaces" and cone.n == 3:
            self._polygon = _polygon_from_halfspaces(cone.vectors)

    @classmethod
    def from_polygon(cls, polygon):
        s = cls.__new__(cls)
        s.cone = ConvexCone.from_generators(polygon.vertices)
        s.n = 3
        s._polygon = polygon
        return s

    @classmethod
    def circular(cls, axis, opening):
        return cls(ConvexCone.circular(axis, opening))

    @classmethod
    def orthant(cls, rotation=None):
        return cls(ConvexCone.orthant(rotation))

    @classmethod
    def arc_2d(cls, start_angle, end_angle):
        """n=2 sector spanning [start_angle, end_angle], length <= pi."""
        if not 0 <= end_angle - start_angle <= math.pi + 1e-12:
            raise ValueError("arc length must lie in [0, pi]")
        mid = 0.5 * (start_angle + end_angle)
        return cls(
            ConvexCone.circular(
                [math.cos(mid), math.sin(mid)], (end_angle - start_angle) / 2.0
            )
        )

    @property
    def polygon(self):
        if self._polygon is None:
            raise ValueError("sector has no polygonal boundary (circular or n=2)")
        return self._polygon

    @property
    def is_polygonal(self):
        return self._polygon is not None

    def pole(self):
        if self.cone.kind == "circular":
            return self.cone.axis.copy()
        return self.polygon.pole.copy()

    def dual(self):
        return Sector(dual_cone(self.cone))

    def contains_direction(self, x, tol=None):
        if tol is None:
            tol = CIRC_TOL if self.cone.kind == "circular" else POLY_TOL
        return self.cone.contains_direction(x, tol)

    def boundary_points(self, samples=256):
        if self.cone.kind == "circular":
            if self.n == 2:
                return np.array(self.cone.boundary_samples())
            return np.array(self.cone.boundary_samples(samples))
        return self.polygon.boundary_points(samples)

    def area(self):
        if self.cone.kind == "circular":
            if self.n != 3:
                raise ValueError("area defined on S^2 sectors only")
            return 2.0 * math.pi * (1.0 - math.cos(self.cone.opening))
        return self.polygon.area()

    def __repr__(self):
        return f"Sector({self.cone!r})"

    def to_json(self):
        return self.cone.to_json()

    @classmethod
    def from_json(cls, text):
        return cls(ConvexCone.from_json(text))


def _polygon_from_rays(rays):
    if len(rays) == 1:
        raise ValueError("a single ray is not a polygonal sector")
    if len(rays) == 2:
        return SphericalPolygon(rays, pole=unit_vector(np.sum(rays, axis=0)))
    # the max-margin direction is a robust pole even for near-equatorial rings
    pole = separating_direction(rays)
    return SphericalPolygon(rays, pole=pole, tol=1e-7)


def _polygon_from_halfspaces(normals):
    """Boundary polygon of {x : <x,h> >= 0}; handles cones with lineality.

    Pointed full-dimensional cones give their extreme-ray polygon.  Cones
    whose constraint normals span only a plane (one lineality direction)
    give the lune bounded by two great circles through the +-normal pair.
    """
    H = np.asarray(normals, dtype=float)
    rank = np.linalg.matrix_rank(H, tol=1e-9)
    if rank == 1:
        raise ValueError("a halfspace sector is circular; use the circular form")
    if rank == 2:
        _, _, vt = np.linalg.svd(H)
        n = unit_vector(vt[2])
        b1 = unit_vector(vt[0])
        b2 = np.cross(n, b1)
        ang = np.arctan2(H @ b2, H @ b1)
        lo, hi = _intersect_angular_intervals(ang - math.pi / 2, ang + math.pi / 2)
        if hi - lo > math.pi + 1e-9:
            raise ValueError("in-plane section spans more than a halfplane")
        r1 = math.cos(lo) * b1 + math.sin(lo) * b2
        r2 = math.cos(hi) * b1 + math.sin(hi) * b2
        pole = unit_vector(math.cos(0.5 * (lo + hi)) * b1 + math.sin(0.5 * (lo + hi)) * b2)
        for order in ([r1, -n, r2, n], [r1, n, r2, -n]):
            try:
                return SphericalPolygon(order, pole=pole)
            except ValueError:
                continue
        raise ValueError("could not orient lune sector")
    rays = _rays_from_halfspaces(H)
    if len(rays) == 0:
        raise ValueError("empty sector")
    return _polygon_from_rays(rays)


def in_class_c(sector, tol=None):
    """Whether the sector contains its dual sector (the feasible class)."""
    flag, _ = cone_contains(sector.cone, dual_cone(sector.cone), tol)
    return flag


def is_self_dual(sector, tol=None):
    """Mutual containment of the sector and its dual within tol."""
    d = dual_cone(sector.cone)
    a, _ = cone_contains(sector.cone, d, tol)
    b, _ = cone_contains(d, sector.cone, tol)
    return a and b


def class_c_residual(sector):
    """Largest violation depth of dual rays outside the sector (0 if in class)."""
    try:
        probes = dual_cone(sector.cone).boundary_samples()
    except ValueError:
        return math.inf
    return max(sector.cone.violation(np.asarray(p, dtype=float)) for p in probes)


# ---------------------------------------------------------------------------
# normal cones of polytopes


@dataclass(frozen=True)
class NormalConeResult:
    """Normal cone of a polytope at one of its vertices."""

    cone: ConvexCone
    vertex: np.ndarray


def normal_cone_at_vertex(points, q, tol=1e-9):
    """Normal cone {x : <x, y - q> <= 0 for all y} at the hull vertex q.

    The halfspace representation uses the normalized directions q - y; the
    generator form follows by dualization.  Collinear point sets give the
    halfspace cone in circular form.  Raises when q is not a vertex of the
    convex hull of ``points``.
    """
    pts = np.asarray(points, dtype=float)
    q = np.asarray(q, dtype=float)
    diffs = pts - q
    keep = np.linalg.norm(diffs, axis=1) > tol
    diffs = diffs[keep]
    if diffs.size == 0:
        raise ValueError("not a hull vertex: q is the only point")
    if not _is_hull_vertex(pts[keep], q, tol):
        raise ValueError("not a hull vertex")
    normals = [unit_vector(-d) for d in diffs]
    if np.linalg.matrix_rank(np.asarray(normals), tol=1e-9) == 1:
        return NormalConeResult(
            cone=ConvexCone.circular(normals[0], math.pi / 2), vertex=q.copy()
        )
    cone = ConvexCone.from_halfspaces(normals)
    return NormalConeResult(cone=cone, vertex=q.copy())


def _is_hull_vertex(others, q, tol=1e-9):
    """q is a hull vertex iff it is not a convex combination of the others."""
    return not _in_convex_hull(others, q, tol)


def _in_convex_hull(points, q, tol=1e-9):
    pts = np.asarray(points, dtype=float)
    q = np.asarray(q, dtype=float)
    scale = 1.0 + float(np.max(np.linalg.norm(pts, axis=1), initial=0.0))
    A = np.vstack([pts.T / scale, np.ones(len(pts))])
    b = np.concatenate([q / scale, [1.0]])
    x, _ = nnls(A, b)
    return float(np.linalg.norm(A @ x - b)) <= tol


def tangent_cone_at_vertex(points, q, tol=1e-9):
    """Closure of feasible directions cone({y - q}) at the hull vertex q."""
    pts = np.asarray(points, dtype=float)
    q = np.asarray(q, dtype=float)
    diffs = pts - q
    keep = np.linalg.norm(diffs, axis=1) > tol
    dirs = [unit_vector(d) for d in diffs[keep]]
    if not dirs:
        raise ValueError("tangent cone undefined: q is the only point")
    return ConvexCone.from_generators(dirs)


# ---------------------------------------------------------------------------
# spherical width


def spherical_width_profile(sector, samples=128):
    """Pairs (boundary point, farthest geodesic reach into the sector).

    The reach sup over the sector of the distance to a boundary point is
    computed exactly: the linear form <theta0, .> attains its minimum over a
    convex spherical region on the boundary, so vertices plus per-arc
    sinusoid minima suffice.
    """
    if sector.n != 3:
        raise ValueError("width profiles are defined on S^2")
    if sector.cone.kind == "circular":
        if sector.cone.opening <= 1e-12:
            raise ValueError("sector with empty interior")
        reach = min(math.pi, 2.0 * sector.cone.opening)
        return [(p, reach) for p in sector.boundary_points(samples)]
    poly = sector.polygon
    if len(poly.vertices) < 3 or poly.area() < 1e-12:
        raise ValueError("sector with empty interior")
    return [(p, _max_reach(poly, p)) for p in poly.boundary_points(samples)]


def _max_reach(polygon, theta0):
    best = min(float(np.dot(theta0, v)) for v in polygon.vertices)
    for arc in polygon.edges():
        d = arc.length
        if d < 1e-14:
            continue
        p, w = arc.tangent_basis()
        a = float(np.dot(theta0, p))
        b = float(np.dot(theta0, w))
        t0 = math.atan2(b, a)
        # f(t) = a cos t + b sin t minimized at t = t0 + pi (mod 2pi)
        tmin = t0 + math.pi
        for shift in (-2.0 * math.pi, 0.0, 2.0 * math.pi):
            t = tmin + shift
            if 0.0 <= t <= d:
                best = min(best, a * math.cos(t) + b * math.sin(t))
    return math.acos(min(1.0, max(-1.0, best)))


def is_constant_width(sector, width=math.pi / 2, tol=1e-4, samples=128):
    """Profile-based constant width: every value in [width - tol, width + tol]."""
    prof = spherical_width_profile(sector, samples)
    vals = np.array([v for _, v in prof])
    return bool(np.all(vals >= width - tol) and np.all(vals <= width + tol))
