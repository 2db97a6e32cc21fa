"""Primitives on the unit sphere S^(n-1), n in {2, 3}.

Points are plain numpy arrays of unit Euclidean norm.  The module provides
the geodesic metric, great arcs, geodesically convex spherical polygons,
quadrature grids for surface integrals, and exact (boundary-integral)
evaluation of projected areas and first moments of polygonal regions.

Everything here is an immutable value; all operations are pure functions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

UNIT_TOL = 1e-12
CONVEXITY_TOL = 1e-9

__all__ = [
    "unit_vector",
    "geodesic_distance",
    "slerp",
    "GreatArc",
    "SphericalPolygon",
    "QuadratureGrid",
    "build_quadrature",
    "projected_polygon_area",
    "spherical_triangle_area",
    "sphere_measure",
]


def sphere_measure(n):
    """Surface measure of S^(n-1): 2 pi^(n/2) / Gamma(n/2)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def unit_vector(coords):
    """Return ``coords`` as a float array, normalized to unit length.

    Raises ValueError on (near-)zero input; the result satisfies
    ``abs(|v| - 1) <= 1e-12``.
    """
    v = np.asarray(coords, dtype=float)
    peak = np.max(np.abs(v))
    if not np.isfinite(peak) or peak < 1e-300:
        raise ValueError("cannot normalize a (near-)zero vector")
    v = v / peak  # rescale first so tiny chords normalize without underflow
    v = v / np.linalg.norm(v)
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > UNIT_TOL:
        v = v / nrm
    return v


def geodesic_distance(p, q):
    """Great-circle distance arccos<p, q> in [0, pi].

    The inner product is clamped to [-1, 1] so antipodal and coincident
    pairs survive rounding; antipodal pairs return exactly pi.
    """
    return math.acos(min(1.0, max(-1.0, float(np.dot(p, q)))))


def separating_direction(points):
    """Unit d with <p, d> >= 0 for all points, strictly positive when possible.

    Tries the normalized mean first, then solves the maximin LP
    max t subject to <p, d> >= t with d in the unit box.
    """
    arr = np.asarray(points, dtype=float)
    mean = arr.sum(axis=0)
    if np.linalg.norm(mean) > 1e-10:
        d = unit_vector(mean)
        if float(np.min(arr @ d)) > 1e-9:
            return d
    k, n = arr.shape
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A = np.hstack([-arr, np.ones((k, 1))])
    res = linprog(
        c,
        A_ub=A,
        b_ub=np.zeros(k),
        bounds=[(-1.0, 1.0)] * n + [(None, 1.0)],
        method="highs",
    )
    if not res.success or res.x[-1] < -1e-9 or np.linalg.norm(res.x[:-1]) < 1e-9:
        raise ValueError("points do not lie in a closed halfspace")
    return unit_vector(res.x[:-1])


def slerp(p, q, t):
    """Point at fraction ``t`` along the shorter great arc from p to q."""
    d = geodesic_distance(p, q)
    if d < 1e-15:
        return unit_vector(p)
    if abs(d - math.pi) < 1e-12:
        raise ValueError("slerp undefined for antipodal endpoints")
    s = math.sin(d)
    return unit_vector((math.sin((1.0 - t) * d) / s) * p + (math.sin(t * d) / s) * q)


@dataclass(frozen=True)
class GreatArc:
    """Shorter great-circle segment between two non-antipodal unit vectors."""

    start: np.ndarray
    end: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        object.__setattr__(self, "start", unit_vector(self.start))
        object.__setattr__(self, "end", unit_vector(self.end))
        if np.linalg.norm(self.start + self.end) < 1e-9:
            raise ValueError("great arc endpoints must not be antipodal")

    @property
    def length(self):
        return geodesic_distance(self.start, self.end)

    def tangent_basis(self):
        """(p, w) with the arc parameterized as cos(t) p + sin(t) w, t in [0, length]."""
        d = self.length
        if d < 1e-15:
            raise ValueError("degenerate arc has no tangent")
        w = (self.end - self.start * math.cos(d)) / math.sin(d)
        return self.start, w

    def point_at(self, t):
        p, w = self.tangent_basis()
        return math.cos(t) * p + math.sin(t) * w


def _arc_chain(vertices):
    m = len(vertices)
    return [GreatArc(vertices[i], vertices[(i + 1) % m]) for i in range(m)]


def spherical_triangle_area(a, b, c):
    """Area of the spherical triangle with vertices a, b, c via L'Huilier's formula."""
    sa = geodesic_distance(b, c)
    sb = geodesic_distance(a, c)
    sc = geodesic_distance(a, b)
    s = 0.5 * (sa + sb + sc)
    t = (
        math.tan(0.5 * s)
        * math.tan(0.5 * (s - sa))
        * math.tan(0.5 * (s - sb))
        * math.tan(0.5 * (s - sc))
    )
    return 4.0 * math.atan(math.sqrt(max(t, 0.0)))


class SphericalPolygon:
    """Geodesically convex region on S^2 bounded by great-circle arcs.

    Vertices are ordered counterclockwise as seen from outside the sphere.
    The containing closed hemisphere is stored explicitly as a pole vector
    rather than being assumed axis-aligned, so polygons stay valid under
    arbitrary rotations.
    """

    def __init__(self, vertices, pole=None, tol=CONVEXITY_TOL):
        verts = [unit_vector(v) for v in vertices]
        if len(verts) < 2:
            raise ValueError("a spherical polygon needs at least 2 vertices")
        self.vertices = np.array(verts)
        m = len(verts)
        for i in range(m):
            if np.linalg.norm(verts[i] + verts[(i + 1) % m]) < 1e-9:
                raise ValueError("consecutive polygon vertices must not be antipodal")
        if pole is None:
            pole = self._default_pole(self.vertices)
        self.pole = unit_vector(pole)
        if np.min(self.vertices @ self.pole) < -tol:
            raise ValueError("polygon is not contained in the stated hemisphere")
        self._check_convexity(tol)

    @staticmethod
    def _default_pole(vertices):
        s = vertices.sum(axis=0)
        if np.linalg.norm(s) > 1e-9:
            cand = unit_vector(s)
            if float(np.min(vertices @ cand)) >= -1e-12:
                return cand
        # vertex mean degenerates or dips below the equator; use the
        # max-margin direction instead
        return separating_direction(vertices)

    def _check_convexity(self, tol):
        m = len(self.vertices)
        if m == 2:
            return
        for i in range(m):
            a = self.vertices[i]
            b = self.vertices[(i + 1) % m]
            n = np.cross(a, b)
            nn = np.linalg.norm(n)
            if nn < 1e-14:
                raise ValueError("degenerate polygon edge")
            n = n / nn
            if np.min(self.vertices @ n) < -max(tol, 1e-9):
                raise ValueError("polygon vertices are not in convex position (ccw)")

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"SphericalPolygon({len(self.vertices)} vertices, pole={self.pole.round(6)})"

    def edges(self):
        return _arc_chain(list(self.vertices))

    def edge_normals(self):
        """Unit inward normals n_i = v_i x v_{i+1} of the edge great circles."""
        m = len(self.vertices)
        out = []
        for i in range(m):
            n = np.cross(self.vertices[i], self.vertices[(i + 1) % m])
            out.append(unit_vector(n))
        return np.array(out)

    def contains(self, x, tol=CONVEXITY_TOL):
        x = np.asarray(x, dtype=float)
        return bool(np.min(self.edge_normals() @ x) >= -tol)

    def area(self):
        """Spherical area via the interior-angle excess (Gauss-Bonnet)."""
        m = len(self.vertices)
        if m == 2:
            return 0.0
        total = 0.0
        for i in range(m):
            a = self.vertices[(i - 1) % m]
            b = self.vertices[i]
            c = self.vertices[(i + 1) % m]
            u = a - b * np.dot(a, b)
            v = c - b * np.dot(c, b)
            nu, nv = np.linalg.norm(u), np.linalg.norm(v)
            if nu < 1e-14 or nv < 1e-14:
                continue
            total += math.acos(min(1.0, max(-1.0, float(np.dot(u, v)) / (nu * nv))))
        return total - (m - 2) * math.pi

    def first_moment(self):
        """Exact integral of theta over the polygon, d(sigma) measure.

        Uses the vector-area identity: the integral of the outward normal
        over a surface patch equals half the circulation of r x dr around
        its boundary.  Along a great arc parameterized cos(t) p + sin(t) w
        the integrand r x r' is the constant p x w.
        """
        acc = np.zeros(3)
        for arc in self.edges():
            d = arc.length
            if d < 1e-15:
                continue
            p, w = arc.tangent_basis()
            acc += 0.5 * d * np.cross(p, w)
        return acc

    def boundary_points(self, samples):
        """About ``samples`` points distributed along the boundary arcs."""
        arcs = [a for a in self.edges() if a.length > 1e-14]
        total = sum(a.length for a in arcs)
        pts = []
        for a in arcs:
            k = max(1, int(round(samples * a.length / total)))
            for j in range(k):
                pts.append(a.point_at(a.length * j / k))
        return np.array(pts)

    def clip_to_hemisphere(self, u, tol=1e-12):
        """Intersection with the closed hemisphere {<theta, u> >= 0}.

        Returns a new SphericalPolygon, or None when the intersection has
        empty interior.  The cut runs along the great circle normal to u,
        which is itself a geodesic, so the result is again a polygon.
        """
        u = unit_vector(u)
        verts = list(self.vertices)
        height = [float(np.dot(v, u)) for v in verts]
        if min(height) >= -tol:
            return self
        if max(height) <= tol:
            return None
        out = []
        m = len(verts)
        for i in range(m):
            a, b = verts[i], verts[(i + 1) % m]
            ha, hb = height[i], height[(i + 1) % m]
            if ha >= -tol:
                out.append(a)
            if (ha > tol and hb < -tol) or (ha < -tol and hb > tol):
                arc = GreatArc(a, b)
                p, w = arc.tangent_basis()
                t = math.atan2(-np.dot(p, u), np.dot(w, u))
                if t < 0:
                    t += math.pi
                out.append(unit_vector(arc.point_at(t)))
        # dedupe near-coincident points produced by vertices sitting on the cut
        cleaned = []
        for v in out:
            if not cleaned or (
                np.linalg.norm(v - cleaned[-1]) > 1e-9
                and np.linalg.norm(v - cleaned[0]) > 1e-9
            ):
                cleaned.append(v)
        if len(cleaned) < 3:
            return None
        cleaned = _split_long_arcs(cleaned)
        pole = SphericalPolygon._default_pole(np.array(cleaned))
        return SphericalPolygon(cleaned, pole=pole, tol=1e-7)

    def to_json(self):
        return json.dumps(
            {"pole": list(self.pole), "vertices": [list(v) for v in self.vertices]}
        )

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        return cls(obj["vertices"], pole=obj["pole"])


def _split_long_arcs(vertices, limit=math.pi / 2):
    """Insert midpoints so no boundary arc exceeds ``limit`` (keeps arcs unambiguous)."""
    out = []
    m = len(vertices)
    for i in range(m):
        a, b = vertices[i], vertices[(i + 1) % m]
        out.append(a)
        d = geodesic_distance(a, b)
        if d > limit:
            k = int(math.ceil(d / limit))
            arc = GreatArc(a, b)
            for j in range(1, k):
                out.append(unit_vector(arc.point_at(d * j / k)))
    return out


# ---------------------------------------------------------------------------
# quadrature grids


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and positive weights integrating over S^(n-1); weights sum to omega_n."""

    n: int
    level: int
    nodes: np.ndarray
    weights: np.ndarray
    cells: np.ndarray | None = field(default=None, repr=False)

    def integrate(self, f):
        """Integral of ``f`` (vectorized over an (m, n) array of nodes)."""
        vals = np.asarray(f(self.nodes), dtype=float)
        return float(np.dot(self.weights, vals))


_ICOSAHEDRON_CACHE = {}


def _icosahedron():
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    raw = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            raw.append((0.0, s1 * 1.0, s2 * phi))
            raw.append((s1 * 1.0, s2 * phi, 0.0))
            raw.append((s1 * phi, 0.0, s2 * 1.0))
    verts = np.array([unit_vector(v) for v in raw])
    faces = []
    # faces = triples of mutually nearest vertices (edge length is the icosahedral edge)
    edge = 2.0 / math.sqrt(phi * math.sqrt(5.0))
    m = len(verts)
    for i in range(m):
        for j in range(i + 1, m):
            if abs(np.linalg.norm(verts[i] - verts[j]) - edge) > 1e-9:
                continue
            for k in range(j + 1, m):
                if (
                    abs(np.linalg.norm(verts[i] - verts[k]) - edge) < 1e-9
                    and abs(np.linalg.norm(verts[j] - verts[k]) - edge) < 1e-9
                ):
                    a, b, c = verts[i], verts[j], verts[k]
                    if np.dot(np.cross(b - a, c - a), a + b + c) < 0:
                        a, b, c = a, c, b
                    faces.append((a, b, c))
    return faces


def _subdivide_once(tris):
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    ab = a + b
    ab /= np.linalg.norm(ab, axis=1)[:, None]
    bc = b + c
    bc /= np.linalg.norm(bc, axis=1)[:, None]
    ca = c + a
    ca /= np.linalg.norm(ca, axis=1)[:, None]
    return np.concatenate(
        [
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ]
    )


def _subdivided_sphere(level):
    """20 * 4^level spherical triangles from recursive icosahedral subdivision."""
    if level in _ICOSAHEDRON_CACHE:
        return _ICOSAHEDRON_CACHE[level]
    start = max((l for l in _ICOSAHEDRON_CACHE if l < level), default=None)
    if start is None:
        tris = np.array(_icosahedron())
        start = 0
        _ICOSAHEDRON_CACHE[0] = tris
    else:
        tris = _ICOSAHEDRON_CACHE[start]
    for l in range(start, level):
        tris = _subdivide_once(tris)
        _ICOSAHEDRON_CACHE[l + 1] = tris
    return tris


def triangle_areas(tris):
    """Vectorized L'Huilier areas for an (m, 3, 3) array of spherical triangles."""
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]

    def dist(u, v):
        return np.arccos(np.clip(np.einsum("ij,ij->i", u, v), -1.0, 1.0))

    sa, sb, sc = dist(b, c), dist(a, c), dist(a, b)
    s = 0.5 * (sa + sb + sc)
    t = (
        np.tan(0.5 * s)
        * np.tan(0.5 * (s - sa))
        * np.tan(0.5 * (s - sb))
        * np.tan(0.5 * (s - sc))
    )
    return 4.0 * np.arctan(np.sqrt(np.maximum(t, 0.0)))


def build_quadrature(n, level):
    """Quadrature grid on S^(n-1) at the given refinement level.

    n=2 uses uniform midpoint angles (2500 * 2^(level-1) nodes).  n=3 uses a
    recursively subdivided icosahedral triangulation: per triangle the three
    edge-midpoint nodes each carry a third of the exact spherical triangle
    area (L'Huilier), so constants integrate exactly and weights sum to 4 pi.
    """
    if level < 1:
        raise ValueError("quadrature level must be a positive integer")
    if n == 2:
        count = 2500 * 2 ** (level - 1)
        ang = (np.arange(count) + 0.5) * (2.0 * math.pi / count)
        nodes = np.column_stack([np.cos(ang), np.sin(ang)])
        weights = np.full(count, 2.0 * math.pi / count)
        return QuadratureGrid(n=2, level=level, nodes=nodes, weights=weights)
    if n == 3:
        tris = _subdivided_sphere(level)
        areas = triangle_areas(tris)
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        mids = np.concatenate([a + b, b + c, c + a])
        mids /= np.linalg.norm(mids, axis=1)[:, None]
        weights = np.concatenate([areas, areas, areas]) / 3.0
        return QuadratureGrid(n=3, level=level, nodes=mids, weights=weights, cells=tris)
    raise ValueError("quadrature grids support n in {2, 3} only")


# ---------------------------------------------------------------------------
# exact projected area of polygonal regions


def projected_polygon_area(polygon, u, tol=1e-12):
    """Area of the orthogonal projection of ``polygon`` (clipped to the
    hemisphere around ``u``) onto the unit disk in the plane normal to u.

    This equals the integral of <theta, u>^+ over the polygon: <theta, u> is
    the Jacobian of the projection.  Each boundary great arc projects to an
    ellipse arc whose Green's-theorem integrand (x y' - y x')/2 is constant,
    so the area is an exact finite sum Delta * <u, p x w> / 2 over arcs.
    """
    u = unit_vector(u)
    distinct = _count_distinct(polygon.vertices)
    if distinct < 2:
        raise ValueError("degenerate polygon: fewer than 2 distinct vertices")
    if distinct == 2:
        return 0.0
    clipped = polygon.clip_to_hemisphere(u, tol=tol)
    if clipped is None:
        return 0.0
    acc = 0.0
    for arc in clipped.edges():
        d = arc.length
        if d < 1e-15:
            continue
        p, w = arc.tangent_basis()
        acc += 0.5 * d * float(np.dot(u, np.cross(p, w)))
    return max(acc, 0.0)


def _count_distinct(vertices, tol=1e-12):
    seen = []
    for v in vertices:
        if all(np.linalg.norm(v - s) > tol for s in seen):
            seen.append(v)
    return len(seen)
