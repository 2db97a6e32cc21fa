"""Discrete self-expanding (steepest-descent) curves and their hull traces.

A curve is a polyline in R^2 or R^3.  The defining property tested here is
distance monotonicity: |x_i - x_j| <= |x_i - x_k| for i <= j <= k.  Along a
valid curve the convex hull of the traversed prefix grows, and the mean
width growth rate equals the sector functional of the normal cone at the
moving endpoint evaluated at the direction of motion.  The module tracks
that identity discretely, generates the closed-form curves (log spiral and
the segment-plus-spiral hat curve), and searches for long curves under
containment constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .cones import ConvexCone, Sector, normal_cone_at_vertex
from .phi import phi, sector_first_moment
from .sphere import sphere_measure, unit_vector

__all__ = [
    "PolylineCurve",
    "is_sdc",
    "angle_condition_check",
    "polyline_descent_defect",
    "mean_width_polytope",
    "HullTrace",
    "build_hull_trace",
    "dwds",
    "solve_spiral_omega",
    "generate_log_spiral",
    "generate_hat_curve",
    "hat_curve_scan",
    "orthant_exclusion_scan",
    "reparameterize_by_width",
    "width_ratio_bound",
    "CurveClass",
    "HullBody",
    "Ball",
    "psi",
    "search_max_psi",
    "random_sdc_curve",
]

SDC_TOL = 1e-9


class PolylineCurve:
    """Ordered point list with cumulative chord arclengths."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] not in (2, 3):
            raise ValueError("curve points must be an (m, 2) or (m, 3) array")
        steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if len(pts) > 1 and np.min(steps) <= 0.0:
            raise ValueError("consecutive curve points must be distinct")
        self.points = pts
        self.arclengths = np.concatenate([[0.0], np.cumsum(steps)])

    @property
    def n(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    @property
    def length(self):
        return float(self.arclengths[-1])

    def chord_direction(self, i):
        """Forward chord estimate of the motion direction at vertex i."""
        if i >= len(self.points) - 1:
            raise ValueError("no forward chord at the last vertex")
        return unit_vector(self.points[i + 1] - self.points[i])

    def to_csv(self, path):
        header = "x,y" if self.n == 2 else "x,y,z"
        np.savetxt(path, self.points, delimiter=",", header=header, comments="")

    @classmethod
    def from_csv(cls, path):
        pts = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(pts)


def is_sdc(curve, tol=SDC_TOL):
    """Distance monotonicity check, O(m^2), chunked over rows.

    Returns (flag, witness): witness is the first (i, j, k) with
    |x_i - x_j| > |x_i - x_k| + tol for i <= j < k = j + 1.
    """
    pts = curve.points if isinstance(curve, PolylineCurve) else np.asarray(curve, float)
    m = len(pts)
    if m < 3:
        return True, None
    block = max(1, min(2048, int(4e7 // max(m, 1))))
    for i0 in range(0, m - 1, block):
        i1 = min(i0 + block, m - 1)
        rows = pts[i0:i1]
        d = np.linalg.norm(rows[:, None, :] - pts[None, :, :], axis=2)
        dec = d[:, 1:] - d[:, :-1]
        cols = np.arange(m - 1)[None, :]
        idx = np.arange(i0, i1)[:, None]
        bad = (dec < -tol) & (cols >= idx)
        if bad.any():
            r = int(np.nonzero(bad.any(axis=1))[0][0])
            j = int(np.nonzero(bad[r])[0][0])
            return False, (i0 + r, j, j + 1)
    return True, None


def angle_condition_check(curve, tol=0.0):
    """Acute-support check: <p - x_i, q - x_i> must stay above -tol for all
    pairs p, q of points preceding x_i.

    With the default tol of 0 the inequality is strict, so an exactly
    orthogonal prior pair counts as a violation.
    """
    pts = curve.points if isinstance(curve, PolylineCurve) else np.asarray(curve, float)
    m = len(pts)
    for i in range(2, m):
        diffs = pts[:i] - pts[i]
        gram = diffs @ diffs.T
        if float(np.min(gram)) <= -tol if tol > 0 else float(np.min(gram)) <= tol:
            return False
    return True


# ---------------------------------------------------------------------------
# mean width


def mean_width_polytope(points):
    """Mean width of the convex hull of ``points`` (exact, rank-aware).

    n=3 uses the edge identity w = sum(edge length * exterior dihedral)/4pi,
    with the degenerate limits built in: a segment counts as one edge of
    exterior angle 2pi (w = L/2) and a planar hull as its boundary edges at
    exterior angle pi (w = perimeter/4).  n=2 is perimeter/pi.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    n = pts.shape[1]
    if n == 2:
        return _perimeter_2d(pts) / math.pi
    if n != 3:
        raise ValueError("mean width implemented for n in {2, 3}")
    center = pts.mean(axis=0)
    rank, basis = _affine_rank(pts - center)
    if rank == 0:
        return 0.0
    if rank == 1:
        proj = (pts - center) @ basis[0]
        return float(proj.max() - proj.min()) / 2.0
    if rank == 2:
        flat = (pts - center) @ basis[:2].T
        return _perimeter_2d(flat) / 4.0
    hull = ConvexHull(pts)
    total = 0.0
    normals = hull.equations[:, :3]
    for f, simplex in enumerate(hull.simplices):
        for k in range(3):
            g = hull.neighbors[f, k]
            if g < f:
                continue
            edge = np.delete(simplex, k)
            length = float(np.linalg.norm(pts[edge[0]] - pts[edge[1]]))
            cosang = float(np.clip(np.dot(normals[f], normals[g]), -1.0, 1.0))
            total += length * math.acos(cosang)
    return total / (4.0 * math.pi)


def _perimeter_2d(pts):
    rank, basis = _affine_rank(pts - pts.mean(axis=0))
    if rank == 0:
        return 0.0
    if rank == 1:
        proj = (pts - pts.mean(axis=0)) @ basis[0]
        return 2.0 * float(proj.max() - proj.min())
    hull = ConvexHull(pts)
    ring = pts[hull.vertices]
    return float(np.sum(np.linalg.norm(np.roll(ring, -1, axis=0) - ring, axis=1)))


def _affine_rank(centered, tol=1e-10):
    if len(centered) < 2:
        return 0, None
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    scale = sv[0] if sv[0] > 0 else 1.0
    rank = int(np.sum(sv > tol * max(scale, 1.0)))
    return rank, vt


# ---------------------------------------------------------------------------
# hull traces


@dataclass
class TraceRecord:
    index: int
    s: float
    w: float
    sector: Sector | None
    direction: np.ndarray | None
    dwds_formula: float | None
    dwds_fd: float | None


@dataclass
class HullTrace:
    """Per-vertex hull data along a curve prefix-by-prefix."""

    curve: PolylineCurve
    records: list[TraceRecord] = field(default_factory=list)

    def record_at(self, index):
        for r in self.records:
            if r.index == index:
                return r
        raise KeyError(f"no trace record at index {index}")

    @property
    def widths(self):
        return np.array([r.w for r in self.records])


def dwds(trace, i):
    """(formula value, finite-difference value) of dw/ds at trace index i."""
    rec = trace.record_at(i)
    if rec.dwds_formula is None or rec.dwds_fd is None:
        raise ValueError(f"dw/ds not available at index {i} (needs a forward step)")
    return rec.dwds_formula, rec.dwds_fd


def build_hull_trace(curve, indices=None, every=1):
    """Trace hull mean width and endpoint normal cones along the curve.

    ``indices``: explicit vertex indices to evaluate (default: all, thinned
    by ``every``).  The finite-difference rate at index i uses the width at
    the next traced index; the formula rate uses the forward chord at i.
    """
    m = len(curve)
    if indices is None:
        indices = list(range(0, m, every))
        if indices[-1] != m - 1:
            indices.append(m - 1)
    indices = sorted(set(int(i) for i in indices))
    if curve.n == 2:
        return _trace_2d(curve, indices)
    return _trace_3d(curve, indices)


def _trace_2d(curve, indices):
    pts = curve.points
    hull = _IncrementalHull2D(pts[0])
    wanted = set(indices)
    trace = HullTrace(curve=curve)
    pending = {}
    for i in range(1, len(pts)):
        hull.insert(pts[i])
        if i in wanted and i < len(pts) - 1:
            a, b = hull.neighbors_of_last()
            sector = _sector_2d_normal(pts[i], a, b)
            pending[i] = (hull.mean_width(), sector)
        # the finite difference at i-1 needs the width one step later
        if i - 1 in pending:
            w_prev, sector = pending.pop(i - 1)
            w_now = hull.mean_width()
            ds = curve.arclengths[i] - curve.arclengths[i - 1]
            direction = curve.chord_direction(i - 1)
            formula = phi(sector, direction).value
            trace.records.append(
                TraceRecord(
                    index=i - 1,
                    s=float(curve.arclengths[i - 1]),
                    w=w_prev,
                    sector=sector,
                    direction=direction,
                    dwds_formula=formula,
                    dwds_fd=(w_now - w_prev) / ds,
                )
            )
    # trailing records without a forward step
    for j, (w_prev, sector) in sorted(pending.items()):
        trace.records.append(
            TraceRecord(j, float(curve.arclengths[j]), w_prev, sector, None, None, None)
        )
    if (len(pts) - 1) in wanted:
        trace.records.append(
            TraceRecord(
                len(pts) - 1,
                float(curve.arclengths[-1]),
                hull.mean_width(),
                None,
                None,
                None,
                None,
            )
        )
    trace.records.sort(key=lambda r: r.index)
    return trace


def _sector_2d_normal(x, a, b):
    """Normal cone sector at hull vertex x with hull neighbors a, b."""
    normals = []
    for y in (a, b):
        if y is None:
            continue
        d = np.asarray(y, float) - np.asarray(x, float)
        nd = np.linalg.norm(d)
        if nd > 0:
            normals.append(-d / nd)
    if not normals:
        raise ValueError("isolated point has no normal cone")
    return Sector(ConvexCone.from_halfspaces(normals))


class _IncrementalHull2D:
    """Convex hull of a stream of points, each arriving on/outside the hull.

    Suited to self-expanding curves: the new point attaches near the most
    recently inserted vertex, so the visible chain is found by local search.
    Maintains the ccw vertex ring and the exact perimeter.
    """

    def __init__(self, p0):
        self.ring = [np.asarray(p0, dtype=float)]
        self.pos = 0
        self.perimeter = 0.0

    def mean_width(self):
        return self.perimeter / math.pi

    def neighbors_of_last(self):
        k = len(self.ring)
        if k == 1:
            return None, None
        if k == 2:
            other = self.ring[1 - self.pos]
            return other, None
        return self.ring[(self.pos - 1) % k], self.ring[(self.pos + 1) % k]

    def insert(self, p):
        p = np.asarray(p, dtype=float)
        ring = self.ring
        k = len(ring)
        if k == 1:
            ring.append(p)
            self.pos = 1
            self.perimeter = 2.0 * float(np.linalg.norm(p - ring[0]))
            return
        if k == 2:
            a, b = ring
            cr = _cross2(b - a, p - a)
            scale = float(np.linalg.norm(b - a) * np.linalg.norm(p - a))
            if abs(cr) <= 1e-14 * scale:
                # collinear: keep the two extreme points
                pts = [a, b, p]
                t = [float(np.dot(q - a, b - a)) for q in pts]
                lo, hi = pts[int(np.argmin(t))], pts[int(np.argmax(t))]
                self.ring = [lo, hi]
                self.pos = 1 if np.array_equal(hi, p) else 0
                self.perimeter = 2.0 * float(np.linalg.norm(hi - lo))
                return
            if cr > 0:
                self.ring = [a, b, p]
            else:
                self.ring = [b, a, p]
            self.pos = 2
            self.perimeter = float(
                np.linalg.norm(self.ring[1] - self.ring[0])
                + np.linalg.norm(self.ring[2] - self.ring[1])
                + np.linalg.norm(self.ring[0] - self.ring[2])
            )
            return
        visible = self._visible_tester(p)
        start = None
        for cand in (self.pos, (self.pos - 1) % k):
            if visible(cand):
                start = cand
                break
        if start is None:
            for e in range(k):
                if visible(e):
                    start = e
                    break
        if start is None:
            raise ValueError("new point is strictly inside the hull; curve is not self-expanding")
        lo = start
        while lo - 1 > start - k and visible((lo - 1) % k):
            lo -= 1
        hi = start
        while hi + 1 < lo + k and visible((hi + 1) % k):
            hi += 1
        # edges lo..hi (mod k) are visible; vertices strictly between the
        # chain endpoints are replaced by p

        keep_from = (hi + 1) % k
        keep_to = lo % k
        removed_len = 0.0
        for e in range(lo, hi + 1):
            a = ring[e % k]
            b = ring[(e + 1) % k]
            removed_len += float(np.linalg.norm(b - a))
        new_ring = []
        idx = keep_from
        while True:
            new_ring.append(ring[idx])
            if idx == keep_to:
                break
            idx = (idx + 1) % k
        new_ring.append(p)
        a_end = new_ring[-2]
        b_end = new_ring[0]
        self.perimeter += (
            float(np.linalg.norm(p - a_end)) + float(np.linalg.norm(b_end - p)) - removed_len
        )
        self.ring = new_ring
        self.pos = len(new_ring) - 1

    def _visible_tester(self, p):
        ring = self.ring
        k = len(ring)

        def visible(eidx):
            a = ring[eidx % k]
            b = ring[(eidx + 1) % k]
            cr = _cross2(b - a, p - a)
            scale = float(np.linalg.norm(b - a) * np.linalg.norm(p - a))
            return cr <= 1e-14 * scale

        return visible


def _cross2(u, v):
    return float(u[0] * v[1] - u[1] * v[0])


def _trace_3d(curve, indices):
    pts = curve.points
    trace = HullTrace(curve=curve)
    widths = {}
    sectors = {}
    need = sorted(set(indices) | {i + 1 for i in indices if i + 1 < len(pts)})
    for i in need:
        prefix = pts[: i + 1]
        widths[i] = mean_width_polytope(prefix)
        if i in indices and 0 < i < len(pts) - 1:
            sectors[i] = _normal_sector_3d(prefix, pts[i])
    for i in indices:
        if i >= len(pts) - 1 or i not in sectors:
            trace.records.append(
                TraceRecord(i, float(curve.arclengths[i]), widths.get(i, math.nan), None, None, None, None)
            )
            continue
        direction = curve.chord_direction(i)
        formula = phi(sectors[i], direction).value
        ds = curve.arclengths[i + 1] - curve.arclengths[i]
        fd = (widths[i + 1] - widths[i]) / ds
        trace.records.append(
            TraceRecord(i, float(curve.arclengths[i]), widths[i], sectors[i], direction, formula, fd)
        )
    trace.records.sort(key=lambda r: r.index)
    return trace


def _normal_sector_3d(prefix, q, tol=1e-9):
    """Normal-cone sector at the newest point of a 3-d prefix (rank-aware)."""
    center = prefix.mean(axis=0)
    rank, basis = _affine_rank(prefix - center)
    if rank <= 1 and len(prefix) >= 2:
        proj = (prefix - q) @ (basis[0] if rank == 1 else unit_vector(prefix[0] - q))
        # q must be an endpoint of the segment hull
        if np.min(proj) < -1e-9 and np.max(proj) > 1e-9:
            raise ValueError("trace point is interior to the segment hull")
        far = prefix[int(np.argmax(np.abs(proj)))]
        return Sector(ConvexCone.circular(unit_vector(q - far), math.pi / 2))
    if rank == 2:
        ncone = normal_cone_at_vertex(prefix, q, tol=tol)
        return Sector(ncone.cone)
    hull = ConvexHull(prefix)
    vid = _vertex_id(hull, prefix, q)
    neigh = _hull_neighbors(hull, vid)
    ncone = normal_cone_at_vertex(prefix[sorted(neigh | {vid})], q, tol=tol)
    return Sector(ncone.cone)


def _vertex_id(hull, pts, q):
    verts = hull.vertices
    d = np.linalg.norm(pts[verts] - q, axis=1)
    j = int(np.argmin(d))
    if d[j] > 1e-9:
        raise ValueError("trace point is not a hull vertex")
    return int(verts[j])


def _hull_neighbors(hull, vid):
    out = set()
    for simplex in hull.simplices:
        if vid in simplex:
            out.update(int(v) for v in simplex)
    out.discard(vid)
    return out


# ---------------------------------------------------------------------------
# the log spiral and the hat curve


def solve_spiral_omega(tol=1e-12):
    """Root of omega = exp(-3 pi omega / 2) on (0, 1) by bisection."""

    def f(w):
        return w - math.exp(-1.5 * math.pi * w)

    lo, hi = 1e-6, 1.0
    if f(lo) >= 0 or f(hi) <= 0:
        raise RuntimeError("bisection bracket failed")
    while hi - lo > tol * 0.5:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_SPIRAL_FLOOR = 1e-100


def _spiral_point(s, omega):
    r = omega * s / math.sqrt(1.0 + omega * omega)
    eta = -math.log(r) / omega
    return r * math.cos(eta), r * math.sin(eta)


def generate_log_spiral(mu, m, ratio=1.01):
    """Planar logarithmic spiral of arclength mu sampled at m points.

    Samples are geometric in arclength toward 0 (default ratio 1.01), since
    the curve winds infinitely often near the origin; the smallest sample is
    floored at 1e-100 * mu to stay clear of underflow, stretching the ratio
    when m is very large.
    """
    if mu <= 0 or m < 10:
        raise ValueError("need mu > 0 and m >= 10")
    omega = solve_spiral_omega()
    s_min = mu * ratio ** (-(m - 1))
    s_min = max(s_min, _SPIRAL_FLOOR * mu)
    r_eff = (mu / s_min) ** (1.0 / (m - 1))
    svals = s_min * r_eff ** np.arange(m)
    svals[-1] = mu
    pts = np.array([_spiral_point(s, omega) for s in svals])
    return PolylineCurve(pts)


def generate_hat_curve(W, m, ratio=1.01):
    """Segment up the z-axis followed by the planar log spiral.

    The segment runs from (0,0,-W/2) to the origin; the spiral of arclength
    mu = (W/2) sqrt(1+omega^2)/omega then stays inside the ball of radius
    W/2, so the whole curve does.
    """
    if W <= 0:
        raise ValueError("W must be positive")
    omega = solve_spiral_omega()
    mu = 0.5 * W * math.sqrt(1.0 + omega * omega) / omega
    seg_count = max(10, min(1000, m // 100))
    spiral_m = m - seg_count - 1
    if spiral_m < 10:
        raise ValueError("m too small for a hat curve")
    z = np.linspace(-W / 2.0, 0.0, seg_count + 1)[:-1]
    seg = np.column_stack([np.zeros_like(z), np.zeros_like(z), z])
    spiral = generate_log_spiral(mu, spiral_m, ratio)
    flat = np.column_stack([spiral.points, np.zeros(len(spiral))])
    pts = np.vstack([seg, [[0.0, 0.0, 0.0]], flat])
    return PolylineCurve(pts)


def hat_curve_scan(W, m, ks=(2, 3, 4, 5), ratio=1.01):
    """Formula dw/ds on the hat curve at s = W/2 + 10^(-k) for each k.

    Exploits the hull structure: the prefix hull is the cone from the
    segment base over the planar hull of the spiral prefix, so only the
    small vertex set matters.  Returns a list of (k, s, sigma, value).
    """
    curve = generate_hat_curve(W, m, ratio)
    pts = curve.points
    flat_mask = np.abs(pts[:, 2]) < 1e-15
    flat_idx = np.nonzero(flat_mask)[0]
    s_along = curve.arclengths
    joint_s = None
    for i in flat_idx:
        if np.allclose(pts[i], 0.0):
            joint_s = s_along[i]
            break
    if joint_s is None:
        raise RuntimeError("hat curve joint not found")
    apex = np.array([0.0, 0.0, -W / 2.0])
    out = []
    hull2 = _IncrementalHull2D(pts[flat_idx[0], :2])
    targets = {k: joint_s + 10.0 ** (-k) for k in ks}
    remaining = dict(targets)
    for pos in range(1, len(flat_idx)):
        i = flat_idx[pos]
        hull2.insert(pts[i, :2])
        hit = [k for k, sval in remaining.items() if s_along[i] >= sval]
        for k in sorted(hit):
            verts2 = np.array(hull2.ring)
            verts3 = np.column_stack([verts2, np.zeros(len(verts2))])
            vertset = np.vstack([apex[None, :], verts3])
            sector = _normal_sector_3d(vertset, pts[i])
            direction = curve.chord_direction(i)
            value = phi(sector, direction).value
            out.append((k, float(s_along[i]), float(s_along[i] - joint_s), value))
            remaining.pop(k)
        if not remaining:
            break
    return sorted(out)


# ---------------------------------------------------------------------------
# scans and reparameterization


def orthant_exclusion_scan(trace):
    """Minimum formula dw/ds over the trace's interior records."""
    vals = [r.dwds_formula for r in trace.records if r.dwds_formula is not None]
    if not vals:
        raise ValueError("trace carries no growth-rate records")
    return float(min(vals))


def width_ratio_bound(n):
    """Bound on |dx/dw|: pi for n=2, else (n-1) n^(n/2) omega_n / omega_{n-1}."""
    if n == 2:
        return math.pi
    return (n - 1) * n ** (n / 2.0) * sphere_measure(n) / sphere_measure(n - 1)


def reparameterize_by_width(curve, trace=None):
    """Samples (w_i, x_i) along the curve and the max discrete |dx|/|dw|.

    Returns (pairs, max_ratio, bound).  Rejects curves failing the
    distance-monotonicity test.
    """
    ok, witness = is_sdc(curve)
    if not ok:
        raise ValueError(f"not a valid self-expanding curve, witness {witness}")
    if trace is None:
        trace = build_hull_trace(curve)
    recs = [r for r in trace.records if not math.isnan(r.w)]
    pairs = [(r.w, curve.points[r.index]) for r in recs]
    max_ratio = 0.0
    for (w0, x0), (w1, x1) in zip(pairs, pairs[1:]):
        dw = w1 - w0
        dx = float(np.linalg.norm(x1 - x0))
        if dw > 1e-300:
            max_ratio = max(max_ratio, dx / dw)
    return pairs, max_ratio, width_ratio_bound(curve.n)


# ---------------------------------------------------------------------------
# the length-efficiency functional


class HullBody:
    """Convex body given as the hull of a point cloud."""

    def __init__(self, points):
        self.points = np.asarray(points, dtype=float)
        self._hull = None
        center = self.points.mean(axis=0)
        self._rank, self._basis = _affine_rank(self.points - center)
        self._center = center

    def mean_width(self):
        return mean_width_polytope(self.points)

    def contains(self, queries, tol=1e-9):
        q = np.atleast_2d(np.asarray(queries, dtype=float))
        if self._rank < self.points.shape[1]:
            # degenerate body: check the affine span first, then the section
            off = q - self._center
            normal_part = off - (off @ self._basis[: self._rank].T) @ self._basis[: self._rank]
            if np.max(np.linalg.norm(normal_part, axis=1)) > tol:
                return False
            if self._rank == 0:
                return True
            flat_q = off @ self._basis[: self._rank].T
            flat_p = (self.points - self._center) @ self._basis[: self._rank].T
            if self._rank == 1:
                return bool(
                    np.all(flat_q[:, 0] >= flat_p[:, 0].min() - tol)
                    and np.all(flat_q[:, 0] <= flat_p[:, 0].max() + tol)
                )
            return _hull_contains(flat_p, flat_q, tol)
        return _hull_contains(self.points, q, tol)


def _hull_contains(points, queries, tol):
    hull = ConvexHull(points)
    A = hull.equations[:, :-1]
    b = hull.equations[:, -1]
    vals = queries @ A.T + b
    return bool(np.max(vals) <= tol * (1.0 + np.max(np.abs(b))))


class Ball:
    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def mean_width(self):
        return 2.0 * self.radius

    def contains(self, queries, tol=1e-9):
        q = np.atleast_2d(np.asarray(queries, dtype=float))
        return bool(np.max(np.linalg.norm(q - self.center, axis=1)) <= self.radius + tol)


@dataclass(frozen=True)
class CurveClass:
    """Admissible constraint family for the length search.

    kind "mean-width-cap": any containing body of mean width at most W.
    kind "disk": n=2 curves inside the ball of radius W/2 at the origin,
    starting at the center.
    """

    kind: str
    W: float

    def __post_init__(self):
        if self.kind not in ("mean-width-cap", "disk"):
            raise ValueError(f"unknown curve class {self.kind!r}")
        if self.W <= 0:
            raise ValueError("W must be positive")

    def body_for(self, curve):
        if self.kind == "disk":
            return Ball(np.zeros(2), self.W / 2.0)
        return HullBody(curve.points)

    def admits(self, curve, tol=1e-9):
        if self.kind == "disk":
            if curve.n != 2:
                return False
            if np.linalg.norm(curve.points[0]) > tol:
                return False
            return Ball(np.zeros(2), self.W / 2.0).contains(curve.points, tol)
        return mean_width_polytope(curve.points) <= self.W + tol


def psi(curve, alpha, body):
    """Length-efficiency value ||gamma|| / w(body)^alpha.

    The curve must be contained in the body (within 1e-9).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not body.contains(curve.points, tol=1e-9):
        raise ValueError("curve is not contained in the body")
    w = body.mean_width()
    if alpha == 0.0:
        return curve.length
    return curve.length / w**alpha


# ---------------------------------------------------------------------------
# stochastic search for long curves


def polyline_descent_defect(points, normalized=True):
    """Worst violation of <x_{i+1} - x_i, x_i - x_j> >= 0 over j <= i.

    This is the polyline form of the defining differential inequality; it
    extends to segment-interior points by linearity, so a polyline passing
    it is a steepest-descent curve as a continuous curve, not merely at its
    vertices.  Returns (defect, (i, j)); defect 0 means valid.  With
    ``normalized`` the inner products are scaled by the step length.
    """
    pts = np.asarray(points, dtype=float)
    m = len(pts)
    if m < 3:
        return 0.0, None
    steps = pts[1:] - pts[:-1]
    if normalized:
        lens = np.linalg.norm(steps, axis=1)
        steps = steps / np.maximum(lens, 1e-300)[:, None]
    own = np.einsum("ik,ik->i", steps, pts[:-1])
    worst, where = 0.0, None
    block = max(1, int(4e6 // max(m, 1)))
    for i0 in range(0, m - 1, block):
        i1 = min(i0 + block, m - 1)
        # W[i, j] = <step_i, x_i> - <step_i, x_j>, constrained for j <= i
        W = own[i0:i1, None] - steps[i0:i1] @ pts.T
        cols = np.arange(m)[None, :]
        idx = np.arange(i0, i1)[:, None]
        W = np.where(cols <= idx, W, np.inf)
        k = int(np.argmin(W))
        r, c = divmod(k, m)
        val = float(W[r, c])
        if val < -worst:
            worst, where = -val, (i0 + r, c)
    return worst, where


def _sdc_repair(points, tol=SDC_TOL):
    """Delete forward-step violators until the polyline descent condition holds.

    Per-row constraint minima are cached; a deletion only invalidates the
    merged row and rows whose cached minimizer was the removed point, so
    each repair round costs O(m) instead of O(m^2).
    """
    pts = np.asarray(points, dtype=float)
    m = len(pts)
    if m < 3:
        return pts.copy()
    alive = list(range(m))

    def row_stats(p):
        i, k = alive[p], alive[p + 1]
        d = pts[k] - pts[i]
        nd = float(np.linalg.norm(d))
        if nd < 1e-300:
            return 0.0, 0
        d = d / nd
        cols = pts[alive[: p + 1]]
        vals = (pts[i] - cols) @ d
        a = int(np.argmin(vals))
        return float(vals[a]), a

    steps = pts[1:] - pts[:-1]
    lens = np.maximum(np.linalg.norm(steps, axis=1), 1e-300)
    dirs = steps / lens[:, None]
    own = np.einsum("ik,ik->i", dirs, pts[:-1])
    minvals = np.empty(m - 1)
    argcols = np.empty(m - 1, dtype=int)
    block = max(1, int(4e6 // max(m, 1)))
    for i0 in range(0, m - 1, block):
        i1 = min(i0 + block, m - 1)
        W = own[i0:i1, None] - dirs[i0:i1] @ pts.T
        cols = np.arange(m)[None, :]
        idx = np.arange(i0, i1)[:, None]
        W = np.where(cols <= idx, W, np.inf)
        minvals[i0:i1] = W.min(axis=1)
        argcols[i0:i1] = W.argmin(axis=1)
    while len(alive) >= 3:
        bad = np.nonzero(minvals < -tol)[0]
        if bad.size == 0:
            break
        p = int(bad[0])
        alive.pop(p)
        minvals = np.delete(minvals, p)
        argcols = np.delete(argcols, p)
        if p - 1 >= 0 and p - 1 < len(minvals):
            minvals[p - 1], argcols[p - 1] = row_stats(p - 1)
        for q in range(p, len(minvals)):
            if argcols[q] == p:
                minvals[q], argcols[q] = row_stats(q)
            elif argcols[q] > p:
                argcols[q] -= 1
    kept = pts[alive]
    steps = np.linalg.norm(np.diff(kept, axis=0), axis=1)
    keep_mask = np.concatenate([[True], steps > 1e-12])
    return kept[keep_mask]


def _project_to_class(points, curve_class):
    pts = np.array(points, dtype=float)
    if curve_class.kind == "disk":
        pts[0] = 0.0
        r = curve_class.W / 2.0
        norms = np.linalg.norm(pts, axis=1)
        over = norms > r
        if np.any(over):
            pts[over] *= (r / norms[over])[:, None]
    else:
        w = mean_width_polytope(pts)
        if w > curve_class.W:
            pts = pts * (curve_class.W / w)
    return pts


def _candidate_value(pts, curve_class, alpha, tol=SDC_TOL):
    pts = _project_to_class(pts, curve_class)
    pts = _sdc_repair(pts, tol)
    if len(pts) < 3:
        return None, None
    try:
        curve = PolylineCurve(pts)
    except ValueError:
        return None, None
    if not curve_class.admits(curve, tol=1e-9):
        return None, None
    body = curve_class.body_for(curve)
    try:
        return psi(curve, alpha, body), curve
    except ValueError:
        return None, None


def _allowed_direction_interval(prior, x, theta_ref):
    """Angular interval of step directions d with <d, x - y> >= 0 for all prior y."""
    u = x - np.asarray(prior)
    nrm = np.linalg.norm(u, axis=1)
    u = u[nrm > 1e-14]
    if len(u) == 0:
        return theta_ref - math.pi, theta_ref + math.pi
    ang = np.arctan2(u[:, 1], u[:, 0])
    ang = ang + np.round((theta_ref - ang) / (2.0 * math.pi)) * 2.0 * math.pi
    lo = float(ang.max()) - math.pi / 2
    hi = float(ang.min()) + math.pi / 2
    if hi < lo + 1e-12:
        return None
    return lo, hi


def _greedy_extend(prefix, h, m_cap, cap_radius=None, rng=None, wobble=0.0, eps=1e-9):
    """Grow a descent-class polyline from ``prefix`` by maximal-turning steps.

    Each step takes the most counterclockwise direction still satisfying
    <d, x - y> >= 0 against all earlier points (backed off the cone boundary
    by eps), so the extension keeps the descent defect at zero.  ``wobble``
    randomizes the back-off into the allowed cone; ``cap_radius`` keeps the
    curve inside the origin-centered ball, shortening steps at the rim.
    """
    pts = [np.asarray(p, dtype=float) for p in prefix]
    if len(pts) < 2:
        raise ValueError("need at least two prefix points")
    theta = math.atan2(*(pts[-1] - pts[-2])[::-1])
    while len(pts) < m_cap:
        x = pts[-1]
        iv = _allowed_direction_interval(pts[:-1], x, theta)
        if iv is None:
            break
        lo, hi = iv
        back = eps
        if rng is not None and wobble > 0.0:
            back = eps + abs(rng.normal()) * wobble * (hi - lo)
        theta_try = max(hi - back, lo + eps)
        step = h if cap_radius is not None else h * max(float(np.linalg.norm(x)), h)
        cand = x + step * np.array([math.cos(theta_try), math.sin(theta_try)])
        if cap_radius is not None and np.linalg.norm(cand) > cap_radius:
            placed = False
            for theta_try in np.linspace(hi - back, lo + eps, 50):
                cand = x + step * np.array([math.cos(theta_try), math.sin(theta_try)])
                if np.linalg.norm(cand) <= cap_radius:
                    placed = True
                    break
            if not placed:
                break
        pts.append(cand)
        theta = theta_try
    return np.array(pts)


def _greedy_wrap_curve(h, m_cap, r0=None, cap_radius=None, eps=1e-9):
    """Maximal-turning curve from scratch, optionally after a straight run."""
    pts = [np.zeros(2)]
    if r0 is not None:
        k = max(2, int(round(r0 / h)))
        for t in np.linspace(0.0, r0, k + 1)[1:]:
            pts.append(np.array([t, 0.0]))
    else:
        pts.extend([np.array([h, 0.0]), np.array([2 * h, 0.0])])
    return _greedy_extend(pts, h, m_cap, cap_radius=cap_radius, eps=eps)


def _disk_seed_curves(curve_class):
    """Greedy max-wrap seeds in the disk: straight run, then tight wrapping."""
    r = curve_class.W / 2.0
    seeds = []
    h = 0.01 * r
    for r0frac in (0.85, 0.9, 0.95):
        seeds.append(
            _greedy_wrap_curve(h, m_cap=1200, r0=r0frac * r, cap_radius=r)
        )
    seeds.append(_greedy_wrap_curve(2 * h, m_cap=600, r0=0.9 * r, cap_radius=r))
    return seeds


def _spiral_seed_curve(curve_class, h=0.01, m_cap=8000):
    """Greedy polygonal spiral; the discrete extremal for the width-capped class."""
    pts = _greedy_wrap_curve(h, m_cap=m_cap)
    w = mean_width_polytope(pts)
    if w > curve_class.W:
        pts = pts * (curve_class.W / w)
    return pts


@dataclass
class PsiSearchResult:
    curve: PolylineCurve
    value: float
    evaluations: int
    trajectory: list


def search_max_psi(curve_class, alpha, seed=0, budget=20000, n=2):
    """Perturb-and-repair local search for long admissible curves.

    Moves jitter a window of control points, stretch the tail, or insert a
    point; every candidate is projected into the constraint set, repaired to
    distance monotonicity by deleting violators, and scored.  Deterministic
    for a fixed seed.
    """
    if n != 2:
        raise ValueError("the search currently covers planar curves")
    rng = np.random.default_rng(seed)
    scale = curve_class.W / 2.0
    candidates = []
    if curve_class.kind == "disk":
        candidates.extend(_disk_seed_curves(curve_class))
    else:
        candidates.append(_spiral_seed_curve(curve_class))
        candidates.append(_spiral_seed_curve(curve_class, h=0.02, m_cap=3000))
    evals = 0
    best_val, best_curve = -math.inf, None
    for cand in candidates:
        val, curve = _candidate_value(cand, curve_class, alpha)
        evals += 1
        if val is not None and val > best_val:
            best_val, best_curve = val, curve
    if best_curve is None:
        raise RuntimeError("no feasible seed curve")
    trajectory = [(0, best_val)]
    pts = best_curve.points.copy()
    if len(pts) > 1500:
        # perturbations work on a thinned, re-repaired copy; the fine seed
        # stays the incumbent unless a perturbed candidate beats it
        thin = _sdc_repair(pts[:: max(1, len(pts) // 1200)])
        val, curve = _candidate_value(thin, curve_class, alpha)
        evals += 1
        pts = curve.points.copy() if curve is not None else pts[::4].copy()
    cap_radius = scale if curve_class.kind == "disk" else None
    h_base = 0.01 * scale
    temperature = 0.01 * scale
    m_cap = 1500
    since_improvement = 0
    while evals < budget:
        move = int(rng.integers(0, 4))
        m = len(pts)
        if move <= 1:
            # cut at a random vertex and regrow the tail greedily
            cut = int(rng.integers(max(2, m // 4), m))
            h = h_base * rng.uniform(0.6, 1.8)
            wobble = rng.uniform(0.0, 0.15) if move == 1 else 0.0
            trial = _greedy_extend(
                pts[:cut], h, m_cap, cap_radius=cap_radius, rng=rng, wobble=wobble
            )
        elif move == 2:
            # restart with a different straight run length
            if curve_class.kind == "disk":
                r0 = scale * rng.uniform(0.7, 0.99)
                trial = _greedy_wrap_curve(
                    h_base * rng.uniform(0.8, 1.5), m_cap, r0=r0, cap_radius=cap_radius
                )
            else:
                trial = _greedy_wrap_curve(h_base * rng.uniform(0.8, 2.0), m_cap)
        else:
            # tiny jitter on a short window, then repair
            trial = pts.copy()
            w0 = int(rng.integers(1, m))
            w1 = min(m, w0 + int(rng.integers(1, 4)))
            trial[w0:w1] += rng.normal(scale=temperature, size=(w1 - w0, 2))
        val, curve = _candidate_value(trial, curve_class, alpha)
        evals += 1
        if val is not None and val > best_val + 1e-12:
            best_val, best_curve = val, curve
            pts = curve.points.copy()
            trajectory.append((evals, best_val))
            since_improvement = 0
        else:
            since_improvement += 1
            if since_improvement > 1000:
                temperature = max(temperature * 0.5, 1e-5 * scale)
                since_improvement = 0
    return PsiSearchResult(best_curve, best_val, evals, trajectory)


# ---------------------------------------------------------------------------
# random curve generation


def random_sdc_curve(rng, m=200, n=3, scale=1.0, margin=1e-9):
    """Rejection-grown polyline in the steepest-descent class.

    Each accepted step direction d satisfies <d, x_last - x_j> >= 0 for all
    prior vertices x_j (the polyline form of the defining inequality), which
    implies distance monotonicity and keeps the forward chord inside the
    dual of the endpoint normal cone.
    """
    if n == 3:
        seed = scale * np.array(
            [[0, 0, 0], [1, 0, 0], [1, 0.9, 0], [1, 0.9, 0.8]], dtype=float
        )
    else:
        seed = scale * np.array([[0, 0], [1, 0], [1, 0.9]], dtype=float)
    pts = [p.copy() for p in seed]
    direction = unit_vector(pts[-1] - pts[-2])
    step = 0.35 * scale
    while len(pts) < m:
        placed = False
        arr = np.array(pts)
        rel = arr[-1] - arr[:-1]
        for attempt in range(400):
            wobble = 0.7 if attempt < 200 else 0.25
            d = unit_vector(direction + wobble * rng.normal(size=n))
            if float(np.min(rel @ d)) < margin * scale:
                continue
            cand = pts[-1] + step * rng.uniform(0.6, 1.4) * d
            pts.append(cand)
            direction = d
            placed = True
            break
        if not placed:
            step *= 1.2
            direction = unit_vector(pts[-1] - np.mean(pts, axis=0) + 1e-9 * rng.normal(size=n))
    return PolylineCurve(np.array(pts))
