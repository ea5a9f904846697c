"""2D geometry kernel.

Line traits, simple polygons, oriented minimum bounding boxes, and
least-squares transform estimation. Conventions used throughout the
package:

* points are ``(x, y)`` float pairs; polygons are ``(N, 2)`` arrays of
  vertices in counter-clockwise order (positive shoelace), implicitly
  closed;
* a line trait is stored in normal form: unit-normal angle ``theta`` in
  ``[0, pi)`` and signed offset ``rho``, so a point ``p`` lies on the
  line iff ``p . (cos theta, sin theta) == rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from shapely.geometry import Polygon as _ShapelyPolygon


@dataclass(frozen=True)
class Trait:
    """An unbounded geometric primitive; only straight lines for now."""

    theta: float
    rho: float
    kind: str = "line"

    def normal(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta)])

    def direction(self) -> np.ndarray:
        return np.array([-math.sin(self.theta), math.cos(self.theta)])

    def signed_distance(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts @ self.normal() - self.rho


def line_trait(theta: float, rho: float) -> Trait:
    """Build a line trait with canonical parameters (theta in [0, pi))."""
    theta = float(theta)
    rho = float(rho)
    if not (math.isfinite(theta) and math.isfinite(rho)):
        raise ValueError("trait parameters must be finite")
    k = math.floor(theta / math.pi)
    theta -= k * math.pi
    if k % 2:
        rho = -rho
    if theta >= math.pi:  # guard against floating point fold-over
        theta -= math.pi
        rho = -rho
    return Trait(theta=theta, rho=rho)


def line_through(p, q) -> Trait:
    """Line trait through two distinct points."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = q - p
    n = math.hypot(d[0], d[1])
    if n == 0.0:
        raise ValueError("coincident points define no line")
    nx, ny = -d[1] / n, d[0] / n
    return line_trait(math.atan2(ny, nx), p[0] * nx + p[1] * ny)


def trait_intersection(a: Trait, b: Trait, eps_ang: float = 1e-9):
    """Intersection point of two line traits, or None when parallel.

    Parallelism is decided on the angle between the normals; eps_ang
    keeps near-parallel pairs from producing intersections far outside
    any reasonable map frame.
    """
    det = math.sin(b.theta - a.theta)
    if abs(det) < eps_ang:
        return None
    ca, sa = math.cos(a.theta), math.sin(a.theta)
    cb, sb = math.cos(b.theta), math.sin(b.theta)
    x = (a.rho * sb - b.rho * sa) / det
    y = (ca * b.rho - cb * a.rho) / det
    return np.array([x, y])


def clip_to_frame(t: Trait, frame, eps: float = 1e-9):
    """Segment of a line trait inside an axis-aligned rectangle.

    Returns (p0, p1) ordered along the line direction, or None when the
    line misses the rectangle.
    """
    x0, y0, x1, y1 = frame
    d = t.direction()
    n = t.normal()
    base = t.rho * n
    lo, hi = -math.inf, math.inf
    for axis, (a_min, a_max) in enumerate(((x0, x1), (y0, y1))):
        if abs(d[axis]) < eps:
            if not a_min - eps <= base[axis] <= a_max + eps:
                return None
            continue
        ta = (a_min - base[axis]) / d[axis]
        tb = (a_max - base[axis]) / d[axis]
        lo = max(lo, min(ta, tb))
        hi = min(hi, max(ta, tb))
    if hi <= lo:
        return None
    return base + lo * d, base + hi * d


# ---------------------------------------------------------------------------
# polygons


def signed_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_area(vertices) -> float:
    """Shoelace area, orientation independent."""
    return abs(signed_area(vertices))


def polygon_perimeter(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    return float(np.sum(np.hypot(*(np.roll(v, -1, axis=0) - v).T)))


def ensure_ccw(vertices) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    if signed_area(v) < 0:
        return v[::-1].copy()
    return v


def validate_polygon(vertices) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise ValueError("polygon needs at least 3 (x, y) vertices")
    if not np.all(np.isfinite(v)):
        raise ValueError("polygon vertices must be finite")
    if signed_area(v) <= 0:
        raise ValueError("polygon must be counter-clockwise with positive area")
    return v


def _as_shapely(vertices) -> _ShapelyPolygon:
    poly = _ShapelyPolygon(np.asarray(vertices, dtype=float))
    if not poly.is_valid:
        poly = poly.buffer(0)
    return poly


def polygon_intersection_area(a, b) -> float:
    """Area of the set intersection of two simple polygons."""
    pa, pb = _as_shapely(a), _as_shapely(b)
    if pa.is_empty or pb.is_empty:
        return 0.0
    return float(pa.intersection(pb).area)


def polygon_union_area(a, b) -> float:
    """Area of the set union, by inclusion-exclusion."""
    return polygon_area(a) + polygon_area(b) - polygon_intersection_area(a, b)


def convex_hull(points) -> np.ndarray:
    """Convex hull (monotone chain), counter-clockwise, no repeated point."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) < 3:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def ombb(points) -> np.ndarray:
    """Oriented minimum bounding box of a point set.

    Rotating calipers over the convex hull: the minimum-area enclosing
    rectangle is aligned with some hull edge. Returns 4 CCW corners
    starting from the lexicographically smallest one, so corner order is
    reproducible across runs.
    """
    hull = convex_hull(points)
    if len(hull) < 3:
        raise ValueError("ombb requires at least 3 non-collinear points")

    best = None
    edges = np.roll(hull, -1, axis=0) - hull
    for e in edges:
        norm = math.hypot(e[0], e[1])
        if norm == 0.0:
            continue
        u = e / norm
        n = np.array([-u[1], u[0]])
        xi = hull @ u
        eta = hull @ n
        w = xi.max() - xi.min()
        h = eta.max() - eta.min()
        area = w * h
        if best is None or area < best[0]:
            best = (area, u, n, xi.min(), xi.max(), eta.min(), eta.max())

    if best is None or best[0] <= 0.0:
        raise ValueError("ombb requires at least 3 non-collinear points")
    _, u, n, xi0, xi1, eta0, eta1 = best
    corners = np.array(
        [
            xi0 * u + eta0 * n,
            xi1 * u + eta0 * n,
            xi1 * u + eta1 * n,
            xi0 * u + eta1 * n,
        ]
    )
    # (u, n) is a right-handed frame, so the order above is already CCW;
    # rotate so the lexicographically smallest corner comes first.
    start = np.lexsort((corners[:, 1], corners[:, 0]))[0]
    return np.roll(corners, -start, axis=0)


# ---------------------------------------------------------------------------
# transforms


@dataclass(frozen=True)
class Transform2:
    """Planar affine transform as a 3x3 homogeneous matrix (row-major)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("transform matrix must be 3x3")
        if not np.allclose(m[2], (0.0, 0.0, 1.0), atol=1e-12):
            raise ValueError("last row must be (0, 0, 1)")
        if abs(np.linalg.det(m[:2, :2])) < 1e-15:
            raise ValueError("linear block must be invertible")
        object.__setattr__(self, "matrix", m)

    @property
    def linear(self) -> np.ndarray:
        return self.matrix[:2, :2]

    @property
    def translation(self) -> np.ndarray:
        return self.matrix[:2, 2]

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        out = pts @ self.linear.T + self.translation
        return out[0] if single else out

    def inverse(self) -> "Transform2":
        return Transform2(np.linalg.inv(self.matrix))

    def compose(self, other: "Transform2") -> "Transform2":
        """self after other: (self @ other)(p) == self(other(p))."""
        return Transform2(self.matrix @ other.matrix)

    def __matmul__(self, other: "Transform2") -> "Transform2":
        return self.compose(other)

    @staticmethod
    def identity() -> "Transform2":
        return Transform2(np.eye(3))

    @staticmethod
    def similarity(scale: float, angle: float, tx: float = 0.0, ty: float = 0.0) -> "Transform2":
        c, s = math.cos(angle), math.sin(angle)
        m = np.array(
            [
                [scale * c, -scale * s, tx],
                [scale * s, scale * c, ty],
                [0.0, 0.0, 1.0],
            ]
        )
        return Transform2(m)

    def to_flat(self) -> list[float]:
        return [float(v) for v in self.matrix.ravel()]


@dataclass(frozen=True)
class ScaleDecomposition:
    """Singular values of a transform's linear block, s_x >= s_y."""

    s_x: float
    s_y: float
    reflection: bool

    @property
    def ratio(self) -> float:
        return self.s_x / self.s_y


def decompose_scales(t: Transform2) -> ScaleDecomposition:
    s = np.linalg.svd(t.linear, compute_uv=False)
    return ScaleDecomposition(
        s_x=float(s[0]),
        s_y=float(s[1]),
        reflection=bool(np.linalg.det(t.linear) < 0),
    )


def similarity_params(t: Transform2) -> tuple[float, float, np.ndarray]:
    """(scale, rotation angle, translation) of a near-similarity transform.

    Scale is the geometric mean of the singular values; the angle comes
    from the closest rotation to the linear block, so the result is
    meaningful for mildly anisotropic transforms as well.
    """
    lin = t.linear
    scale = math.sqrt(abs(np.linalg.det(lin)))
    angle = math.atan2(lin[1, 0] - lin[0, 1], lin[0, 0] + lin[1, 1])
    return scale, angle, t.translation.copy()


def estimate_similarity(src, dst) -> Transform2:
    """Least-squares similarity transform mapping src onto dst.

    Closed-form SVD solution over the point covariance, with the
    determinant-sign correction so the rotation never mirrors.
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise ValueError("src and dst must be matching (N, 2) arrays")
    if len(src) < 2:
        raise ValueError("need at least 2 correspondences")

    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    ds = src - mu_s
    dd = dst - mu_d
    var_s = float((ds**2).sum()) / len(src)
    if var_s < 1e-18:
        raise ValueError("degenerate source points (all coincident)")

    cov = dd.T @ ds / len(src)
    u, d, vt = np.linalg.svd(cov)
    sign = np.eye(2)
    if np.linalg.det(u) * np.linalg.det(vt) < 0:
        sign[1, 1] = -1.0
    rot = u @ sign @ vt
    scale = float((d * sign.diagonal()).sum()) / var_s
    if scale <= 0:
        raise ValueError("degenerate correspondence geometry")
    trans = mu_d - scale * rot @ mu_s

    m = np.eye(3)
    m[:2, :2] = scale * rot
    m[:2, 2] = trans
    return Transform2(m)


def estimate_affine(src, dst) -> Transform2:
    """Least-squares affine transform (6 DOF) mapping src onto dst."""
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise ValueError("src and dst must be matching (N, 2) arrays")
    if len(src) < 3:
        raise ValueError("need at least 3 correspondences")

    a = np.hstack([src, np.ones((len(src), 1))])
    if np.linalg.matrix_rank(a, tol=1e-9) < 3:
        raise ValueError("source points are collinear")
    coef, _, _, _ = np.linalg.lstsq(a, dst, rcond=None)

    m = np.eye(3)
    m[:2, :2] = coef[:2].T
    m[:2, 2] = coef[2]
    return Transform2(m)
