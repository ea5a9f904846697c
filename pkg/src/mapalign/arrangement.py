"""Planar arrangement of line traits, and pruning to a region segmentation.

The arrangement is built inside a bounding frame (the map rectangle):
every trait is clipped to the frame and the four frame border lines take
part as ordinary hosts, so all faces are bounded. Faces are traced from
half-edges by always continuing with the next edge clockwise from the
reversed incoming direction, which yields counter-clockwise loops for
bounded cells and one clockwise loop for the exterior.

Pruning classifies every interior edge by the mean of the normalized
distance map over a pixel band around it: a low mean says the edge runs
along a wall (or across a narrow gateway) and is kept; anything else is
an artifact of unbounded trait lines and is removed, merging the cells
on both sides.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoFacesError
from .geometry import Trait, line_trait, signed_area, trait_intersection
from .raster import DistanceMap

logger = logging.getLogger(__name__)

EPS_POS = 0.5  # vertex merge tolerance: sub-pixel points are one vertex
MIN_FACE_AREA = 4.0  # px^2; smaller post-prune faces are numerical slivers
N_FRAME_HOSTS = 4


@dataclass(frozen=True)
class Edge:
    """Maximal trait sub-segment between consecutive arrangement vertices."""

    host: int
    v0: int
    v1: int


@dataclass
class PrimeGraph:
    vertices: np.ndarray  # (V, 2)
    edges: list[Edge]
    # per vertex: outgoing half-edges (edge index, orientation) ordered by
    # direction angle; orientation 0 leaves v0, orientation 1 leaves v1
    incidence: list[list[tuple[int, int]]]


@dataclass
class Face:
    boundary: list[int]  # vertex indices, CCW, implicitly closed
    edge_loop: list[int]
    polygon: np.ndarray
    area: float
    centroid: np.ndarray
    # hole boundaries (merged regions can enclose surviving wall loops);
    # area above already excludes them
    holes: list[np.ndarray] = field(default_factory=list)


@dataclass
class Arrangement:
    traits: list[Trait]
    frame: tuple[float, float, float, float]
    prime: PrimeGraph
    faces: list[Face]
    neighborhood: set[tuple[int, int]]
    hosts: list[Trait] = field(repr=False, default_factory=list)
    # per edge: face index left of the forward / backward half-edge, -1 = exterior
    edge_faces: list[tuple[int, int]] = field(repr=False, default_factory=list)

    @property
    def face_count(self) -> int:
        return len(self.faces)


def face_polygon(arr: Arrangement, face_index: int) -> np.ndarray:
    return arr.faces[face_index].polygon


def face_centroid(arr: Arrangement, face_index: int) -> np.ndarray:
    """Vertex-mean center of the face boundary (not the area centroid)."""
    return arr.faces[face_index].centroid


# ---------------------------------------------------------------------------
# construction


def _same_line(a: Trait, b: Trait, eps_pos: float) -> bool:
    d = abs(a.theta - b.theta)
    if d < 1e-7:
        return abs(a.rho - b.rho) < eps_pos
    if math.pi - d < 1e-7:
        return abs(a.rho + b.rho) < eps_pos
    return False


def _merge_points(points: np.ndarray, eps: float) -> np.ndarray:
    """Single-linkage clustering of near-coincident points.

    Returns cluster means sorted lexicographically, so vertex ids are
    reproducible for a given input set.
    """
    order = np.lexsort((points[:, 1], points[:, 0]))
    pts = points[order]
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        j = i + 1
        while j < n and pts[j, 0] - pts[i, 0] <= eps:
            if abs(pts[j, 1] - pts[i, 1]) <= eps:
                if math.hypot(pts[j, 0] - pts[i, 0], pts[j, 1] - pts[i, 1]) <= eps:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[max(ri, rj)] = min(ri, rj)
            j += 1

    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)
    means = np.array([pts[idx].mean(axis=0) for idx in clusters.values()])
    return means[np.lexsort((means[:, 1], means[:, 0]))]


def _sort_incidence(vertices: np.ndarray, edges: list[Edge]):
    out: list[list[tuple[int, int]]] = [[] for _ in range(len(vertices))]
    for ei, e in enumerate(edges):
        out[e.v0].append((ei, 0))
        out[e.v1].append((ei, 1))

    def direction(v: int, he: tuple[int, int]) -> float:
        ei, o = he
        e = edges[ei]
        other = e.v1 if o == 0 else e.v0
        d = vertices[other] - vertices[v]
        return math.atan2(d[1], d[0])

    for v, lst in enumerate(out):
        lst.sort(key=lambda he: direction(v, he))
    return out


def _trace_loops(vertices: np.ndarray, edges: list[Edge]):
    """Walk all half-edges into closed loops.

    Returns (loops, half_loop, incidence) where each loop is a dict with
    the half-edge sequence, boundary vertex ids and signed area, and
    half_loop maps (edge, orientation) to its loop index.
    """
    incidence = _sort_incidence(vertices, edges)
    slot = {}
    for v, lst in enumerate(incidence):
        for i, he in enumerate(lst):
            slot[he] = (v, i)

    def head(he):
        ei, o = he
        return edges[ei].v1 if o == 0 else edges[ei].v0

    half_loop: dict[tuple[int, int], int] = {}
    loops = []
    for ei in range(len(edges)):
        for o in (0, 1):
            start = (ei, o)
            if start in half_loop:
                continue
            seq = []
            he = start
            while he not in half_loop:
                half_loop[he] = len(loops)
                seq.append(he)
                v = head(he)
                rev = (he[0], 1 - he[1])
                _, i = slot[rev]
                ring = incidence[v]
                he = ring[(i - 1) % len(ring)]
            verts = [edges[h[0]].v0 if h[1] == 0 else edges[h[0]].v1 for h in seq]
            loops.append(
                {
                    "halfedges": seq,
                    "vertices": verts,
                    "area": signed_area(vertices[verts]) if len(verts) >= 3 else 0.0,
                }
            )
    return loops, half_loop, incidence


def _loop_centroid(vertices: np.ndarray, loop_vertices: list[int]) -> np.ndarray:
    seen: list[int] = []
    for v in loop_vertices:
        if v not in seen:
            seen.append(v)
    return vertices[seen].mean(axis=0)


def frame_lines(frame) -> list[Trait]:
    x0, y0, x1, y1 = frame
    return [
        line_trait(0.0, x0),
        line_trait(0.0, x1),
        line_trait(math.pi / 2, y0),
        line_trait(math.pi / 2, y1),
    ]


def build_arrangement(
    traits,
    frame,
    eps_pos: float = EPS_POS,
    eps_ang: float = 1e-9,
) -> Arrangement:
    """Planar subdivision of the frame rectangle by line traits.

    Vertices are all pairwise trait intersections inside the frame plus
    trait/frame crossings; edges are the maximal sub-segments between
    consecutive vertices along each host line; faces are the bounded
    cells. Duplicate traits (and traits coinciding with a frame border)
    are dropped.
    """
    x0, y0, x1, y1 = (float(v) for v in frame)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate frame")
    traits = list(traits)
    if not traits:
        raise ValueError("need at least 1 trait")
    for t in traits:
        if t.kind != "line":
            raise ValueError(f"unsupported trait kind {t.kind!r}")

    hosts = frame_lines((x0, y0, x1, y1))
    kept_traits: list[Trait] = []
    for t in traits:
        t = line_trait(t.theta, t.rho)
        if any(_same_line(t, h, eps_pos) for h in hosts):
            logger.debug("dropping duplicate trait %s", t)
            continue
        hosts.append(t)
        kept_traits.append(t)

    raw_points = []
    for i in range(len(hosts)):
        for j in range(i + 1, len(hosts)):
            p = trait_intersection(hosts[i], hosts[j], eps_ang)
            if p is None:
                continue
            if x0 - eps_pos <= p[0] <= x1 + eps_pos and y0 - eps_pos <= p[1] <= y1 + eps_pos:
                raw_points.append(p)
    vertices = _merge_points(np.array(raw_points), eps_pos)

    edges: list[Edge] = []
    seen_pairs: set[tuple[int, int]] = set()
    for hi, host in enumerate(hosts):
        on_host = np.nonzero(np.abs(host.signed_distance(vertices)) <= eps_pos)[0]
        if len(on_host) < 2:
            continue
        t_vals = vertices[on_host] @ host.direction()
        on_host = on_host[np.argsort(t_vals)]
        for a, b in zip(on_host[:-1], on_host[1:]):
            key = (min(int(a), int(b)), max(int(a), int(b)))
            if key in seen_pairs:
                continue
            seen_pairs.add(key)
            edges.append(Edge(host=hi, v0=int(a), v1=int(b)))

    loops, half_loop, incidence = _trace_loops(vertices, edges)

    faces: list[Face] = []
    loop_face = {}
    for li, loop in enumerate(loops):
        if loop["area"] > 1e-9:
            loop_face[li] = len(faces)
            verts = loop["vertices"]
            faces.append(
                Face(
                    boundary=list(verts),
                    edge_loop=[h[0] for h in loop["halfedges"]],
                    polygon=vertices[verts].copy(),
                    area=loop["area"],
                    centroid=_loop_centroid(vertices, verts),
                )
            )
    if not faces:
        raise NoFacesError("arrangement has no bounded face")

    edge_faces = []
    neighborhood: set[tuple[int, int]] = set()
    for ei in range(len(edges)):
        fa = loop_face.get(half_loop[(ei, 0)], -1)
        fb = loop_face.get(half_loop[(ei, 1)], -1)
        edge_faces.append((fa, fb))
        if fa >= 0 and fb >= 0 and fa != fb:
            neighborhood.add((min(fa, fb), max(fa, fb)))

    return Arrangement(
        traits=kept_traits,
        frame=(x0, y0, x1, y1),
        prime=PrimeGraph(vertices=vertices, edges=edges, incidence=incidence),
        faces=faces,
        neighborhood=neighborhood,
        hosts=hosts,
        edge_faces=edge_faces,
    )


# ---------------------------------------------------------------------------
# pruning


def supercover_cells(p0, p1) -> np.ndarray:
    """Grid cells (col, row) crossed by the segment from p0 to p1.

    Cells are unit squares centered on integer coordinates. Crossings
    exactly through a cell corner visit both side cells.
    """
    x0, y0 = float(p0[0]), float(p0[1])
    x1, y1 = float(p1[0]), float(p1[1])
    cx, cy = math.floor(x0 + 0.5), math.floor(y0 + 0.5)
    ex, ey = math.floor(x1 + 0.5), math.floor(y1 + 0.5)
    cells = [(cx, cy)]
    dx, dy = x1 - x0, y1 - y0
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    t_max_x = ((cx + 0.5 * sx) - x0) / dx if dx != 0 else math.inf
    t_max_y = ((cy + 0.5 * sy) - y0) / dy if dy != 0 else math.inf
    t_delta_x = abs(1.0 / dx) if dx != 0 else math.inf
    t_delta_y = abs(1.0 / dy) if dy != 0 else math.inf

    limit = 2 * (abs(ex - cx) + abs(ey - cy)) + 4
    steps = 0
    while (cx, cy) != (ex, ey) and steps < limit:
        steps += 1
        if abs(t_max_x - t_max_y) < 1e-12:
            cells.append((cx + sx, cy))
            cells.append((cx, cy + sy))
            cx += sx
            cy += sy
            t_max_x += t_delta_x
            t_max_y += t_delta_y
        elif t_max_x < t_max_y:
            cx += sx
            t_max_x += t_delta_x
        else:
            cy += sy
            t_max_y += t_delta_y
        cells.append((cx, cy))
    return np.array(cells, dtype=np.intp)


def _disk_offsets(radius: int) -> np.ndarray:
    r = int(radius)
    span = np.arange(-r, r + 1)
    ox, oy = np.meshgrid(span, span)
    keep = ox**2 + oy**2 <= r * r
    return np.stack([ox[keep], oy[keep]], axis=1)


def edge_band_mean(p0, p1, dmap: DistanceMap, band_radius: int = 3):
    """Mean distance-map value over the pixel band around a segment.

    Returns None when no band pixel falls inside the map.
    """
    cells = supercover_cells(np.asarray(p0) - dmap.origin, np.asarray(p1) - dmap.origin)
    band = (cells[:, None, :] + _disk_offsets(band_radius)[None, :, :]).reshape(-1, 2)
    inside = (
        (band[:, 0] >= 0)
        & (band[:, 0] < dmap.width)
        & (band[:, 1] >= 0)
        & (band[:, 1] < dmap.height)
    )
    band = band[inside]
    if len(band) == 0:
        return None
    flat = np.unique(band[:, 1] * dmap.width + band[:, 0])
    return float(dmap.values.ravel()[flat].mean())


def _union_rebuild(arr: Arrangement, parent: list[int], removed: set[int]):
    """Re-derive regions from surviving edges under the face union-find."""

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    verts = arr.prime.vertices
    kept_old: list[int] = []
    for ei in range(len(arr.prime.edges)):
        if ei in removed:
            continue
        fa, fb = arr.edge_faces[ei]
        if fa >= 0 and fb >= 0 and find(fa) == find(fb):
            # both sides merged into one region: the edge is an interior
            # stub now, not a region boundary
            continue
        kept_old.append(ei)

    used = sorted({v for ei in kept_old for v in (arr.prime.edges[ei].v0, arr.prime.edges[ei].v1)})
    vmap = {old: new for new, old in enumerate(used)}
    new_vertices = verts[used].copy()
    new_edges = [
        Edge(host=arr.prime.edges[ei].host, v0=vmap[arr.prime.edges[ei].v0], v1=vmap[arr.prime.edges[ei].v1])
        for ei in kept_old
    ]

    loops, half_loop, incidence = _trace_loops(new_vertices, new_edges)

    def loop_region(li: int) -> int:
        ne, o = loops[li]["halfedges"][0]
        old_face = arr.edge_faces[kept_old[ne]][o]
        return find(old_face) if old_face >= 0 else -1

    region_boundary: dict[int, int] = {}
    region_holes: dict[int, list[int]] = {}
    for li, loop in enumerate(loops):
        root = loop_region(li)
        if root < 0:
            continue
        if loop["area"] <= 1e-9:
            if loop["area"] < -1e-9:
                region_holes.setdefault(root, []).append(li)
            continue
        if root in region_boundary:
            logger.warning("region %d traced more than one outer loop", root)
            if loop["area"] <= loops[region_boundary[root]]["area"]:
                continue
        region_boundary[root] = li

    areas: dict[int, float] = {}
    for fi, face in enumerate(arr.faces):
        areas[find(fi)] = areas.get(find(fi), 0.0) + face.area

    roots = sorted(region_boundary)
    face_index = {root: i for i, root in enumerate(roots)}

    faces = []
    for root in roots:
        loop = loops[region_boundary[root]]
        holes = [
            new_vertices[loops[li]["vertices"]].copy() for li in region_holes.get(root, [])
        ]
        faces.append(
            Face(
                boundary=list(loop["vertices"]),
                edge_loop=[h[0] for h in loop["halfedges"]],
                polygon=new_vertices[loop["vertices"]].copy(),
                area=areas[root],
                centroid=_loop_centroid(new_vertices, loop["vertices"]),
                holes=holes,
            )
        )

    edge_faces = []
    neighborhood: set[tuple[int, int]] = set()
    for nei in range(len(new_edges)):
        sides = []
        for o in (0, 1):
            li = half_loop[(nei, o)]
            root = loop_region(li)
            sides.append(face_index.get(root, -1))
        edge_faces.append((sides[0], sides[1]))
        if sides[0] >= 0 and sides[1] >= 0 and sides[0] != sides[1]:
            neighborhood.add((min(sides), max(sides)))

    prime = PrimeGraph(vertices=new_vertices, edges=new_edges, incidence=incidence)
    return prime, faces, neighborhood, edge_faces, face_index, find


def prune(
    arr: Arrangement,
    dmap: DistanceMap,
    thr_e: float = 0.075,
    band_radius: int = 3,
) -> Arrangement:
    """Reduce the structural decomposition to a region segmentation.

    An interior edge survives when the mean distance-map value under its
    pixel band stays below ``thr_e`` (it runs along a wall or crosses a
    narrow gateway); all other interior edges are removed and the faces
    they separated are merged. Frame border edges always survive.
    Post-merge slivers (area < 4 px^2 or fewer than 3 distinct corners)
    are absorbed into their largest neighbor.
    """
    if not 0.0 < thr_e < 1.0:
        raise ValueError("thr_e must lie in (0, 1)")
    x0, y0, x1, y1 = arr.frame
    ox, oy = dmap.origin
    if (
        x0 < ox - 0.5
        or y0 < oy - 0.5
        or x1 > ox + dmap.width - 0.5
        or y1 > oy + dmap.height - 0.5
    ):
        raise ValueError("distance map does not cover the arrangement frame")

    verts = arr.prime.vertices
    removed: set[int] = set()
    for ei, e in enumerate(arr.prime.edges):
        if e.host < N_FRAME_HOSTS:
            continue
        v = edge_band_mean(verts[e.v0], verts[e.v1], dmap, band_radius)
        if v is None:
            logger.warning("edge %d has no pixels under it; removing", ei)
            removed.add(ei)
        elif v >= thr_e:
            removed.add(ei)

    parent = list(range(len(arr.faces)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for ei in removed:
        fa, fb = arr.edge_faces[ei]
        if fa >= 0 and fb >= 0:
            ra, rb = find(fa), find(fb)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    accepted_slivers: set[int] = set()
    while True:
        prime, faces, neighborhood, edge_faces, face_index, find_fn = _union_rebuild(
            arr, parent, removed
        )
        root_of = {v: k for k, v in face_index.items()}
        merged_more = False
        for fi, face in enumerate(faces):
            if root_of[fi] in accepted_slivers:
                continue
            distinct = len(dict.fromkeys(face.boundary))
            if face.area >= MIN_FACE_AREA and distinct >= 3:
                continue
            neighbors = [
                (other if pair[0] == fi else pair[0])
                for pair in neighborhood
                if fi in pair
                for other in (pair[1],)
            ]
            if not neighbors:
                logger.warning("degenerate face %d has no neighbor to absorb it", fi)
                accepted_slivers.add(root_of[fi])
                continue
            target = max(neighbors, key=lambda n: faces[n].area)
            ra, rb = find_fn(root_of[fi]), find_fn(root_of[target])
            parent[max(ra, rb)] = min(ra, rb)
            merged_more = True
        if not merged_more:
            break

    return Arrangement(
        traits=arr.traits,
        frame=arr.frame,
        prime=prime,
        faces=faces,
        neighborhood=neighborhood,
        hosts=arr.hosts,
        edge_faces=edge_faces,
    )


# ---------------------------------------------------------------------------
# serialization


def serialize_arrangement(arr: Arrangement) -> str:
    """Plain-text dump: traits, vertices, edges, face loops, adjacency."""
    out = []
    out.append(f"frame {arr.frame[0]:.6g} {arr.frame[1]:.6g} {arr.frame[2]:.6g} {arr.frame[3]:.6g}")
    out.append(f"traits {len(arr.traits)}")
    for i, t in enumerate(arr.traits):
        out.append(f"t {i} {t.kind} {t.theta:.12g} {t.rho:.12g}")
    out.append(f"vertices {len(arr.prime.vertices)}")
    for i, v in enumerate(arr.prime.vertices):
        out.append(f"v {i} {v[0]:.12g} {v[1]:.12g}")
    out.append(f"edges {len(arr.prime.edges)}")
    for i, e in enumerate(arr.prime.edges):
        out.append(f"e {i} {e.host} {e.v0} {e.v1}")
    out.append(f"faces {len(arr.faces)}")
    for i, f in enumerate(arr.faces):
        loop = " ".join(str(v) for v in f.boundary)
        out.append(
            f"f {i} area {f.area:.12g} centroid {f.centroid[0]:.12g} {f.centroid[1]:.12g} loop {loop}"
        )
    out.append(f"adjacency {len(arr.neighborhood)}")
    for a, b in sorted(arr.neighborhood):
        out.append(f"n {a} {b}")
    return "\n".join(out) + "\n"
