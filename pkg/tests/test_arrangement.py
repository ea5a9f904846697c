import math

import numpy as np
import pytest
from scipy import ndimage

from mapalign.arrangement import (
    build_arrangement,
    edge_band_mean,
    face_centroid,
    face_polygon,
    prune,
    serialize_arrangement,
    supercover_cells,
    N_FRAME_HOSTS,
)
from mapalign.errors import NoFacesError
from mapalign.geometry import line_trait, polygon_area, signed_area
from mapalign.raster import DistanceMap, distance_map
from mapalign.synthetic import render_plan

from conftest import grid_from_gray


def grid_traits(cols, rows):
    return [line_trait(0.0, c) for c in cols] + [line_trait(math.pi / 2, r) for r in rows]


# ---------------------------------------------------------------------------
# construction


def test_two_by_two_grid_lines():
    arr = build_arrangement(grid_traits([30, 70], [30, 70]), (0, 0, 100, 100))
    assert len(arr.faces) == 9
    # 4 interior intersection vertices (all others lie on the frame)
    interior = [
        v
        for v in arr.prime.vertices
        if 0.5 < v[0] < 99.5 and 0.5 < v[1] < 99.5
    ]
    assert len(interior) == 4
    # exactly one face has no frame-hosted edge, and it has 4 edges
    inner = [
        f
        for f in arr.faces
        if all(arr.prime.edges[e].host >= N_FRAME_HOSTS for e in f.edge_loop)
    ]
    assert len(inner) == 1
    assert len(inner[0].edge_loop) == 4
    assert inner[0].area == pytest.approx(40 * 40)


def test_three_by_three_grid_lines():
    arr = build_arrangement(grid_traits([25, 50, 75], [25, 50, 75]), (0, 0, 100, 100))
    assert len(arr.faces) == 16
    interior = [
        v for v in arr.prime.vertices if 0.5 < v[0] < 99.5 and 0.5 < v[1] < 99.5
    ]
    assert len(interior) == 9
    inner_faces = [
        f
        for f in arr.faces
        if all(arr.prime.edges[e].host >= N_FRAME_HOSTS for e in f.edge_loop)
    ]
    assert len(inner_faces) == 4


def test_faces_tile_frame():
    traits = grid_traits([20, 55, 80], [35, 60]) + [line_trait(math.radians(40), 50.0)]
    arr = build_arrangement(traits, (0, 0, 120, 90))
    total = sum(f.area for f in arr.faces)
    assert total == pytest.approx(120 * 90, rel=1e-6)


def test_euler_characteristic():
    rng = np.random.default_rng(2)
    for _ in range(5):
        traits = [
            line_trait(rng.uniform(0, math.pi), rng.uniform(20, 80)) for _ in range(5)
        ]
        arr = build_arrangement(traits, (0, 0, 100, 100))
        v = len(arr.prime.vertices)
        e = len(arr.prime.edges)
        f = len(arr.faces) + 1  # plus the outer face
        assert v - e + f == 2


def test_all_parallel_traits_make_strips():
    arr = build_arrangement(grid_traits([25, 50, 75], []), (0, 0, 100, 100))
    assert len(arr.faces) == 4
    assert sum(f.area for f in arr.faces) == pytest.approx(100 * 100)


def test_duplicate_traits_dropped():
    traits = grid_traits([30, 70], [50]) + [line_trait(0.0, 30.2)]
    arr = build_arrangement(traits, (0, 0, 100, 100))
    assert len(arr.traits) == 3


def test_degenerate_frame_raises():
    with pytest.raises(ValueError):
        build_arrangement(grid_traits([10], [10]), (0, 0, 0, 100))


def test_no_traits_raises():
    with pytest.raises(ValueError):
        build_arrangement([], (0, 0, 100, 100))


def test_neighborhood_symmetric_no_self_pairs():
    arr = build_arrangement(grid_traits([30, 70], [30, 70]), (0, 0, 100, 100))
    for a, b in arr.neighborhood:
        assert a != b
        assert 0 <= a < len(arr.faces) and 0 <= b < len(arr.faces)
    # center face touches its 4 side neighbors
    inner = next(
        i
        for i, f in enumerate(arr.faces)
        if all(arr.prime.edges[e].host >= N_FRAME_HOSTS for e in f.edge_loop)
    )
    degree = sum(1 for pair in arr.neighborhood if inner in pair)
    assert degree == 4


def test_boundaries_are_ccw():
    arr = build_arrangement(grid_traits([30, 70], [50]), (0, 0, 100, 100))
    for f in arr.faces:
        assert signed_area(f.polygon) > 0


def test_edges_lie_on_hosts():
    traits = grid_traits([20, 80], [40]) + [line_trait(math.radians(30), 60.0)]
    arr = build_arrangement(traits, (0, 0, 100, 100))
    for e in arr.prime.edges:
        host = arr.hosts[e.host]
        for v in (e.v0, e.v1):
            assert abs(host.signed_distance(arr.prime.vertices[v])[0]) <= 0.5


def test_no_vertex_inside_edge_interior():
    traits = grid_traits([20, 50, 80], [30, 60])
    arr = build_arrangement(traits, (0, 0, 100, 100))
    verts = arr.prime.vertices
    for e in arr.prime.edges:
        a, b = verts[e.v0], verts[e.v1]
        d = b - a
        length = np.hypot(*d)
        for vi, v in enumerate(verts):
            if vi in (e.v0, e.v1):
                continue
            t = np.dot(v - a, d) / (length**2)
            if 0.01 < t < 0.99:
                rel = v - a
                dist = abs(d[0] * rel[1] - d[1] * rel[0]) / length
                assert dist > 0.5


# ---------------------------------------------------------------------------
# point-location oracle


def _face_count_oracle(traits, frame, step=0.5):
    """Count planar cells by labeling a fine sample grid by side-of-line
    sign pattern and counting connected components per pattern."""
    x0, y0, x1, y1 = frame
    xs = np.arange(x0 + step / 2, x1, step)
    ys = np.arange(y0 + step / 2, y1, step)
    gx, gy = np.meshgrid(xs, ys)
    code = np.zeros(gx.shape, dtype=np.int64)
    for bit, t in enumerate(traits):
        side = (gx * math.cos(t.theta) + gy * math.sin(t.theta) - t.rho) > 0
        code |= side.astype(np.int64) << bit
    count = 0
    areas = []
    # 8-connectivity: cells of one sign pattern are never corner-adjacent
    # to another component of the same pattern, but thin diagonal wedges
    # must stay connected. Cells are convex, so fragments can only split
    # off at sub-resolution wedge tips and stay tiny; the caller
    # guarantees true cells are far larger than the fragment floor.
    eight = np.ones((3, 3), dtype=int)
    fragment_floor = 5.0
    for c in np.unique(code):
        labels, n = ndimage.label(code == c, structure=eight)
        for k in range(1, n + 1):
            area = np.sum(labels == k) * step * step
            if area >= fragment_floor:
                count += 1
                areas.append(area)
    return count, sorted(areas)


def _random_line_set(rng, n_lines, frame):
    """Random lines with well-separated crossings.

    Degenerate features below the oracle's sampling resolution (near
    coincident intersections, slivers) are resampled away; the oracle
    has finite resolution and the vertex-merge tolerance is 0.5 px.
    """
    from mapalign.geometry import trait_intersection

    x0, y0, x1, y1 = frame
    for attempt in range(3000):
        # crossing placement gets harder with more lines; settle for
        # fewer rather than loop forever (any size <= 8 is a valid set)
        n = max(2, n_lines - attempt // 400)
        traits = []
        for _ in range(n):
            theta = rng.uniform(0, math.pi)
            span_x, span_y = x1 - x0, y1 - y0
            mid = np.array(
                [
                    rng.uniform(x0 + 0.3 * span_x, x1 - 0.3 * span_x),
                    rng.uniform(y0 + 0.3 * span_y, y1 - 0.3 * span_y),
                ]
            )
            rho = mid @ (math.cos(theta), math.sin(theta))
            traits.append(line_trait(theta, rho))

        angles_ok = all(
            min(abs(a.theta - b.theta), math.pi - abs(a.theta - b.theta)) > math.radians(6)
            for i, a in enumerate(traits)
            for b in traits[i + 1 :]
        )
        if not angles_ok:
            continue
        # crossings must sit well inside the frame or far outside it:
        # near the boundary (either side) they pinch off wedges thinner
        # than the vertex-merge tolerance and the oracle's sampling step
        crossings = []
        ok = True
        for i in range(len(traits)):
            for j in range(i + 1, len(traits)):
                p = trait_intersection(traits[i], traits[j])
                if p is None:
                    continue
                margin = min(p[0] - x0, x1 - p[0], p[1] - y0, y1 - p[1])
                if margin > 30.0:
                    crossings.append(p)
                elif margin > -40.0:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        separated = all(
            np.hypot(*(a - b)) > 4.0
            for i, a in enumerate(crossings)
            for b in crossings[i + 1 :]
        )
        if not separated:
            continue
        arr = build_arrangement(traits, frame)
        if min(f.area for f in arr.faces) >= 25.0:
            return traits, arr
    raise AssertionError("could not generate a well-separated line set")


def test_face_count_matches_point_location_oracle():
    rng = np.random.default_rng(77)
    frame = (0, 0, 300, 300)
    for _ in range(8):
        n_lines = int(rng.integers(2, 9))
        traits, arr = _random_line_set(rng, n_lines, frame)
        count, areas = _face_count_oracle(arr.traits, frame)
        assert count == len(arr.faces)
        total_oracle = sum(areas)
        total_faces = sum(f.area for f in arr.faces)
        assert total_faces == pytest.approx(total_oracle, rel=0.01)


# ---------------------------------------------------------------------------
# supercover and edge band


def test_supercover_straight_and_diagonal():
    cells = supercover_cells((0, 0), (3, 0))
    assert [tuple(c) for c in cells] == [(0, 0), (1, 0), (2, 0), (3, 0)]
    cells = supercover_cells((0, 0), (2, 2))
    as_set = {tuple(c) for c in cells}
    # corner crossings include both side cells
    assert {(0, 0), (1, 1), (2, 2)} <= as_set
    assert {(0, 1), (1, 0)} & as_set


def test_edge_band_mean_values():
    values = np.zeros((10, 10))
    values[:, 6:] = 1.0
    dmap = DistanceMap(values=values)
    low = edge_band_mean((1.0, 1.0), (1.0, 8.0), dmap, band_radius=1)
    high = edge_band_mean((8.0, 1.0), (8.0, 8.0), dmap, band_radius=1)
    assert low == 0.0
    assert high == 1.0
    assert edge_band_mean((50.0, 50.0), (60.0, 60.0), dmap, band_radius=1) is None


# ---------------------------------------------------------------------------
# pruning


def _plan_fixture(seed=3):
    rng = np.random.default_rng(seed)
    img, rooms = render_plan((200, 200), [0, 100, 199], [0, 90, 199], rng=rng)
    grid = grid_from_gray(img)
    dmap = distance_map(grid)
    return grid, dmap, rooms


def test_prune_keeps_wall_edge_removes_open_space():
    grid, dmap, rooms = _plan_fixture()
    traits = [line_trait(0.0, 100.0), line_trait(math.pi / 2, 90.0)]
    arr = build_arrangement(traits, grid.frame())
    assert len(arr.faces) == 4
    # wall edge: on the vertical wall, V ~ 0 -> kept
    v_wall = edge_band_mean((100.0, 10.0), (100.0, 80.0), dmap, 3)
    assert v_wall < 0.075
    # an edge crossing open space scores high
    v_open = edge_band_mean((30.0, 20.0), (70.0, 60.0), dmap, 3)
    assert v_open >= 0.075
    pruned = prune(arr, dmap, thr_e=0.075)
    assert len(pruned.faces) == 4  # all four rooms separated by real walls


def test_prune_merges_over_decomposition():
    grid, dmap, rooms = _plan_fixture()
    traits = [
        line_trait(0.0, 100.0),
        line_trait(math.pi / 2, 90.0),
        line_trait(math.pi / 2, 150.0),  # extra line through the lower rooms
    ]
    arr = build_arrangement(traits, grid.frame())
    assert len(arr.faces) == 6
    pruned = prune(arr, dmap, thr_e=0.075)
    assert len(pruned.faces) == 4


def test_prune_two_room_over_decomposed():
    rng = np.random.default_rng(5)
    img, rooms = render_plan((200, 200), [0, 110, 199], [0, 199], rng=rng)
    grid = grid_from_gray(img)
    dmap = distance_map(grid)
    traits = [line_trait(0.0, 110.0), line_trait(math.pi / 2, 60.0)]
    arr = build_arrangement(traits, grid.frame())
    assert len(arr.faces) == 4
    pruned = prune(arr, dmap)
    assert len(pruned.faces) == 2


def test_prune_area_conservation_and_monotone_count():
    grid, dmap, _ = _plan_fixture(seed=11)
    traits = [
        line_trait(0.0, 100.0),
        line_trait(math.pi / 2, 90.0),
        line_trait(math.radians(50), 80.0),
    ]
    arr = build_arrangement(traits, grid.frame())
    pruned = prune(arr, dmap)
    assert len(pruned.faces) <= len(arr.faces)
    assert sum(f.area for f in pruned.faces) == pytest.approx(
        sum(f.area for f in arr.faces), rel=1e-6
    )


def test_prune_edge_classification_consistency():
    grid, dmap, _ = _plan_fixture(seed=13)
    traits = [
        line_trait(0.0, 100.0),
        line_trait(math.pi / 2, 90.0),
        line_trait(math.pi / 2, 150.0),
    ]
    arr = build_arrangement(traits, grid.frame())
    pruned = prune(arr, dmap, thr_e=0.075)

    surviving = set()
    for e in pruned.prime.edges:
        a = pruned.prime.vertices[e.v0]
        b = pruned.prime.vertices[e.v1]
        surviving.add((tuple(np.round(a, 3)), tuple(np.round(b, 3))))

    for e in arr.prime.edges:
        if e.host < N_FRAME_HOSTS:
            continue
        a = arr.prime.vertices[e.v0]
        b = arr.prime.vertices[e.v1]
        key = (tuple(np.round(a, 3)), tuple(np.round(b, 3)))
        v = edge_band_mean(a, b, dmap, 3)
        if key in surviving:
            assert v < 0.075
    for e in pruned.prime.edges:
        if e.host < N_FRAME_HOSTS:
            continue
        a = pruned.prime.vertices[e.v0]
        b = pruned.prime.vertices[e.v1]
        assert edge_band_mean(a, b, dmap, 3) < 0.075


def test_prune_idempotent():
    grid, dmap, _ = _plan_fixture(seed=7)
    traits = [
        line_trait(0.0, 100.0),
        line_trait(math.pi / 2, 90.0),
        line_trait(math.radians(35), 60.0),
    ]
    arr = build_arrangement(traits, grid.frame())
    once = prune(arr, dmap)
    twice = prune(once, dmap)
    assert len(twice.faces) == len(once.faces)
    assert len(twice.prime.edges) == len(once.prime.edges)
    for fa, fb in zip(once.faces, twice.faces):
        assert fa.area == pytest.approx(fb.area, rel=1e-12)
        assert np.allclose(fa.centroid, fb.centroid)
    assert once.neighborhood == twice.neighborhood


def test_prune_rejects_uncovering_dmap():
    arr = build_arrangement(grid_traits([50], [50]), (0, 0, 100, 100))
    small = DistanceMap(values=np.ones((10, 10)))
    with pytest.raises(ValueError):
        prune(arr, small)


def test_prune_centroid_is_vertex_mean():
    grid, dmap, _ = _plan_fixture(seed=3)
    traits = [line_trait(0.0, 100.0), line_trait(math.pi / 2, 90.0)]
    arr = build_arrangement(traits, grid.frame())
    pruned = prune(arr, dmap)
    for i, f in enumerate(pruned.faces):
        unique = []
        for v in f.boundary:
            if v not in unique:
                unique.append(v)
        expected = pruned.prime.vertices[unique].mean(axis=0)
        assert np.allclose(face_centroid(pruned, i), expected)
        assert polygon_area(face_polygon(pruned, i)) == pytest.approx(f.area, rel=1e-9)


def test_face_accessor_examples():
    arr = build_arrangement(grid_traits([50], [50]), (0, 0, 100, 100))
    idx = next(i for i, f in enumerate(arr.faces) if f.area == pytest.approx(2500))
    assert face_polygon(arr, idx).shape == (4, 2)


def test_lshape_centroid_vertex_mean():
    from mapalign.arrangement import _loop_centroid

    verts = np.array([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)], dtype=float)
    centroid = _loop_centroid(verts, list(range(6)))
    assert np.allclose(centroid, (1.0, 1.0))


def test_serialize_roundtrip_smoke():
    arr = build_arrangement(grid_traits([30, 70], [50]), (0, 0, 100, 100))
    text = serialize_arrangement(arr)
    assert f"vertices {len(arr.prime.vertices)}" in text
    assert f"faces {len(arr.faces)}" in text
    assert text.count("\nf ") == len(arr.faces)
