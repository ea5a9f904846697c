"""Synthetic floor-plan rasters for demos and tests.

Plans are grids of rectangular rooms separated by walls with door gaps.
Two flavors:

* full-raster plans, where the outermost room boundaries coincide with
  the image border (only interior walls are drawn);
* walled plans, where the building outline is drawn inside a margin of
  free space, which is what a map warped into a larger canvas looks
  like.
"""

from __future__ import annotations

import math

import numpy as np
from PIL import Image

from .geometry import Transform2


def render_plan(
    shape: tuple[int, int],
    col_edges,
    row_edges,
    wall_px: int = 3,
    door_px: int = 8,
    rng: np.random.Generator | None = None,
    outer_walls: bool = False,
):
    """Draw a room grid as a grayscale image (walls 0, free 255).

    ``col_edges`` / ``row_edges`` are the room boundary coordinates,
    first and last being the building extents. Every interior wall gets
    one door gap per room span it separates; outer walls stay solid.
    Returns (image, room rectangles as (x0, y0, x1, y1)).
    """
    rng = rng or np.random.default_rng(0)
    h, w = shape
    img = np.full((h, w), 255, dtype=np.uint8)
    col_edges = [int(c) for c in col_edges]
    row_edges = [int(r) for r in row_edges]
    hw = wall_px // 2

    def vstrip(c):
        return slice(max(0, c - hw), min(w, c - hw + wall_px))

    def hstrip(r):
        return slice(max(0, r - hw), min(h, r - hw + wall_px))

    x0, x1 = col_edges[0], col_edges[-1]
    y0, y1 = row_edges[0], row_edges[-1]
    if outer_walls:
        for c in (col_edges[0], col_edges[-1]):
            img[y0 : y1 + 1, vstrip(c)] = 0
        for r in (row_edges[0], row_edges[-1]):
            img[hstrip(r), x0 : x1 + 1] = 0
    for c in col_edges[1:-1]:
        img[y0 : y1 + 1, vstrip(c)] = 0
    for r in row_edges[1:-1]:
        img[hstrip(r), x0 : x1 + 1] = 0

    pad = door_px + wall_px + 4  # keep gaps away from wall junctions
    for c in col_edges[1:-1]:
        for ra, rb in zip(row_edges[:-1], row_edges[1:]):
            if rb - ra < 2 * pad + door_px:
                continue
            gc = int(rng.integers(ra + pad, rb - pad))
            img[gc : gc + door_px, vstrip(c)] = 255
    for r in row_edges[1:-1]:
        for ca, cb in zip(col_edges[:-1], col_edges[1:]):
            if cb - ca < 2 * pad + door_px:
                continue
            gc = int(rng.integers(ca + pad, cb - pad))
            img[hstrip(r), gc : gc + door_px] = 255

    rooms = [
        (float(ca), float(ra), float(cb), float(rb))
        for ra, rb in zip(row_edges[:-1], row_edges[1:])
        for ca, cb in zip(col_edges[:-1], col_edges[1:])
    ]
    return img, rooms


def _random_edges(rng, low, high, n_rooms, min_span):
    """Sorted boundary coordinates for n_rooms spans of at least min_span."""
    for _ in range(200):
        cuts = np.sort(rng.integers(low + min_span, high - min_span + 1, size=n_rooms - 1))
        edges = [low, *[int(c) for c in cuts], high]
        if all(b - a >= min_span for a, b in zip(edges[:-1], edges[1:])):
            return edges
    # fall back to an even split; random cuts kept colliding
    return [int(v) for v in np.linspace(low, high, n_rooms + 1)]


def random_grid_plan(
    seed: int,
    size: int = 500,
    n_cols: int | None = None,
    n_rows: int | None = None,
    wall_px: int = 3,
    door_px: int = 8,
    min_span: int = 90,
    outer_walls: bool = False,
    margin: int = 0,
):
    """Seeded random room grid; returns (image, room rectangles)."""
    rng = np.random.default_rng(seed)
    if n_cols is None:
        n_cols = int(rng.integers(2, 4))
    if n_rows is None:
        n_rows = int(rng.integers(1, 4))
    lo, hi = margin, size - 1 - margin
    col_edges = _random_edges(rng, lo, hi, n_cols, min_span)
    row_edges = _random_edges(rng, lo, hi, n_rows, min_span)
    return render_plan(
        (size, size),
        col_edges,
        row_edges,
        wall_px=wall_px,
        door_px=door_px,
        rng=rng,
        outer_walls=outer_walls,
    )


def nested_plan(
    seed: int,
    size: int = 300,
    wall_px: int = 3,
    door_px: int = 8,
):
    """Two-level split plan whose walls do not all span the building.

    One full-height wall splits the raster in two; each half may get its
    own horizontal wall spanning only that half. The detected (unbounded)
    line of a half-span wall over-decomposes the other half, so this
    layout exercises the pruning stage. Returns (image, room rects).
    """
    rng = np.random.default_rng(seed)
    h = w = size
    img = np.full((h, w), 255, dtype=np.uint8)
    hw = wall_px // 2

    c = int(rng.integers(int(0.38 * w), int(0.62 * w)))
    img[:, c - hw : c - hw + wall_px] = 0

    rooms = []
    side_rows: list[list[int]] = []
    prev_r: int | None = None
    for side, (xa, xb) in enumerate(((0, c), (c, w - 1))):
        split = side == 0 or rng.random() < 0.7
        if split:
            r = int(rng.integers(int(0.35 * h), int(0.65 * h)))
            # near-collinear split heights on the two sides invite bridge
            # detections across both walls; keep them clearly apart
            while prev_r is not None and abs(r - prev_r) < 45:
                r = int(rng.integers(int(0.35 * h), int(0.65 * h)))
            prev_r = r
            img[r - hw : r - hw + wall_px, xa : xb + 1] = 0
            gc = int(rng.integers(xa + door_px + 8, xb - door_px - 8))
            img[r - hw : r - hw + wall_px, gc : gc + door_px] = 255
            side_rows.append([0, r, h - 1])
            rooms += [
                (float(xa), 0.0, float(xb), float(r)),
                (float(xa), float(r), float(xb), float(h - 1)),
            ]
        else:
            side_rows.append([0, h - 1])
            rooms.append((float(xa), 0.0, float(xb), float(h - 1)))

    # one door through the center wall per room row on the taller side
    rows = max(side_rows, key=len)
    for ra, rb in zip(rows[:-1], rows[1:]):
        gc = int(rng.integers(ra + door_px + 8, rb - door_px - 8))
        img[gc : gc + door_px, c - hw : c - hw + wall_px] = 255
    return img, rooms


def flip_noise(image: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Flip occupied/free at the given per-pixel rate (binary images)."""
    flips = rng.random(image.shape) < rate
    out = image.copy()
    out[flips] = 255 - out[flips]
    return out


def warp_image(image: np.ndarray, t: Transform2, out_shape: tuple[int, int], fill: int = 255) -> np.ndarray:
    """Resample the image under the transform (nearest neighbor).

    ``t`` maps source pixel coordinates to destination coordinates; the
    output canvas has the given shape and is filled with ``fill`` where
    the source does not reach.
    """
    h, w = out_shape
    cols, rows = np.meshgrid(np.arange(w), np.arange(h))
    dst = np.stack([cols.ravel(), rows.ravel()], axis=1).astype(float)
    src = t.inverse().apply(dst)
    c = np.rint(src[:, 0]).astype(np.intp)
    r = np.rint(src[:, 1]).astype(np.intp)
    valid = (c >= 0) & (c < image.shape[1]) & (r >= 0) & (r < image.shape[0])
    out = np.full(h * w, fill, dtype=image.dtype)
    out[valid] = image[r[valid], c[valid]]
    return out.reshape(h, w)


def transformed_copy(
    image: np.ndarray,
    scale: float,
    angle: float,
    translation: tuple[float, float],
    pad: int = 40,
):
    """Warp a plan by a similarity transform into a canvas that fits it.

    Returns (warped image, transform, canvas shape). The transform maps
    source coordinates to coordinates of the returned canvas.
    """
    t = Transform2.similarity(scale, angle, *translation)
    h, w = image.shape
    corners = np.array([[0, 0], [w - 1, 0], [w - 1, h - 1], [0, h - 1]], dtype=float)
    mapped = t.apply(corners)
    # shift so the warped content sits inside the canvas with padding
    shift = np.array([pad, pad]) - mapped.min(axis=0)
    t = Transform2.similarity(1.0, 0.0, *shift) @ t
    mapped = mapped + shift
    out_w = int(math.ceil(mapped[:, 0].max())) + pad + 1
    out_h = int(math.ceil(mapped[:, 1].max())) + pad + 1
    warped = warp_image(image, t, (out_h, out_w))
    return warped, t, (out_h, out_w)


def save_pgm(image: np.ndarray, path) -> None:
    Image.fromarray(image, mode="L").save(path)
