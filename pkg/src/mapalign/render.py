"""PNG renderings: face-colored arrangements and alignment overlays."""

from __future__ import annotations

import colorsys

import numpy as np
from PIL import Image, ImageDraw

from .arrangement import Arrangement
from .geometry import Transform2
from .raster import FREE, OCCUPIED, OccupancyGrid


def _face_color(index: int, count: int) -> tuple[int, int, int]:
    hue = (index * 0.61803398875) % 1.0  # golden-ratio spacing keeps neighbors apart
    r, g, b = colorsys.hsv_to_rgb(hue, 0.55, 0.95)
    return int(255 * r), int(255 * g), int(255 * b)


def render_faces(arr: Arrangement, path) -> None:
    """Fill each face with a distinct color and stroke the edges."""
    x0, y0, x1, y1 = arr.frame
    w = int(round(x1 - x0)) + 1
    h = int(round(y1 - y0)) + 1
    img = Image.new("RGB", (w, h), (255, 255, 255))
    draw = ImageDraw.Draw(img)
    for i, face in enumerate(arr.faces):
        pts = [(p[0] - x0, p[1] - y0) for p in face.polygon]
        draw.polygon(pts, fill=_face_color(i, len(arr.faces)))
    verts = arr.prime.vertices
    for e in arr.prime.edges:
        a, b = verts[e.v0], verts[e.v1]
        draw.line((a[0] - x0, a[1] - y0, b[0] - x0, b[1] - y0), fill=(40, 40, 40), width=1)
    img.save(path, format="PNG")


def _grid_gray(grid: OccupancyGrid) -> np.ndarray:
    gray = np.full(grid.cells.shape, 200, dtype=np.uint8)
    gray[grid.cells == FREE] = 255
    gray[grid.cells == OCCUPIED] = 0
    return gray


def render_overlay(grid1: OccupancyGrid, grid2: OccupancyGrid, t: Transform2, path) -> None:
    """Warp map1 by the transform onto map2 and alpha-blend the result.

    Map2 is drawn in grayscale; map1's occupied cells arrive in red via
    inverse-mapped nearest-neighbor sampling.
    """
    base = _grid_gray(grid2)
    h, w = base.shape
    cols, rows = np.meshgrid(np.arange(w), np.arange(h))
    world2 = np.stack([cols.ravel() + grid2.origin[0], rows.ravel() + grid2.origin[1]], axis=1)
    world1 = t.inverse().apply(world2)
    src_c = np.rint(world1[:, 0] - grid1.origin[0]).astype(np.intp)
    src_r = np.rint(world1[:, 1] - grid1.origin[1]).astype(np.intp)
    valid = (src_c >= 0) & (src_c < grid1.width) & (src_r >= 0) & (src_r < grid1.height)

    warped_occ = np.zeros(h * w, dtype=bool)
    warped_occ[valid] = grid1.cells[src_r[valid], src_c[valid]] == OCCUPIED
    warped_occ = warped_occ.reshape(h, w)

    rgb = np.stack([base, base, base], axis=2).astype(np.float64)
    rgb[warped_occ] = 0.5 * rgb[warped_occ] + 0.5 * np.array([220.0, 30.0, 30.0])
    Image.fromarray(rgb.astype(np.uint8), mode="RGB").save(path, format="PNG")
