"""Bitmap ingestion, normalized distance transform, and line detection.

Line detection accumulates a Radon-style projection where every pixel
votes with the magnitude of the local image gradient, attenuated by how
well the gradient lines up with the candidate line's normal. Walls give
coherent votes along their supporting line even when the drawing of the
wall is broken or noisy; clutter votes incoherently and stays below the
peak threshold.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import InputError
from .geometry import Trait, clip_to_frame, line_trait

logger = logging.getLogger(__name__)

FREE = np.uint8(0)
OCCUPIED = np.uint8(1)
UNKNOWN = np.uint8(2)


@dataclass
class OccupancyGrid:
    """Raster map; cells hold FREE / OCCUPIED / UNKNOWN.

    ``origin`` is the world coordinate of pixel (0, 0); x grows right
    (columns), y grows down (rows). ``resolution`` is meters per pixel
    and is carried along only for the caller's bookkeeping.
    """

    cells: np.ndarray
    origin: np.ndarray = field(default_factory=lambda: np.zeros(2))
    resolution: float = 1.0

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.uint8)
        if self.cells.ndim != 2 or self.cells.size == 0:
            raise ValueError("grid must be a non-empty 2D array")
        if self.cells.max(initial=0) > 2:
            raise ValueError("cell states must be FREE, OCCUPIED or UNKNOWN")
        self.origin = np.asarray(self.origin, dtype=float)

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    def frame(self) -> tuple[float, float, float, float]:
        """Bounding rectangle of the pixel centers, in world coordinates."""
        x0, y0 = self.origin
        return (x0, y0, x0 + self.width - 1, y0 + self.height - 1)


@dataclass
class DistanceMap:
    """Per-cell distance to the nearest occupied cell, scaled to [0, 1]."""

    values: np.ndarray
    origin: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.origin = np.asarray(self.origin, dtype=float)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass
class RadiographyAccumulator:
    """Projection accumulator over (normal angle, signed offset) bins."""

    angles: np.ndarray
    offsets: np.ndarray
    bins: np.ndarray


def load_grid(path, occupied_threshold: int = 100) -> OccupancyGrid:
    """Load a grayscale PGM or PNG into an occupancy grid.

    Gray levels below the threshold become OCCUPIED, levels above
    ``255 - threshold`` become FREE, and the band in between is UNKNOWN.
    """
    if not 0 <= occupied_threshold <= 255:
        raise InputError(f"occupied_threshold {occupied_threshold} outside [0, 255]")
    try:
        with Image.open(path) as img:
            if img.format not in ("PPM", "PNG"):  # PIL reports PGM as PPM
                raise InputError(f"{path}: unsupported format {img.format!r} (need PGM or PNG)")
            gray = np.asarray(img.convert("L"), dtype=np.uint8)
    except FileNotFoundError as exc:
        raise InputError(f"{path}: {exc.strerror or 'not found'}") from exc
    except UnidentifiedImageError as exc:
        raise InputError(f"{path}: not a readable bitmap") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if gray.size == 0:
        raise InputError(f"{path}: zero-area image")

    cells = np.full(gray.shape, UNKNOWN, dtype=np.uint8)
    cells[gray < occupied_threshold] = OCCUPIED
    cells[gray > 255 - occupied_threshold] = FREE
    return OccupancyGrid(cells=cells)


def occupied_bbox(grid: OccupancyGrid):
    """World-coordinate bbox of the occupied cells, or None if empty."""
    rows, cols = np.nonzero(grid.cells == OCCUPIED)
    if len(rows) == 0:
        return None
    x0, y0 = grid.origin
    return (
        x0 + float(cols.min()),
        y0 + float(rows.min()),
        x0 + float(cols.max()),
        y0 + float(rows.max()),
    )


def despeckle(grid: OccupancyGrid, min_component_px: int = 5) -> OccupancyGrid:
    """Turn isolated occupied specks into free cells.

    Occupied 8-connected components smaller than ``min_component_px``
    are sensor salt, not structure; left in place they dominate the
    distance transform's normalization on noisy maps.
    """
    if min_component_px <= 1:
        return grid
    occupied = grid.cells == OCCUPIED
    labels, n = ndimage.label(occupied, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        return grid
    sizes = np.bincount(labels.ravel())
    small = sizes < min_component_px
    small[0] = False
    cells = grid.cells.copy()
    cells[small[labels]] = FREE
    return OccupancyGrid(cells=cells, origin=grid.origin, resolution=grid.resolution)


def distance_map(grid: OccupancyGrid) -> DistanceMap:
    """Normalized Euclidean distance transform of the occupied cells.

    UNKNOWN is treated as FREE: unexplored space does not count as an
    obstacle. Raises when the grid has no occupied cell or no free cell
    (either way the [0, 1] normalization is undefined).
    """
    occupied = grid.cells == OCCUPIED
    if not occupied.any():
        raise ValueError("distance map undefined: grid has no occupied cell")
    dist = ndimage.distance_transform_edt(~occupied)
    peak = float(dist.max())
    if peak == 0.0:
        raise ValueError("distance map undefined: every cell is occupied")
    return DistanceMap(values=dist / peak, origin=grid.origin)


def radiography(
    grid: OccupancyGrid,
    angle_bins: int = 180,
    offset_bin_size: float = 1.0,
) -> RadiographyAccumulator:
    """Gradient-weighted projection accumulation over line parameters.

    The occupancy image (OCCUPied=1, else 0) is box-blurred once, then a
    central-difference gradient is taken. For each projection angle a
    pixel votes into the (angle, offset) bin of the line through it with
    weight |grad| * |cos(grad_orientation - angle)|: the factor is 1 when
    the gradient is parallel to the line normal (i.e. perpendicular to
    the projection ray) and 0 when it lies along the ray.
    """
    if angle_bins < 2:
        raise ValueError("angle_bins must be >= 2")
    if offset_bin_size <= 0:
        raise ValueError("offset_bin_size must be positive")

    occ = (grid.cells == OCCUPIED).astype(float)
    blurred = ndimage.uniform_filter(occ, size=3, mode="reflect")
    gy, gx = np.gradient(blurred)
    mag = np.hypot(gx, gy)

    h, w = occ.shape
    half = offset_bin_size * math.ceil(math.hypot(w - 1, h - 1) / offset_bin_size)
    n_off = int(round(2 * half / offset_bin_size)) + 1
    offsets = -half + offset_bin_size * np.arange(n_off)
    angles = np.pi * np.arange(angle_bins) / angle_bins
    bins = np.zeros((angle_bins, n_off))

    ys, xs = np.nonzero(mag > 1e-12)
    if len(ys) == 0:
        return RadiographyAccumulator(angles=angles, offsets=offsets, bins=bins)
    weights = mag[ys, xs]
    phi = np.arctan2(gy[ys, xs], gx[ys, xs])
    xs = xs.astype(float) + grid.origin[0]
    ys = ys.astype(float) + grid.origin[1]

    # One pass per angle keeps accumulation deterministic regardless of
    # how callers might shard the work.
    for k, theta in enumerate(angles):
        rho = xs * math.cos(theta) + ys * math.sin(theta)
        idx = np.rint((rho - offsets[0]) / offset_bin_size).astype(np.intp)
        np.clip(idx, 0, n_off - 1, out=idx)
        vote = weights * np.abs(np.cos(phi - theta))
        bins[k] = np.bincount(idx, weights=vote, minlength=n_off)

    return RadiographyAccumulator(angles=angles, offsets=offsets, bins=bins)


def detect_line_traits(
    acc: RadiographyAccumulator,
    peak_threshold_ratio: float = 0.3,
    nms_radius: int = 3,
    frame=None,
    merge_distance: float = 18.0,
) -> list[Trait]:
    """Extract line traits at accumulator peaks.

    Keeps local maxima above ``peak_threshold_ratio`` times the global
    maximum, then greedily suppresses anything within a Chebyshev window
    of ``nms_radius`` bins around a stronger peak. The angle axis wraps
    with period pi; the wrapped neighbor of bin (0, rho) is (pi-d, -rho),
    which the suppression window accounts for.

    When ``frame`` is given, surviving lines that stay within
    ``merge_distance`` pixels of a stronger line everywhere inside the
    frame are dropped as well. Long walls smear into shallow ridges in
    the (angle, offset) plane whose secondary peaks sit outside any
    reasonable bin window but describe nearly the same physical line;
    the in-frame separation test removes exactly those.
    """
    if acc.bins.size == 0:
        raise ValueError("empty accumulator")
    if not 0.0 < peak_threshold_ratio <= 1.0:
        raise ValueError("peak_threshold_ratio must be in (0, 1]")

    bins = acc.bins
    peak = float(bins.max())
    if peak <= 0.0:
        return []
    n_ang, n_off = bins.shape

    local_max = bins >= ndimage.maximum_filter(bins, size=3, mode="nearest")
    cand = np.argwhere(local_max & (bins >= peak_threshold_ratio * peak) & (bins > 0))
    if len(cand) == 0:
        return []
    vals = bins[cand[:, 0], cand[:, 1]]
    order = np.lexsort((cand[:, 1], cand[:, 0], -vals))
    cand = cand[order]

    kept: list[tuple[int, int]] = []
    for ka, ma in cand:
        suppressed = False
        for kb, mb in kept:
            dk = abs(int(ka) - kb)
            if dk <= nms_radius and abs(int(ma) - mb) <= nms_radius:
                suppressed = True
                break
            # wrapped comparison: offsets are symmetric around zero, so
            # the mirror of offset index m is n_off - 1 - m
            if n_ang - dk <= nms_radius and abs((n_off - 1 - int(ma)) - mb) <= nms_radius:
                suppressed = True
                break
        if not suppressed:
            kept.append((int(ka), int(ma)))

    # sub-bin offset refinement: a wall of finite thickness fills a small
    # plateau of offset bins; the vote centroid lands on the wall center
    # instead of whichever plateau end won the argmax
    lines = []
    for k, m in kept:
        lo = max(0, m - nms_radius)
        hi = min(n_off, m + nms_radius + 1)
        w = bins[k, lo:hi]
        rho = float(np.dot(acc.offsets[lo:hi], w) / w.sum())
        lines.append(line_trait(acc.angles[k], rho))
    if frame is not None and merge_distance > 0:
        lines = _merge_same_lines(lines, frame, merge_distance)
    return sorted(lines, key=lambda t: (t.theta, t.rho))


def _merge_same_lines(lines: list[Trait], frame, merge_distance: float) -> list[Trait]:
    """Drop lines lying within merge_distance of a stronger one in-frame.

    ``lines`` must be ordered strongest first; order is preserved among
    the survivors.
    """
    kept: list[tuple[Trait, np.ndarray | None]] = []
    for cand in lines:
        seg = clip_to_frame(cand, frame)
        probes = None
        if seg is not None:
            probes = np.array([seg[0], 0.5 * (seg[0] + seg[1]), seg[1]])
        duplicate = False
        if probes is not None:
            for strong, _ in kept:
                if np.all(np.abs(strong.signed_distance(probes)) <= merge_distance):
                    duplicate = True
                    break
        if not duplicate:
            kept.append((cand, probes))
    return [t for t, _ in kept]
