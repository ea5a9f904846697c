"""End-to-end stages: interpret one map, align two maps, write artifacts.

A map input is either a grayscale bitmap (PGM or PNG), which goes
through trait detection, or a plain-text line list (``x1 y1 x2 y2`` per
line), whose segments become traits verbatim. Line-list inputs are
rasterized onto a canvas so the same distance-map pruning applies to
both kinds.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .alignment import (
    Hypothesis,
    generate_hypotheses_exact,
    generate_hypotheses_ombb,
    reject_false_positives,
)
from .arrangement import Arrangement, build_arrangement, prune, serialize_arrangement
from .config import PipelineConfig
from .errors import EmptyPoolError, InputError, NoTraitsError
from .geometry import Trait, decompose_scales, line_through, similarity_params
from .raster import (
    FREE,
    OCCUPIED,
    DistanceMap,
    OccupancyGrid,
    despeckle,
    detect_line_traits,
    distance_map,
    load_grid,
    occupied_bbox,
    radiography,
)
from .render import render_faces, render_overlay
from .scoring import ScoredAlignment, refine_alignment, select_best

BITMAP_SUFFIXES = {".pgm", ".png"}
LINE_LIST_MARGIN = 12.0  # px of breathing room around line-list inputs


@dataclass
class MapStats:
    path: str
    kind: str
    traits: int = 0
    vertices_pre: int = 0
    edges_pre: int = 0
    faces_pre: int = 0
    vertices_post: int = 0
    edges_post: int = 0
    faces_post: int = 0


@dataclass
class InterpretedMap:
    grid: OccupancyGrid
    dmap: DistanceMap
    traits: list[Trait]
    arrangement_pre: Arrangement
    arrangement: Arrangement
    stats: MapStats
    timings: dict[str, float] = field(default_factory=dict)


@dataclass
class AlignmentReport:
    map1: MapStats
    map2: MapStats
    mode: str
    hypotheses_initial: int
    hypotheses_after_rejection: int
    winner: ScoredAlignment
    low_confidence: bool
    timings: dict[str, float] = field(default_factory=dict)

    def to_text(self) -> str:
        h = self.winner.hypothesis
        scale, angle, trans = similarity_params(h.transform)
        lines = []
        for label, stats in (("map1", self.map1), ("map2", self.map2)):
            lines += [
                f"{label}.path = {stats.path}",
                f"{label}.kind = {stats.kind}",
                f"{label}.traits = {stats.traits}",
                f"{label}.vertices_pre = {stats.vertices_pre}",
                f"{label}.edges_pre = {stats.edges_pre}",
                f"{label}.faces_pre = {stats.faces_pre}",
                f"{label}.vertices_post = {stats.vertices_post}",
                f"{label}.edges_post = {stats.edges_post}",
                f"{label}.faces_post = {stats.faces_post}",
            ]
        lines += [
            f"mode = {self.mode}",
            f"hypotheses.initial = {self.hypotheses_initial}",
            f"hypotheses.after_rejection = {self.hypotheses_after_rejection}",
            f"winner.transform = {_fmt_floats(h.transform.to_flat())}",
            f"winner.score = {self.winner.score:.10g}",
            f"winner.source_face = {h.source_face}",
            f"winner.target_face = {h.target_face}",
            f"winner.shift = {h.shift}",
            f"winner.kind = {h.kind}",
            f"winner.scale = {scale:.10g}",
            f"winner.rotation_deg = {math.degrees(angle):.10g}",
            f"winner.translation = {_fmt_floats(trans)}",
            f"winner.association_size = {len(self.winner.association)}",
            f"low_confidence = {str(self.low_confidence).lower()}",
        ]
        for name in sorted(self.timings):
            lines.append(f"timing.{name}_s = {self.timings[name]:.3f}")
        return "\n".join(lines) + "\n"


def _fmt_floats(values) -> str:
    return " ".join(f"{float(v):.10g}" for v in values)


def parse_line_list(path) -> list[tuple[np.ndarray, np.ndarray]]:
    """Read segments from text: one 'x1 y1 x2 y2' per line, # comments."""
    segments = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) != 4:
            raise InputError(f"{path}:{lineno}: expected 'x1 y1 x2 y2'")
        try:
            x1, y1, x2, y2 = (float(p) for p in parts)
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
        segments.append((np.array([x1, y1]), np.array([x2, y2])))
    return segments


def rasterize_segments(segments, frame, thickness: int = 2) -> OccupancyGrid:
    """Draw segments as occupied strokes on a free canvas covering the frame."""
    x0, y0, x1, y1 = frame
    w = int(math.ceil(x1 - x0)) + 1
    h = int(math.ceil(y1 - y0)) + 1
    cells = np.full((h, w), FREE, dtype=np.uint8)
    half = max(0, (thickness - 1) // 2 + (thickness - 1) % 2)
    for p, q in segments:
        length = math.hypot(*(q - p))
        steps = max(2, int(math.ceil(length * 2)) + 1)
        ts = np.linspace(0.0, 1.0, steps)
        pts = p[None, :] + ts[:, None] * (q - p)[None, :]
        cols = np.rint(pts[:, 0] - x0).astype(int)
        rows = np.rint(pts[:, 1] - y0).astype(int)
        for dc in range(-half, half + 1):
            for dr in range(-half, half + 1):
                cc = np.clip(cols + dc, 0, w - 1)
                rr = np.clip(rows + dr, 0, h - 1)
                cells[rr, cc] = OCCUPIED
    return OccupancyGrid(cells=cells, origin=np.array([x0, y0]))


def _is_bitmap(path) -> bool:
    return Path(path).suffix.lower() in BITMAP_SUFFIXES


def interpret_map(path, config: PipelineConfig) -> InterpretedMap:
    """Load one map, detect traits, build and prune its arrangement."""
    timings: dict[str, float] = {}
    t0 = time.perf_counter()

    if _is_bitmap(path):
        kind = "bitmap"
        grid = load_grid(path, config.occupied_threshold)
        grid = despeckle(grid, config.despeckle_min_px)
        if not np.any(grid.cells == OCCUPIED):
            raise NoTraitsError(f"{path}: map has no occupied cells")
        dmap = distance_map(grid)
        acc = radiography(
            grid,
            angle_bins=config.radiography.angle_bins,
            offset_bin_size=config.radiography.offset_bin_size,
        )
        frame = grid.frame()
        # wall evidence only exists where occupied pixels are; merging
        # near-identical detections over the content extent avoids
        # keeping ridge artifacts of long walls on large canvases; the
        # pad keeps detected lines just outside thin content in play
        bbox = occupied_bbox(grid)
        if bbox is None:
            merge_frame = frame
        else:
            pad = config.radiography.merge_distance + 2.0
            merge_frame = (bbox[0] - pad, bbox[1] - pad, bbox[2] + pad, bbox[3] + pad)
        traits = detect_line_traits(
            acc,
            peak_threshold_ratio=config.radiography.peak_threshold_ratio,
            nms_radius=config.radiography.nms_radius,
            frame=merge_frame,
            merge_distance=config.radiography.merge_distance,
        )
    else:
        kind = "lines"
        segments = parse_line_list(path)
        if not segments:
            raise NoTraitsError(f"{path}: no line segments found")
        pts = np.concatenate([np.stack(seg) for seg in segments])
        m = LINE_LIST_MARGIN
        frame = (
            float(pts[:, 0].min() - m),
            float(pts[:, 1].min() - m),
            float(pts[:, 0].max() + m),
            float(pts[:, 1].max() + m),
        )
        traits = []
        for p, q in segments:
            try:
                traits.append(line_through(p, q))
            except ValueError:
                continue
        grid = rasterize_segments(segments, frame)
        dmap = distance_map(grid)
    timings["traits"] = time.perf_counter() - t0

    if not traits:
        raise NoTraitsError(f"{path}: no traits detected")

    t1 = time.perf_counter()
    arr_pre = build_arrangement(traits, frame)
    timings["arrangement"] = time.perf_counter() - t1
    t2 = time.perf_counter()
    arr = prune(arr_pre, dmap, thr_e=config.prune.thr_e, band_radius=config.prune.band_radius)
    timings["prune"] = time.perf_counter() - t2

    stats = MapStats(
        path=str(path),
        kind=kind,
        traits=len(traits),
        vertices_pre=len(arr_pre.prime.vertices),
        edges_pre=len(arr_pre.prime.edges),
        faces_pre=len(arr_pre.faces),
        vertices_post=len(arr.prime.vertices),
        edges_post=len(arr.prime.edges),
        faces_post=len(arr.faces),
    )
    return InterpretedMap(
        grid=grid,
        dmap=dmap,
        traits=traits,
        arrangement_pre=arr_pre,
        arrangement=arr,
        stats=stats,
        timings=timings,
    )


def generate_hypotheses(
    m1: InterpretedMap, m2: InterpretedMap, config: PipelineConfig
) -> tuple[list[Hypothesis], list[Hypothesis]]:
    """Initial and post-rejection hypothesis pools for a map pair."""
    matching = config.matching
    if matching.mode == "exact":
        initial = generate_hypotheses_exact(
            m1.arrangement,
            m2.arrangement,
            tol_angle=matching.tol_angle,
            tol_ratio=matching.tol_ratio,
            eps_corner=matching.eps_corner,
        )
    else:
        initial = generate_hypotheses_ombb(m1.arrangement, m2.arrangement)
    survivors = reject_false_positives(initial, thr_s=matching.thr_s)
    return initial, survivors


def align_maps(
    path1,
    path2,
    config: PipelineConfig | None = None,
    out_path=None,
    dump_pool_path=None,
    overlay_path=None,
) -> AlignmentReport:
    """Full alignment of two maps, optionally writing result artifacts."""
    config = config or PipelineConfig()
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=2) as pool:
        f1 = pool.submit(interpret_map, path1, config)
        f2 = pool.submit(interpret_map, path2, config)
        m1 = f1.result()
        m2 = f2.result()
    timings["interpret"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    initial, survivors = generate_hypotheses(m1, m2, config)
    timings["hypotheses"] = time.perf_counter() - t1
    if not survivors:
        raise EmptyPoolError(
            f"no hypothesis survived (initial {len(initial)}, after rejection 0); "
            "the maps may lack enough matchable regions"
        )

    t2 = time.perf_counter()
    winner = select_best(m1.arrangement, m2.arrangement, survivors)
    if config.matching.refine:
        winner = refine_alignment(m1.arrangement, m2.arrangement, winner)
    timings["scoring"] = time.perf_counter() - t2

    report = AlignmentReport(
        map1=m1.stats,
        map2=m2.stats,
        mode=config.matching.mode,
        hypotheses_initial=len(initial),
        hypotheses_after_rejection=len(survivors),
        winner=winner,
        low_confidence=winner.score <= 0.0,
        timings=timings,
    )

    if out_path is not None:
        Path(out_path).write_text(report.to_text(), encoding="utf-8")
    if dump_pool_path is not None:
        survivor_ids = {id(h) for h in survivors}
        Path(dump_pool_path).write_text(
            dump_pool(initial, survivor_ids), encoding="utf-8"
        )
    if overlay_path is not None:
        render_overlay(m1.grid, m2.grid, winner.hypothesis.transform, overlay_path)
    return report


def dump_pool(hypotheses, survivor_ids) -> str:
    """Line-delimited hypothesis records.

    Columns: source face, target face, shift, kind, the 9 row-major
    transform entries, the two axis scales, kept flag, score (or nan
    when the hypothesis was rejected before scoring).
    """
    lines = ["# src dst shift kind m00 m01 m02 m10 m11 m12 m20 m21 m22 s_x s_y kept score"]
    for h in hypotheses:
        dec = decompose_scales(h.transform)
        score = h.score if h.score is not None else float("nan")
        kept = 1 if id(h) in survivor_ids else 0
        lines.append(
            f"{h.source_face} {h.target_face} {h.shift} {h.kind} "
            f"{_fmt_floats(h.transform.to_flat())} "
            f"{dec.s_x:.10g} {dec.s_y:.10g} {kept} {score:.10g}"
        )
    return "\n".join(lines) + "\n"


def interpret_to_artifacts(path, config: PipelineConfig | None = None, out_path=None, render_path=None) -> InterpretedMap:
    """Interpret a single map and optionally write its dump/rendering."""
    config = config or PipelineConfig()
    interp = interpret_map(path, config)
    if out_path is not None:
        Path(out_path).write_text(serialize_arrangement(interp.arrangement), encoding="utf-8")
    if render_path is not None:
        render_faces(interp.arrangement, render_path)
    return interp
