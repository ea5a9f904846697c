"""Transform hypothesis generation by matching faces across two maps.

Two strategies:

* exact: faces are matched by a cyclic shape descriptor (corner angles
  plus edge-length ratios) and each matching cyclic shift yields a
  similarity transform estimated from the corner correspondences;
* simplified: every face is reduced to its oriented minimum bounding
  box, all 4 cyclic corner alignments of every face pair yield affine
  transforms, and non-uniformly scaled results are rejected afterwards.

All transforms map coordinates of the first map into the second.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .arrangement import Arrangement
from .geometry import (
    Transform2,
    decompose_scales,
    estimate_affine,
    estimate_similarity,
    ombb,
    polygon_perimeter,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL_ANGLE = math.radians(10.0)
DEFAULT_TOL_RATIO = 0.1
DEFAULT_EPS_CORNER = math.radians(5.0)


@dataclass(frozen=True)
class ShapeDescriptor:
    """Cyclic (corner angle, edge length ratio) sequence of a face.

    Corners are walked counter-clockwise; vertices whose interior angle
    is within ``eps_corner`` of pi are not corners and dissolve into the
    surrounding edge. Ratios are edge lengths over the perimeter and sum
    to 1.
    """

    angles: np.ndarray
    ratios: np.ndarray
    corners: np.ndarray

    def __len__(self) -> int:
        return len(self.angles)


@dataclass
class Hypothesis:
    """One candidate map1 -> map2 transform with its provenance."""

    transform: Transform2
    source_face: int
    target_face: int
    shift: int
    kind: str  # "exact" or "ombb"
    score: float | None = None

    def sort_key(self):
        return (self.source_face, self.target_face, self.shift)


def shape_descriptor(polygon, eps_corner: float = DEFAULT_EPS_CORNER) -> ShapeDescriptor:
    """Build the cyclic corner descriptor of a CCW simple polygon."""
    v = np.asarray(polygon, dtype=float)
    if v.ndim != 2 or len(v) < 3:
        raise ValueError("polygon needs at least 3 vertices")

    n = len(v)
    incoming = v - np.roll(v, 1, axis=0)
    outgoing = np.roll(v, -1, axis=0) - v
    turn = np.arctan2(
        incoming[:, 0] * outgoing[:, 1] - incoming[:, 1] * outgoing[:, 0],
        (incoming * outgoing).sum(axis=1),
    )
    interior = math.pi - turn
    corner_idx = np.nonzero(np.abs(turn) > eps_corner)[0]
    if len(corner_idx) < 3:
        raise ValueError("fewer than 3 corners after collinear-vertex merging")

    edge_len = np.hypot(outgoing[:, 0], outgoing[:, 1])
    m = len(corner_idx)
    ratios = np.empty(m)
    for k in range(m):
        a = corner_idx[k]
        b = corner_idx[(k + 1) % m]
        # path length from corner a to the next corner, through any
        # dissolved vertices in between
        if b > a:
            ratios[k] = edge_len[a:b].sum()
        else:
            ratios[k] = edge_len[a:].sum() + edge_len[:b].sum()
    perimeter = polygon_perimeter(v)
    ratios /= perimeter

    return ShapeDescriptor(
        angles=interior[corner_idx],
        ratios=ratios,
        corners=v[corner_idx].copy(),
    )


def match_descriptors(
    a: ShapeDescriptor,
    b: ShapeDescriptor,
    tol_angle: float = DEFAULT_TOL_ANGLE,
    tol_ratio: float = DEFAULT_TOL_RATIO,
) -> list[int]:
    """Cyclic shifts of ``a`` that align it with ``b``.

    Equal entry counts are a necessary condition. Shift s matches when
    every entry of a shifted by s agrees with the corresponding entry of
    b within the tolerances. Passing an infinite tolerance disables that
    feature entirely.
    """
    n = len(a)
    if n != len(b):
        return []
    shifts = []
    for s in range(n):
        rolled_angles = np.roll(a.angles, -s)
        rolled_ratios = np.roll(a.ratios, -s)
        if np.all(np.abs(rolled_angles - b.angles) <= tol_angle) and np.all(
            np.abs(rolled_ratios - b.ratios) <= tol_ratio
        ):
            shifts.append(s)
    return shifts


def _descriptors(arr: Arrangement, eps_corner: float) -> dict[int, ShapeDescriptor]:
    out = {}
    for i, face in enumerate(arr.faces):
        try:
            out[i] = shape_descriptor(face.polygon, eps_corner)
        except ValueError as exc:
            logger.warning("face %d skipped for descriptor matching: %s", i, exc)
    return out


def generate_hypotheses_exact(
    a1: Arrangement,
    a2: Arrangement,
    tol_angle: float = DEFAULT_TOL_ANGLE,
    tol_ratio: float = DEFAULT_TOL_RATIO,
    eps_corner: float = DEFAULT_EPS_CORNER,
) -> list[Hypothesis]:
    """Similarity hypotheses from exact shape-descriptor matches."""
    d1 = _descriptors(a1, eps_corner)
    d2 = _descriptors(a2, eps_corner)
    hyps: list[Hypothesis] = []
    for i in sorted(d1):
        for j in sorted(d2):
            da, db = d1[i], d2[j]
            if len(da) != len(db):
                continue
            for s in match_descriptors(da, db, tol_angle, tol_ratio):
                src = np.roll(da.corners, -s, axis=0)
                try:
                    t = estimate_similarity(src, db.corners)
                except ValueError as exc:
                    logger.warning("pair (%d, %d) shift %d skipped: %s", i, j, s, exc)
                    continue
                hyps.append(
                    Hypothesis(transform=t, source_face=i, target_face=j, shift=s, kind="exact")
                )
    hyps.sort(key=Hypothesis.sort_key)
    return hyps


def generate_hypotheses_ombb(a1: Arrangement, a2: Arrangement) -> list[Hypothesis]:
    """Affine hypotheses from all bounding-box corner alignments.

    Emits 4 * |F1| * |F2| hypotheses (one per face pair and cyclic
    corner shift), minus pairs whose face is degenerate for a bounding
    box. Pair them with ``reject_false_positives`` to discard the
    non-uniformly scaled ones.
    """

    def boxes(arr: Arrangement) -> dict[int, np.ndarray]:
        out = {}
        for i, face in enumerate(arr.faces):
            try:
                out[i] = ombb(face.polygon)
            except ValueError as exc:
                logger.warning("face %d has no bounding box: %s", i, exc)
        return out

    b1 = boxes(a1)
    b2 = boxes(a2)
    hyps: list[Hypothesis] = []
    for i in sorted(b1):
        for j in sorted(b2):
            for s in range(4):
                src = np.roll(b1[i], -s, axis=0)
                t = estimate_affine(src, b2[j])
                hyps.append(
                    Hypothesis(transform=t, source_face=i, target_face=j, shift=s, kind="ombb")
                )
    return hyps


def reject_false_positives(hyps, thr_s: float = 1.2) -> list[Hypothesis]:
    """Keep hypotheses that qualify as similarity transforms.

    A survivor's axis scales must satisfy 1/thr_s < s_x/s_y < thr_s and
    its transform must not mirror. Order is preserved.
    """
    if thr_s <= 1.0:
        raise ValueError("thr_s must be > 1")
    kept = []
    for h in hyps:
        dec = decompose_scales(h.transform)
        if dec.reflection:
            continue
        if 1.0 / thr_s < dec.ratio < thr_s:
            kept.append(h)
    return kept
