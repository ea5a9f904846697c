"""Hypothesis evaluation: the arrangement match score.

A hypothesis is judged by how well it aligns the two region
decompositions as a whole, not just the face pair it was estimated
from. Faces of the first map are transformed into the second map's
frame, associated one-to-one with faces there, and each associated pair
contributes its exponential IoU score weighted by the smaller of the
two relative face areas. The score ranks hypotheses for one map pair;
it is not comparable across different pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Point
from shapely.geometry import Polygon as _ShapelyPolygon

from .arrangement import Arrangement, Face
from .alignment import Hypothesis
from .geometry import (
    Transform2,
    decompose_scales,
    estimate_similarity,
    ombb,
    polygon_area,
    polygon_intersection_area,
)


@dataclass(frozen=True)
class Association:
    """One-to-one face pairing between two arrangements under a transform."""

    pairs: frozenset[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))


@dataclass
class PairContribution:
    pair: tuple[int, int]
    min_weight: float
    face_score: float

    @property
    def value(self) -> float:
        return self.min_weight * self.face_score


@dataclass
class ScoredAlignment:
    hypothesis: Hypothesis | None
    score: float
    association: Association
    contributions: list[PairContribution] = field(default_factory=list)


def _exp_iou(iou: float) -> float:
    return (math.exp(iou) - 1.0) / (math.e - 1.0)


def face_match_score(f_i, f_j) -> float:
    """Exponential IoU score of two polygons in a common frame.

    (e^IoU - 1) / (e - 1): 1 for identical polygons, 0 for disjoint
    ones, and growing faster near a perfect match so small improvements
    of an already-good overlap count more.
    """
    inter = polygon_intersection_area(f_i, f_j)
    if inter <= 0.0:
        return 0.0
    union = polygon_area(f_i) + polygon_area(f_j) - inter
    if union <= 0.0:
        return 0.0
    return _exp_iou(inter / union)


def _face_shape(face: Face, t: Transform2 | None = None) -> _ShapelyPolygon:
    shell = face.polygon if t is None else t.apply(face.polygon)
    holes = face.holes if t is None else [t.apply(h) for h in face.holes]
    poly = _ShapelyPolygon(shell, holes=[h for h in holes if len(h) >= 3])
    if not poly.is_valid:
        poly = poly.buffer(0)
    return poly


def _shape_pair_score(a: _ShapelyPolygon, b: _ShapelyPolygon) -> float:
    inter = a.intersection(b).area
    if inter <= 0.0:
        return 0.0
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return _exp_iou(inter / union)


def _associate_shapes(shapes1, centers1, areas1, shapes2, centers2, areas2) -> Association:
    in1 = [
        [shapes1[i].contains(Point(centers2[j])) for j in range(len(shapes2))]
        for i in range(len(shapes1))
    ]
    in2 = [
        [shapes2[j].contains(Point(centers1[i])) for i in range(len(shapes1))]
        for j in range(len(shapes2))
    ]

    def area_diff(i: int, j: int) -> float:
        return abs(areas1[i] - areas2[j])

    # best competing candidate per face, by (area difference, index)
    best_for_1 = {}
    for i in range(len(shapes1)):
        cands = [j for j in range(len(shapes2)) if in1[i][j]]
        if cands:
            best_for_1[i] = min(cands, key=lambda j: (area_diff(i, j), j))
    best_for_2 = {}
    for j in range(len(shapes2)):
        cands = [i for i in range(len(shapes1)) if in2[j][i]]
        if cands:
            best_for_2[j] = min(cands, key=lambda i: (area_diff(i, j), i))

    pairs = set()
    for i in range(len(shapes1)):
        for j in range(len(shapes2)):
            if not (in1[i][j] and in2[j][i]):
                continue
            if best_for_1.get(i) == j and best_for_2.get(j) == i:
                pairs.add((i, j))
    return Association(pairs=frozenset(pairs))


def _prepare(a1: Arrangement, a2: Arrangement, t: Transform2):
    shapes1 = [_face_shape(f, t) for f in a1.faces]
    centers1 = [t.apply(f.centroid) for f in a1.faces]
    shapes2 = [_face_shape(f) for f in a2.faces]
    centers2 = [f.centroid for f in a2.faces]
    areas1 = [s.area for s in shapes1]
    areas2 = [s.area for s in shapes2]
    return shapes1, centers1, areas1, shapes2, centers2, areas2


def associate(a1: Arrangement, a2: Arrangement, t: Transform2) -> Association:
    """One-to-one face association under mutual center enclosure.

    Faces of ``a1`` are mapped by ``t`` into the frame of ``a2``. A pair
    is a candidate when each face strictly contains the other's center
    (the vertex-mean of the boundary). When several candidates compete
    for one face, only the one with the smallest surface-area difference
    survives, on both sides, so the result is injective both ways; exact
    area ties go to the lower face index.
    """
    return _associate_shapes(*_prepare(a1, a2, t))


def arrangement_match_score(a1: Arrangement, a2: Arrangement, t: Transform2) -> ScoredAlignment:
    """Score a transform by the weighted face-overlap sum.

    Weights are per-arrangement relative face areas (summing to 1 on
    each side), computed in each map's own frame; overlap is measured
    after mapping the first map's faces by the transform.
    """
    total1 = sum(f.area for f in a1.faces)
    total2 = sum(f.area for f in a2.faces)
    w1 = [f.area / total1 for f in a1.faces]
    w2 = [f.area / total2 for f in a2.faces]

    shapes1, centers1, areas1, shapes2, centers2, areas2 = _prepare(a1, a2, t)
    assoc = _associate_shapes(shapes1, centers1, areas1, shapes2, centers2, areas2)
    contributions = []
    score = 0.0
    for i, j in assoc:
        s_f = _shape_pair_score(shapes1[i], shapes2[j])
        c = PairContribution(pair=(i, j), min_weight=min(w1[i], w2[j]), face_score=s_f)
        contributions.append(c)
        score += c.value
    return ScoredAlignment(
        hypothesis=None, score=score, association=assoc, contributions=contributions
    )


def select_best(a1: Arrangement, a2: Arrangement, hyps) -> ScoredAlignment:
    """Score every hypothesis and pick the winner deterministically.

    Ties on the score are broken by larger association, then by scale
    closest to the pool's median scale, then by lowest (source face,
    target face, shift). Every hypothesis gets its score field set.
    """
    hyps = list(hyps)
    if not hyps:
        raise ValueError("empty hypothesis pool")

    scored: list[ScoredAlignment] = []
    scales = []
    for h in hyps:
        result = arrangement_match_score(a1, a2, h.transform)
        result.hypothesis = h
        h.score = result.score
        scored.append(result)
        dec = decompose_scales(h.transform)
        scales.append(math.sqrt(dec.s_x * dec.s_y))

    median_scale = float(np.median(scales))
    best = min(
        range(len(scored)),
        key=lambda k: (
            -scored[k].score,
            -len(scored[k].association),
            abs(scales[k] - median_scale),
            scored[k].hypothesis.sort_key(),
        ),
    )
    return scored[best]


def refine_alignment(a1: Arrangement, a2: Arrangement, winner: ScoredAlignment) -> ScoredAlignment:
    """Re-estimate the winning transform over all associated face pairs.

    A hypothesis comes from a single face pair, so small corner errors
    there leverage into translation error far from that face. Fitting a
    similarity over the bounding-box corners of every associated pair
    spreads the constraints across the map. The refined transform is
    kept only when it does not lower the score.
    """
    if winner.hypothesis is None or len(winner.association) == 0:
        return winner
    t = winner.hypothesis.transform
    src_pts = []
    dst_pts = []
    for i, j in winner.association:
        try:
            box1 = ombb(a1.faces[i].polygon)
            box2 = ombb(a2.faces[j].polygon)
        except ValueError:
            continue
        mapped = t.apply(box1)
        shifts = [np.sum(np.hypot(*(np.roll(mapped, -s, axis=0) - box2).T)) for s in range(4)]
        s = int(np.argmin(shifts))
        src_pts.append(np.roll(box1, -s, axis=0))
        dst_pts.append(box2)
    if not src_pts:
        return winner
    try:
        refined_t = estimate_similarity(np.vstack(src_pts), np.vstack(dst_pts))
    except ValueError:
        return winner

    rescored = arrangement_match_score(a1, a2, refined_t)
    # spreading the fit over all pairs may trade a sliver of score (the
    # exponential rewards one perfect face) for global accuracy; only a
    # clear drop signals that a bad association corrupted the fit
    if rescored.score < 0.9 * winner.score:
        return winner
    h = winner.hypothesis
    refined_h = Hypothesis(
        transform=refined_t,
        source_face=h.source_face,
        target_face=h.target_face,
        shift=h.shift,
        kind=h.kind,
        score=rescored.score,
    )
    rescored.hypothesis = refined_h
    return rescored
