"""2D map alignment by region decomposition.

Pipeline: detect straight-line traits in each map, partition the map
plane into faces with a planar arrangement, prune the arrangement to a
region segmentation using the normalized distance transform, generate
transform hypotheses by matching regions across the two maps, and pick
the hypothesis with the best arrangement match score.
"""

from .alignment import (
    Hypothesis,
    ShapeDescriptor,
    generate_hypotheses_exact,
    generate_hypotheses_ombb,
    match_descriptors,
    reject_false_positives,
    shape_descriptor,
)
from .arrangement import (
    Arrangement,
    Edge,
    Face,
    PrimeGraph,
    build_arrangement,
    edge_band_mean,
    face_centroid,
    face_polygon,
    prune,
    serialize_arrangement,
)
from .config import PipelineConfig, load_config_file
from .errors import (
    EmptyPoolError,
    InputError,
    MapAlignError,
    NoFacesError,
    NoTraitsError,
)
from .geometry import (
    ScaleDecomposition,
    Trait,
    Transform2,
    decompose_scales,
    estimate_affine,
    estimate_similarity,
    line_through,
    line_trait,
    ombb,
    polygon_area,
    polygon_intersection_area,
    polygon_union_area,
    similarity_params,
    trait_intersection,
)
from .pipeline import (
    AlignmentReport,
    InterpretedMap,
    align_maps,
    interpret_map,
    parse_line_list,
)
from .raster import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    DistanceMap,
    OccupancyGrid,
    RadiographyAccumulator,
    detect_line_traits,
    distance_map,
    load_grid,
    radiography,
)
from .scoring import (
    Association,
    ScoredAlignment,
    arrangement_match_score,
    associate,
    face_match_score,
    select_best,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentReport",
    "Arrangement",
    "Association",
    "DistanceMap",
    "Edge",
    "EmptyPoolError",
    "Face",
    "FREE",
    "Hypothesis",
    "InputError",
    "InterpretedMap",
    "MapAlignError",
    "NoFacesError",
    "NoTraitsError",
    "OCCUPIED",
    "OccupancyGrid",
    "PipelineConfig",
    "PrimeGraph",
    "RadiographyAccumulator",
    "ScaleDecomposition",
    "ScoredAlignment",
    "ShapeDescriptor",
    "Trait",
    "Transform2",
    "UNKNOWN",
    "align_maps",
    "arrangement_match_score",
    "associate",
    "build_arrangement",
    "decompose_scales",
    "detect_line_traits",
    "distance_map",
    "edge_band_mean",
    "estimate_affine",
    "estimate_similarity",
    "face_centroid",
    "face_match_score",
    "face_polygon",
    "generate_hypotheses_exact",
    "generate_hypotheses_ombb",
    "interpret_map",
    "line_through",
    "line_trait",
    "load_config_file",
    "load_grid",
    "match_descriptors",
    "ombb",
    "parse_line_list",
    "polygon_area",
    "polygon_intersection_area",
    "polygon_union_area",
    "prune",
    "radiography",
    "reject_false_positives",
    "select_best",
    "serialize_arrangement",
    "shape_descriptor",
    "similarity_params",
    "trait_intersection",
]
