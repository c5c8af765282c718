"""curvesig: curvature signatures of multivariate sequences.

A frame sequence is a path through pixel space.  Resampling that path at
uniform arclength removes traversal speed; the first and second Frenet
curvatures of the resampled path form a compact, isometry-invariant
signature; distribution statistics of the curvature channels feed a
from-scratch random forest for action classification.
"""

from .crv import read_crv, write_crv
from .curves import (
    ArclengthProfile,
    Curve,
    ReparamCurve,
    arclength_profile,
    reparameterize,
)
from .errors import (
    CurveSigError,
    DecodeError,
    DegenerateCurveError,
    DimensionMismatchError,
    ManifestError,
    ModelFormatError,
    TooShortError,
)
from .features import FeatureVector, extract_features, feature_matrix, feature_names
from .forest import (
    Dataset,
    ForestModel,
    cross_validate,
    evaluate,
    gini,
    load_model,
    predict,
    save_model,
    train,
)
from .frenet import (
    CurvatureSignature,
    FrenetFrame,
    derivatives,
    frenet_curvatures,
    frenet_frames,
)
from .ingest import (
    FrameSequence,
    MaskSequence,
    apply_masks,
    flatten,
    flip_horizontal,
    load_frames,
    load_masks,
    load_series,
    median_background,
    subtract_background,
    unflatten,
)
from .pipeline import (
    Manifest,
    ManifestEntry,
    PipelineConfig,
    load_video_curve,
    read_manifest,
    signature_for_curve,
    signature_for_video,
)
from .synth import SYNTH_CLASSES, make_synthetic_dataset, write_synthetic_dataset

__version__ = "0.1.0"

__all__ = [
    "ArclengthProfile",
    "Curve",
    "CurvatureSignature",
    "CurveSigError",
    "Dataset",
    "DecodeError",
    "DegenerateCurveError",
    "DimensionMismatchError",
    "FeatureVector",
    "ForestModel",
    "FrameSequence",
    "FrenetFrame",
    "Manifest",
    "ManifestEntry",
    "ManifestError",
    "MaskSequence",
    "ModelFormatError",
    "PipelineConfig",
    "ReparamCurve",
    "SYNTH_CLASSES",
    "TooShortError",
    "apply_masks",
    "arclength_profile",
    "cross_validate",
    "derivatives",
    "evaluate",
    "extract_features",
    "feature_matrix",
    "feature_names",
    "flatten",
    "flip_horizontal",
    "frenet_curvatures",
    "frenet_frames",
    "gini",
    "load_frames",
    "load_masks",
    "load_model",
    "load_series",
    "load_video_curve",
    "make_synthetic_dataset",
    "median_background",
    "predict",
    "read_crv",
    "read_manifest",
    "reparameterize",
    "save_model",
    "signature_for_curve",
    "signature_for_video",
    "subtract_background",
    "train",
    "unflatten",
    "write_crv",
    "write_synthetic_dataset",
]
