from .brief import compute_orientation, describe_binary, hamming
from .dog import ScaleSpace, build_scale_space, describe_float, detect_dog, dominant_orientation
from .extract import (
    PASSTHROUGH,
    ExtractorConfig,
    extract,
    read_feature_file,
    register_extractor,
    registered_kinds,
    write_feature_file,
)
from .fast import detect_fast
from .keypoint import BINARY, DESCRIPTOR_DIMS, FLOAT, FeatureSet, Keypoint, lift

__all__ = [
    "BINARY", "FLOAT", "PASSTHROUGH", "DESCRIPTOR_DIMS",
    "ExtractorConfig", "FeatureSet", "Keypoint", "ScaleSpace",
    "build_scale_space", "compute_orientation", "describe_binary", "describe_float",
    "detect_dog", "detect_fast", "dominant_orientation", "extract", "hamming", "lift",
    "read_feature_file", "register_extractor", "registered_kinds", "write_feature_file",
]
