"""Python bindings for the artmap camera-lidar artifact mapping core."""

import json

from ._artmap import (
    ConfigError,
    ContractViolation,
    Error,
    IngestionError,
    InvalidDepthError,
    ParseError,
    PlacementError,
    back_project,
    config_digest,
    directory_digest,
    fuse_centroid,
    fusion_weight,
    map_dataset,
    project,
    radius_outlier_removal,
    simulate,
    voxel_downsample,
)
from . import _artmap


def config(yaml: str = "") -> dict:
    """Effective configuration after applying `yaml` over the defaults."""
    return json.loads(_artmap.config_json(yaml))


def load_map(text: str) -> dict:
    """Parses map YAML text into the JSON map schema."""
    return json.loads(_artmap.map_yaml_to_json(text))


def evaluate(map_yaml: str, dataset, xy_only: bool = False) -> dict:
    """Scores map YAML text against a dataset's scene truth."""
    return json.loads(_artmap.evaluate(map_yaml, str(dataset), xy_only))


__all__ = [
    "ConfigError", "ContractViolation", "Error", "IngestionError", "InvalidDepthError",
    "ParseError", "PlacementError", "back_project", "config", "config_digest",
    "directory_digest", "evaluate", "fuse_centroid", "fusion_weight", "load_map",
    "map_dataset", "project", "radius_outlier_removal", "simulate", "voxel_downsample",
]
