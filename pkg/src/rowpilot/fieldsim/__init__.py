"""Deterministic synthetic scenes: labeled crop-row and dock frames."""

from .camera import CameraConfig, Pose, camera_basis, pixel_rays, project_points, vanishing_point
from .field import (
    DockSceneConfig,
    FieldConfig,
    FrameWithLabels,
    gen_field_frame,
    plant_list,
    weed_list,
)
from .dock import beacon_centers, dock_camera, estimate_distance, gen_dock_frame, render_dock_scene
from .corpus import gen_corpus, read_manifest

__all__ = [name for name in dir() if not name.startswith("_")]
