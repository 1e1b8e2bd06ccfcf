import math
import os

import numpy as np
import pytest

from rowpilot import imgcore as ic
from rowpilot.fieldsim import (
    CameraConfig,
    FieldConfig,
    Pose,
    dock_camera,
    estimate_distance,
    gen_corpus,
    gen_dock_frame,
    gen_field_frame,
    plant_list,
    project_points,
    read_manifest,
    render_dock_scene,
    vanishing_point,
    weed_list,
)
from rowpilot.fieldsim.corpus import _frame_seed
from rowpilot.fieldsim.field import _near_foliage
from rowpilot.ppmio import read_pnm


# ---------------------------------------------------------------------------
# projection geometry, checked against hand-written trig


def test_project_point_matches_hand_trig():
    # heading pi/2 (straight up an aisle), camera tilted 75 deg from vertical,
    # so the axis pitches 15 deg down. Basis written out by hand:
    #   forward = (0, cos b, -sin b), right = (1, 0, 0), down = (0, -sin b, -cos b)
    cam = CameraConfig()
    pose = Pose(0.36, 1.0, math.pi / 2)
    b = math.radians(15.0)
    p = np.array([0.5, 2.2, 0.1])
    rel = p - np.array([pose.x, pose.y, cam.height_m])
    depth = rel[1] * math.cos(b) - rel[2] * math.sin(b)
    u_hand = cam.cx + cam.focal_px * rel[0] / depth
    v_hand = cam.cy + cam.focal_px * (-rel[1] * math.sin(b) - rel[2] * math.cos(b)) / depth
    u, v, d = project_points(p[None, :], pose, cam)
    assert d[0] == pytest.approx(depth, abs=1e-12)
    assert u[0] == pytest.approx(u_hand, abs=1e-9)
    assert v[0] == pytest.approx(v_hand, abs=1e-9)


def test_row_vanishing_point_formula():
    # straight rows run along +y; their vanishing point sits on the image
    # centerline, f*tan(pitch) above the principal point
    cam = CameraConfig()
    pose = Pose(0.12, 0.8, math.pi / 2)
    vp = vanishing_point((0.0, 1.0, 0.0), pose, cam)
    assert vp[0] == pytest.approx(cam.cx, abs=1e-9)
    assert vp[1] == pytest.approx(cam.cy - cam.focal_px * math.tan(math.radians(15.0)), abs=1e-9)


def test_vanishing_point_behind_camera_is_none():
    cam = CameraConfig()
    pose = Pose(0.12, 0.8, math.pi / 2)
    assert vanishing_point((0.0, -1.0, 0.0), pose, cam) is None


def test_field_frame_vp_label_centered_pose():
    cfg = FieldConfig()
    pose = Pose(cfg.aisle_center_x(2, 1.0), 1.0, math.pi / 2)
    fr = gen_field_frame(cfg, pose, seed=5)
    assert fr.vp is not None
    assert fr.vp[0] == pytest.approx(179.5, abs=1e-9)
    assert fr.vp[1] == pytest.approx(
        119.5 - cfg.camera.focal_px * math.tan(math.radians(15.0)), abs=1e-9
    )


def test_field_frame_vp_absent_past_row_end():
    cfg = FieldConfig()
    pose = Pose(cfg.aisle_center_x(2, 0.0), cfg.row_length_m + 0.4, math.pi / 2)
    fr = gen_field_frame(cfg, pose, seed=5)
    assert fr.vp is None


def test_pose_outside_field_rejected():
    cfg = FieldConfig()
    with pytest.raises(ValueError):
        gen_field_frame(cfg, Pose(4.0, 1.0, math.pi / 2), seed=1)
    with pytest.raises(ValueError):
        gen_field_frame(cfg, Pose(0.3, -2.0, math.pi / 2), seed=1)


def test_meta_offset_sign():
    cfg = FieldConfig()
    center = cfg.aisle_center_x(1, 1.2)
    fr = gen_field_frame(cfg, Pose(center + 0.04, 1.2, math.pi / 2), seed=2)
    assert fr.meta["offset"] == pytest.approx(0.04, abs=1e-9)
    fr = gen_field_frame(cfg, Pose(center - 0.03, 1.2, math.pi / 2), seed=2)
    assert fr.meta["offset"] == pytest.approx(-0.03, abs=1e-9)


# ---------------------------------------------------------------------------
# plant / weed placement


def test_plant_list_stays_on_rows():
    cfg = FieldConfig(row_curvature=0.02)
    plants = plant_list(cfg)
    assert len(plants) == cfg.n_rows * int(round(cfg.row_length_m / cfg.plant_spacing_m))
    assert np.all(plants[:, 1] >= 0.0) and np.all(plants[:, 1] <= cfg.row_length_m)
    # x sticks to the parabolic centerline up to the sideways jitter
    for row in range(cfg.n_rows):
        sel = plants[row * 60 : (row + 1) * 60]
        cx = cfg.row_x(row, sel[:, 1])
        assert np.max(np.abs(sel[:, 0] - cx)) <= 0.006 + 1e-12


def test_plant_list_deterministic_and_seed_sensitive():
    a = plant_list(FieldConfig())
    b = plant_list(FieldConfig())
    c = plant_list(FieldConfig(world_seed=9))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_weed_density_zero_means_no_weeds():
    assert len(weed_list(FieldConfig(weed_density=0.0))) == 0


def test_weed_density_scales_count():
    lo = len(weed_list(FieldConfig(weed_density=0.1)))
    hi = len(weed_list(FieldConfig(weed_density=0.8)))
    assert hi > lo


# ---------------------------------------------------------------------------
# rendering determinism


def test_field_frame_deterministic():
    cfg = FieldConfig()
    pose = Pose(cfg.aisle_center_x(2, 1.0), 1.0, math.pi / 2)
    a = gen_field_frame(cfg, pose, seed=7, hours=1.5)
    b = gen_field_frame(cfg, pose, seed=7, hours=1.5)
    assert np.array_equal(a.image, b.image)
    assert np.array_equal(a.row_mask, b.row_mask)
    assert a.vp == b.vp and a.meta == b.meta
    c = gen_field_frame(cfg, pose, seed=8, hours=1.5)
    assert not np.array_equal(a.image, c.image)
    # the sensor-noise seed must not move the ground truth
    assert np.array_equal(a.row_mask, c.row_mask)


def test_dock_frame_deterministic():
    cfg = FieldConfig()
    a = gen_dock_frame(cfg, 2.0, 0.1, seed=3)
    b = gen_dock_frame(cfg, 2.0, 0.1, seed=3)
    assert np.array_equal(a.image, b.image)
    assert a.circles == b.circles


# ---------------------------------------------------------------------------
# ground truth consistency


def test_mask_pixels_are_green_band():
    cfg = FieldConfig()
    pose = Pose(cfg.aisle_center_x(2, 1.0), 1.0, math.pi / 2)
    fr = gen_field_frame(cfg, pose, seed=11)
    assert np.count_nonzero(fr.row_mask) > 2000
    band = ic.in_range(ic.rgb_to_hsv(fr.image), ic.GREEN_DEFAULT)
    inside = np.count_nonzero(band[fr.row_mask > 0])
    assert inside / np.count_nonzero(fr.row_mask) >= 0.9


def test_near_foliage_blocks_sides_not_center():
    cfg = FieldConfig()
    pose = Pose(cfg.aisle_center_x(2, 1.0), 1.0, math.pi / 2)
    near = _near_foliage(cfg, pose)
    h, w = near.shape
    assert not near[:, w // 2 - 3 : w // 2 + 3].any()
    assert near[:, :30].any() and near[:, -30:].any()
    fr = gen_field_frame(cfg, pose, seed=1)
    assert not fr.row_mask[near].any()


def test_hue_drift_moves_canopy_hue():
    cfg = FieldConfig(hue_drift_per_hour=2.5)
    pose = Pose(cfg.aisle_center_x(2, 1.0), 1.0, math.pi / 2)
    early = gen_field_frame(cfg, pose, seed=4, hours=0.0)
    late = gen_field_frame(cfg, pose, seed=4, hours=8.0)
    h_early = ic.rgb_to_hsv(early.image)[..., 0][early.row_mask > 0]
    h_late = ic.rgb_to_hsv(late.image)[..., 0][late.row_mask > 0]
    shift = float(np.mean(h_late)) - float(np.mean(h_early))
    assert shift == pytest.approx(20.0, abs=3.0)


def test_approach_scene_green_thins_out():
    cfg = FieldConfig()
    aisle = (cfg.n_rows - 2) // 2
    areas = []
    for i in range(20):
        y = cfg.row_length_m - 0.31 + 0.015 * i
        pose = Pose(cfg.aisle_center_x(aisle, y), y, math.pi / 2)
        fr = gen_field_frame(cfg, pose, seed=21)
        areas.append(int(np.count_nonzero(fr.row_mask)))
    assert areas[0] > 2300
    assert areas[-1] < 2300
    assert areas[0] > areas[10] > areas[-1]


# ---------------------------------------------------------------------------
# dock scene


def _hand_beacon(cfg, dist, offset, bx, bz):
    cam = dock_camera(cfg)
    u = cam.cx + cam.focal_px * (bx - offset) / dist
    v = cam.cy + cam.focal_px * (cam.height_m - bz) / dist
    r = cam.focal_px * cfg.dock.dot_radius_m / dist
    return u, v, r


def test_beacon_labels_match_hand_projection():
    cfg = FieldConfig()
    s = cfg.dock.dot_spacing_m
    z = cfg.dock.dot_height_m
    fr = gen_dock_frame(cfg, 2.0, 0.1, seed=6)
    assert len(fr.circles) == 3
    for (u, v, r), bx in zip(fr.circles, (-s, 0.0, s)):
        hu, hv, hr = _hand_beacon(cfg, 2.0, 0.1, bx, z)
        assert u == pytest.approx(hu, abs=0.5)
        assert v == pytest.approx(hv, abs=0.5)
        assert r == pytest.approx(hr, abs=0.5)


def test_beacon_labels_drop_clipped_dots():
    cfg = FieldConfig()
    # far enough right that the left beacon leaves the frame
    fr = gen_dock_frame(cfg, 1.2, -0.5, seed=6)
    assert len(fr.circles) == 1
    cam = dock_camera(cfg)
    u, v, r = fr.circles[0]
    assert u - r >= 2.0 and u + r <= cam.width - 3.0


def test_dock_red_dots_in_band():
    cfg = FieldConfig()
    fr = gen_dock_frame(cfg, 2.0, 0.0, seed=9)
    hsv = ic.rgb_to_hsv(fr.image)
    red = ic.in_range(hsv, ic.HsvRange(((0, 80, 60, 30, 255, 255), (160, 80, 60, 179, 255, 255))))
    for (u, v, r) in fr.circles:
        yy, xx = np.ogrid[: fr.image.shape[0], : fr.image.shape[1]]
        disk = (xx - u) ** 2 + (yy - v) ** 2 <= (0.8 * r) ** 2
        assert np.count_nonzero(red[disk]) / np.count_nonzero(disk) >= 0.95


def test_dock_scene_rejects_pose_behind_face():
    cfg = FieldConfig()
    with pytest.raises(ValueError):
        render_dock_scene(cfg, Pose(0.0, 0.1, math.pi / 2), seed=1)
    with pytest.raises(ValueError):
        gen_dock_frame(cfg, -1.0, 0.0, seed=1)


def test_estimate_distance_inverts_projection():
    cfg = FieldConfig()
    cam = dock_camera(cfg)
    for d in (0.5, 1.0, 2.7):
        r_px = cam.focal_px * cfg.dock.dot_radius_m / d
        assert estimate_distance(cfg, r_px) == pytest.approx(d, rel=1e-12)
    assert estimate_distance(cfg, 0.0) is None


# ---------------------------------------------------------------------------
# corpus files


def test_field_corpus_roundtrip(tmp_path):
    cfg = FieldConfig()
    out = str(tmp_path / "corpus")
    summary = gen_corpus(cfg, 4, out, seed=13, scene="field", hours_span=2.0)
    assert summary["n"] == 4 and summary["scene"] == "field"
    records = read_manifest(out)
    assert len(records) == 4
    rec = records[2]
    img = read_pnm(os.path.join(out, rec["frame"]))
    mask = read_pnm(os.path.join(out, rec["mask"]))
    again = gen_field_frame(
        cfg, Pose(*rec["pose"]), _frame_seed(13, 2), hours=rec["hours"]
    )
    assert np.array_equal(img, again.image)
    assert np.array_equal(mask, again.row_mask)
    if rec["vp"] is None:
        assert again.vp is None
    else:
        assert again.vp == pytest.approx(tuple(rec["vp"]))


def test_dock_corpus_roundtrip(tmp_path):
    cfg = FieldConfig()
    out = str(tmp_path / "dock")
    gen_corpus(cfg, 3, out, seed=17, scene="dock")
    records = read_manifest(out)
    assert len(records) == 3
    rec = records[1]
    again = gen_dock_frame(cfg, rec["distance"], rec["offset"], _frame_seed(17, 1))
    assert np.array_equal(read_pnm(os.path.join(out, rec["frame"])), again.image)
    assert [list(c) for c in again.circles] == rec["circles"]


def test_corpus_rejects_unknown_scene(tmp_path):
    with pytest.raises(ValueError):
        gen_corpus(FieldConfig(), 2, str(tmp_path / "x"), seed=1, scene="beach")
