import numpy as np
import pytest

from rowpilot import draw
from rowpilot.rowdetect import (
    GroundTruthLabel,
    MetricsReport,
    NoSecondCropline,
    NoVanishingPoint,
    Segment,
    benchmark,
    centroid,
    contour_target,
    deviation_deg,
    evaluate,
    find_contours,
    fpe_vanishing,
    green_area,
    lsd_vanishing,
    pht_vanishing,
    region_moments,
    row_end,
    slope_filter,
    smoothed_area,
)


def moments_oracle(mask, label_array, cid):
    m00 = m10 = m01 = 0
    h, w = mask.shape
    for y in range(h):
        for x in range(w):
            if label_array[y, x] == cid:
                m00 += 1
                m10 += x
                m01 += y
    return m00, m10, m01


# ---------------------------------------------------------------------------
# contours and moments


def test_find_contours_empty():
    assert find_contours(np.zeros((10, 10), dtype=np.uint8)) == []


def test_find_contours_square_perimeter():
    mask = np.zeros((20, 20), dtype=np.uint8)
    mask[4:14, 5:15] = 255
    cs = find_contours(mask)
    assert len(cs) == 1
    assert len(cs[0].points) == 36
    assert len(set(cs[0].points)) == 36
    xs = [p[0] for p in cs[0].points]
    ys = [p[1] for p in cs[0].points]
    assert min(xs) == 5 and max(xs) == 14 and min(ys) == 4 and max(ys) == 13


def test_find_contours_chain_is_8_connected():
    mask = np.zeros((30, 30), dtype=np.uint8)
    draw.draw_disk(mask, 14, 14, 9, 255)
    pts = find_contours(mask)[0].points
    for a, b in zip(pts, pts[1:] + pts[:1]):
        assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1


def test_find_contours_order_topleft_first():
    mask = np.zeros((20, 40), dtype=np.uint8)
    mask[12:16, 30:38] = 255  # lower right
    mask[2:6, 2:10] = 255     # upper left
    cs = find_contours(mask)
    assert len(cs) == 2
    assert cs[0].points[0][1] < cs[1].points[0][1]


def test_single_pixel_contour_and_moments():
    mask = np.zeros((10, 10), dtype=np.uint8)
    mask[7, 3] = 255
    cs = find_contours(mask)
    assert cs[0].points == ((3, 7),)
    m = region_moments(mask, cs[0])
    assert (m.m00, m.m10, m.m01) == (1, 3, 7)
    assert centroid(m) == (3.0, 7.0)


def test_moments_match_bruteforce_random():
    from scipy import ndimage

    rng = np.random.default_rng(5)
    for _ in range(25):
        mask = np.where(rng.random((18, 22)) > 0.72, 255, 0).astype(np.uint8)
        lab, n = ndimage.label(mask > 0, structure=np.ones((3, 3), int))
        for c in find_contours(mask):
            m = region_moments(mask, c)
            assert (m.m00, m.m10, m.m01) == moments_oracle(mask, lab, c.component_id)


def test_moments_square_example():
    mask = np.zeros((12, 12), dtype=np.uint8)
    mask[0:10, 0:10] = 255
    c = find_contours(mask)[0]
    m = region_moments(mask, c)
    assert (m.m00, m.m10, m.m01) == (100, 450, 450)
    assert centroid(m) == (4.5, 4.5)


def test_centroid_translation_equivariant():
    base = np.zeros((40, 40), dtype=np.uint8)
    draw.draw_disk(base, 10, 12, 5, 255)
    moved = np.zeros((40, 40), dtype=np.uint8)
    draw.draw_disk(moved, 17, 21, 5, 255)
    c0 = centroid(region_moments(base, find_contours(base)[0]))
    c1 = centroid(region_moments(moved, find_contours(moved)[0]))
    assert c1[0] - c0[0] == pytest.approx(7.0)
    assert c1[1] - c0[1] == pytest.approx(9.0)


def test_centroid_rejects_zero_area():
    from rowpilot.rowdetect import MomentSet

    with pytest.raises(ValueError):
        centroid(MomentSet(0, 0, 0))


# ---------------------------------------------------------------------------
# target point


def _two_blob_mask(x1=100, x2=260, w=360, h=144, r=20):
    mask = np.zeros((h, w), dtype=np.uint8)
    draw.draw_disk(mask, x1, 70, r, 255)
    draw.draw_disk(mask, x2, 70, r, 255)
    return mask


def test_contour_target_symmetric_midpoint():
    t = contour_target(_two_blob_mask())
    assert t.x == pytest.approx(180.0, abs=0.01)
    assert t.y == pytest.approx(70.0, abs=0.5)
    assert t.kind == "contour"


def test_contour_target_single_blob_raises():
    mask = np.zeros((144, 360), dtype=np.uint8)
    draw.draw_disk(mask, 100, 70, 25, 255)
    with pytest.raises(NoSecondCropline):
        contour_target(mask)


def test_contour_target_area_floor_rejects_speck():
    mask = np.zeros((144, 360), dtype=np.uint8)
    draw.draw_disk(mask, 100, 70, 25, 255)
    mask[70, 300] = 255  # far too small to be a cropline
    with pytest.raises(NoSecondCropline):
        contour_target(mask)


def test_contour_target_same_side_pairs_opposite():
    mask = np.zeros((144, 360), dtype=np.uint8)
    draw.draw_disk(mask, 60, 70, 24, 255)    # biggest, left
    draw.draw_disk(mask, 130, 70, 22, 255)   # second, also left
    draw.draw_disk(mask, 280, 70, 18, 255)   # largest right-side
    t = contour_target(mask)
    assert t.x == pytest.approx((60 + 280) / 2.0, abs=0.5)


def test_contour_target_mirror_invariance():
    rng = np.random.default_rng(9)
    for _ in range(10):
        mask = np.zeros((120, 300), dtype=np.uint8)
        draw.draw_disk(mask, rng.integers(30, 120), rng.integers(30, 90), 20, 255)
        draw.draw_disk(mask, rng.integers(180, 270), rng.integers(30, 90), 20, 255)
        t = contour_target(mask)
        tm = contour_target(mask[:, ::-1])
        assert tm.x == pytest.approx(300 - 1 - t.x, abs=1e-6)
        assert tm.y == pytest.approx(t.y, abs=1e-6)


def test_deviation_sign():
    from rowpilot.rowdetect import TargetPoint

    assert deviation_deg(TargetPoint(180, 100), 360, 240) == pytest.approx(0.0)
    assert deviation_deg(TargetPoint(220, 100), 360, 240) > 0
    assert deviation_deg(TargetPoint(140, 100), 360, 240) < 0


# ---------------------------------------------------------------------------
# green area and row end


def test_green_area_counts():
    mask = np.zeros((240, 360), dtype=np.uint8)
    assert green_area(mask) == 0
    mask[:] = 255
    assert green_area(mask) == 86400


def test_row_end_smoothing():
    assert not row_end([5000, 5000, 5000], 2300)
    assert row_end([0], 2300)
    assert row_end([2000, 2100, 2200], 2300)
    # one shadowed frame in a healthy row must not fire
    assert not row_end([5000, 100, 5000], 2300)


def test_row_end_monotone_in_current_area():
    prefix = [2600, 2500]
    fired_at = [a for a in range(0, 5001, 50) if row_end(prefix + [a], 2300)]
    assert fired_at  # fires for small enough areas
    assert fired_at == list(range(0, fired_at[-1] + 1, 50))


def test_smoothed_area_empty_rejected():
    with pytest.raises(ValueError):
        smoothed_area([])


# ---------------------------------------------------------------------------
# slope filter


def test_slope_filter_examples():
    horiz = Segment(10, 50, 60, 50)
    steep = Segment(100, 10, 102, 30)   # slope 10
    left = Segment(20, 100, 60, 60)     # slope -1, left of center
    wrong_side = Segment(200, 100, 240, 60)  # slope -1 but right of center
    kept = slope_filter([horiz, steep, left, wrong_side], center_x=150)
    assert kept == [left]


# ---------------------------------------------------------------------------
# vanishing-point baselines


def _cross_fixture(noise_frac=0.01, thick=False, seed=2):
    img = np.zeros((240, 360), dtype=np.uint8)
    pts = [((20, 220), (180, 60)), ((340, 220), (180, 60))]
    for (x0, y0), (x1, y1) in pts:
        draw.draw_line(img, x0, y0, x1, y1, 255)
        if thick:
            draw.draw_line(img, x0 + 1, y0, x1 + 1, y1, 255)
            draw.draw_line(img, x0 + 2, y0, x1 + 2, y1, 255)
    rng = np.random.default_rng(seed)
    salt = rng.random(img.shape) < noise_frac
    img[salt] = 255
    return img


def test_pht_crossing_lines_with_salt():
    edges = _cross_fixture()
    t = pht_vanishing(edges, rng=np.random.default_rng(1))
    assert np.hypot(t.x - 180, t.y - 60) <= 5.0
    assert t.kind == "vanishing"


def test_pht_single_line_raises():
    img = np.zeros((240, 360), dtype=np.uint8)
    draw.draw_line(img, 20, 220, 180, 60, 255)
    with pytest.raises(NoVanishingPoint):
        pht_vanishing(img, rng=np.random.default_rng(1))


def test_pht_parallel_same_side_raises():
    img = np.zeros((240, 360), dtype=np.uint8)
    draw.draw_line(img, 20, 220, 120, 120, 255)
    draw.draw_line(img, 40, 220, 140, 120, 255)
    with pytest.raises(NoVanishingPoint):
        pht_vanishing(img, rng=np.random.default_rng(1))


def test_pht_deterministic_given_rng_seed():
    edges = _cross_fixture()
    a = pht_vanishing(edges, rng=np.random.default_rng(7))
    b = pht_vanishing(edges, rng=np.random.default_rng(7))
    assert (a.x, a.y) == (b.x, b.y)


def test_lsd_crossing_lines():
    gray = _cross_fixture(noise_frac=0.0, thick=True)
    t = lsd_vanishing(gray)
    assert np.hypot(t.x - 180, t.y - 60) <= 8.0


def test_lsd_blank_raises():
    with pytest.raises(NoVanishingPoint):
        lsd_vanishing(np.zeros((120, 160), dtype=np.uint8))


def test_fpe_dotted_lines():
    img = np.zeros((240, 360), dtype=np.uint8)
    for i in range(11):
        f = i / 10.0
        for (x0, y0) in ((20 + f * 160, 220 - f * 160), (340 - f * 160, 220 - f * 160)):
            draw.fill_rect(img, int(x0) - 1, int(y0) - 1, 3, 3, 255)
    t = fpe_vanishing(img, rng=np.random.default_rng(3))
    assert np.hypot(t.x - 180, t.y - 60) <= 8.0


def test_fpe_featureless_raises():
    with pytest.raises(NoVanishingPoint):
        fpe_vanishing(np.full((120, 160), 40, dtype=np.uint8), rng=np.random.default_rng(3))


# ---------------------------------------------------------------------------
# evaluation


def _labels(n, vp=(100.0, 50.0)):
    return [GroundTruthLabel(f"f{i:03d}.ppm", vp) for i in range(n)]


def test_evaluate_radius_rule():
    labs = _labels(3)
    dets = {
        "f000.ppm": (100.0 + 4.9, 50.0),
        "f001.ppm": (100.0 + 5.1, 50.0),
        "f002.ppm": (100.0, 50.0 - 5.0),  # exactly on the circle counts
    }
    r = evaluate(dets, labs)
    assert (r.tp, r.fp, r.fn, r.tn) == (2, 1, 0, 0)


def test_evaluate_absent_cases():
    labs = [GroundTruthLabel("a", (10.0, 10.0)), GroundTruthLabel("b", None), GroundTruthLabel("c", None)]
    dets = {"a": None, "b": None, "c": (4.0, 4.0)}
    r = evaluate(dets, labs)
    assert (r.tp, r.fp, r.fn, r.tn) == (0, 1, 1, 1)


def test_evaluate_mismatched_frames_rejected():
    with pytest.raises(ValueError):
        evaluate({"x": None}, _labels(2))


def test_metrics_hand_computed_fixture():
    # 10 frames: 6 tp, 2 fp, 1 fn, 1 tn
    r = MetricsReport(6, 2, 1, 1)
    assert r.accuracy == pytest.approx(0.7)
    assert r.precision == pytest.approx(6 / 8)
    assert r.recall == pytest.approx(6 / 7)
    f = 2 * (6 / 8) * (6 / 7) / ((6 / 8) + (6 / 7))
    assert r.f_score == pytest.approx(f)
    assert r.tp + r.fp + r.fn + r.tn == 10


def test_metrics_undefined_are_none_not_zero():
    r = MetricsReport(0, 0, 0, 5)
    assert r.precision is None and r.recall is None and r.f_score is None
    assert r.accuracy == 1.0


# ---------------------------------------------------------------------------
# benchmark harness


def _tiny_corpus(n=3):
    frames, labels = [], []
    for i in range(n):
        img = np.zeros((240, 360, 3), dtype=np.uint8)
        img[:] = (110, 90, 70)
        draw.fill_rect(img, 60, 96, 60, 144, (40, 160, 40))
        draw.fill_rect(img, 240, 96, 60, 144, (40, 160, 40))
        fid = f"f{i:03d}.ppm"
        frames.append((fid, img))
        labels.append(GroundTruthLabel(fid, (180.0, 168.0)))
    return frames, labels


def test_benchmark_smoke_and_determinism():
    frames, labels = _tiny_corpus()
    reports, timing, dets = benchmark(frames, labels, detectors=("contour", "fpe"), seed=11)
    assert set(reports) == {"contour", "fpe"}
    assert all(len(v) == len(frames) for v in timing.micros.values())
    assert reports["contour"].total == len(frames)
    r2, _, d2 = benchmark(frames, labels, detectors=("contour", "fpe"), seed=11)
    assert d2 == dets


def test_benchmark_contour_finds_band_midpoint():
    frames, labels = _tiny_corpus()
    _, _, dets = benchmark(frames, labels, detectors=("contour",), seed=0)
    x, y = dets["contour"]["f000.ppm"]
    assert x == pytest.approx(180.0, abs=2.0)


def test_benchmark_empty_detector_set():
    frames, labels = _tiny_corpus(1)
    reports, timing, dets = benchmark(frames, labels, detectors=(), seed=0)
    assert reports == {} and timing.micros == {} and dets == {}


def test_benchmark_rejects_unknown_detector():
    frames, labels = _tiny_corpus(1)
    with pytest.raises(ValueError):
        benchmark(frames, labels, detectors=("sift",), seed=0)
