import numpy as np
import pytest

from rowpilot import imgcore as ic


# ---------------------------------------------------------------------------
# brute-force oracles


def blur_oracle(img, ksize):
    """Direct 2-D convolution with the outer-product kernel, replicate pad."""
    k1 = ic.gaussian_kernel1d(ksize)
    k2 = np.outer(k1, k1)
    r = (ksize - 1) // 2
    if img.ndim == 2:
        chans = [img]
    else:
        chans = [img[..., c] for c in range(img.shape[2])]
    outs = []
    for ch in chans:
        p = np.pad(ch.astype(np.float64), r, mode="edge")
        acc = np.zeros(ch.shape, dtype=np.float64)
        for dy in range(ksize):
            for dx in range(ksize):
                acc += k2[dy, dx] * p[dy : dy + ch.shape[0], dx : dx + ch.shape[1]]
        outs.append(acc)
    out = outs[0] if img.ndim == 2 else np.stack(outs, axis=-1)
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


def erode_oracle(mask, ksize):
    r = (ksize - 1) // 2
    p = np.pad(mask, r, mode="edge")
    out = np.empty_like(mask)
    for y in range(mask.shape[0]):
        for x in range(mask.shape[1]):
            out[y, x] = p[y : y + ksize, x : x + ksize].min()
    return out


# ---------------------------------------------------------------------------
# color


def test_hsv_known_colors():
    img = np.array(
        [[[255, 0, 0], [0, 255, 0], [0, 0, 255], [255, 255, 255], [0, 0, 0]]],
        dtype=np.uint8,
    )
    hsv = ic.rgb_to_hsv(img)
    assert tuple(hsv[0, 0]) == (0, 255, 255)      # red
    assert tuple(hsv[0, 1]) == (60, 255, 255)     # green
    assert tuple(hsv[0, 2]) == (120, 255, 255)    # blue
    assert tuple(hsv[0, 3]) == (0, 0, 255)        # white
    assert tuple(hsv[0, 4]) == (0, 0, 0)          # black


def test_hsv_float_roundtrip_tight():
    rng = np.random.default_rng(11)
    rgb = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
    back = ic.hsv_to_rgb_float(ic.rgb_to_hsv_float(rgb))
    assert np.max(np.abs(back - rgb)) <= 1.0 + 1e-9


def test_hsv_uint8_inverse_reasonable():
    # quantizing hue to half-degrees costs a few counts at high saturation
    rng = np.random.default_rng(12)
    rgb = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
    back = ic.hsv_to_rgb(ic.rgb_to_hsv(rgb))
    assert np.max(np.abs(back.astype(int) - rgb.astype(int))) <= 6


def test_value_channel_is_max():
    rng = np.random.default_rng(13)
    rgb = rng.integers(0, 256, size=(10, 10, 3), dtype=np.uint8)
    assert np.array_equal(ic.value_channel(rgb), rgb.max(axis=2))


# ---------------------------------------------------------------------------
# blur


def test_kernel_normalized_and_symmetric():
    for k in (3, 5, 25):
        w = ic.gaussian_kernel1d(k)
        assert w.shape == (k,)
        assert abs(w.sum() - 1.0) < 1e-12
        assert np.allclose(w, w[::-1])


def test_kernel_rejects_even():
    with pytest.raises(ValueError):
        ic.gaussian_kernel1d(4)


def test_blur_matches_direct_convolution():
    rng = np.random.default_rng(21)
    for shape in ((20, 24), (16, 18, 3)):
        img = rng.integers(0, 256, size=shape, dtype=np.uint8)
        for ksize in (3, 7):
            got = ic.gaussian_blur(img, ksize)
            want = blur_oracle(img, ksize)
            assert np.max(np.abs(got.astype(int) - want.astype(int))) <= 1


def test_blur_keeps_constant():
    img = np.full((30, 40, 3), 137, dtype=np.uint8)
    assert np.array_equal(ic.gaussian_blur(img, 25), img)


def test_blur_shape_preserved():
    img = np.zeros((240, 360, 3), dtype=np.uint8)
    assert ic.gaussian_blur(img, 25).shape == img.shape


# ---------------------------------------------------------------------------
# thresholding


def test_in_range_single_band():
    hsv = np.zeros((2, 3, 3), dtype=np.uint8)
    hsv[0, 0] = (50, 100, 100)   # inside
    hsv[0, 1] = (20, 100, 100)   # hue below
    hsv[0, 2] = (77, 43, 46)     # on the corner, inclusive
    m = ic.in_range(hsv, ic.GREEN_DEFAULT)
    assert m[0, 0] == 255 and m[0, 1] == 0 and m[0, 2] == 255
    assert set(np.unique(m)) <= {0, 255}


def test_in_range_wraparound_union():
    hsv = np.zeros((1, 3, 3), dtype=np.uint8)
    hsv[0, 0] = (5, 200, 200)
    hsv[0, 1] = (170, 200, 200)
    hsv[0, 2] = (90, 200, 200)
    m = ic.in_range(hsv, ic.RED_DOCK)
    assert list(m[0]) == [255, 255, 0]


def test_hsv_range_validation():
    with pytest.raises(ValueError):
        ic.HsvRange.single(100, 0, 0, 50, 255, 255)  # lh > hh
    with pytest.raises(ValueError):
        ic.HsvRange.single(0, 0, 0, 200, 255, 255)   # hue > 179
    with pytest.raises(ValueError):
        ic.HsvRange(())


def test_shifted_hue_clamps():
    r = ic.GREEN_DEFAULT.shifted_hue(150)
    lh, _, _, hh, _, _ = r.bands[0]
    assert lh == 171 and hh == 179


def test_binarize_strictly_greater():
    g = np.array([[179, 180, 181]], dtype=np.uint8)
    assert list(ic.binarize(g, 180)[0]) == [0, 0, 255]


# ---------------------------------------------------------------------------
# morphology


def test_erode_matches_oracle():
    rng = np.random.default_rng(31)
    mask = np.where(rng.random((25, 30)) > 0.5, 255, 0).astype(np.uint8)
    for k in (3, 5):
        assert np.array_equal(ic.morphology(mask, "erode", k), erode_oracle(mask, k))


def test_duality_erode_dilate():
    rng = np.random.default_rng(32)
    mask = np.where(rng.random((20, 20)) > 0.6, 255, 0).astype(np.uint8)
    a = ic.morphology(mask, "erode", 5)
    b = 255 - ic.morphology(255 - mask, "dilate", 5)
    assert np.array_equal(a, b)


def test_open_close_idempotent():
    rng = np.random.default_rng(33)
    mask = np.where(rng.random((40, 40)) > 0.5, 255, 0).astype(np.uint8)
    for op in ("open", "close"):
        once = ic.morphology(mask, op, 5)
        twice = ic.morphology(once, op, 5)
        assert np.array_equal(once, twice)


def test_open_removes_speck():
    mask = np.zeros((31, 31), dtype=np.uint8)
    mask[15, 15] = 255
    assert ic.morphology(mask, "open", 3).sum() == 0


def test_close_fills_pinhole():
    mask = np.full((31, 31), 255, dtype=np.uint8)
    mask[15, 15] = 0
    assert ic.morphology(mask, "close", 3).min() == 255


# ---------------------------------------------------------------------------
# edges


def test_canny_vertical_step():
    g = np.zeros((20, 20), dtype=np.uint8)
    g[:, 10:] = 255
    e = ic.canny(g)
    ys, xs = np.nonzero(e)
    assert len(ys) > 0
    assert set(np.unique(xs)) <= {9, 10}
    cols = np.unique(xs)
    assert len(cols) == 1  # thin: one column only


def test_canny_blank_image():
    assert ic.canny(np.full((15, 15), 80, dtype=np.uint8)).sum() == 0


def test_canny_rejects_bad_thresholds():
    with pytest.raises(ValueError):
        ic.canny(np.zeros((5, 5), dtype=np.uint8), low=100, high=50)


def test_canny_disk_perimeter():
    g = np.zeros((60, 60), dtype=np.uint8)
    yy, xx = np.mgrid[0:60, 0:60]
    g[(yy - 30) ** 2 + (xx - 30) ** 2 <= 15 * 15] = 255
    e = ic.canny(g)
    ys, xs = np.nonzero(e)
    d = np.hypot(ys - 30.0, xs - 30.0)
    assert len(d) > 40
    assert np.all(np.abs(d - 15.0) < 3.0)


# ---------------------------------------------------------------------------
# clahe


def test_clahe_constant_unchanged():
    img = np.full((64, 64), 91, dtype=np.uint8)
    assert np.array_equal(ic.clahe(img), img)


def test_clahe_widens_low_contrast_ramp():
    base = np.linspace(100, 140, 64).astype(np.uint8)
    img = np.tile(base, (64, 1))
    out = ic.clahe(img, clip_limit=4.0, tiles=(4, 4))
    assert int(out.max()) - int(out.min()) > int(img.max()) - int(img.min())


def test_clahe_color_shape():
    rng = np.random.default_rng(41)
    img = rng.integers(0, 256, size=(48, 56, 3), dtype=np.uint8)
    out = ic.clahe(img)
    assert out.shape == img.shape and out.dtype == np.uint8


# ---------------------------------------------------------------------------
# resize / crop


def test_resize_identity_is_exact():
    rng = np.random.default_rng(51)
    img = rng.integers(0, 256, size=(24, 36, 3), dtype=np.uint8)
    out = ic.resize(img, 36, 24)
    assert np.array_equal(out, img)
    assert out is not img


def test_resize_constant_stays_constant():
    img = np.full((10, 10), 77, dtype=np.uint8)
    assert np.all(ic.resize(img, 25, 17) == 77)


def test_resize_downscale_average():
    # 2x2 blocks downsampled by half land on block centers
    img = np.zeros((4, 4), dtype=np.uint8)
    img[:2, :2] = 100
    out = ic.resize(img, 2, 2)
    assert out[0, 0] == 100 and out[1, 1] == 0


def test_resize_target_shape():
    img = np.zeros((480, 640, 3), dtype=np.uint8)
    assert ic.resize(img, 360, 240).shape == (240, 360, 3)


def test_roi_crop_and_bounds():
    img = np.arange(24, dtype=np.uint8).reshape(4, 6)
    r = ic.Rect(1, 2, 3, 2)
    win = ic.roi_crop(img, r)
    assert np.array_equal(win, img[2:4, 1:4])
    with pytest.raises(ValueError):
        ic.roi_crop(img, ic.Rect(4, 0, 3, 2))
    with pytest.raises(ValueError):
        ic.Rect(0, 0, 0, 5)


def test_bottom_roi():
    r = ic.bottom_roi(360, 240, 0.6)
    assert (r.x, r.y, r.width, r.height) == (0, 96, 360, 144)
