import numpy as np
import pytest

from rowpilot.ppmio import read_pnm, write_pnm, read_image, write_image


def test_roundtrip_color(tmp_path):
    rng = np.random.default_rng(7)
    for _ in range(5):
        img = rng.integers(0, 256, size=(17, 23, 3), dtype=np.uint8)
        p = tmp_path / "x.ppm"
        write_pnm(p, img)
        back = read_pnm(p)
        assert back.dtype == np.uint8
        assert np.array_equal(back, img)


def test_roundtrip_gray(tmp_path):
    rng = np.random.default_rng(8)
    img = rng.integers(0, 256, size=(9, 31), dtype=np.uint8)
    p = tmp_path / "x.pgm"
    write_pnm(p, img)
    assert np.array_equal(read_pnm(p), img)


def test_header_comments_and_whitespace(tmp_path):
    raw = b"P6 # fmt\n# a comment line\n 3\t2 #dims\n255\n" + bytes(range(18))
    p = tmp_path / "c.ppm"
    p.write_bytes(raw)
    img = read_pnm(p)
    assert img.shape == (2, 3, 3)
    assert img[0, 0, 0] == 0 and img[1, 2, 2] == 17


def test_rejects_bad_maxval(tmp_path):
    p = tmp_path / "m.ppm"
    p.write_bytes(b"P6\n2 2\n65535\n" + b"\x00" * 24)
    with pytest.raises(ValueError):
        read_pnm(p)


def test_rejects_truncated(tmp_path):
    p = tmp_path / "t.ppm"
    p.write_bytes(b"P6\n4 4\n255\n" + b"\x00" * 10)
    with pytest.raises(ValueError):
        read_pnm(p)


def test_rejects_unknown_magic(tmp_path):
    p = tmp_path / "u.ppm"
    p.write_bytes(b"P3\n1 1\n255\n0 0 0\n")
    with pytest.raises(ValueError):
        read_pnm(p)


def test_write_is_binary_exact(tmp_path):
    img = np.arange(12, dtype=np.uint8).reshape(2, 2, 3)
    p = tmp_path / "e.ppm"
    write_pnm(p, img)
    assert p.read_bytes() == b"P6\n2 2\n255\n" + img.tobytes()


def test_dispatch_by_extension(tmp_path):
    img = np.full((4, 5, 3), 9, dtype=np.uint8)
    p = tmp_path / "d.pnm"
    write_image(p, img)
    assert np.array_equal(read_image(p), img)


def test_png_roundtrip_if_pillow(tmp_path):
    pytest.importorskip("PIL")
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, size=(6, 7, 3), dtype=np.uint8)
    p = tmp_path / "p.png"
    write_image(p, img)
    assert np.array_equal(read_image(p), img)
