"""Binary PPM (P6) / PGM (P5) image I/O, maxval 255, bit-exact.

PNG read/write is available as a convenience when Pillow is installed
(`pip install rowpilot[png]`).
"""

import os

import numpy as np

from .util import atomic_write_bytes


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    # Skip whitespace and '#' comments, then collect one token.
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c == b"#":
            while pos < n and buf[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ValueError("truncated PNM header")
    return buf[start:pos], pos


def read_pnm(path: str) -> np.ndarray:
    """Read a P6 PPM as (h, w, 3) uint8 or a P5 PGM as (h, w) uint8."""
    with open(path, "rb") as f:
        buf = f.read()
    magic, pos = _read_token(buf, 0)
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"unsupported PNM magic {magic!r} in {path}")
    w, pos = _read_token(buf, pos)
    h, pos = _read_token(buf, pos)
    maxval, pos = _read_token(buf, pos)
    w, h, maxval = int(w), int(h), int(maxval)
    if maxval != 255:
        raise ValueError(f"only maxval 255 supported, got {maxval} in {path}")
    if w < 1 or h < 1:
        raise ValueError(f"bad PNM dimensions {w}x{h} in {path}")
    pos += 1  # single whitespace byte after maxval
    channels = 3 if magic == b"P6" else 1
    need = w * h * channels
    raw = buf[pos : pos + need]
    if len(raw) != need:
        raise ValueError(f"truncated PNM payload in {path}")
    arr = np.frombuffer(raw, dtype=np.uint8)
    if channels == 3:
        return arr.reshape(h, w, 3).copy()
    return arr.reshape(h, w).copy()


def write_pnm(path: str, img: np.ndarray) -> None:
    """Write (h, w, 3) as P6 or (h, w) as P5, atomically."""
    img = np.ascontiguousarray(img, dtype=np.uint8)
    if img.ndim == 3 and img.shape[2] == 3:
        magic = b"P6"
        h, w = img.shape[:2]
    elif img.ndim == 2:
        magic = b"P5"
        h, w = img.shape
    else:
        raise ValueError(f"expected (h,w) or (h,w,3) uint8 array, got shape {img.shape}")
    header = b"%s\n%d %d\n255\n" % (magic, w, h)
    atomic_write_bytes(path, header + img.tobytes())


def read_image(path: str) -> np.ndarray:
    """Read PPM/PGM natively, or PNG via Pillow when installed."""
    ext = os.path.splitext(path)[1].lower()
    if ext in (".ppm", ".pgm", ".pnm"):
        return read_pnm(path)
    if ext == ".png":
        return _read_png(path)
    raise ValueError(f"unsupported image extension {ext!r} ({path})")


def write_image(path: str, img: np.ndarray) -> None:
    ext = os.path.splitext(path)[1].lower()
    if ext in (".ppm", ".pgm", ".pnm"):
        write_pnm(path, img)
    elif ext == ".png":
        _write_png(path, img)
    else:
        raise ValueError(f"unsupported image extension {ext!r} ({path})")


def _pillow():
    try:
        from PIL import Image as PILImage
    except ImportError as e:  # pragma: no cover
        raise RuntimeError("PNG support requires Pillow (pip install rowpilot[png])") from e
    return PILImage


def _read_png(path: str) -> np.ndarray:
    im = _pillow().open(path)
    im = im.convert("RGB") if im.mode not in ("L", "RGB") else im
    return np.asarray(im, dtype=np.uint8).copy()


def _write_png(path: str, img: np.ndarray) -> None:
    img = np.ascontiguousarray(img, dtype=np.uint8)
    mode = "RGB" if img.ndim == 3 else "L"
    import io

    bio = io.BytesIO()
    _pillow().fromarray(img, mode=mode).save(bio, format="PNG")
    atomic_write_bytes(path, bio.getvalue())
