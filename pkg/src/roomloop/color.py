"""Scene color analysis: dominant color of a captured frame picks the key.

The pipeline is image -> downsample -> k-means dominant RGB -> HSV ->
named color box -> key. The box table is a fixed list of 22 regions in
HSV space, each tied to a tonic and mode; rows are checked in order, so
overlapping regions resolve deterministically, and colors that land in
no box snap to the nearest one (normalized hue/sat/val distance, row
order breaking ties). Hue containment wraps at 360 so reds straddling
the origin match rows specified as e.g. 331..360.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from roomloop.theory import KeyScale, Mode

RGB = tuple[int, int, int]
HSV = tuple[float, float, float]


def rgb_to_hsv(rgb: RGB) -> HSV:
    """8-bit RGB to (hue degrees [0,360), sat [0,1], val [0,1])."""
    r, g, b = (c / 255.0 for c in rgb)
    mx = max(r, g, b)
    mn = min(r, g, b)
    delta = mx - mn
    if delta == 0:
        h = 0.0
    elif mx == r:
        h = 60.0 * (((g - b) / delta) % 6)
    elif mx == g:
        h = 60.0 * ((b - r) / delta + 2)
    else:
        h = 60.0 * ((r - g) / delta + 4)
    s = 0.0 if mx == 0 else delta / mx
    return (h % 360.0, s, mx)


def hsv_to_rgb(hsv: HSV) -> RGB:
    h, s, v = hsv
    c = v * s
    x = c * (1 - abs((h / 60.0) % 2 - 1))
    m = v - c
    sector = int(h // 60) % 6
    r, g, b = [(c, x, 0), (x, c, 0), (0, c, x), (0, x, c), (x, 0, c), (c, 0, x)][sector]
    return tuple(int(round((ch + m) * 255)) for ch in (r, g, b))


@dataclass(frozen=True)
class ColorBox:
    """One named HSV region and the key it selects.

    Hue bounds are inclusive degrees and may exceed 360 to express a
    wrap (h and h+360 are both tested). Saturation and value bounds
    are [lo, hi) when hi_open, else [lo, hi].
    """

    name: str
    hue: tuple[float, float]
    sat: tuple[float, float]
    val: tuple[float, float]
    key: KeyScale
    sat_hi_open: bool = False
    val_hi_open: bool = False

    def contains(self, hsv: HSV) -> bool:
        h, s, v = hsv
        lo, hi = self.hue
        if not (lo <= h <= hi or lo <= h + 360.0 <= hi):
            return False
        if not self._span_ok(s, self.sat, self.sat_hi_open):
            return False
        return self._span_ok(v, self.val, self.val_hi_open)

    @staticmethod
    def _span_ok(x: float, span: tuple[float, float], hi_open: bool) -> bool:
        lo, hi = span
        return lo <= x < hi if hi_open else lo <= x <= hi

    def distance(self, hsv: HSV) -> float:
        """Nearest-box metric: wrapped hue gap / 360 + sat gap + val gap."""
        h, s, v = hsv
        lo, hi = self.hue
        if lo <= h <= hi or lo <= h + 360.0 <= hi:
            dh = 0.0
        else:
            gaps = []
            for bound in (lo, hi):
                raw = abs(h - bound % 360.0)
                gaps.append(min(raw, 360.0 - raw))
            dh = min(gaps)
        ds = max(self.sat[0] - s, s - self.sat[1], 0.0)
        dv = max(self.val[0] - v, v - self.val[1], 0.0)
        return dh / 360.0 + ds + dv


def _key(tonic: int, mode: Mode) -> KeyScale:
    return KeyScale(tonic, mode)


MAJ = Mode.MAJOR
MIN = Mode.MINOR

# Row order matters: first containing box wins.
COLOR_TABLE: tuple[ColorBox, ...] = (
    ColorBox("Red", (331, 360), (0.0, 0.6), (0.7, 1.0), _key(0, MAJ)),
    ColorBox("Maroon", (0, 19), (0.0, 0.6), (0.0, 0.7), _key(0, MIN), val_hi_open=True),
    ColorBox("Light Orange", (20, 49), (0.7, 1.0), (0.8, 1.0), _key(7, MAJ)),
    ColorBox("Mustard Yellow", (20, 49), (0.3, 1.0), (0.5, 0.8), _key(7, MIN), val_hi_open=True),
    ColorBox("Canary Yellow", (50, 90), (0.0, 0.7), (0.8, 1.0), _key(2, MAJ), sat_hi_open=True),
    ColorBox("Olive", (50, 90), (0.4, 1.0), (0.2, 0.8), _key(2, MIN), val_hi_open=True),
    ColorBox("Neon Green", (91, 140), (0.2, 1.0), (0.8, 1.0), _key(9, MAJ)),
    ColorBox("Dark Green", (91, 140), (0.5, 1.0), (0.1, 0.8), _key(9, MIN), val_hi_open=True),
    ColorBox("Aquamarine", (141, 200), (0.0, 0.3), (0.8, 1.0), _key(4, MAJ), sat_hi_open=True),
    ColorBox("Teal", (141, 200), (0.2, 1.0), (0.2, 0.7), _key(4, MIN)),
    ColorBox("Blue", (201, 248), (0.2, 1.0), (0.6, 1.0), _key(11, MAJ)),
    ColorBox("Navy Blue", (201, 248), (0.2, 0.7), (0.0, 0.6), _key(11, MIN), val_hi_open=True),
    ColorBox("Blue Violet", (249, 265), (0.6, 1.0), (0.7, 1.0), _key(6, MAJ)),
    ColorBox("Indigo Purple", (249, 265), (0.0, 0.7), (0.0, 0.7), _key(6, MIN), val_hi_open=True),
    ColorBox("Heliotrope Purple", (266, 277), (0.0, 0.5), (0.5, 1.0), _key(1, MAJ), sat_hi_open=True),
    ColorBox("Koki Murasaki", (266, 283), (0.1, 1.0), (0.0, 0.5), _key(1, MIN), val_hi_open=True),
    ColorBox("Magenta", (284, 310), (0.4, 1.0), (0.6, 1.0), _key(8, MAJ)),
    ColorBox("Byzantium", (284, 310), (0.1, 1.0), (0.2, 0.6), _key(8, MIN), val_hi_open=True),
    ColorBox("Azalea Pink", (311, 330), (0.6, 1.0), (0.2, 1.0), _key(10, MAJ)),
    ColorBox("English Violet", (311, 330), (0.1, 0.6), (0.1, 0.4), _key(10, MIN), sat_hi_open=True),
    ColorBox("Flamingo Pink", (331, 350), (0.2, 0.8), (0.6, 1.0), _key(5, MAJ)),
    ColorBox("Tyrian Purple", (331, 350), (0.2, 1.0), (0.2, 0.7), _key(5, MIN)),
)


def hsv_to_keyscale(hsv: HSV) -> tuple[KeyScale, str]:
    """Map an HSV color to (key, box name); misses use the nearest box."""
    for box in COLOR_TABLE:
        if box.contains(hsv):
            return box.key, box.name
    best = min(COLOR_TABLE, key=lambda b: b.distance(hsv))
    return best.key, best.name


def rgb_to_keyscale(rgb: RGB) -> tuple[KeyScale, str]:
    return hsv_to_keyscale(rgb_to_hsv(rgb))


# -- dominant color --------------------------------------------------

MAX_SAMPLE_SIDE = 64
KMEANS_MAX_ITERS = 50
KMEANS_TOL = 0.5


def downsample(pixels: np.ndarray, max_side: int = MAX_SAMPLE_SIDE) -> np.ndarray:
    """Uniform stride subsample of an (H, W, 3) uint8 array."""
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) pixels, got {pixels.shape}")
    h, w = pixels.shape[:2]
    sy = max(1, -(-h // max_side))
    sx = max(1, -(-w // max_side))
    return pixels[::sy, ::sx]


def dominant_color(pixels: np.ndarray, k: int = 5, seed: int = 0) -> RGB:
    """Most common color via k-means: centroid of the largest cluster.

    Deterministic for a given seed (k-means++ style seeding from a
    PCG64 stream). k drops to the number of distinct colors when the
    image has fewer, so a flat frame returns its exact color.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1: {k}")
    samples = downsample(pixels).reshape(-1, 3).astype(np.float64)
    if samples.shape[0] == 0:
        raise ValueError("no pixels")
    distinct = np.unique(samples, axis=0)
    k = min(k, distinct.shape[0])
    if k == 1:
        return tuple(int(round(c)) for c in samples.mean(axis=0))

    rng = np.random.Generator(np.random.PCG64(seed))
    centroids = np.empty((k, 3))
    centroids[0] = samples[rng.integers(samples.shape[0])]
    for i in range(1, k):
        d2 = np.min(
            ((samples[:, None, :] - centroids[None, :i, :]) ** 2).sum(axis=2), axis=1
        )
        total = d2.sum()
        if total == 0:
            centroids[i:] = centroids[0]
            break
        centroids[i] = samples[rng.choice(samples.shape[0], p=d2 / total)]

    assign = np.zeros(samples.shape[0], dtype=np.int64)
    for _ in range(KMEANS_MAX_ITERS):
        d2 = ((samples[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        moved = 0.0
        for ci in range(k):
            members = samples[assign == ci]
            if members.shape[0] == 0:
                continue  # empty cluster keeps its centroid
            new = members.mean(axis=0)
            moved = max(moved, float(np.linalg.norm(new - centroids[ci])))
            centroids[ci] = new
        if moved < KMEANS_TOL:
            break

    counts = np.bincount(assign, minlength=k)
    winner = centroids[int(counts.argmax())]
    return tuple(int(c) for c in np.clip(np.rint(winner), 0, 255).astype(np.int64))


# -- image loading ---------------------------------------------------


def load_ppm(path) -> np.ndarray:
    """Parse a binary P6 PPM (maxval 255) to an (H, W, 3) uint8 array."""
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PPM header")
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise ValueError(f"{path}: not a P6 PPM (magic {fields[0]!r})")
    width, height, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    need = width * height * 3
    raster = data[pos : pos + need]
    if len(raster) != need:
        raise ValueError(f"{path}: raster is {len(raster)} bytes, need {need}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)


def load_image(path) -> np.ndarray:
    """Load a PNG or binary PPM as an (H, W, 3) uint8 array."""
    p = Path(path)
    if p.suffix.lower() == ".ppm":
        return load_ppm(p)
    from PIL import Image

    with Image.open(p) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def dominant_color_of_file(path, k: int = 5, seed: int = 0) -> RGB:
    return dominant_color(load_image(path), k=k, seed=seed)
