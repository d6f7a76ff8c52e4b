"""Image feature extraction: raw pixel vectors, HOG, uniform LBP, rotation.

Images are 2-D float arrays indexed ``[row, col]`` with intensities in
``[0, 1]``. Descriptors drop any partial cell at the right/bottom border.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "FeatureKind",
    "FeatureSpec",
    "FeatureVector",
    "check_image",
    "feature_dim",
    "hog_dim",
    "lbp_dim",
    "raw_vectorize",
    "hog_descriptor",
    "lbp_descriptor",
    "extract",
    "rotate",
    "rgb_to_gray",
    "UNIFORM_LBP_TABLE",
]

HOG_BINS = 9
HOG_BLOCK = 2
LBP_NEIGHBORS = 8
LBP_BINS = 59
_EPS = 1e-10


class FeatureKind(str, enum.Enum):
    RAW = "raw"
    HOG = "hog"
    LBP = "lbp"


@dataclass(frozen=True)
class FeatureSpec:
    kind: FeatureKind = FeatureKind.HOG
    cell_size: int = 8

    def __post_init__(self):
        object.__setattr__(self, "kind", FeatureKind(self.kind))
        if self.kind is not FeatureKind.RAW and (
            int(self.cell_size) != self.cell_size or self.cell_size < 2
        ):
            raise InvalidInputError(f"cell_size must be an integer >= 2, got {self.cell_size}")
        object.__setattr__(self, "cell_size", int(self.cell_size))

    def dim(self, height, width):
        return feature_dim(self, height, width)

    def to_dict(self):
        return {"kind": self.kind.value, "cell_size": self.cell_size}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    spec: FeatureSpec
    source_dims: tuple

    def __len__(self):
        return self.values.shape[0]


def check_image(img, unit_range=True):
    """Validate and return `img` as a 2-D float64 array."""
    a = np.asarray(img, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise InvalidInputError(f"image must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("image has non-finite pixels")
    if unit_range and (a.min() < 0 or a.max() > 1):
        raise InvalidInputError("image intensities must lie in [0, 1]")
    return a


def rgb_to_gray(rgb):
    """Luminance ``0.299 R + 0.587 G + 0.114 B`` of an ``(H, W, 3)`` array."""
    rgb = np.asarray(rgb, dtype=float)
    return rgb[..., 0] * 0.299 + rgb[..., 1] * 0.587 + rgb[..., 2] * 0.114


def hog_dim(height, width, k):
    return (height // k - 1) * (width // k - 1) * HOG_BINS * HOG_BLOCK * HOG_BLOCK


def lbp_dim(height, width, k):
    return (height // k) * (width // k) * LBP_BINS


def feature_dim(spec, height, width):
    """Length of the descriptor `spec` produces for an image of this size."""
    if spec.kind is FeatureKind.RAW:
        return height * width
    if spec.kind is FeatureKind.HOG:
        return hog_dim(height, width, spec.cell_size)
    return lbp_dim(height, width, spec.cell_size)


def raw_vectorize(img):
    """Column-wise stacking of the pixels (column-major order)."""
    a = check_image(img)
    values = a.ravel(order="F").copy()
    return FeatureVector(values, FeatureSpec(FeatureKind.RAW, 0), a.shape)


def _gradients(a):
    # [-1, 0, 1] with edge replication
    p = np.pad(a, 1, mode="edge")
    gx = p[1:-1, 2:] - p[1:-1, :-2]
    gy = p[2:, 1:-1] - p[:-2, 1:-1]
    return gx, gy


def hog_descriptor(img, k=8, unit_range=True):
    """Dalal-Triggs HOG of `img` with ``k x k`` cells.

    9 unsigned orientation bins over [0, 180) with linear vote splitting
    between neighbouring bin centres, 2x2-cell blocks at 1-cell stride,
    plain L2 normalization per block. Block vectors are concatenated in
    row-major block order, each block laid out as
    ``[cell_row, cell_col, bin]``.
    """
    a = check_image(img, unit_range)
    k = int(k)
    ny, nx = a.shape[0] // k, a.shape[1] // k
    if k < 1 or ny < HOG_BLOCK or nx < HOG_BLOCK:
        raise InvalidInputError(
            f"image {a.shape} too small for one {HOG_BLOCK}x{HOG_BLOCK} block of {k}px cells"
        )
    gx, gy = _gradients(a)
    gx = gx[: ny * k, : nx * k]
    gy = gy[: ny * k, : nx * k]
    mag = np.hypot(gx, gy)
    ang = np.rad2deg(np.arctan2(gy, gx)) % 180.0

    width = 180.0 / HOG_BINS
    pos = ang / width - 0.5
    lo = np.floor(pos)
    frac = pos - lo
    lo = lo.astype(int) % HOG_BINS
    hi = (lo + 1) % HOG_BINS

    cell_row = np.repeat(np.arange(ny), k)[:, None]
    cell_col = np.repeat(np.arange(nx), k)[None, :]
    cell_idx = np.broadcast_to(cell_row * nx + cell_col, mag.shape)
    hist = np.zeros(ny * nx * HOG_BINS)
    np.add.at(hist, (cell_idx * HOG_BINS + lo).ravel(), (mag * (1 - frac)).ravel())
    np.add.at(hist, (cell_idx * HOG_BINS + hi).ravel(), (mag * frac).ravel())
    hist = hist.reshape(ny, nx, HOG_BINS)

    by, bx = ny - 1, nx - 1
    blocks = np.stack(
        [hist[i : i + by, j : j + bx] for i in range(HOG_BLOCK) for j in range(HOG_BLOCK)],
        axis=2,
    ).reshape(by, bx, -1)
    norms = np.sqrt(np.sum(blocks**2, axis=2, keepdims=True) + _EPS**2)
    values = (blocks / norms).ravel()
    return FeatureVector(values, FeatureSpec(FeatureKind.HOG, k), a.shape)


def _uniform_table():
    # Patterns with at most two circular 0/1 transitions get bins 0..57 in
    # increasing code order; all others share bin 58.
    table = np.full(1 << LBP_NEIGHBORS, LBP_BINS - 1, dtype=np.int64)
    nxt = 0
    for code in range(1 << LBP_NEIGHBORS):
        bits = [(code >> i) & 1 for i in range(LBP_NEIGHBORS)]
        transitions = sum(bits[i] != bits[(i + 1) % LBP_NEIGHBORS] for i in range(LBP_NEIGHBORS))
        if transitions <= 2:
            table[code] = nxt
            nxt += 1
    assert nxt == LBP_BINS - 1
    return table


UNIFORM_LBP_TABLE = _uniform_table()


def _lbp_codes(a):
    """8-neighbour radius-1 LBP codes with bilinear sampling.

    Each neighbour contributes ``sample - centre`` computed as a weighted
    sum of pixel differences, so flat regions compare exactly equal and
    the sign is invariant to positive intensity scaling.
    """
    p = np.pad(a, 2, mode="edge")
    h, w = a.shape
    centre = a
    codes = np.zeros(a.shape, dtype=np.int64)
    for i in range(LBP_NEIGHBORS):
        t = 2 * np.pi * i / LBP_NEIGHBORS
        dy = -np.sin(t)
        dx = np.cos(t)
        dy = 0.0 if abs(dy) < 1e-12 else dy
        dx = 0.0 if abs(dx) < 1e-12 else dx
        y0, x0 = int(np.floor(dy)), int(np.floor(dx))
        fy, fx = dy - y0, dx - x0
        diff = np.zeros_like(a)
        for oy, ox, wt in (
            (y0, x0, (1 - fy) * (1 - fx)),
            (y0, x0 + 1, (1 - fy) * fx),
            (y0 + 1, x0, fy * (1 - fx)),
            (y0 + 1, x0 + 1, fy * fx),
        ):
            if wt == 0:
                continue
            nb = p[2 + oy : 2 + oy + h, 2 + ox : 2 + ox + w]
            diff += wt * (nb - centre)
        codes |= (diff >= 0).astype(np.int64) << i
    return codes


def lbp_descriptor(img, k=8, unit_range=True):
    """Uniform LBP histograms (59 bins) over ``k x k`` cells.

    Cell histograms are L2-normalized and concatenated in row-major cell
    order. Border pixels sample their neighbours with edge replication.
    """
    a = check_image(img, unit_range)
    k = int(k)
    ny, nx = a.shape[0] // k, a.shape[1] // k
    if k < 1 or ny < 1 or nx < 1:
        raise InvalidInputError(f"image {a.shape} too small for one {k}px cell")
    labels = UNIFORM_LBP_TABLE[_lbp_codes(a)][: ny * k, : nx * k]
    cells = labels.reshape(ny, k, nx, k).transpose(0, 2, 1, 3).reshape(ny * nx, k * k)
    hist = np.zeros((ny * nx, LBP_BINS))
    np.add.at(hist, (np.repeat(np.arange(ny * nx), k * k), cells.ravel()), 1.0)
    hist /= np.sqrt(np.sum(hist**2, axis=1, keepdims=True) + _EPS**2)
    return FeatureVector(hist.ravel(), FeatureSpec(FeatureKind.LBP, k), a.shape)


def extract(img, spec):
    """Dispatch to the descriptor named by `spec`."""
    if spec.kind is FeatureKind.RAW:
        return raw_vectorize(img)
    if spec.kind is FeatureKind.HOG:
        return hog_descriptor(img, spec.cell_size)
    return lbp_descriptor(img, spec.cell_size)


def rotate(img, degrees):
    """Rotate about the image centre; positive angles are counterclockwise.

    Bilinear interpolation, same output size, zero outside the source.
    """
    a = check_image(img, unit_range=False)
    if not np.isfinite(degrees) or abs(degrees) > 45:
        raise InvalidInputError(f"rotation angle must be within [-45, 45], got {degrees}")
    if degrees == 0:
        return a.copy()
    h, w = a.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    t = np.deg2rad(degrees)
    c, s = np.cos(t), np.sin(t)
    rr, cc = np.mgrid[0:h, 0:w].astype(float)
    # Inverse map with the row axis pointing down.
    dy, dx = rr - cy, cc - cx
    src_x = cx + c * dx - s * dy
    src_y = cy + s * dx + c * dy

    p = np.pad(a, 1, mode="constant")
    x0 = np.floor(src_x).astype(int)
    y0 = np.floor(src_y).astype(int)
    fx = src_x - x0
    fy = src_y - y0
    out = np.zeros_like(a)
    for oy, ox, wt in (
        (0, 0, (1 - fy) * (1 - fx)),
        (0, 1, (1 - fy) * fx),
        (1, 0, fy * (1 - fx)),
        (1, 1, fy * fx),
    ):
        yy = y0 + oy + 1
        xx = x0 + ox + 1
        inside = (yy >= 0) & (yy < h + 2) & (xx >= 0) & (xx < w + 2)
        vals = np.zeros_like(a)
        vals[inside] = p[yy[inside], xx[inside]]
        out += wt * vals
    # Convex weights; clip away rounding overshoot.
    return np.clip(out, min(0.0, a.min()), max(0.0, a.max()))
