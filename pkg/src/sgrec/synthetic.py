"""Seeded synthetic image datasets with known class structure."""

from pathlib import Path

import numpy as np
from PIL import Image

__all__ = ["disjoint_support_dataset", "square_translates_dataset", "shapes_dataset", "write_dataset"]


def disjoint_support_dataset(n_classes=5, per_class=60, shape=(20, 20), noise=0.01, seed=0):
    """Classes occupy disjoint horizontal bands of the image.

    Pixels inside a class band are ``U[0.2, 1]``; everything else is 0.
    Gaussian noise of std `noise` is added everywhere and the result is
    clipped to [0, 1].
    """
    h, w = shape
    if h < n_classes:
        raise ValueError("image too short for one band per class")
    rng = np.random.default_rng(seed)
    edges = np.linspace(0, h, n_classes + 1).astype(int)
    data = {}
    for c in range(n_classes):
        imgs = []
        for _ in range(per_class):
            img = np.zeros(shape)
            img[edges[c] : edges[c + 1]] = rng.uniform(0.2, 1.0, (edges[c + 1] - edges[c], w))
            img += rng.normal(0.0, noise, shape)
            imgs.append(np.clip(img, 0.0, 1.0))
        data[f"class{c}"] = imgs
    return data


def square_translates_dataset(n_classes=3, per_class=40, square=6, band=8, height=24, seed=0):
    """White squares translated within mutually disjoint column bands."""
    rng = np.random.default_rng(seed)
    positions = [(r, c) for r in range(height - square + 1) for c in range(band - square + 1)]
    if per_class > len(positions):
        raise ValueError("not enough distinct positions")
    data = {}
    for k in range(n_classes):
        imgs = []
        for p in rng.choice(len(positions), per_class, replace=False):
            r, c = positions[p]
            img = np.zeros((height, band * n_classes))
            img[r : r + square, k * band + c : k * band + c + square] = 1.0
            imgs.append(img)
        data[f"sq{k}"] = imgs
    return data


def _shape_masks():
    sq = np.ones((5, 5))
    hbar = np.zeros((5, 5))
    hbar[1:4, :] = 1
    vbar = np.zeros((5, 5))
    vbar[:, 1:4] = 1
    cross = np.zeros((5, 5))
    cross[2, :] = 1
    cross[:, 2] = 1
    return {"cross": cross, "hbar": hbar, "square": sq, "vbar": vbar}


def shapes_dataset(per_class=130, size=8, noise=0.2, seed=0):
    """Four 5x5 binary shapes placed at random offsets, plus noise.

    Classes overlap spatially, so recognition is imperfect and improves
    as more translated copies enter the dictionary.
    """
    rng = np.random.default_rng(seed)
    data = {}
    for name, mask in _shape_masks().items():
        imgs = []
        for _ in range(per_class):
            img = np.zeros((size, size))
            r, c = rng.integers(0, size - 5 + 1, 2)
            img[r : r + 5, c : c + 5] = mask
            imgs.append(np.clip(img + rng.normal(0.0, noise, img.shape), 0.0, 1.0))
        data[name] = imgs
    return data


def write_dataset(data, root, fmt="png"):
    """Write ``{label: [image]}`` as 8-bit files under ``root/<label>/``."""
    root = Path(root)
    for label, imgs in data.items():
        d = root / label
        d.mkdir(parents=True, exist_ok=True)
        for i, img in enumerate(imgs):
            arr = np.round(np.clip(img, 0, 1) * 255).astype(np.uint8)
            Image.fromarray(arr).save(d / f"{i:04d}.{fmt}")
    return root
