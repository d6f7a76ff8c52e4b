import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.ndimage import gaussian_filter

from sgrec.errors import InvalidInputError
from sgrec.features import (
    UNIFORM_LBP_TABLE,
    FeatureKind,
    FeatureSpec,
    extract,
    feature_dim,
    hog_descriptor,
    hog_dim,
    lbp_descriptor,
    lbp_dim,
    raw_vectorize,
    rgb_to_gray,
    rotate,
)

# 8-bit intensities in [0, 0.5] so that doubling stays in range.
images = arrays(
    np.int64,
    st.tuples(st.integers(16, 40), st.integers(16, 40)),
    elements=st.integers(0, 127),
).map(lambda a: a / 255.0)


def smooth_image(seed, shape=(60, 50)):
    img = gaussian_filter(np.random.default_rng(seed).uniform(size=shape), 2.0)
    return (img - img.min()) / (img.max() - img.min())


def test_raw_column_major():
    a, b, c, d = 0.1, 0.2, 0.3, 0.4
    fv = raw_vectorize(np.array([[a, b], [c, d]]))
    np.testing.assert_array_equal(fv.values, [a, c, b, d])
    assert fv.spec.kind is FeatureKind.RAW and fv.source_dims == (2, 2)


def test_raw_length_and_constant():
    fv = raw_vectorize(np.full((150, 150), 0.5))
    assert len(fv) == 22500
    assert np.all(fv.values == 0.5)


def test_image_validation():
    with pytest.raises(InvalidInputError):
        raw_vectorize(np.array([[0.0, 1.5]]))
    with pytest.raises(InvalidInputError):
        raw_vectorize(np.array([[0.0, np.nan]]))
    with pytest.raises(InvalidInputError):
        raw_vectorize(np.zeros(4))


@pytest.mark.parametrize(
    "shape, k, expected",
    [((150, 150), 8, 10404), ((160, 90), 8, 6840), ((160, 90), 20, 756)],
)
def test_hog_lengths(shape, k, expected):
    img = np.random.default_rng(0).uniform(size=shape)
    assert len(hog_descriptor(img, k)) == expected == hog_dim(*shape, k)


@pytest.mark.parametrize(
    "shape, k, expected",
    [((150, 150), 8, 19116), ((160, 90), 12, 5369)],
)
def test_lbp_lengths(shape, k, expected):
    img = np.random.default_rng(0).uniform(size=shape)
    assert len(lbp_descriptor(img, k)) == expected == lbp_dim(*shape, k)


def test_hog_too_small():
    with pytest.raises(InvalidInputError):
        hog_descriptor(np.zeros((15, 40)), 8)


def test_lbp_too_small():
    with pytest.raises(InvalidInputError):
        lbp_descriptor(np.zeros((7, 40)), 8)


def test_feature_spec_validation():
    with pytest.raises(InvalidInputError):
        FeatureSpec("hog", 1)
    with pytest.raises(ValueError):
        FeatureSpec("sift", 8)
    assert FeatureSpec("raw", 0).dim(10, 7) == 70


def test_hog_blocks_are_unit_norm():
    v = hog_descriptor(smooth_image(1), 8).values.reshape(-1, 36)
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-12)


def test_hog_flat_image_is_zero():
    assert np.all(hog_descriptor(np.full((32, 32), 0.3), 8).values == 0)


def test_hog_vertical_edge_orientation():
    img = np.zeros((32, 32))
    img[:, 16:] = 1.0
    hist = hog_descriptor(img, 8).values.reshape(3, 3, 2, 2, 9)
    # Horizontal gradient -> angle 0, split between the bins centred at 10 and 170 deg.
    block = hist[0, 1]
    assert block[..., 0].sum() > 0 and block[..., 8].sum() > 0
    assert block[..., 1:8].sum() == pytest.approx(0.0, abs=1e-12)


@given(images, st.floats(0.0, 0.5))
def test_hog_ignores_constant_offset(img, c):
    base = hog_descriptor(img, 8).values
    shifted = hog_descriptor(img + c, 8).values
    assert np.max(np.abs(base - shifted)) <= 1e-6


def test_uniform_table():
    assert len(set(UNIFORM_LBP_TABLE.tolist())) == 59
    assert UNIFORM_LBP_TABLE[0] == 0 and UNIFORM_LBP_TABLE[255] == 57
    assert UNIFORM_LBP_TABLE[0b01010101] == 58


def test_lbp_constant_image():
    hist = lbp_descriptor(np.full((24, 32), 0.5), 8).values.reshape(-1, 59)
    assert np.all(np.count_nonzero(hist, axis=1) == 1)
    assert np.all(hist == hist[0])


def test_lbp_cells_unit_norm():
    hist = lbp_descriptor(smooth_image(3), 8).values.reshape(-1, 59)
    np.testing.assert_allclose(np.linalg.norm(hist, axis=1), 1.0, atol=1e-12)


@given(images)
def test_lbp_invariant_to_scaling(img):
    np.testing.assert_array_equal(lbp_descriptor(img, 8).values, lbp_descriptor(img * 2, 8).values)


@given(images)
def test_descriptors_deterministic(img):
    for spec in (FeatureSpec("hog", 8), FeatureSpec("lbp", 8), FeatureSpec("raw", 0)):
        np.testing.assert_array_equal(extract(img, spec).values, extract(img.copy(), spec).values)


def test_rotate_zero_is_identity():
    img = smooth_image(0)
    np.testing.assert_array_equal(rotate(img, 0), img)


def test_rotate_zero_image():
    assert np.all(rotate(np.zeros((20, 30)), 2.0) == 0)


def test_rotate_preserves_shape_and_range():
    img = smooth_image(5)
    out = rotate(img, -2)
    assert out.shape == img.shape
    assert out.min() >= 0 and out.max() <= 1


@pytest.mark.parametrize("seed", range(10))
def test_rotate_round_trip(seed):
    img = smooth_image(seed)
    back = rotate(rotate(img, 1.0), -1.0)
    assert np.max(np.abs(back - img)[3:-3, 3:-3]) <= 0.05


def test_rotate_counterclockwise():
    img = np.zeros((21, 21))
    img[10, 18] = 1.0  # right of centre
    out = rotate(img, 30.0)
    r, c = np.unravel_index(np.argmax(out), out.shape)
    assert r < 10 and c > 10  # moved up


def test_rotate_zero_fill_at_corners():
    out = rotate(np.ones((40, 40)), 10.0)
    assert out[0, 0] == 0 and out[-1, -1] == 0
    assert out[20, 20] == pytest.approx(1.0)


def test_rotate_angle_limit():
    with pytest.raises(InvalidInputError):
        rotate(np.zeros((5, 5)), 60)


def test_rgb_to_gray_weights():
    rgb = np.zeros((1, 3, 3))
    rgb[0, 0, 0] = rgb[0, 1, 1] = rgb[0, 2, 2] = 1.0
    np.testing.assert_allclose(rgb_to_gray(rgb), [[0.299, 0.587, 0.114]])


def test_feature_dim_dispatch():
    assert feature_dim(FeatureSpec("hog", 8), 150, 150) == 10404
    assert feature_dim(FeatureSpec("lbp", 8), 150, 150) == 19116
