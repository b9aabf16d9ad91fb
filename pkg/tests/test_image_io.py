"""Tests for image loading, normalization, and density-field construction."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densitycode import (
    GrayImage,
    NormalizedImage,
    Polarity,
    load_image,
    load_pgm,
    make_density_field,
    normalize,
    write_pgm,
)


def test_gray_image_validation():
    with pytest.raises(ValueError):
        GrayImage(pixels=np.zeros((1, 5)))
    with pytest.raises(ValueError):
        GrayImage(pixels=np.array([[1.0, -2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        GrayImage(pixels=np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_pgm_p5_2x2(tmp_path):
    path = tmp_path / "tiny.pgm"
    path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 255, 0]))
    img = load_pgm(path)
    assert img.height == 2 and img.width == 2
    assert np.array_equal(img.pixels, [[0.0, 255.0], [255.0, 0.0]])


def test_pgm_p2_equals_p5(tmp_path):
    ascii_path = tmp_path / "a.pgm"
    binary_path = tmp_path / "b.pgm"
    ascii_path.write_bytes(b"P2\n# a comment\n3 2\n255\n0 10 20\n30 40 250\n")
    binary_path.write_bytes(b"P5\n3 2\n255\n" + bytes([0, 10, 20, 30, 40, 250]))
    assert np.array_equal(load_pgm(ascii_path).pixels, load_pgm(binary_path).pixels)


def test_pgm_16bit_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    samples = rng.integers(0, 65536, size=(5, 7))
    path = tmp_path / "deep.pgm"
    write_pgm(samples, path, maxval=65535, binary=True)
    assert np.array_equal(load_pgm(path).pixels, samples.astype(float))


def test_pgm_ascii_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    samples = rng.integers(0, 256, size=(4, 6))
    path = tmp_path / "plain.pgm"
    write_pgm(samples, path, maxval=255, binary=False)
    assert np.array_equal(load_pgm(path).pixels, samples.astype(float))


def test_pgm_rejects_truncated_and_tiny(tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n4 4\n255\n\x00\x01")
    with pytest.raises(ValueError, match="truncated"):
        load_pgm(bad)
    tiny = tmp_path / "tiny.pgm"
    tiny.write_bytes(b"P5\n1 4\n255\n\x00\x01\x02\x03")
    with pytest.raises(ValueError, match="smaller"):
        load_pgm(tiny)


def test_load_image_sniffs_format(tmp_path):
    path = tmp_path / "noext"
    path.write_bytes(b"P5\n2 2\n255\n" + bytes([1, 2, 3, 4]))
    img = load_image(path)
    assert np.array_equal(img.pixels, [[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(ValueError):
        load_image(tmp_path / "missing.pgm")


def test_load_png_matches_independent_decoder(tmp_path):
    PIL = pytest.importorskip("PIL.Image")
    rng = np.random.default_rng(7)
    samples = rng.integers(0, 256, size=(256, 256), dtype=np.uint8)
    path = tmp_path / "gray.png"
    PIL.fromarray(samples, mode="L").save(path)
    img = load_image(path, "png")
    assert img.pixels.shape == (256, 256)
    assert img.pixels.size == 65536
    # pixel-by-pixel agreement with the reference decode
    assert np.array_equal(img.pixels, samples.astype(float))


def test_normalize_midpoint_and_endpoints():
    img = GrayImage(pixels=np.array([[10.0, 110.0], [210.0, 60.0]]))
    nimg = normalize(img, Polarity.LIGHT_ON_DARK)
    assert nimg.pixels[0, 1] == 0.5
    assert nimg.pixels[0, 0] == 0.0
    assert nimg.pixels[1, 0] == 1.0
    assert nimg.foreground_mass == pytest.approx(nimg.pixels.sum())


def test_normalize_polarity_complement():
    rng = np.random.default_rng(3)
    img = GrayImage(pixels=rng.uniform(5.0, 200.0, (8, 9)))
    light = normalize(img, Polarity.LIGHT_ON_DARK)
    dark = normalize(img, Polarity.DARK_ON_LIGHT)
    assert np.allclose(dark.pixels, 1.0 - light.pixels, atol=1e-15)


def test_normalize_rejects_flat_image():
    img = GrayImage(pixels=np.full((4, 4), 7.0))
    with pytest.raises(ValueError, match="degenerate contrast"):
        normalize(img, Polarity.LIGHT_ON_DARK)


def test_normalize_idempotent():
    rng = np.random.default_rng(4)
    img = GrayImage(pixels=rng.uniform(0.0, 255.0, (6, 6)))
    once = normalize(img, Polarity.LIGHT_ON_DARK)
    twice = normalize(GrayImage(pixels=once.pixels), Polarity.LIGHT_ON_DARK)
    assert np.allclose(twice.pixels, once.pixels, atol=1e-12)


@settings(max_examples=50)
@given(
    a=st.floats(min_value=0.01, max_value=100.0),
    b=st.floats(min_value=0.0, max_value=1000.0),
)
def test_normalize_affine_relighting_invariance(a, b):
    rng = np.random.default_rng(5)
    base = rng.uniform(0.0, 200.0, (5, 5))
    original = normalize(GrayImage(pixels=base), Polarity.LIGHT_ON_DARK)
    relit = normalize(GrayImage(pixels=a * base + b), Polarity.LIGHT_ON_DARK)
    assert np.allclose(relit.pixels, original.pixels, atol=1e-12)


def test_density_field_constant_formula():
    g = np.zeros((256, 256))
    g[:10, :10] = 1.0  # any layout; only the mass matters for c
    mass = 100.0
    g = g * (mass / g.sum())
    nimg = NormalizedImage(
        pixels=g, foreground_mass=mass, polarity=Polarity.LIGHT_ON_DARK
    )
    field = make_density_field(nimg, 1e-4)
    assert field.c == pytest.approx(1e-4 * 100.0 / 65536, rel=1e-12)


def test_density_field_uniform_input():
    g = np.full((6, 8), 0.37)
    nimg = NormalizedImage(
        pixels=g, foreground_mass=float(g.sum()), polarity=Polarity.LIGHT_ON_DARK
    )
    field = make_density_field(nimg, 1e-4)
    assert np.allclose(field.f, 1.0 / 48, rtol=1e-14)


def test_density_field_invariants():
    rng = np.random.default_rng(6)
    for _ in range(5):
        g = rng.uniform(0.0, 1.0, (17, 23))
        g -= g.min()
        g /= g.max()
        nimg = NormalizedImage(
            pixels=g, foreground_mass=float(g.sum()), polarity=Polarity.LIGHT_ON_DARK
        )
        field = make_density_field(nimg, 1e-4)
        assert abs(field.f.sum() - 1.0) <= 1e-12
        assert np.all(field.f > 0.0)
        assert np.all(np.diff(field.row_cdf) > 0.0)
        assert abs(field.row_cdf[-1] - 1.0) <= 1e-12
        # positivity floor from the background lift
        floor = field.c / (nimg.foreground_mass + field.c * g.size)
        assert field.f.min() >= floor * (1.0 - 1e-12)


def test_density_field_rejects_bad_lambda():
    g = np.ones((4, 4))
    nimg = NormalizedImage(
        pixels=g, foreground_mass=16.0, polarity=Polarity.LIGHT_ON_DARK
    )
    with pytest.raises(ValueError):
        make_density_field(nimg, 0.0)
    with pytest.raises(ValueError):
        make_density_field(nimg, -1.0)
