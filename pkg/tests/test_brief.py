import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import textured
from vprbench.features import brief
from vprbench.features.brief import (MARGIN, PATCH_RADIUS, PATTERN, PATTERN_SEED,
                                     compute_orientation, describe_binary, generate_pattern,
                                     hamming, smooth_box, steered_pattern)
from vprbench.features.keypoint import Keypoint
from vprbench.imaging import GrayImage


def _moment_angle(a, cx, cy, r):
    m10 = m01 = 0
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dx * dx + dy * dy <= r * r:
                v = int(a[cy + dy, cx + dx])
                m10 += dx * v
                m01 += dy * v
    if m10 == 0 and m01 == 0:
        return 0.0
    return math.atan2(m01, m10) % (2 * math.pi)


def test_uniform_patch_orientation_is_zero():
    img = GrayImage.from_array(np.full((41, 41), 120, np.uint8))
    assert compute_orientation(img, Keypoint(20, 20)) == 0.0


def test_half_plane_orientations():
    a = np.zeros((41, 41), np.uint8)
    a[:, 21:] = 200
    right = GrayImage.from_array(a)
    assert abs(compute_orientation(right, Keypoint(20, 20))) < 0.05
    # x right, y down: a quarter turn from +x lands on +y, i.e. the bright half below
    below = GrayImage.from_array(np.ascontiguousarray(a.T))
    assert abs(compute_orientation(below, Keypoint(20, 20)) - math.pi / 2) < 0.05


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(16, 24), st.integers(16, 24))
def test_orientation_matches_direct_moments(seed, cx, cy):
    a = textured(seed, 41, 41, blur=1.0).data
    got = compute_orientation(GrayImage.from_array(a), Keypoint(cx, cy))
    assert got == pytest.approx(_moment_angle(a, cx, cy, 15), abs=1e-12)
    assert 0 <= got < 2 * math.pi


def test_pattern_table_regenerates_from_seed():
    assert np.array_equal(generate_pattern(PATTERN_SEED), PATTERN.astype(np.int8))
    assert PATTERN.shape == (256, 4)
    assert np.all(PATTERN[:, 0] ** 2 + PATTERN[:, 1] ** 2 <= PATCH_RADIUS ** 2)
    assert np.all(PATTERN[:, 2] ** 2 + PATTERN[:, 3] ** 2 <= PATCH_RADIUS ** 2)


@given(st.floats(0, 2 * math.pi, allow_nan=False))
def test_steered_pattern_stays_inside_sampling_margin(theta):
    off = steered_pattern(theta)
    assert np.abs(off).max() <= PATCH_RADIUS + 1
    # smoothing reaches 2 more pixels; the margin must cover both
    assert PATCH_RADIUS + 1 + brief.SMOOTH_SIZE // 2 <= MARGIN


def test_uniform_patch_gives_all_zero_bits():
    img = GrayImage.from_array(np.full((48, 48), 77, np.uint8))
    d = describe_binary(img, Keypoint(24, 24, orientation=1.0))
    assert d.shape == (32,) and not d.any()


def test_descriptor_matches_direct_sampling():
    img = textured(3, 64, 64)
    kp = Keypoint(30, 33, orientation=0.7)
    a = img.data.astype(np.int64)
    bits = []
    c, s = math.cos(0.7), math.sin(0.7)
    for px, py, qx, qy in PATTERN:
        def box(x, y):
            xi, yi = int(round(c * x - s * y)) + 30, int(round(s * x + c * y)) + 33
            return a[yi - 2:yi + 3, xi - 2:xi + 3].sum()
        bits.append(box(px, py) < box(qx, qy))
    want = np.packbits(np.array(bits), bitorder="little")
    assert np.array_equal(describe_binary(img, kp), want)


def test_descriptor_is_deterministic():
    img = textured(5, 64, 64)
    kp = Keypoint(32, 32, orientation=2.0)
    assert np.array_equal(describe_binary(img, kp), describe_binary(img, kp))


@given(st.integers(0, 1000), st.integers(1, 55), st.floats(0, 6.28))
def test_descriptor_invariant_to_constant_shift(seed, shift, theta):
    a = textured(seed, 48, 48).data.astype(np.int64) * 200 // 255
    kp = Keypoint(24, 24, orientation=theta)
    d0 = describe_binary(GrayImage.from_array(a), kp)
    d1 = describe_binary(GrayImage.from_array(a + shift), kp)
    assert np.array_equal(d0, d1)


@pytest.mark.parametrize("seed", range(6))
def test_quarter_turn_keeps_descriptor_close(seed):
    rng = np.random.default_rng(seed)
    # checkerboard with noise, plus a bright off-centre blob so the patch has a clear orientation
    yy, xx = np.mgrid[:81, :81]
    a = np.where(((yy // 6) + (xx // 6)) % 2 == 0, 150.0, 90.0) + rng.normal(0, 12, (81, 81))
    a += 80 * np.exp(-((xx - 47) ** 2 + (yy - 36) ** 2) / 40.0)
    a = np.clip(np.rint(a), 0, 255).astype(np.uint8)
    rot = np.ascontiguousarray(np.rot90(a))
    kp = Keypoint(40, 40)
    img0, img1 = GrayImage.from_array(a), GrayImage.from_array(rot)
    d0 = describe_binary(img0, kp.with_orientation(compute_orientation(img0, kp)))
    d1 = describe_binary(img1, kp.with_orientation(compute_orientation(img1, kp)))
    assert hamming(d0, d1) <= 64


def test_out_of_bounds_patch_raises():
    img = textured(1, 48, 48)
    with pytest.raises(ValueError):
        describe_binary(img, Keypoint(MARGIN - 1, 24))
    with pytest.raises(ValueError):
        compute_orientation(img, Keypoint(3, 24))


def test_smooth_box_sums():
    a = textured(2, 20, 20).data.astype(np.int64)
    s = smooth_box(GrayImage.from_array(a))
    assert s[10, 10] == a[8:13, 8:13].sum()
    assert s.shape == a.shape


def test_hamming():
    a = np.zeros(32, np.uint8)
    b = a.copy()
    b[0], b[31] = 0b101, 0xFF
    assert hamming(a, b) == 10 and hamming(b, b) == 0
