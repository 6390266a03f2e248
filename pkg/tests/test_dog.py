import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import textured
from vprbench.features.dog import (CLAMP, build_scale_space, describe_float, detect_dog,
                                   dominant_orientation, gradient_histogram, normalize_descriptor)
from vprbench.features.keypoint import Keypoint
from vprbench.imaging import GrayImage


def _blobs(centres, size=64, sigma=4.0, amp=255):
    yy, xx = np.mgrid[:size, :size]
    a = np.zeros((size, size))
    for cx, cy in centres:
        a += amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma ** 2))
    return GrayImage.from_array(np.clip(np.rint(a), 0, 255).astype(np.uint8))


def test_uniform_image_has_no_keypoints():
    img = GrayImage.from_array(np.full((64, 64), 128, np.uint8))
    assert detect_dog(build_scale_space(img)) == []


@pytest.mark.parametrize("amp", [255, 128])
def test_single_blob_single_keypoint(amp):
    kps = detect_dog(build_scale_space(_blobs([(32, 32)], amp=amp)))
    assert len(kps) == 1
    assert math.hypot(kps[0].x - 32, kps[0].y - 32) <= 2


def test_two_blobs_two_keypoints():
    centres = [(30, 32), (90, 32)]
    kps = detect_dog(build_scale_space(_blobs(centres, size=128)))
    assert len(kps) == 2
    for cx, cy in centres:
        assert min(math.hypot(k.x - cx, k.y - cy) for k in kps) <= 2


def test_uniform_patch_descriptor_is_zero():
    img = GrayImage.from_array(np.full((40, 40), 60, np.uint8))
    d = describe_float(img, Keypoint(20, 20, scale=1.6))
    assert d.shape == (128,) and not d.any()


@settings(max_examples=100)
@given(st.lists(st.floats(0, 1e3, allow_nan=False), min_size=128, max_size=128))
def test_normalization_invariants(values):
    clamped, final = normalize_descriptor(np.array(values))
    if not any(values):
        assert not final.any()
        return
    assert clamped.max() <= CLAMP + 1e-6
    assert np.linalg.norm(final) == pytest.approx(1.0, abs=1e-6)
    assert final.min() >= 0


def test_normalization_of_tiny_histogram():
    v = np.zeros(128)
    v[1] = 9e-166  # squares to zero in a naive norm
    clamped, final = normalize_descriptor(v)
    assert clamped[1] == CLAMP and final[1] == 1.0


def test_normalization_by_hand():
    h = np.zeros(128)
    h[:2] = [3.0, 4.0]
    clamped, final = normalize_descriptor(h)
    assert clamped[:2].tolist() == [0.2, 0.2]
    assert final[:2] == pytest.approx([math.sqrt(0.5)] * 2)


def _detect_some(img):
    space = build_scale_space(img)
    kps = detect_dog(space, contrast_threshold=0.01)
    assert kps, "texture produced no keypoints"
    return space, kps


def test_every_descriptor_is_unit_norm_and_clamped():
    space, kps = _detect_some(textured(11, 128, 128, blur=2.0))
    for kp in kps:
        im = space.image_for(kp)
        theta = dominant_orientation(im, kp)
        clamped, final = normalize_descriptor(gradient_histogram(im, kp, theta))
        assert clamped.max() <= CLAMP + 1e-6
        assert np.linalg.norm(final) == pytest.approx(1.0, abs=1e-6)
        assert np.array_equal(final, describe_float(im, kp, theta))


def test_brightness_gain_leaves_descriptor_unchanged():
    # even values up to 170 so that x1.5 is exact and unclipped
    a = (textured(12, 128, 128, blur=2.0).data.astype(np.int64) * 85 // 255) * 2
    bright = a * 3 // 2
    s0 = build_scale_space(GrayImage.from_array(a))
    s1 = build_scale_space(GrayImage.from_array(bright))
    kps = detect_dog(s0, contrast_threshold=0.01)
    assert kps
    for kp in kps:
        d0 = describe_float(s0.image_for(kp), kp)
        d1 = describe_float(s1.image_for(kp), kp)
        assert np.abs(d0 - d1).max() <= 1e-3


def test_rotated_patch_orientation_follows():
    img = textured(13, 96, 96, blur=2.5)
    kp = Keypoint(48, 48, scale=2.0)
    t0 = dominant_orientation(img, kp)
    rot = GrayImage.from_array(np.ascontiguousarray(np.rot90(img.data)))
    # np.rot90 maps (x, y) to (y, w - 1 - x), so directions lose a quarter turn
    t1 = dominant_orientation(rot, Keypoint(48, 47, scale=2.0))
    diff = (t0 - t1 - math.pi / 2 + math.pi) % (2 * math.pi) - math.pi
    assert abs(diff) < 0.2


def test_keypoints_respect_margin():
    space, kps = _detect_some(textured(14, 100, 90))
    for kp in kps:
        h, w = space.gaussians[kp.level].shape[1:]
        assert 13 <= round(kp.x) < w - 13 and 13 <= round(kp.y) < h - 13
