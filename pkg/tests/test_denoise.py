import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svdenoise.denoise import (
    NoiseSpec,
    ThresholdSpec,
    add_gaussian_noise,
    denoise_lowrank,
    denoise_msvd,
    estimate_sigma,
    shrink,
    universal_threshold,
)
from svdenoise.errors import DimensionError, RangeError
from svdenoise.metrics import psnr
from svdenoise.phantom import make_phantom

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_zero_sigma_is_identity(rng):
    img = rng.uniform(0, 255, (8, 8))
    np.testing.assert_array_equal(add_gaussian_noise(img, NoiseSpec(0.0, 5)), img)


def test_noise_statistics():
    img = np.zeros((256, 256))
    diff = add_gaussian_noise(img, NoiseSpec(20.0, 99)) - img
    assert abs(diff.std() - 20.0) <= 0.03 * 20.0
    assert abs(diff.mean()) < 0.5


def test_noise_seeds():
    img = np.zeros((16, 16))
    a = add_gaussian_noise(img, NoiseSpec(5.0, 1))
    assert a.tobytes() == add_gaussian_noise(img, NoiseSpec(5.0, 1)).tobytes()
    assert not np.array_equal(a, add_gaussian_noise(img, NoiseSpec(5.0, 2)))


def test_noise_spec_validation():
    with pytest.raises(RangeError):
        NoiseSpec(-1.0, 0)
    with pytest.raises(RangeError):
        NoiseSpec(1.0, 2**64)


def test_estimate_sigma():
    assert estimate_sigma(np.zeros((4, 4))) == 0.0
    assert estimate_sigma(np.full((3, 3), -2.0)) == pytest.approx(2.0 / 0.6745)
    band = np.random.default_rng(3).normal(0, 10, (128, 128))
    assert abs(estimate_sigma(band) - 10.0) <= 1.0


def test_universal_threshold():
    assert universal_threshold(2.0, 100) == pytest.approx(2.0 * math.sqrt(2 * math.log(100)))
    assert universal_threshold(5.0, 1) == 0.0


@pytest.mark.parametrize("mode", ["soft", "hard"])
def test_zero_threshold_is_identity(rng, mode):
    band = rng.standard_normal((5, 5))
    np.testing.assert_array_equal(shrink(band, 0.0, mode), band)


def test_soft_values():
    np.testing.assert_array_equal(shrink([[5.0, -1.0, -7.0]], 2.0, "soft"), [[3.0, 0.0, -5.0]])


def test_hard_boundary_is_strict():
    np.testing.assert_array_equal(shrink([[5.0, 5.0001, -6.0]], 5.0, "hard"), [[0.0, 5.0001, -6.0]])


def test_shrink_rejects_bad_input():
    with pytest.raises(RangeError):
        shrink([[1.0]], -1.0)
    with pytest.raises(RangeError):
        shrink([[1.0]], 1.0, "medium")


@settings(max_examples=200, deadline=None)
@given(finite, finite, st.floats(0, 1e6), st.sampled_from(["soft", "hard"]))
def test_shrink_never_grows(x, y, lam, mode):
    out = shrink([[x, y]], lam, mode)
    assert abs(out[0, 0]) <= abs(x) and abs(out[0, 1]) <= abs(y)
    if mode == "soft":
        assert abs(out[0, 0] - out[0, 1]) <= abs(x - y) * (1 + 1e-12) + 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 10), st.floats(0, 10))
def test_zeroed_count_monotone_in_lambda(seed, l1, l2):
    lo, hi = sorted((l1, l2))
    band = np.random.default_rng(seed).normal(0, 3, (6, 6))
    for mode in ("soft", "hard"):
        assert np.count_nonzero(shrink(band, lo, mode) == 0) <= np.count_nonzero(shrink(band, hi, mode) == 0)


def test_threshold_spec_parse():
    assert ThresholdSpec.parse("soft", "universal").is_universal
    assert ThresholdSpec.parse("hard", "12.5") == ThresholdSpec("hard", 12.5)
    for bad in (("soft", "auto"), ("soft", "-1"), ("wavy", "1")):
        with pytest.raises(RangeError):
            ThresholdSpec.parse(*bad)


@pytest.mark.parametrize("mode", ["soft", "hard"])
def test_explicit_zero_is_round_trip(rng, mode):
    img = rng.uniform(0, 255, (32, 32))
    out, report = denoise_msvd(img, 3, ThresholdSpec(mode, 0.0))
    assert np.max(np.abs(out - img)) <= 1e-9
    assert report.lambdas == (0.0, 0.0, 0.0)


def test_constant_image_universal_is_identity():
    img = np.full((64, 64), 117.0)
    out, report = denoise_msvd(img, 2, ThresholdSpec())
    assert np.max(np.abs(out - img)) <= 1e-9
    assert report.sigma_hat < 1e-12


def test_report_contents(rng):
    img = rng.uniform(0, 255, (32, 32))
    _, report = denoise_msvd(img, 2, ThresholdSpec("hard", 30.0))
    d = report.as_dict()
    assert d["rule"] == "explicit" and d["mode"] == "hard"
    assert [lv["band_size"] for lv in d["levels"]] == [256, 64]
    assert all(set(lv["zeroed"]) == {"lh", "hl", "hh"} for lv in d["levels"])


def test_universal_lambda_from_finest_hh(rng):
    img = rng.uniform(0, 255, (32, 32))
    _, report = denoise_msvd(img, 2)
    assert report.lambdas[0] == report.lambdas[1]
    assert report.lambdas[0] == pytest.approx(report.sigma_hat * math.sqrt(2 * math.log(32 * 32)))


def test_denoise_is_deterministic(rng):
    img = rng.uniform(0, 255, (32, 32))
    a, ra = denoise_msvd(img, 2)
    b, rb = denoise_msvd(img.copy(), 2)
    assert a.tobytes() == b.tobytes() and ra == rb


def test_denoise_dimension_error():
    with pytest.raises(DimensionError):
        denoise_msvd(np.zeros((12, 12)), 3)


def test_phantom_psnr_gain():
    clean, _ = make_phantom(256, 0)
    noisy = add_gaussian_noise(clean, NoiseSpec(20.0, 7))
    out, _ = denoise_msvd(noisy, 2, ThresholdSpec("soft"))
    assert psnr(out, clean) >= psnr(noisy, clean) + 1.0


def test_lowrank_wrapper(rng):
    img = rng.uniform(0, 255, (12, 12))
    np.testing.assert_allclose(denoise_lowrank(img, 12), img, atol=1e-9)
    np.testing.assert_allclose(denoise_lowrank(np.full((6, 9), 4.0), 1), np.full((6, 9), 4.0), atol=1e-12)


def test_lowrank_denoising_helps_on_low_rank_signal(rng):
    clean = rng.standard_normal((64, 5)) @ rng.standard_normal((5, 64)) * 10
    noisy = clean + rng.normal(0, 1.0, clean.shape)
    assert np.linalg.norm(denoise_lowrank(noisy, 5) - clean) <= np.linalg.norm(noisy - clean)
