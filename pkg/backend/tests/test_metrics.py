import math
import numpy as np
import pytest
from scipy.signal import correlate2d, windows
from skimage.metrics import structural_similarity
from skimage.transform import downscale_local_mean

from app.core.exceptions import ShapeMismatchError
from app.services.metrics import (
    PSNR_CAP_DB, psnr, ssim, ms_ssim, ms_ssim_scales, ms_ssim_with_scales, metric_report, gaussian_window,
)


def test_psnr_identical_is_capped(rng):
    image = rng.random((8, 8, 3))
    assert psnr(image, image.copy()) == PSNR_CAP_DB


def test_psnr_mid_gray_against_black():
    gray = np.full((4, 4, 3), 0.5)
    black = np.zeros((4, 4, 3))
    assert psnr(gray, black) == pytest.approx(10 * math.log10(4.0))
    assert psnr(gray, black) == pytest.approx(6.0206, abs=1e-4)


def test_psnr_region_mask():
    a = np.zeros((4, 4, 3))
    b = np.zeros((4, 4, 3))
    b[:2] = 0.5
    top = np.zeros((4, 4), dtype=bool)
    top[:2] = True
    assert psnr(a, b, mask=top) == pytest.approx(6.0206, abs=1e-4)
    assert psnr(a, b, mask=~top) == PSNR_CAP_DB
    assert psnr(a, b) == pytest.approx(10 * math.log10(8.0))


def test_psnr_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        psnr(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))


def test_gaussian_window_is_normalized():
    window = gaussian_window()
    assert window.shape == (11,)
    assert window.sum() == pytest.approx(1.0)
    assert window.argmax() == 5
    np.testing.assert_allclose(window, window[::-1])


def test_ssim_matches_skimage(rng):
    a = rng.random((40, 36, 3))
    b = np.clip(a + rng.normal(0.0, 0.1, size=a.shape), 0.0, 1.0)
    expected = structural_similarity(
        a, b, gaussian_weights=True, sigma=1.5, use_sample_covariance=False,
        data_range=1.0, channel_axis=-1,
    )
    assert ssim(a, b) == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("size, scales", [(10, 0), (11, 1), (21, 1), (22, 2), (64, 3), (176, 5), (1080, 5)])
def test_scale_count(size, scales):
    assert ms_ssim_scales(size, size + 7) == scales


def test_ms_ssim_identical_is_one(rng):
    image = rng.random((64, 64, 3))
    value, scales = ms_ssim_with_scales(image, image.copy())
    assert value == pytest.approx(1.0)
    assert scales == 3


def test_single_scale_ms_ssim_equals_ssim(rng):
    a = rng.random((16, 16, 3))
    b = np.clip(a + rng.normal(0.0, 0.05, size=a.shape), 0.0, 1.0)
    assert ms_ssim(a, b) == pytest.approx(ssim(a, b), rel=1e-12)


def test_ms_ssim_decreases_with_noise(rng):
    clean = rng.random((96, 96, 3))
    values = [
        ms_ssim(clean, np.clip(clean + rng.normal(0.0, sigma, size=clean.shape), 0.0, 1.0))
        for sigma in (0.01, 0.05, 0.2)
    ]
    assert 1.0 > values[0] > values[1] > values[2] >= 0.0


def test_ms_ssim_rejects_tiny_images(rng):
    with pytest.raises(ShapeMismatchError):
        ms_ssim(rng.random((8, 8, 3)), rng.random((8, 8, 3)))


def test_ms_ssim_shape_mismatch(rng):
    with pytest.raises(ShapeMismatchError):
        ms_ssim(rng.random((32, 32, 3)), rng.random((32, 33, 3)))


def test_metric_report_clamps_inputs():
    ref = np.full((32, 32, 3), 0.5)
    out = ref.copy()
    out[0, 0] = 1.7
    out[1, 1] = -0.3
    clamped = np.clip(out, 0.0, 1.0)
    report = metric_report(ref, out)
    assert report.psnr_db == pytest.approx(psnr(ref, clamped))
    assert report.ms_ssim == pytest.approx(ms_ssim(ref, clamped))
    assert report.ms_ssim_scales == 2


def test_psnr_twenty_db_at_mse_one_hundredth():
    a = np.zeros((10, 10, 3))
    b = np.full((10, 10, 3), 0.1)
    assert psnr(a, b) == pytest.approx(20.0, abs=1e-9)


def test_psnr_matches_direct_oracle_and_is_symmetric(rng):
    a, b = rng.random((12, 9, 3)), rng.random((12, 9, 3))
    mse = sum((a[i, j, c] - b[i, j, c]) ** 2 for i in range(12) for j in range(9) for c in range(3)) / a.size
    assert psnr(a, b) == pytest.approx(10 * math.log10(1 / mse), abs=1e-9)
    assert psnr(a, b) == psnr(b, a)


def test_psnr_decreases_with_noise_amplitude(rng):
    clean = rng.random((32, 32, 3))
    noise = rng.normal(size=clean.shape)
    values = [psnr(clean, clean + amp * noise) for amp in (0.01, 0.02, 0.05, 0.1, 0.2)]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_ms_ssim_is_symmetric(rng):
    a = rng.random((48, 48, 3))
    b = np.clip(a + rng.normal(0.0, 0.1, size=a.shape), 0.0, 1.0)
    assert ms_ssim(a, b) == pytest.approx(ms_ssim(b, a), abs=1e-7)


def test_ms_ssim_of_checker_against_its_negative():
    checker = np.where((np.indices((64, 64)).sum(axis=0) % 2) == 0, 0.25, 0.75)
    image = np.repeat(checker[:, :, None], 3, axis=2)
    assert ms_ssim(image, 1.0 - image) < 0.2


def _reference_ms_ssim(a: np.ndarray, b: np.ndarray, scales: int) -> float:
    """Per-channel scipy correlation with a scipy Gaussian kernel, 2x2 mean pooling from skimage."""
    kernel = windows.gaussian(11, std=1.5)
    kernel = np.outer(kernel, kernel) / kernel.sum() ** 2
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    weights = np.array([0.0448, 0.2856, 0.3001, 0.2363, 0.1333])[:scales]
    weights = weights / weights.sum()

    def f(img):
        return correlate2d(img, kernel, mode="valid")

    def stats(x, y):
        ssim_means, cs_means = [], []
        for ch in range(x.shape[2]):
            mx, my = f(x[:, :, ch]), f(y[:, :, ch])
            vx = f(x[:, :, ch] ** 2) - mx ** 2
            vy = f(y[:, :, ch] ** 2) - my ** 2
            cov = f(x[:, :, ch] * y[:, :, ch]) - mx * my
            cs = (2 * cov + c2) / (vx + vy + c2)
            ssim_means.append(np.mean(cs * (2 * mx * my + c1) / (mx ** 2 + my ** 2 + c1)))
            cs_means.append(np.mean(cs))
        return np.mean(ssim_means), np.mean(cs_means)

    value = 1.0
    for level in range(scales):
        s, cs = stats(a, b)
        value *= max(s if level == scales - 1 else cs, 0.0) ** weights[level]
        h, w = (a.shape[0] // 2) * 2, (a.shape[1] // 2) * 2
        a = downscale_local_mean(a[:h, :w], (2, 2, 1))
        b = downscale_local_mean(b[:h, :w], (2, 2, 1))
    return float(value)


@pytest.mark.parametrize("shape, scales", [((96, 96, 3), 4), ((180, 200, 3), 5), ((64, 75, 3), 3)])
def test_ms_ssim_matches_scipy_reference(rng, shape, scales):
    a = rng.random(shape)
    b = np.clip(a + rng.normal(0.0, 0.1, size=shape), 0.0, 1.0)
    value, used = ms_ssim_with_scales(a, b)
    assert used == scales
    assert abs(value - _reference_ms_ssim(a, b, scales)) <= 1e-4
