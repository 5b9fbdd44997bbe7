import numpy as np
import pytest
from scipy import stats

from app.models.config import ModelConfig
from app.models.video import FrameSequence, TemporalMap
from app.services.gaussian_core import cov_from_chol
from app.services.initializer import temporal_gradient_map, sample_means, random_means, init_cloud


def _video(frames) -> FrameSequence:
    return FrameSequence(frames=np.asarray(frames, dtype=np.float64))


def test_static_video_has_zero_map(rng):
    frame = rng.random((8, 8, 3))
    tmap = temporal_gradient_map(_video([frame, frame, frame]))
    assert not tmap.data.any()
    assert tmap.total == 0.0


def test_single_frame_has_zero_map(rng):
    tmap = temporal_gradient_map(_video(rng.random((1, 5, 6, 3))))
    assert tmap.data.shape == (5, 6)
    assert not tmap.data.any()


def test_single_pixel_change():
    frames = np.zeros((2, 4, 4, 3))
    frames[1, 2, 1, 0] = 0.5
    tmap = temporal_gradient_map(_video(frames))
    expected = np.zeros((4, 4))
    expected[2, 1] = 0.5
    np.testing.assert_array_equal(tmap.data, expected)


def test_matches_naive_loop(rng):
    frames = rng.random((4, 8, 8, 3))
    expected = np.zeros((8, 8))
    for t in range(3):
        for i in range(8):
            for j in range(8):
                for ch in range(3):
                    expected[i, j] += abs(frames[t + 1, i, j, ch] - frames[t, i, j, ch])
    tmap = temporal_gradient_map(_video(frames))
    np.testing.assert_allclose(tmap.data, expected, rtol=1e-14)
    assert tmap.total == pytest.approx(expected.sum(), rel=1e-6)


def test_reverse_and_scale_invariance(rng):
    frames = rng.random((5, 6, 7, 3))
    base = temporal_gradient_map(_video(frames)).data
    np.testing.assert_allclose(temporal_gradient_map(_video(frames[::-1])).data, base, rtol=1e-13)
    np.testing.assert_allclose(temporal_gradient_map(_video(0.5 * frames)).data, 0.5 * base, rtol=1e-13)


def test_zero_map_samples_uniformly():
    tmap = TemporalMap(data=np.zeros((4, 4)), total=0.0)
    means = sample_means(tmap, 10_000, seed=5)
    cells = np.floor(means[:, 1]).astype(int) * 4 + np.floor(means[:, 0]).astype(int)
    counts = np.bincount(cells, minlength=16)
    assert stats.chisquare(counts).pvalue > 0.01


def test_concentrated_map_samples_one_pixel():
    data = np.zeros((6, 6))
    data[4, 1] = 3.0
    means = sample_means(TemporalMap(data=data, total=3.0), 500, floor_eps=0.0, seed=2)
    assert ((means[:, 0] >= 1.0) & (means[:, 0] < 2.0)).all()
    assert ((means[:, 1] >= 4.0) & (means[:, 1] < 5.0)).all()


def test_two_region_mass_ratio():
    data = np.zeros((2, 8))
    data[:, :4] = 3.0
    data[:, 4:] = 1.0
    means = sample_means(TemporalMap(data=data, total=float(data.sum())), 100_000, floor_eps=0.0, seed=9)
    left = int((means[:, 0] < 4.0).sum())
    ratio = left / (len(means) - left)
    assert ratio == pytest.approx(3.0, rel=0.05)


def test_sampling_is_seeded(rng):
    tmap = temporal_gradient_map(_video(rng.random((3, 8, 8, 3))))
    np.testing.assert_array_equal(sample_means(tmap, 50, seed=4), sample_means(tmap, 50, seed=4))


def test_random_means_uniform_and_bounded():
    means = random_means(10_000, 40, 20, seed=11)
    assert ((means[:, 0] >= 0) & (means[:, 0] < 40) & (means[:, 1] >= 0) & (means[:, 1] < 20)).all()
    assert stats.kstest(means[:, 0] / 40.0, "uniform").pvalue > 0.01
    assert stats.kstest(means[:, 1] / 20.0, "uniform").pvalue > 0.01


def test_random_means_rejects_zero():
    with pytest.raises(ValueError):
        random_means(0, 8, 8)


def test_init_scale_single_gaussian():
    video = _video(np.full((2, 64, 64, 3), 0.3))
    cloud = init_cloud(video, np.array([[32.0, 32.0]]))
    sigma, _, _ = cov_from_chol(cloud.chol_raw[0])
    np.testing.assert_allclose(sigma, np.diag([4096.0, 4096.0]), rtol=1e-9)


def test_constant_video_colors():
    video = _video(np.full((3, 10, 12, 3), [0.2, 0.5, 0.8]))
    cloud = init_cloud(video, random_means(30, 12, 10, seed=0))
    np.testing.assert_allclose(cloud.colors, np.tile([0.2, 0.5, 0.8], (30, 1)))


def test_init_color_is_temporal_mean_at_nearest_pixel(rng):
    frames = rng.random((4, 5, 6, 3))
    cloud = init_cloud(_video(frames), np.array([[2.7, 3.1]]))
    np.testing.assert_allclose(cloud.colors[0], frames[:, 3, 2].mean(axis=0))


def test_init_rejects_count_mismatch():
    video = _video(np.zeros((2, 8, 8, 3)))
    with pytest.raises(ValueError):
        init_cloud(video, np.zeros((3, 2)), ModelConfig(num_gaussians=4))
