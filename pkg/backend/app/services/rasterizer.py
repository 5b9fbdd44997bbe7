from typing import List, NamedTuple, Tuple, Callable, Iterable, Any
import logging
import math
import numpy as np
from joblib import Parallel, delayed

from ..core.exceptions import NonFiniteError, ShapeMismatchError
from ..models.config import RasterConfig
from ..models.gaussian import Gaussian2D, GaussianCloud, RenderGrads
from .gaussian_core import inverse_cov_entries, inverse_cov_backward, marginal_std

logger = logging.getLogger(__name__)


class TileRange(NamedTuple):
    """Half-open tile rectangle [tx0, tx1) x [ty0, ty1)."""
    tx0: int
    ty0: int
    tx1: int
    ty1: int

    @property
    def is_empty(self) -> bool:
        return self.tx0 >= self.tx1 or self.ty0 >= self.ty1


class TileBin(NamedTuple):
    x0: int
    y0: int
    x1: int
    y1: int
    gaussian_ids: np.ndarray   # ascending Gaussian indices touching this tile


class TileRasterizer:
    """
    Order-independent splatting: every pixel is sum_i c_i * exp(-1/2 d^T Sigma_i^-1 d).

    There is no alpha compositing or depth sort, so tiles are independent; forward
    writes disjoint image blocks and backward reduces per-tile partial gradients.
    """

    def __init__(self, config: RasterConfig = None):
        self.config = config or RasterConfig()

    # ------------------------------------------------------------------ culling

    def gaussian_tile_range(self, g: Gaussian2D, width: int, height: int) -> TileRange:
        cloud = GaussianCloud.from_gaussians([g], width, height)
        tx0, ty0, tx1, ty1 = self._tile_ranges(cloud, width, height)
        return TileRange(int(tx0[0]), int(ty0[0]), int(tx1[0]), int(ty1[0]))

    def cutoff_half_extents(self, chol_raw: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        std_x, std_y = marginal_std(np.atleast_2d(chol_raw))
        return self.config.cutoff_sigma * std_x, self.config.cutoff_sigma * std_y

    def _tile_ranges(self, cloud: GaussianCloud, width: int, height: int):
        ts = self.config.tile_size
        n_tx = -(-width // ts)
        n_ty = -(-height // ts)
        n = cloud.size
        if not self.config.truncates:
            return (np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64),
                    np.full(n, n_tx, dtype=np.int64), np.full(n, n_ty, dtype=np.int64))

        rx, ry = self.cutoff_half_extents(cloud.chol_raw)
        mx, my = cloud.means[:, 0], cloud.means[:, 1]
        # Pixel columns/rows whose centers (j + 0.5) fall inside the cutoff box
        j0 = np.ceil(mx - rx - 0.5)
        j1 = np.floor(mx + rx - 0.5)
        i0 = np.ceil(my - ry - 0.5)
        i1 = np.floor(my + ry - 0.5)
        empty = (j0 > j1) | (i0 > i1) | (j1 < 0) | (i1 < 0) | (j0 > width - 1) | (i0 > height - 1)

        tx0 = (np.clip(j0, 0, width - 1) // ts).astype(np.int64)
        ty0 = (np.clip(i0, 0, height - 1) // ts).astype(np.int64)
        tx1 = (np.clip(j1, 0, width - 1) // ts).astype(np.int64) + 1
        ty1 = (np.clip(i1, 0, height - 1) // ts).astype(np.int64) + 1
        for lo, hi in ((tx0, tx1), (ty0, ty1)):
            lo[empty] = 0
            hi[empty] = 0
        return tx0, ty0, tx1, ty1

    def _bin_tiles(self, cloud: GaussianCloud, width: int, height: int) -> List[TileBin]:
        """Expand Gaussian tile rectangles into per-tile Gaussian lists (index order kept)."""
        ts = self.config.tile_size
        n_tx = -(-width // ts)
        n_ty = -(-height // ts)
        tx0, ty0, tx1, ty1 = self._tile_ranges(cloud, width, height)

        span_x = np.maximum(tx1 - tx0, 0)
        span_y = np.maximum(ty1 - ty0, 0)
        counts = span_x * span_y
        total = int(counts.sum())

        gid = np.repeat(np.arange(cloud.size), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        local = np.arange(total) - starts
        wx = span_x[gid]
        tile_x = tx0[gid] + (local % np.maximum(wx, 1))
        tile_y = ty0[gid] + (local // np.maximum(wx, 1))
        tile_id = tile_y * n_tx + tile_x

        order = np.argsort(tile_id, kind="stable")
        sorted_tiles = tile_id[order]
        sorted_gid = gid[order]
        bounds = np.searchsorted(sorted_tiles, np.arange(n_tx * n_ty + 1))

        bins: List[TileBin] = []
        for ty in range(n_ty):
            for tx in range(n_tx):
                t = ty * n_tx + tx
                bins.append(TileBin(
                    x0=tx * ts, y0=ty * ts,
                    x1=min((tx + 1) * ts, width), y1=min((ty + 1) * ts, height),
                    gaussian_ids=sorted_gid[bounds[t]:bounds[t + 1]],
                ))
        return bins

    # ------------------------------------------------------------------ forward

    def render(self, cloud: GaussianCloud, width: int, height: int) -> np.ndarray:
        if width < 1 or height < 1:
            raise ShapeMismatchError(f"render size must be >= 1x1, got {width}x{height}")
        if not cloud.is_finite():
            raise NonFiniteError("non-finite Gaussian parameters (corrupted model?)", group="gaussians")

        image = np.zeros((height, width, 3), dtype=np.float64)
        if cloud.size == 0:
            return image

        a, b, c = inverse_cov_entries(cloud.chol_raw)
        bins = self._bin_tiles(cloud, width, height)

        def render_tile(tile: TileBin):
            if tile.gaussian_ids.size == 0:
                return tile, None
            w, _, _ = self._tile_weights(cloud, a, b, c, tile)
            block = w.T @ cloud.colors[tile.gaussian_ids]
            return tile, block.reshape(tile.y1 - tile.y0, tile.x1 - tile.x0, 3)

        for tile, block in self._map(render_tile, bins):
            if block is not None:
                image[tile.y0:tile.y1, tile.x0:tile.x1] = block
        return image

    def _tile_weights(self, cloud: GaussianCloud, a, b, c, tile: TileBin):
        ids = tile.gaussian_ids
        xs = np.arange(tile.x0, tile.x1, dtype=np.float64) + 0.5
        ys = np.arange(tile.y0, tile.y1, dtype=np.float64) + 0.5
        px = np.tile(xs, ys.size)
        py = np.repeat(ys, xs.size)
        dx = px[None, :] - cloud.means[ids, 0:1]
        dy = py[None, :] - cloud.means[ids, 1:2]
        power = -0.5 * (a[ids, None] * dx * dx + 2.0 * b[ids, None] * dx * dy + c[ids, None] * dy * dy)
        return np.exp(power), dx, dy

    # ------------------------------------------------------------------ backward

    def render_backward(self, cloud: GaussianCloud, dL_dImage: np.ndarray) -> RenderGrads:
        if dL_dImage.ndim != 3 or dL_dImage.shape[2] != 3:
            raise ShapeMismatchError(f"image gradient must be (H, W, 3), got {dL_dImage.shape}")
        if not np.isfinite(dL_dImage).all():
            raise NonFiniteError("non-finite incoming image gradient", group="image")
        if not cloud.is_finite():
            raise NonFiniteError("non-finite Gaussian parameters (corrupted model?)", group="gaussians")

        height, width = dL_dImage.shape[:2]
        n = cloud.size
        d_mean = np.zeros((n, 2))
        d_abc = np.zeros((n, 3))
        d_color = np.zeros((n, 3))
        if n == 0:
            return RenderGrads(d_mean=d_mean, d_chol_raw=np.zeros((0, 3)), d_color=d_color)

        a, b, c = inverse_cov_entries(cloud.chol_raw)
        bins = self._bin_tiles(cloud, width, height)

        def backward_tile(tile: TileBin):
            ids = tile.gaussian_ids
            if ids.size == 0:
                return None
            w, dx, dy = self._tile_weights(cloud, a, b, c, tile)
            grad = dL_dImage[tile.y0:tile.y1, tile.x0:tile.x1].reshape(-1, 3)
            part_color = w @ grad
            d_power = (cloud.colors[ids] @ grad.T) * w
            part_abc = np.stack([
                -0.5 * (d_power * dx * dx).sum(axis=1),
                -(d_power * dx * dy).sum(axis=1),
                -0.5 * (d_power * dy * dy).sum(axis=1),
            ], axis=1)
            # d power / d mu = Sigma^-1 d
            part_mean = np.stack([
                (d_power * (a[ids, None] * dx + b[ids, None] * dy)).sum(axis=1),
                (d_power * (b[ids, None] * dx + c[ids, None] * dy)).sum(axis=1),
            ], axis=1)
            return ids, part_color, part_mean, part_abc

        # Tile order is fixed in deterministic mode, so the reduction is too.
        for partial in self._map(backward_tile, bins):
            if partial is None:
                continue
            ids, part_color, part_mean, part_abc = partial
            d_color[ids] += part_color
            d_mean[ids] += part_mean
            d_abc[ids] += part_abc

        d_chol_raw = inverse_cov_backward(cloud.chol_raw, d_abc[:, 0], d_abc[:, 1], d_abc[:, 2])
        return RenderGrads(d_mean=d_mean, d_chol_raw=d_chol_raw, d_color=d_color)

    # ------------------------------------------------------------------ scheduling

    def _map(self, fn: Callable[[TileBin], Any], tiles: List[TileBin]) -> Iterable[Any]:
        workers = self.config.num_workers
        if workers <= 1:
            return (fn(tile) for tile in tiles)
        return_as = "list" if self.config.deterministic else "generator_unordered"
        return Parallel(n_jobs=workers, prefer="threads", return_as=return_as)(
            delayed(fn)(tile) for tile in tiles
        )


def naive_render(cloud: GaussianCloud, width: int, height: int) -> np.ndarray:
    """Reference per-pixel double loop without culling; slow, for checks and tiny frames."""
    a, b, c = inverse_cov_entries(cloud.chol_raw)
    image = np.zeros((height, width, 3))
    for i in range(height):
        for j in range(width):
            dx = (j + 0.5) - cloud.means[:, 0]
            dy = (i + 0.5) - cloud.means[:, 1]
            w = np.exp(-0.5 * (a * dx * dx + 2.0 * b * dx * dy + c * dy * dy))
            image[i, j] = w @ cloud.colors
    return image


def truncation_bound(cloud: GaussianCloud, cutoff_sigma: float) -> float:
    """Largest per-pixel change truncation at cutoff_sigma can cause."""
    if not math.isfinite(cutoff_sigma) or cloud.size == 0:
        return 0.0
    return float(cloud.size * math.exp(-0.5 * cutoff_sigma ** 2) * np.abs(cloud.colors).max())
