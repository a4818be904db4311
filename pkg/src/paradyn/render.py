"""Escape-time rendering of Julia sets and basins.

Pixels are classified by the kernels in _kernels (escaped / basin target /
undecided; undecided pixels approximate the Julia set and render black).
Convergence to a parabolic point is detected by attracting-sector
membership, not by a disc around the point: parabolic convergence is only
polynomially fast, so a disc test at practical iteration budgets
misclassifies the petals.

Color table (class -> RGB), fixed for reproducible hashes:
  undecided        (0, 0, 0)
  escaped          gray ramp 255 - min(195, 3 * escape_index)
  basin target k   _PALETTE[k % 8], darkened with the hit index
"""

from __future__ import annotations

import hashlib
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError
from .maps import EntireMap

DEFAULT_PIXELS = 1024
DEFAULT_MAX_ITER = 2000
DEFAULT_BAILOUT = 1e6

_PALETTE = (
    (70, 130, 235),
    (240, 170, 60),
    (90, 200, 120),
    (190, 90, 220),
    (230, 90, 90),
    (90, 210, 210),
    (160, 160, 80),
    (120, 100, 200),
)


@dataclass(frozen=True)
class Viewport:
    center: complex
    width: float
    pixels_x: int = DEFAULT_PIXELS
    pixels_y: int = DEFAULT_PIXELS

    def __post_init__(self):
        if self.width <= 0 or self.pixels_x <= 0 or self.pixels_y <= 0:
            raise ConfigError("viewport dimensions must be positive")

    @property
    def height(self) -> float:
        # complex-plane aspect ratio matches the pixel ratio
        return self.width * self.pixels_y / self.pixels_x

    def grid(self) -> np.ndarray:
        xs = (
            self.center.real
            + (np.arange(self.pixels_x) + 0.5 - self.pixels_x / 2)
            * (self.width / self.pixels_x)
        )
        ys = (
            self.center.imag
            - (np.arange(self.pixels_y) + 0.5 - self.pixels_y / 2)
            * (self.height / self.pixels_y)
        )
        return xs[None, :] + 1j * ys[:, None]


@dataclass(frozen=True)
class SectorTarget:
    """Attracting-direction sector at a parabolic point."""

    zeta: complex
    vector: complex
    alpha: float
    radius: float


@dataclass(frozen=True)
class RenderJob:
    map: EntireMap
    viewport: Viewport
    max_iter: int = DEFAULT_MAX_ITER
    bailout: float = DEFAULT_BAILOUT
    classifier: str = "escape_time"  # escape_time | basin | julia_mask
    disc_targets: tuple = ()  # (center, radius) pairs
    sector_targets: tuple = ()  # SectorTarget entries

    def __post_init__(self):
        if self.classifier not in ("escape_time", "basin", "julia_mask"):
            raise ConfigError(f"unknown classifier {self.classifier!r}")
        if self.classifier == "basin":
            for c, r in self.disc_targets:
                if self.bailout <= abs(c) + r:
                    raise ConfigError("bailout must exceed every basin target")
            for s in self.sector_targets:
                if self.bailout <= abs(s.zeta) + s.radius:
                    raise ConfigError("bailout must exceed every basin target")


def tile_scheduler(job: RenderJob, tile_size: int) -> list:
    """Deterministic row-major tiling: (y0, y1, x0, x1) index boxes."""
    if tile_size <= 0:
        raise ConfigError("tile size must be positive")
    vx, vy = job.viewport.pixels_x, job.viewport.pixels_y
    tiles = []
    for y0 in range(0, vy, tile_size):
        for x0 in range(0, vx, tile_size):
            tiles.append((y0, min(y0 + tile_size, vy), x0, min(x0 + tile_size, vx)))
    return tiles


@dataclass
class RenderResult:
    classes: np.ndarray  # int16, 0 undecided / 1 escaped / 2+k targets
    indices: np.ndarray  # int32 first-hit iteration index
    stats: dict = field(default_factory=dict)

    def image(self) -> np.ndarray:
        """8-bit RGB per the fixed color table."""
        h, w = self.classes.shape
        img = np.zeros((h, w, 3), dtype=np.uint8)
        esc = self.classes == 1
        ramp = (255 - np.minimum(195, 3 * self.indices[esc])).astype(np.uint8)
        img[esc] = ramp[:, None]
        n_targets = int(self.classes.max(initial=1)) - 1
        for k in range(n_targets):
            m = self.classes == 2 + k
            if not m.any():
                continue
            base = np.array(_PALETTE[k % len(_PALETTE)], dtype=np.float64)
            fade = np.maximum(0.35, 1.0 - self.indices[m] / 512.0)
            img[m] = (base[None, :] * fade[:, None]).astype(np.uint8)
        return img

    def image_hash(self) -> str:
        return hashlib.sha256(self.image().tobytes()).hexdigest()

    def save_png(self, path) -> None:
        from PIL import Image

        Image.fromarray(self.image(), mode="RGB").save(path)


def render(
    job: RenderJob,
    threads: int = 1,
    tile_size: int = 64,
    force_numpy: bool = False,
) -> RenderResult:
    """Classify every pixel; output is a pure function of the job, identical
    for any threads/tile_size combination."""
    t0 = time.perf_counter()
    grid = job.viewport.grid()
    if job.classifier == "basin":
        disc = job.disc_targets
        secs = job.sector_targets
    else:
        disc, secs = (), ()
    disc_t = np.array([c for c, _ in disc], dtype=np.complex128)
    disc_r = np.array([r for _, r in disc], dtype=np.float64)
    sec_zeta = np.array([s.zeta for s in secs], dtype=np.complex128)
    sec_vec = np.array([s.vector for s in secs], dtype=np.complex128)
    sec_alpha = np.array([s.alpha for s in secs], dtype=np.float64)
    sec_r = np.array([s.radius for s in secs], dtype=np.float64)
    classes = np.zeros(grid.shape, dtype=np.int16)
    indices = np.zeros(grid.shape, dtype=np.int32)

    def run_tile(box):
        y0, y1, x0, x1 = box
        block = grid[y0:y1, x0:x1]
        cls, idx = _kernels.classify_block(
            block.ravel(),
            job.map.fam,
            job.map.param,
            job.map.scale,
            job.max_iter,
            job.bailout,
            disc_t,
            disc_r,
            sec_zeta,
            sec_vec,
            sec_alpha,
            sec_r,
            force_numpy=force_numpy,
        )
        classes[y0:y1, x0:x1] = cls.reshape(block.shape)
        indices[y0:y1, x0:x1] = idx.reshape(block.shape)

    tiles = tile_scheduler(job, tile_size)
    if threads <= 1:
        for box in tiles:
            run_tile(box)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_tile, tiles))
    elapsed = time.perf_counter() - t0
    hist = {int(c): int(n) for c, n in zip(*np.unique(classes, return_counts=True))}
    backend = "numpy" if (force_numpy or not _kernels.NUMBA_ENABLED) else "numba"
    return RenderResult(
        classes,
        indices,
        stats={
            "wall_time_s": elapsed,
            "class_histogram": hist,
            "threads": threads,
            "tile_size": tile_size,
            "backend": backend,
            "pixels": grid.size,
        },
    )
