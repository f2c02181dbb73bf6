"""Scene states and the pixel discretization of placed shapes.

A scene is a set of posed rigid bodies inside the unit square.  Images follow
the convention that logical pixel (i1, i2) covers the closed cell
[i1*d, (i1+1)*d] x [i2*d, (i2+1)*d] with d the pixel size, and is stored at
array row (height - 1 - i2), column i1, so the y axis points up.  A pixel is
on exactly when its closed cell meets the union of placed shapes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose, Shape, place, placed_shapes_disjoint

# body colors for RGB rendering; overlap is excluded by validation so
# compositing order never matters
PALETTE = (
    (0.9, 0.15, 0.15),
    (0.15, 0.55, 0.95),
    (0.2, 0.8, 0.25),
    (0.95, 0.8, 0.1),
    (0.7, 0.3, 0.85),
    (0.95, 0.5, 0.1),
)


class SceneStateError(ValueError):
    """Raised when placed bodies overlap or leave the rendered window."""


class RenderError(RuntimeError):
    """Rasterization failure, annotated with the frame index when batched."""


@dataclass(frozen=True)
class GridSpec:
    """Pixel grid over the world window [0, nx*delta] x [0, ny*delta]."""

    nx: int
    ny: int

    @property
    def delta(self) -> float:
        return 1.0 / max(self.nx, self.ny)

    @property
    def window(self) -> tuple[float, float]:
        d = self.delta
        return self.nx * d, self.ny * d

    @staticmethod
    def from_resolution(resolution) -> "GridSpec":
        if isinstance(resolution, GridSpec):
            return resolution
        if isinstance(resolution, (tuple, list)):
            nx, ny = int(resolution[0]), int(resolution[1])
        else:
            nx = ny = int(resolution)
        if nx < 2 or ny < 2:
            raise ValueError(f"resolution must be at least 2 pixels per side, got {resolution}")
        return GridSpec(nx, ny)


@dataclass
class SceneState:
    """K rigid bodies: one pose per shape.  Validity is checked on demand."""

    shapes: list[Shape]
    poses: list[Pose]

    def __post_init__(self):
        if len(self.shapes) != len(self.poses):
            raise SceneStateError("shapes and poses must align one to one")

    def placed(self):
        return [place(s, p) for s, p in zip(self.shapes, self.poses)]

    def validate(self, window: tuple[float, float] = (1.0, 1.0)):
        """Check containment in the window and pairwise disjointness."""
        bodies = self.placed()
        wx, wy = window
        for k, b in enumerate(bodies):
            x0, y0, x1, y1 = b.bounds()
            if x0 < -1e-12 or y0 < -1e-12 or x1 > wx + 1e-12 or y1 > wy + 1e-12:
                raise SceneStateError(
                    f"body {k} leaves the window [0,{wx}]x[0,{wy}]: bounds {(x0, y0, x1, y1)}")
        for i in range(len(bodies)):
            for j in range(i + 1, len(bodies)):
                if not placed_shapes_disjoint(bodies[i], bodies[j]):
                    raise SceneStateError(f"bodies {i} and {j} overlap")
        return bodies


@dataclass
class PixelImage:
    """Channel-first image with data in [0, 1] and its grid metadata."""

    data: np.ndarray  # (channels, ny, nx)
    grid: GridSpec

    @property
    def delta(self) -> float:
        return self.grid.delta

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    def pixel(self, i1: int, i2: int, channel: int = 0) -> float:
        """Value at logical coordinates (i1, i2); i2 counts upward."""
        return float(self.data[channel, self.grid.ny - 1 - i2, i1])


def _cell_extents(grid: GridSpec):
    d = grid.delta
    x0 = np.arange(grid.nx) * d
    y0 = np.arange(grid.ny) * d
    X0, Y0 = np.meshgrid(x0, y0, indexing="xy")
    return X0, X0 + d, Y0, Y0 + d


def _logical_to_rows(mask_logical: np.ndarray) -> np.ndarray:
    # logical row index i2 counts up; array rows count down
    return mask_logical[::-1, :]


def rasterize_binary(state: SceneState, resolution, validate: bool = True) -> PixelImage:
    """Binary occupancy image: pixel = 1 iff its closed cell meets a body.

    Exact for discs (clamped-distance test) and convex polygons (separating
    axis test); half-open rectangles honor their open edges.
    """
    grid = GridSpec.from_resolution(resolution)
    bodies = state.validate(grid.window) if validate else state.placed()
    X0, X1, Y0, Y1 = _cell_extents(grid)
    mask = np.zeros((grid.ny, grid.nx), dtype=bool)
    for b in bodies:
        mask |= b.intersects_cells(X0, X1, Y0, Y1)
    data = _logical_to_rows(mask).astype(np.float32)[None]
    return PixelImage(data=data, grid=grid)


def rasterize_soft(state: SceneState, resolution, supersample: int = 8,
                   channels: int = 1, seed: int = 0, validate: bool = True) -> PixelImage:
    """Anti-aliased image: pixel value = covered fraction of stratified samples.

    Each cell is split into supersample^2 strata sampled with a jittered point
    apiece (deterministic for a given seed).  In 3-channel mode body k is tinted
    with its palette color; coverages add because bodies are disjoint.
    """
    if supersample < 1:
        raise ValueError("supersample must be >= 1")
    if channels not in (1, 3):
        raise ValueError("channels must be 1 or 3")
    grid = GridSpec.from_resolution(resolution)
    bodies = state.validate(grid.window) if validate else state.placed()
    d = grid.delta
    n = supersample
    rng = np.random.default_rng(seed)
    out = np.zeros((channels, grid.ny, grid.nx), dtype=np.float64)
    for k, b in enumerate(bodies):
        x0, y0, x1, y1 = b.bounds()
        i1_lo = max(int(np.floor(x0 / d)) - 1, 0)
        i1_hi = min(int(np.ceil(x1 / d)) + 1, grid.nx - 1)
        i2_lo = max(int(np.floor(y0 / d)) - 1, 0)
        i2_hi = min(int(np.ceil(y1 / d)) + 1, grid.ny - 1)
        if i1_lo > i1_hi or i2_lo > i2_hi:
            continue
        nx_c, ny_c = i1_hi - i1_lo + 1, i2_hi - i2_lo + 1
        base_x = (np.arange(i1_lo, i1_hi + 1) * d)[None, :, None, None]
        base_y = (np.arange(i2_lo, i2_hi + 1) * d)[:, None, None, None]
        strata = (np.arange(n) + 0.0) / n
        jit = rng.random((ny_c, nx_c, n, n, 2))
        px = base_x + (strata[None, None, None, :] + jit[..., 0] / n) * d
        py = base_y + (strata[None, None, :, None] + jit[..., 1] / n) * d
        pts = np.stack([px, py], axis=-1).reshape(ny_c, nx_c, n * n, 2)
        cover = b.contains(pts).mean(axis=-1)  # (ny_c, nx_c) in logical order
        rows = grid.ny - 1 - np.arange(i2_lo, i2_hi + 1)
        if channels == 1:
            out[0, rows[:, None], np.arange(i1_lo, i1_hi + 1)[None, :]] += cover
        else:
            color = b.color if b.color is not None else PALETTE[k % len(PALETTE)]
            for c in range(3):
                out[c, rows[:, None], np.arange(i1_lo, i1_hi + 1)[None, :]] += color[c] * cover
    np.clip(out, 0.0, 1.0, out=out)
    return PixelImage(data=out.astype(np.float32), grid=grid)


def render_trajectory(states: list[SceneState], resolution, mode: str = "binary",
                      supersample: int = 8, seed: int = 0) -> list[PixelImage]:
    """Rasterize a state sequence with uniform resolution and mode.

    Soft modes derive a per-frame RNG stream from (seed, frame), so frames can
    be rendered in any order or in parallel with identical results.
    """
    if not states:
        raise ValueError("need at least one state")
    frames = []
    for idx, st in enumerate(states):
        try:
            if mode == "binary":
                frames.append(rasterize_binary(st, resolution))
            elif mode in ("gray", "rgb"):
                frames.append(rasterize_soft(st, resolution, supersample=supersample,
                                             channels=1 if mode == "gray" else 3,
                                             seed=hash((seed, idx)) & 0x7FFFFFFF))
            else:
                raise ValueError(f"unknown render mode {mode!r}")
        except SceneStateError as exc:
            raise RenderError(f"frame {idx}: {exc}") from exc
    return frames


def frames_to_array(frames: list[PixelImage]) -> np.ndarray:
    """Stack PixelImages into an (n, channels, ny, nx) float32 array."""
    return np.stack([f.data for f in frames]).astype(np.float32)
