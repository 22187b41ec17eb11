"""Square gridworld contaminated by circular pollution clouds.

Coordinates are (x, y) cell indices with (0, 0) the top-left corner; x
grows to the right and y grows downward.  A cloud occupies a Euclidean
disc of cells around its center, clipped at the grid borders, with
intensity 1.0 at the center falling off linearly toward the rim.  The
searcher senses only the cell it occupies, so a cloud counts as located
exactly when the searcher stands on one of its support cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

Cell = tuple[int, int]
RandomSource = np.random.Generator

UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3
DIRECTION_NAMES = ("up", "down", "left", "right")
# (dx, dy) per direction; up decreases y because y grows downward.
DELTAS = ((0, -1), (0, 1), (-1, 0), (1, 0))


def make_rng(seed: int, stream: int = 0) -> RandomSource:
    """Seeded generator; equal (seed, stream) gives equal draws on any platform."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    return np.random.default_rng((int(seed), int(stream)))


@dataclass(frozen=True)
class GridConfig:
    """Grid geometry plus the per-episode primitive step budget."""

    grid_length: int = 20
    pollution_diameter: int = 5
    start_cell: Cell = (0, 0)
    max_steps: int = 400

    def __post_init__(self):
        if self.pollution_diameter < 1:
            raise ValueError("pollution_diameter must be at least 1")
        if self.grid_length < self.pollution_diameter:
            raise ValueError("grid_length must be at least pollution_diameter")
        x, y = self.start_cell
        if not (0 <= x < self.grid_length and 0 <= y < self.grid_length):
            raise ValueError("start_cell lies outside the grid")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@lru_cache(maxsize=None)
def disc_offsets(diameter: int) -> tuple[tuple[int, int, float], ...]:
    """(dx, dy, intensity) for every cell of an unclipped cloud disc.

    A cell belongs to the disc when its Euclidean distance from the
    center is at most diameter / 2.  Intensity is 1 - 2 * dist / (diameter + 1),
    which stays strictly positive everywhere on the disc.
    """
    if diameter < 1:
        raise ValueError("diameter must be at least 1")
    radius = diameter / 2.0
    reach = diameter // 2
    cells = []
    for dy in range(-reach, reach + 1):
        for dx in range(-reach, reach + 1):
            dist = math.hypot(dx, dy)
            if dist <= radius:
                cells.append((dx, dy, 1.0 - 2.0 * dist / (diameter + 1)))
    return tuple(cells)


@dataclass(frozen=True)
class Cloud:
    """One pollution cloud: center cell, diameter, and clipped support.

    support maps each in-grid cell of the disc to its intensity.
    """

    center: Cell
    diameter: int
    support: dict[Cell, float]


def make_cloud(center: Cell, diameter: int, grid_length: int) -> Cloud:
    cx, cy = center
    if not (0 <= cx < grid_length and 0 <= cy < grid_length):
        raise ValueError("cloud center lies outside the grid")
    support = {}
    for dx, dy, level in disc_offsets(diameter):
        x, y = cx + dx, cy + dy
        if 0 <= x < grid_length and 0 <= y < grid_length:
            support[(x, y)] = level
    return Cloud((cx, cy), diameter, support)


@dataclass
class CloudField:
    """The active clouds of one episode."""

    clouds: list[Cloud]
    grid_length: int

    def copy(self) -> "CloudField":
        return CloudField(list(self.clouds), self.grid_length)


def spawn_clouds(config: GridConfig, count: int, rng: RandomSource) -> CloudField:
    """Spawn count clouds with centers drawn uniformly over all grid cells.

    Centers are independent; overlapping clouds are allowed.  Each cloud
    consumes exactly two integer draws (x then y), so spawn sequences are
    reproducible from the generator state alone.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    length = config.grid_length
    clouds = []
    for _ in range(count):
        x = int(rng.integers(length))
        y = int(rng.integers(length))
        clouds.append(make_cloud((x, y), config.pollution_diameter, length))
    return CloudField(clouds, length)


def sense(field: CloudField, pos: Cell) -> float:
    """Pollution level at pos: max over clouds, 0.0 outside every support."""
    best = 0.0
    for cloud in field.clouds:
        level = cloud.support.get(pos, 0.0)
        if level > best:
            best = level
    return best


def move(pos: Cell, direction: int, config: GridConfig) -> tuple[Cell, bool]:
    """One clamped step.  Returns (new position, whether the move happened)."""
    dx, dy = DELTAS[direction]
    x, y = pos[0] + dx, pos[1] + dy
    limit = config.grid_length - 1
    if x < 0 or x > limit or y < 0 or y > limit:
        return pos, False
    return (x, y), True


def collect(field: CloudField, pos: Cell) -> tuple[CloudField, int]:
    """Remove every cloud whose support contains pos.

    Returns the updated field and the number of clouds removed.
    """
    remaining = [c for c in field.clouds if pos not in c.support]
    found = len(field.clouds) - len(remaining)
    return CloudField(remaining, field.grid_length), found


def field_to_records(field: CloudField) -> list[dict]:
    """JSON-ready description of a field, center and diameter per cloud."""
    return [
        {"center": [c.center[0], c.center[1]], "diameter": c.diameter}
        for c in field.clouds
    ]


def field_from_records(records: list[dict], grid_length: int) -> CloudField:
    clouds = [
        make_cloud((int(r["center"][0]), int(r["center"][1])), int(r["diameter"]), grid_length)
        for r in records
    ]
    return CloudField(clouds, grid_length)
