"""Deterministic 2-D grid environment and perception primitives.

Ground truth is a closed occupancy grid loaded from ASCII art; each robot
holds a tri-state known map fed by idealized ray-cast sensing. All hot
operations delegate to the selected kernel backend; ray fans are precomputed
here once per sensor radius and shared by both backends so results never
depend on which one is active.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .kernels import FREE, OCCUPIED, SQRT2, UNKNOWN

DIAG_EXTRA = SQRT2 - 1.0


class MapFormatError(ValueError):
    """ASCII map violates the format rules."""


@dataclass
class GridWorld:
    occ: np.ndarray  # uint8 (H, W); 1 = occupied
    cell_size: float  # meters per cell
    spawns: dict[int, tuple[int, int]]  # robot id -> cell

    @property
    def height(self) -> int:
        return self.occ.shape[0]

    @property
    def width(self) -> int:
        return self.occ.shape[1]

    def is_free(self, cell) -> bool:
        return not self.occ[cell[0], cell[1]]


@dataclass
class KnownMap:
    cells: np.ndarray  # int8 (H, W) of UNKNOWN/FREE/OCCUPIED
    cell_size: float

    @property
    def shape(self):
        return self.cells.shape

    def copy(self) -> "KnownMap":
        return KnownMap(self.cells.copy(), self.cell_size)

    def free_count(self) -> int:
        return int(np.count_nonzero(self.cells == FREE))

    def explored_area_m2(self) -> float:
        return self.free_count() * self.cell_size**2


def blank_known(world: GridWorld) -> KnownMap:
    return KnownMap(np.zeros_like(world.occ, dtype=np.int8), world.cell_size)


SPAWN_CHARS = "123456789"


def load_map(text: str, cell_size: float = 2.0) -> GridWorld:
    """Parse '#'/'.'/digit ASCII into a closed world with spawn cells."""
    lines = text.rstrip("\n").split("\n")
    if len(lines) < 3:
        raise MapFormatError("map needs at least 3 rows")
    width = len(lines[0])
    if width < 3:
        raise MapFormatError("map needs at least 3 columns")
    occ = np.zeros((len(lines), width), dtype=np.uint8)
    spawns: dict[int, tuple[int, int]] = {}
    for r, line in enumerate(lines):
        if len(line) != width:
            raise MapFormatError(f"row {r} has {len(line)} columns, expected {width}")
        for c, ch in enumerate(line):
            if ch == "#":
                occ[r, c] = 1
            elif ch == ".":
                pass
            elif ch in SPAWN_CHARS:
                rid = int(ch)
                if rid in spawns:
                    raise MapFormatError(f"duplicate spawn id {rid} at row {r}")
                spawns[rid] = (r, c)
            else:
                raise MapFormatError(f"bad character {ch!r} at row {r}, col {c}")
    border = np.concatenate([occ[0], occ[-1], occ[:, 0], occ[:, -1]])
    if not border.all():
        raise MapFormatError("open boundary: every border cell must be '#'")
    if spawns and sorted(spawns) != list(range(1, len(spawns) + 1)):
        raise MapFormatError(f"spawn ids must be 1..N, got {sorted(spawns)}")
    return GridWorld(occ=occ, cell_size=cell_size, spawns=spawns)


def load_map_file(path: str, cell_size: float = 2.0) -> GridWorld:
    with open(path) as fh:
        return load_map(fh.read(), cell_size)


def supercover_line(r0: int, c0: int, r1: int, c1: int) -> list[tuple[int, int]]:
    """Every cell the segment between two cell centers touches, in order.

    Corner crossings contribute both side cells, so walls that meet only
    diagonally still block rays.
    """
    cells = [(r0, c0)]
    dr, dc = r1 - r0, c1 - c0
    sr = 1 if dr >= 0 else -1
    sc = 1 if dc >= 0 else -1
    nr, nc = abs(dr), abs(dc)
    ir = ic = 0
    r, c = r0, c0
    while ir < nr or ic < nc:
        decision = (1 + 2 * ic) * nr - (1 + 2 * ir) * nc
        if decision == 0:
            cells.append((r, c + sc))
            cells.append((r + sr, c))
            r += sr
            c += sc
            ir += 1
            ic += 1
            cells.append((r, c))
        elif decision < 0:
            c += sc
            ic += 1
            cells.append((r, c))
        else:
            r += sr
            ir += 1
            cells.append((r, c))
    return cells


@lru_cache(maxsize=64)
def _ray_fan(radius_cells: float):
    """Clipped supercover rays from the origin to the Chebyshev ring."""
    ring = max(1, math.ceil(radius_cells))
    r2 = radius_cells * radius_cells
    rays = []
    for tr in range(-ring, ring + 1):
        for tc in range(-ring, ring + 1):
            if max(abs(tr), abs(tc)) != ring:
                continue
            cut = []
            for dr, dc in supercover_line(0, 0, tr, tc)[1:]:
                if dr * dr + dc * dc > r2:
                    break
                cut.append((dr, dc))
            if cut:
                rays.append(cut)
    if not rays:
        empty = np.zeros((0, 1), dtype=np.int32)
        return empty, empty.copy(), np.zeros(0, dtype=np.int32)
    longest = max(len(ray) for ray in rays)
    ray_dr = np.zeros((len(rays), longest), dtype=np.int32)
    ray_dc = np.zeros_like(ray_dr)
    ray_len = np.zeros(len(rays), dtype=np.int32)
    for k, ray in enumerate(rays):
        ray_len[k] = len(ray)
        for i, (dr, dc) in enumerate(ray):
            ray_dr[k, i] = dr
            ray_dc[k, i] = dc
    return ray_dr, ray_dc, ray_len


def sense(world: GridWorld, known: KnownMap, pose: tuple[int, int],
          range_m: float) -> KnownMap:
    """Idealized 360-degree scan: update `known` in place and return it."""
    r, c = pose
    if not (0 <= r < world.height and 0 <= c < world.width):
        raise ValueError(f"pose {pose} out of bounds")
    if world.occ[r, c]:
        raise ValueError(f"pose {pose} is occupied")
    ray_dr, ray_dc, ray_len = _ray_fan(range_m / world.cell_size)
    kernels.cast_rays(world.occ, known.cells, r, c, ray_dr, ray_dc, ray_len)
    return known


@dataclass
class Frontier:
    cells: np.ndarray  # (n, 2) int32, raster order
    centroid: tuple[int, int]  # member cell nearest the component mean
    size: int


def octile_metric(dr: float, dc: float) -> float:
    """Octile distance in cell units for coordinate deltas."""
    adr, adc = abs(dr), abs(dc)
    return max(adr, adc) + DIAG_EXTRA * min(adr, adc)


def detect_frontiers(known: KnownMap) -> list[Frontier]:
    """All 8-connected frontier components, ordered by their minimum (row, col)."""
    labels, count = kernels.frontier_labels(known.cells)
    if count == 0:
        return []
    w = known.cells.shape[1]
    flat = labels.ravel()
    idx = np.flatnonzero(flat)
    lab = flat[idx]
    order = np.argsort(lab, kind="stable")  # stable keeps raster order per label
    sorted_idx = idx[order]
    bounds = np.searchsorted(lab[order], np.arange(1, count + 2))
    out = []
    for k in range(count):
        members = sorted_idx[bounds[k]:bounds[k + 1]]
        cells = np.stack(divmod(members, w), axis=1).astype(np.int32)
        mean_r = cells[:, 0].mean()
        mean_c = cells[:, 1].mean()
        dists = np.maximum(
            np.abs(cells[:, 0] - mean_r), np.abs(cells[:, 1] - mean_c)
        ) + DIAG_EXTRA * np.minimum(
            np.abs(cells[:, 0] - mean_r), np.abs(cells[:, 1] - mean_c)
        )
        best = int(np.argmin(dists))
        out.append(Frontier(cells=cells, centroid=(int(cells[best, 0]), int(cells[best, 1])),
                            size=len(cells)))
    return out


def astar_path(known: KnownMap, start: tuple[int, int], goal: tuple[int, int]):
    """Shortest 8-connected path through known-free cells only.

    Returns (path array (n,2), length in meters) or None when the goal is
    unreachable through known-free space.
    """
    if known.cells[start[0], start[1]] != FREE:
        raise ValueError(f"start {start} is not known-free")
    res = kernels.astar(known.cells, start[0], start[1], goal[0], goal[1])
    if res is None:
        return None
    path, n_card, n_diag = res
    return path, (n_card + n_diag * SQRT2) * known.cell_size


def merge_maps(a: KnownMap, b: KnownMap) -> KnownMap:
    """Cellwise merge: known beats unknown, occupied beats free."""
    if a.cells.shape != b.cells.shape or a.cell_size != b.cell_size:
        raise ValueError("cannot merge maps with different geometry")
    return KnownMap(np.maximum(a.cells, b.cells), a.cell_size)


def grid_distances(known: KnownMap, source: tuple[int, int]) -> np.ndarray:
    """Shortest-path distance in meters from source to every known-free cell."""
    gc, gd = kernels.dijkstra_counts(known.cells, source[0], source[1])
    dist = (gc + gd * SQRT2) * known.cell_size
    return np.where(gc >= 0, dist, np.inf)


def nearest_free_cell(known: KnownMap, target: tuple[float, float]):
    """Known-free cell closest (octile) to an arbitrary point; raster tie-break.

    Returns None when nothing is known-free yet.
    """
    cells = np.argwhere(known.cells == FREE)
    if cells.size == 0:
        return None
    adr = np.abs(cells[:, 0] - target[0])
    adc = np.abs(cells[:, 1] - target[1])
    dists = np.maximum(adr, adc) + DIAG_EXTRA * np.minimum(adr, adc)
    best = int(np.argmin(dists))
    return int(cells[best, 0]), int(cells[best, 1])
