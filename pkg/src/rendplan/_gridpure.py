"""Pure-Python/numpy fallback for the compiled grid kernels.

Same contracts, same tie-breaking, same cost bookkeeping as
rendplan._gridcore; the two backends must produce identical outputs on
identical inputs (enforced by the parity tests). Used when the extension is
unavailable or when RENDPLAN_PURE=1 forces it.
"""

from __future__ import annotations

import heapq

import numpy as np

SQRT2 = 1.4142135623730951

UNKNOWN = 0
FREE = 1
OCCUPIED = 2

# neighbor order shared with the compiled backend: row-major over the 3x3 ring
NEIGHBORS = (
    (-1, -1, 1),
    (-1, 0, 0),
    (-1, 1, 1),
    (0, -1, 0),
    (0, 1, 0),
    (1, -1, 1),
    (1, 0, 0),
    (1, 1, 1),
)


def backend_name():
    return "pure"


def cast_rays(occ, known, r0, c0, ray_dr, ray_dc, ray_len):
    """Mark every ray cell free up to (exclusive) the first occupied hit.

    Rays never re-enter the grid once they exit (offsets are monotone), so
    masking out-of-bounds cells is equivalent to stopping at the first one.
    """
    h, w = occ.shape
    known[r0, c0] = FREE
    if ray_dr.size == 0:
        return
    rr = r0 + ray_dr
    cc = c0 + ray_dc
    steps = np.arange(ray_dr.shape[1])
    valid = (
        (steps[None, :] < ray_len[:, None])
        & (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
    )
    occ_hit = np.zeros_like(valid)
    occ_hit[valid] = occ[rr[valid], cc[valid]].astype(bool)
    any_hit = occ_hit.any(axis=1)
    first_hit = np.where(any_hit, occ_hit.argmax(axis=1), ray_dr.shape[1])
    free_mask = valid & (steps[None, :] < first_hit[:, None])
    known[rr[free_mask], cc[free_mask]] = FREE
    hit_rows = np.flatnonzero(any_hit)
    known[rr[hit_rows, first_hit[hit_rows]], cc[hit_rows, first_hit[hit_rows]]] = OCCUPIED


def _octile_counts(dr, dc):
    dr, dc = abs(dr), abs(dc)
    diag = min(dr, dc)
    return max(dr, dc) - diag, diag


def astar(known, r0, c0, r1, c1):
    """Octile A* over known-free cells; see the compiled twin for the contract."""
    h, w = known.shape
    if known[r0, c0] != FREE or known[r1, c1] != FREE:
        return None
    gc = np.full((h, w), -1, dtype=np.int32)
    gd = np.full((h, w), -1, dtype=np.int32)
    gkey = np.full((h, w), np.inf)
    parent = np.full((h, w), -1, dtype=np.int8)
    closed = np.zeros((h, w), dtype=bool)

    gc[r0, c0] = 0
    gd[r0, c0] = 0
    gkey[r0, c0] = 0.0
    hc, hd = _octile_counts(r1 - r0, c1 - c0)
    heap = [(hc + hd * SQRT2, r0, c0)]
    found = False
    while heap:
        _, r, c = heapq.heappop(heap)
        if closed[r, c]:
            continue
        closed[r, c] = True
        if r == r1 and c == c1:
            found = True
            break
        for dr, dc, diag in NEIGHBORS:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w):
                continue
            if known[nr, nc] != FREE or closed[nr, nc]:
                continue
            ngc = gc[r, c] + 1 - diag
            ngd = gd[r, c] + diag
            nkey = ngc + ngd * SQRT2
            if nkey < gkey[nr, nc]:
                gkey[nr, nc] = nkey
                gc[nr, nc] = ngc
                gd[nr, nc] = ngd
                parent[nr, nc] = NEIGHBORS.index((dr, dc, diag))
                hc, hd = _octile_counts(r1 - nr, c1 - nc)
                heapq.heappush(heap, (nkey + hc + hd * SQRT2, nr, nc))
    if not found:
        return None

    n = int(gc[r1, c1] + gd[r1, c1]) + 1
    path = np.empty((n, 2), dtype=np.int32)
    r, c = r1, c1
    for k in range(n - 1, -1, -1):
        path[k] = (r, c)
        if k > 0:
            dr, dc, _ = NEIGHBORS[parent[r, c]]
            r -= dr
            c -= dc
    return path, int(gc[r1, c1]), int(gd[r1, c1])


def dijkstra_counts(known, r0, c0):
    """Octile distance flood; (-1, -1) counts mark unreachable cells."""
    h, w = known.shape
    gc = np.full((h, w), -1, dtype=np.int32)
    gd = np.full((h, w), -1, dtype=np.int32)
    if known[r0, c0] != FREE:
        return gc, gd
    gkey = np.full((h, w), np.inf)
    closed = np.zeros((h, w), dtype=bool)
    gc[r0, c0] = 0
    gd[r0, c0] = 0
    gkey[r0, c0] = 0.0
    heap = [(0.0, r0, c0)]
    while heap:
        _, r, c = heapq.heappop(heap)
        if closed[r, c]:
            continue
        closed[r, c] = True
        for dr, dc, diag in NEIGHBORS:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w):
                continue
            if known[nr, nc] != FREE or closed[nr, nc]:
                continue
            ngc = gc[r, c] + 1 - diag
            ngd = gd[r, c] + diag
            nkey = ngc + ngd * SQRT2
            if nkey < gkey[nr, nc]:
                gkey[nr, nc] = nkey
                gc[nr, nc] = ngc
                gd[nr, nc] = ngd
                heapq.heappush(heap, (nkey, nr, nc))
    return gc, gd


def frontier_labels(known):
    """Label 8-connected frontier components in raster order (labels from 1)."""
    h, w = known.shape
    free = known == FREE
    unknown = known == UNKNOWN
    near_unknown = np.zeros((h, w), dtype=bool)
    near_unknown[:-1] |= unknown[1:]
    near_unknown[1:] |= unknown[:-1]
    near_unknown[:, :-1] |= unknown[:, 1:]
    near_unknown[:, 1:] |= unknown[:, :-1]
    mask = free & near_unknown

    labels = np.zeros((h, w), dtype=np.int32)
    current = 0
    for r, c in np.argwhere(mask):
        if labels[r, c]:
            continue
        current += 1
        stack = [(int(r), int(c))]
        labels[r, c] = current
        while stack:
            cr, cc = stack.pop()
            for dr, dc, _ in NEIGHBORS:
                nr, nc = cr + dr, cc + dc
                if 0 <= nr < h and 0 <= nc < w and mask[nr, nc] and not labels[nr, nc]:
                    labels[nr, nc] = current
                    stack.append((nr, nc))
    return labels, current
