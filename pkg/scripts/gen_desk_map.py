"""Dev tool: generate the default desk-scale map (frozen into rendplan/maps/).

Office-style layout: a wall grid with door gaps plus scattered block
obstacles, three spawn markers along the top edge, fully connected free
space. Deterministic for a given seed; rerun only when retuning the default
environment, then commit the regenerated file.
"""

import argparse
from collections import deque

import numpy as np

SIZE = 130
PITCH = 13  # wall grid pitch in cells
SPAWNS = {1: (3, 30), 2: (3, 64), 3: (3, 98)}


def generate(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    occ = np.zeros((SIZE, SIZE), dtype=np.uint8)
    occ[0] = occ[-1] = occ[:, 0] = occ[:, -1] = 1

    lines = list(range(PITCH, SIZE - 1, PITCH))
    for r in lines:
        occ[r, 1:-1] = 1
    for c in lines:
        occ[1:-1, c] = 1

    # door gaps in every wall segment between junctions
    segs = [0] + lines + [SIZE - 1]
    for r in lines:
        for a, b in zip(segs, segs[1:]):
            if b - a < 4:
                continue
            if rng.random() < 0.92:
                at = int(rng.integers(a + 1, b - 2))
                occ[r, at:at + 2] = 0
    for c in lines:
        for a, b in zip(segs, segs[1:]):
            if b - a < 4:
                continue
            if rng.random() < 0.92:
                at = int(rng.integers(a + 1, b - 2))
                occ[at:at + 2, c] = 0

    # block obstacles inside rooms, clear of the room walls
    for ra, rb in zip(segs, segs[1:]):
        for ca, cb in zip(segs, segs[1:]):
            if rb - ra < 8 or cb - ca < 8 or rng.random() > 0.4:
                continue
            h = int(rng.integers(2, 5))
            w = int(rng.integers(2, 5))
            r0 = int(rng.integers(ra + 3, rb - 2 - h))
            c0 = int(rng.integers(ca + 3, cb - 2 - w))
            occ[r0:r0 + h, c0:c0 + w] = 1

    for r, c in SPAWNS.values():
        occ[r - 1:r + 2, c - 1:c + 2] = 0
    return occ


def connected(occ: np.ndarray) -> bool:
    free = np.argwhere(occ == 0)
    start = tuple(free[0])
    seen = np.zeros_like(occ, dtype=bool)
    seen[start] = True
    q = deque([start])
    while q:
        r, c = q.popleft()
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nr, nc = r + dr, c + dc
            if not occ[nr, nc] and not seen[nr, nc]:
                seen[nr, nc] = True
                q.append((nr, nc))
    return bool(seen[occ == 0].all())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="src/rendplan/maps/desk130.map")
    args = ap.parse_args()

    seed = args.seed
    occ = generate(seed)
    while not connected(occ):
        seed += 1000
        occ = generate(seed)

    grid = np.full((SIZE, SIZE), ".", dtype="<U1")
    grid[occ == 1] = "#"
    for rid, (r, c) in SPAWNS.items():
        grid[r, c] = str(rid)
    text = "\n".join("".join(row) for row in grid) + "\n"
    with open(args.out, "w") as fh:
        fh.write(text)
    free = int((occ == 0).sum())
    print(f"seed={seed} free_cells={free} free_area={free * 4} m^2 "
          f"({free / (SIZE * SIZE):.0%} of footprint)")


if __name__ == "__main__":
    main()
