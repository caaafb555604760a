# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid kernels: ray-cast sensing, octile A*, distance flood, frontier labels.

Mirrors rendplan._gridpure exactly; both operate on the same precomputed ray
fans and share tie-breaking rules so results are bit-identical. Path costs are
tracked as (cardinal, diagonal) step counts and compared through the derived
double count_c + count_d*sqrt(2), which keeps orderings exact for any grid
this size.
"""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()

cdef double SQRT2 = 1.4142135623730951

UNKNOWN = 0
FREE = 1
OCCUPIED = 2

# neighbor order shared with the pure backend: row-major over the 3x3 ring
cdef int[8] NBR_DR = [-1, -1, -1, 0, 0, 1, 1, 1]
cdef int[8] NBR_DC = [-1, 0, 1, -1, 1, -1, 0, 1]
cdef int[8] NBR_DIAG = [1, 0, 1, 0, 0, 1, 0, 1]


def backend_name():
    return "compiled"


def cast_rays(cnp.uint8_t[:, ::1] occ, cnp.int8_t[:, ::1] known,
              int r0, int c0,
              cnp.int32_t[:, ::1] ray_dr, cnp.int32_t[:, ::1] ray_dc,
              cnp.int32_t[::1] ray_len):
    """Walk every precomputed ray from (r0, c0), marking cells until a hit."""
    cdef int h = occ.shape[0], w = occ.shape[1]
    cdef int nrays = ray_dr.shape[0]
    cdef int k, i, rr, cc, n
    known[r0, c0] = FREE
    for k in range(nrays):
        n = ray_len[k]
        for i in range(n):
            rr = r0 + ray_dr[k, i]
            cc = c0 + ray_dc[k, i]
            if rr < 0 or rr >= h or cc < 0 or cc >= w:
                break
            if occ[rr, cc]:
                known[rr, cc] = OCCUPIED
                break
            known[rr, cc] = FREE


cdef struct Heap:
    double* f
    int* r
    int* c
    int size


cdef inline bint _heap_less(Heap* hp, int i, int j):
    if hp.f[i] != hp.f[j]:
        return hp.f[i] < hp.f[j]
    if hp.r[i] != hp.r[j]:
        return hp.r[i] < hp.r[j]
    return hp.c[i] < hp.c[j]


cdef inline void _heap_swap(Heap* hp, int i, int j):
    cdef double tf = hp.f[i]
    cdef int tr = hp.r[i], tc = hp.c[i]
    hp.f[i] = hp.f[j]; hp.r[i] = hp.r[j]; hp.c[i] = hp.c[j]
    hp.f[j] = tf; hp.r[j] = tr; hp.c[j] = tc


cdef inline void _heap_push(Heap* hp, double f, int r, int c):
    cdef int i = hp.size, parent
    hp.f[i] = f; hp.r[i] = r; hp.c[i] = c
    hp.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _heap_less(hp, i, parent):
            _heap_swap(hp, i, parent)
            i = parent
        else:
            break


cdef inline void _heap_pop(Heap* hp):
    cdef int i = 0, child
    hp.size -= 1
    _heap_swap(hp, 0, hp.size)
    while True:
        child = 2 * i + 1
        if child >= hp.size:
            break
        if child + 1 < hp.size and _heap_less(hp, child + 1, child):
            child += 1
        if _heap_less(hp, child, i):
            _heap_swap(hp, i, child)
            i = child
        else:
            break


def astar(cnp.int8_t[:, ::1] known, int r0, int c0, int r1, int c1):
    """Octile shortest path over known-free cells.

    Returns (path int32[n,2], n_cardinal, n_diagonal) or None when the goal
    cannot be reached. Ties on f are broken by (row, col); equal-g parents
    keep the first writer, matching the pure backend step for step.
    """
    cdef int h = known.shape[0], w = known.shape[1]
    if known[r0, c0] != FREE or known[r1, c1] != FREE:
        return None
    cdef cnp.ndarray[cnp.int32_t, ndim=2] gc_arr = np.full((h, w), -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] gd_arr = np.full((h, w), -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gkey_arr = np.full((h, w), np.inf)
    cdef cnp.ndarray[cnp.int8_t, ndim=2] par_arr = np.full((h, w), -1, dtype=np.int8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] closed_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.int32_t[:, ::1] gc = gc_arr
    cdef cnp.int32_t[:, ::1] gd = gd_arr
    cdef cnp.float64_t[:, ::1] gkey = gkey_arr
    cdef cnp.int8_t[:, ::1] par = par_arr
    cdef cnp.uint8_t[:, ::1] closed = closed_arr

    cdef Heap hp
    cdef int cap = 8 * h * w + 16
    hp.f = <double*>malloc(cap * sizeof(double))
    hp.r = <int*>malloc(cap * sizeof(int))
    hp.c = <int*>malloc(cap * sizeof(int))
    hp.size = 0
    if hp.f == NULL or hp.r == NULL or hp.c == NULL:
        free(hp.f); free(hp.r); free(hp.c)
        raise MemoryError()

    cdef int r, c, nr, nc, k, dr, dc, hc, hd
    cdef double nkey, fkey
    cdef bint found = False
    gc[r0, c0] = 0
    gd[r0, c0] = 0
    gkey[r0, c0] = 0.0
    dr = r1 - r0 if r1 >= r0 else r0 - r1
    dc = c1 - c0 if c1 >= c0 else c0 - c1
    hd = dr if dr < dc else dc
    hc = (dr if dr > dc else dc) - hd
    _heap_push(&hp, hc + hd * SQRT2, r0, c0)

    try:
        while hp.size > 0:
            fkey = hp.f[0]; r = hp.r[0]; c = hp.c[0]
            _heap_pop(&hp)
            if closed[r, c]:
                continue
            closed[r, c] = 1
            if r == r1 and c == c1:
                found = True
                break
            for k in range(8):
                nr = r + NBR_DR[k]
                nc = c + NBR_DC[k]
                if nr < 0 or nr >= h or nc < 0 or nc >= w:
                    continue
                if known[nr, nc] != FREE or closed[nr, nc]:
                    continue
                nkey = (gc[r, c] + 1 - NBR_DIAG[k]) + (gd[r, c] + NBR_DIAG[k]) * SQRT2
                if nkey < gkey[nr, nc]:
                    gkey[nr, nc] = nkey
                    gc[nr, nc] = gc[r, c] + 1 - NBR_DIAG[k]
                    gd[nr, nc] = gd[r, c] + NBR_DIAG[k]
                    par[nr, nc] = k
                    dr = r1 - nr if r1 >= nr else nr - r1
                    dc = c1 - nc if c1 >= nc else nc - c1
                    hd = dr if dr < dc else dc
                    hc = (dr if dr > dc else dc) - hd
                    _heap_push(&hp, nkey + hc + hd * SQRT2, nr, nc)
    finally:
        free(hp.f); free(hp.r); free(hp.c)

    if not found:
        return None
    cdef int n = gc[r1, c1] + gd[r1, c1] + 1
    cdef cnp.ndarray[cnp.int32_t, ndim=2] path = np.empty((n, 2), dtype=np.int32)
    cdef int d
    r, c = r1, c1
    for k in range(n - 1, -1, -1):
        path[k, 0] = r
        path[k, 1] = c
        if k > 0:
            d = par[r, c]
            r -= NBR_DR[d]
            c -= NBR_DC[d]
    return path, int(gc[r1, c1]), int(gd[r1, c1])


def dijkstra_counts(cnp.int8_t[:, ::1] known, int r0, int c0):
    """Full octile distance flood from (r0, c0); -1 counts mark unreachable cells."""
    cdef int h = known.shape[0], w = known.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] gc_arr = np.full((h, w), -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] gd_arr = np.full((h, w), -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gkey_arr = np.full((h, w), np.inf)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] closed_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.int32_t[:, ::1] gc = gc_arr
    cdef cnp.int32_t[:, ::1] gd = gd_arr
    cdef cnp.float64_t[:, ::1] gkey = gkey_arr
    cdef cnp.uint8_t[:, ::1] closed = closed_arr
    if known[r0, c0] != FREE:
        return gc_arr, gd_arr

    cdef Heap hp
    cdef int cap = 8 * h * w + 16
    hp.f = <double*>malloc(cap * sizeof(double))
    hp.r = <int*>malloc(cap * sizeof(int))
    hp.c = <int*>malloc(cap * sizeof(int))
    hp.size = 0
    if hp.f == NULL or hp.r == NULL or hp.c == NULL:
        free(hp.f); free(hp.r); free(hp.c)
        raise MemoryError()

    cdef int r, c, nr, nc, k
    cdef double nkey
    gc[r0, c0] = 0
    gd[r0, c0] = 0
    gkey[r0, c0] = 0.0
    _heap_push(&hp, 0.0, r0, c0)
    try:
        while hp.size > 0:
            r = hp.r[0]; c = hp.c[0]
            _heap_pop(&hp)
            if closed[r, c]:
                continue
            closed[r, c] = 1
            for k in range(8):
                nr = r + NBR_DR[k]
                nc = c + NBR_DC[k]
                if nr < 0 or nr >= h or nc < 0 or nc >= w:
                    continue
                if known[nr, nc] != FREE or closed[nr, nc]:
                    continue
                nkey = (gc[r, c] + 1 - NBR_DIAG[k]) + (gd[r, c] + NBR_DIAG[k]) * SQRT2
                if nkey < gkey[nr, nc]:
                    gkey[nr, nc] = nkey
                    gc[nr, nc] = gc[r, c] + 1 - NBR_DIAG[k]
                    gd[nr, nc] = gd[r, c] + NBR_DIAG[k]
                    _heap_push(&hp, nkey, nr, nc)
    finally:
        free(hp.f); free(hp.r); free(hp.c)
    return gc_arr, gd_arr


def frontier_labels(cnp.int8_t[:, ::1] known):
    """Label 8-connected components of frontier cells in raster order.

    A frontier cell is known-free with at least one 4-adjacent unknown cell.
    Returns (labels int32[h,w], n_components); labels start at 1.
    """
    cdef int h = known.shape[0], w = known.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] lab_arr = np.zeros((h, w), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] lab = lab_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] mask_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] mask = mask_arr
    cdef int r, c, k, nr, nc, head, tail, cur
    for r in range(h):
        for c in range(w):
            if known[r, c] != FREE:
                continue
            if (r > 0 and known[r - 1, c] == UNKNOWN) or \
               (r + 1 < h and known[r + 1, c] == UNKNOWN) or \
               (c > 0 and known[r, c - 1] == UNKNOWN) or \
               (c + 1 < w and known[r, c + 1] == UNKNOWN):
                mask[r, c] = 1

    cdef int* qr = <int*>malloc(h * w * sizeof(int))
    cdef int* qc = <int*>malloc(h * w * sizeof(int))
    if qr == NULL or qc == NULL:
        free(qr); free(qc)
        raise MemoryError()
    cur = 0
    try:
        for r in range(h):
            for c in range(w):
                if not mask[r, c] or lab[r, c]:
                    continue
                cur += 1
                head = 0
                tail = 0
                qr[tail] = r; qc[tail] = c; tail += 1
                lab[r, c] = cur
                while head < tail:
                    for k in range(8):
                        nr = qr[head] + NBR_DR[k]
                        nc = qc[head] + NBR_DC[k]
                        if nr < 0 or nr >= h or nc < 0 or nc >= w:
                            continue
                        if mask[nr, nc] and lab[nr, nc] == 0:
                            lab[nr, nc] = cur
                            qr[tail] = nr; qc[tail] = nc; tail += 1
                    head += 1
    finally:
        free(qr); free(qc)
    return lab_arr, cur
