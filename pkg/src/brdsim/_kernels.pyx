# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernels.  Must match ``brdsim._fallback`` bit for bit."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t ROW_MULT = 0xD1B54A32D192ED03ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0

cdef enum:
    STREAM_UA = 0
    STREAM_UB = 1
    STREAM_COIN = 2


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t profile_key(uint64_t sk, uint64_t a, uint64_t b) noexcept nogil:
    return mix64(mix64(sk + a * GOLDEN) + b * ROW_MULT)


cdef inline double unit(uint64_t key, uint64_t stream) noexcept nogil:
    return <double>(mix64(key + (stream + 1) * GOLDEN) >> 11) * INV_2_53


cdef inline double pay_a(uint64_t row_hash, uint64_t b) noexcept nogil:
    return unit(mix64(row_hash + b * ROW_MULT), STREAM_UA)


cdef inline double pay_b(uint64_t row_hash, uint64_t b, double p) noexcept nogil:
    cdef uint64_t key = mix64(row_hash + b * ROW_MULT)
    if unit(key, STREAM_COIN) < p:
        return unit(key, STREAM_UA)
    return unit(key, STREAM_UB)


def derive_seeds(uint64_t base_seed, uint64_t grid_index, uint64_t start, Py_ssize_t n):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(n, dtype=np.uint64)
    cdef uint64_t sk = mix64(base_seed)
    cdef uint64_t k = mix64(sk + grid_index * GOLDEN)
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = mix64(k + (start + i) * ROW_MULT)
    return out


def pne_count_batch(cnp.uint64_t[::1] seeds, Py_ssize_t k_a, Py_ssize_t k_b, double p):
    """Number of pure equilibria of each seeded game (marker intersection)."""
    cdef Py_ssize_t n = seeds.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] outv = out
    cdef double *col_max = <double *> malloc(k_b * sizeof(double))
    cdef Py_ssize_t *col_arg = <Py_ssize_t *> malloc(k_b * sizeof(Py_ssize_t))
    cdef Py_ssize_t *row_arg = <Py_ssize_t *> malloc(k_a * sizeof(Py_ssize_t))
    cdef Py_ssize_t i, a, b, best_b
    cdef uint64_t sk, key
    cdef double ua, ub, best
    cdef int64_t w
    if col_max == NULL or col_arg == NULL or row_arg == NULL:
        free(col_max); free(col_arg); free(row_arg)
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                sk = mix64(seeds[i])
                for b in range(k_b):
                    col_max[b] = -1.0
                    col_arg[b] = 0
                for a in range(k_a):
                    best = -1.0
                    best_b = 0
                    for b in range(k_b):
                        key = profile_key(sk, a + 1, b + 1)
                        ua = unit(key, STREAM_UA)
                        if unit(key, STREAM_COIN) < p:
                            ub = ua
                        else:
                            ub = unit(key, STREAM_UB)
                        if ua > col_max[b]:
                            col_max[b] = ua
                            col_arg[b] = a
                        if ub > best:
                            best = ub
                            best_b = b
                    row_arg[a] = best_b
                w = 0
                for a in range(k_a):
                    if col_arg[row_arg[a]] == a:
                        w += 1
                outv[i] = w
    finally:
        free(col_max); free(col_arg); free(row_arg)
    return out


def brd_batch(cnp.uint64_t[::1] seeds, Py_ssize_t k_a, Py_ssize_t k_b, double p):
    """Best-response dynamics from (1, 1) on lazily drawn games, one per seed.

    Returns ``(tau_ne, tau_r, tau_cycle, cycle_len, final_t, reveals)`` as int64
    arrays; -1 encodes an infinite stopping time.
    """
    cdef Py_ssize_t n = seeds.shape[0]
    cdef Py_ssize_t cap = 2 * (k_a if k_a < k_b else k_b) + 4
    tau_ne_a = np.full(n, -1, dtype=np.int64)
    tau_r_a = np.full(n, -1, dtype=np.int64)
    tau_c_a = np.full(n, -1, dtype=np.int64)
    clen_a = np.zeros(n, dtype=np.int64)
    final_a = np.zeros(n, dtype=np.int64)
    rev_a = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] tau_ne = tau_ne_a, tau_r = tau_r_a, tau_c = tau_c_a
    cdef int64_t[::1] clen = clen_a, final = final_a, rev = rev_a

    # first time s >= 1 at which a row / column is occupied; 0 = never
    cdef int64_t *row_time = <int64_t *> malloc((k_a + 1) * sizeof(int64_t))
    cdef int64_t *col_time = <int64_t *> malloc((k_b + 1) * sizeof(int64_t))
    cdef char *row_scan = <char *> malloc(k_a + 1)
    cdef char *col_scan = <char *> malloc(k_b + 1)
    cdef Py_ssize_t *pa = <Py_ssize_t *> malloc(cap * sizeof(Py_ssize_t))
    cdef Py_ssize_t *pb = <Py_ssize_t *> malloc(cap * sizeof(Py_ssize_t))
    # mix64(sk + a * GOLDEN): the row half of every profile key
    cdef uint64_t *row_hash = <uint64_t *> malloc((k_a + 1) * sizeof(uint64_t))
    cdef Py_ssize_t i, t, s, x, na, nb, start, nr, nc
    cdef uint64_t sk
    cdef double best, v
    cdef bint moved, in_r, stayed_first
    if (row_time == NULL or col_time == NULL or row_scan == NULL or col_scan == NULL
            or pa == NULL or pb == NULL or row_hash == NULL):
        free(row_time); free(col_time); free(row_scan); free(col_scan); free(pa); free(pb)
        free(row_hash)
        raise MemoryError()
    try:
        with nogil:
            for x in range(k_a + 1):
                row_time[x] = 0
                row_scan[x] = 0
            for x in range(k_b + 1):
                col_time[x] = 0
                col_scan[x] = 0
            for i in range(n):
                sk = mix64(seeds[i])
                for x in range(1, k_a + 1):
                    row_hash[x] = mix64(sk + x * GOLDEN)
                pa[0] = 1
                pb[0] = 1
                t = 0
                nr = 0
                nc = 0
                while True:
                    if t % 2 == 0:
                        nb = pb[t]
                        if not col_scan[nb]:
                            col_scan[nb] = 1
                            nc += 1
                        best = -1.0
                        na = 1
                        for x in range(1, k_a + 1):
                            v = pay_a(row_hash[x], nb)
                            if v > best:
                                best = v
                                na = x
                    else:
                        na = pa[t]
                        if not row_scan[na]:
                            row_scan[na] = 1
                            nr += 1
                        best = -1.0
                        nb = 1
                        for x in range(1, k_b + 1):
                            v = pay_b(row_hash[na], x, p)
                            if v > best:
                                best = v
                                nb = x
                    t += 1
                    pa[t] = na
                    pb[t] = nb
                    moved = na != pa[t - 1] or nb != pb[t - 1]
                    if t == 2:
                        in_r = nb == 1
                    elif t > 2:
                        in_r = ((row_time[na] != 0 and row_time[na] <= t - 2)
                                or (col_time[nb] != 0 and col_time[nb] <= t - 2))
                    else:
                        in_r = False
                    if in_r and tau_r[i] < 0:
                        tau_r[i] = t
                    if in_r and moved and t >= 4 and tau_c[i] < 0:
                        tau_c[i] = t
                    if row_time[na] == 0:
                        row_time[na] = t
                    if col_time[nb] == 0:
                        col_time[nb] = t
                    stayed_first = pa[1] == 1 and pb[1] == 1
                    if not moved:
                        if t == 1:
                            continue
                        if t == 2 and stayed_first:
                            tau_ne[i] = 0
                        else:
                            tau_ne[i] = t - 1
                        break
                    # a revisit needs an already occupied row and column
                    if (na == 1 and nb == 1) or (row_time[na] < t and col_time[nb] < t):
                        start = -1
                        for s in range(t - 1):
                            if pa[s] == na and pb[s] == nb:
                                start = s
                                break
                        if start >= 0:
                            if start == 0 and stayed_first:
                                start = 1
                            clen[i] = t - start
                            break
                final[i] = t
                rev[i] = nc * k_a + nr * k_b - nc * nr
                for s in range(t + 1):
                    row_time[pa[s]] = 0
                    col_time[pb[s]] = 0
                    row_scan[pa[s]] = 0
                    col_scan[pb[s]] = 0
    finally:
        free(row_time); free(col_time); free(row_scan); free(col_scan); free(pa); free(pb)
        free(row_hash)
    return tau_ne_a, tau_r_a, tau_c_a, clen_a, final_a, rev_a
