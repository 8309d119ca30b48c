"""Pure-Python/numpy versions of the compiled batch kernels.

Same signatures and bit-identical results as ``brdsim._kernels``; used when the
extension is not built.  Slower by a factor of a few to several hundred,
depending on game size (see benchmarks/bench_backends.py).
"""

import numpy as np

from . import rng

_U = np.uint64


def _keys(sk, a, b):
    with np.errstate(over="ignore"):
        k = rng.mix64_np(_U(sk) + np.asarray(a, dtype=np.uint64) * _U(rng.GOLDEN))
        return rng.mix64_np(k + np.asarray(b, dtype=np.uint64) * _U(rng.ROW_MULT))


def _unit(key, stream):
    return rng.to_unit_np(rng.stream_bits_np(key, stream))


def _pay_b(key, p):
    ua = _unit(key, rng.STREAM_UA)
    return np.where(_unit(key, rng.STREAM_COIN) < p, ua, _unit(key, rng.STREAM_UB))


def derive_seeds(base_seed, grid_index, start, n):
    return rng.derive_key_np(base_seed, _U(grid_index), np.arange(start, start + n, dtype=np.uint64))


def pne_count_batch(seeds, k_a, k_b, p):
    seeds = np.asarray(seeds, dtype=np.uint64)
    out = np.zeros(len(seeds), dtype=np.int64)
    a = np.arange(1, k_a + 1, dtype=np.uint64)[:, None]
    b = np.arange(1, k_b + 1, dtype=np.uint64)[None, :]
    rows = np.arange(k_a)
    for i, seed in enumerate(seeds.tolist()):
        key = _keys(rng.mix64(seed), a, b)
        col_arg = np.argmax(_unit(key, rng.STREAM_UA), axis=0)
        row_arg = np.argmax(_pay_b(key, p), axis=1)
        out[i] = int(np.count_nonzero(col_arg[row_arg] == rows))
    return out


def _one_run(sk, k_a, k_b, p, cols_a, cols_b):
    pa, pb = [1], [1]
    row_time, col_time = {}, {}
    rows_scanned, cols_scanned = set(), set()
    tau_ne = tau_r = tau_c = -1
    clen = 0
    t = 0
    while True:
        if t % 2 == 0:
            nb = pb[t]
            cols_scanned.add(nb)
            na = int(np.argmax(_unit(_keys(sk, cols_a, nb), rng.STREAM_UA))) + 1
        else:
            na = pa[t]
            rows_scanned.add(na)
            nb = int(np.argmax(_pay_b(_keys(sk, na, cols_b), p))) + 1
        t += 1
        pa.append(na)
        pb.append(nb)
        moved = na != pa[t - 1] or nb != pb[t - 1]
        if t == 2:
            in_r = nb == 1
        elif t > 2:
            in_r = row_time.get(na, t) <= t - 2 or col_time.get(nb, t) <= t - 2
        else:
            in_r = False
        if in_r and tau_r < 0:
            tau_r = t
        if in_r and moved and t >= 4 and tau_c < 0:
            tau_c = t
        row_time.setdefault(na, t)
        col_time.setdefault(nb, t)
        stayed_first = pa[1] == 1 and pb[1] == 1
        if not moved:
            if t == 1:
                continue
            tau_ne = 0 if (t == 2 and stayed_first) else t - 1
            break
        if (na, nb) == (1, 1) or (row_time[na] < t and col_time[nb] < t):
            start = next((s for s in range(t - 1) if pa[s] == na and pb[s] == nb), -1)
            if start >= 0:
                if start == 0 and stayed_first:
                    start = 1
                clen = t - start
                break
    nr, nc = len(rows_scanned), len(cols_scanned)
    return tau_ne, tau_r, tau_c, clen, t, nc * k_a + nr * k_b - nc * nr


def brd_batch(seeds, k_a, k_b, p):
    seeds = np.asarray(seeds, dtype=np.uint64)
    res = np.zeros((6, len(seeds)), dtype=np.int64)
    cols_a = np.arange(1, k_a + 1, dtype=np.uint64)
    cols_b = np.arange(1, k_b + 1, dtype=np.uint64)
    for i, seed in enumerate(seeds.tolist()):
        res[:, i] = _one_run(rng.mix64(seed), k_a, k_b, p, cols_a, cols_b)
    return tuple(res[j].copy() for j in range(6))
