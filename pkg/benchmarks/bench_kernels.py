"""Numba kernels against their numpy twins, plus whole-episode timing.

    python benchmarks/bench_kernels.py [--repeat 5] [--episodes 5]

Each row prints the best-of-``repeat`` wall time of both backends and the
speedup. Results of the two backends are compared before timing.
"""
import argparse
import timeit

import numpy as np

from idnc_cde import _accel, harness, kernels


def _cases(rng):
    S = (rng.random((60, 30)) < 0.3).astype(np.uint8)
    order = rng.permutation(60).astype(np.int64)
    full = np.ones(30, dtype=np.uint8)
    pri = rng.random(60) < 0.2
    reward = rng.random(60)
    small = (rng.random((20, 16)) < 0.4).astype(np.uint8)
    packed = kernels.pack_wants(small, np.arange(16))
    return {
        "greedy, all 60 senders, N=30": (
            lambda: kernels.greedy_masks_numba(S, order),
            lambda: kernels.greedy_masks_numpy(S, order)),
        "multi-start greedy, M=60, N=30": (
            lambda: kernels.multistart_best_numba(S, full, order, pri, reward),
            lambda: kernels.multistart_best_numpy(S, full, order, pri, reward)),
        "exhaustive, 2^16 masks, M=20": (
            lambda: kernels.exhaustive_best_numba(packed, 16, pri[:20], reward[:20]),
            lambda: kernels.exhaustive_best_numpy(packed, 16, pri[:20], reward[:20])),
    }


def _best(fn, repeat, number=1):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def _same(a, b):
    return np.array_equal(np.asarray(a), np.asarray(b))


def bench_kernels(repeat):
    rows = []
    for name, (fast, slow) in _cases(np.random.default_rng(0)).items():
        if not _same(fast(), slow()):  # also warms up the jit
            raise SystemExit(f"backends disagree on {name}")
        rows.append((name, _best(fast, repeat, 5), _best(slow, repeat, 1)))
    return rows


def bench_episodes(n, repeat):
    cfg = harness.ExperimentConfig(players=60, packets=30, q_mean=0.3, p_mean=0.15)
    out = {}
    for flag in (True, False):
        _accel.USE_NUMBA = flag
        harness.run_paired_iteration(cfg, 0)
        out[flag] = [harness.run_paired_iteration(cfg, i) for i in range(n)]
        t = _best(lambda: [harness.run_paired_iteration(cfg, i) for i in range(n)], repeat)
        out[flag] = (out[flag], t / n)
    _accel.USE_NUMBA = _accel.HAVE_NUMBA
    if out[True][0] != out[False][0]:
        raise SystemExit("episode results differ between backends")
    return ("paired CDE+PMP episode, M=60, N=30", out[True][1], out[False][1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--episodes", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    rows = bench_kernels(args.repeat)
    rows.append(bench_episodes(args.episodes, max(1, args.repeat // 2)))
    w = max(len(r[0]) for r in rows)
    print(f"{'case':<{w}}  {'numba':>10}  {'numpy':>10}  speedup")
    for name, tn, tp in rows:
        print(f"{name:<{w}}  {tn * 1e3:8.3f}ms  {tp * 1e3:8.3f}ms  {tp / tn:6.1f}x")


if __name__ == "__main__":
    main()
