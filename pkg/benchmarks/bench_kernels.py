"""Benchmark the compiled kernels against the pure-Python fallback.

Run directly:

    python3 benchmarks/bench_kernels.py

Both paths execute the same source (see sensemat._kernels), so besides the
timing this script asserts that their outputs are bit-identical.
"""

import time

import numpy as np

from sensemat import _kernels
from sensemat.model import TimingConfig, rate_table
from sensemat.simulate import _allocate_outputs


def bench(fn, args, warmup=1, repeat=3):
    for _ in range(warmup):
        fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def slot_workload(n_slots=5000, n_su=6, n_ch=8, seed=0):
    rng = np.random.default_rng(seed)
    matrices = rng.integers(0, n_ch + 1, size=(3, n_su, n_ch)).astype(np.int64)
    variant_idx = rng.integers(0, 3, size=n_slots).astype(np.int64)
    p0 = rng.uniform(0.2, 0.9, size=n_ch)
    b = rate_table(TimingConfig(), n_ch)
    pu_u = rng.random((n_slots, n_ch))
    persist_u = rng.random((n_slots, n_su, n_ch))
    sense_u = rng.random((n_slots, n_su, n_ch))
    return (matrices, variant_idx, p0, 0.15, 0.9, 0.8, b, pu_u, persist_u, sense_u)


def exact_workload(n_su=4, n_ch=12, seed=1):
    rng = np.random.default_rng(seed)
    sm = rng.integers(0, n_ch + 1, size=(n_su, n_ch)).astype(np.int64)
    p0 = rng.uniform(0.1, 0.9, size=n_ch)
    b = rate_table(TimingConfig(), n_ch)
    return (sm, p0, b)


def check_outputs_identical(slot_args):
    n_slots, n_su = slot_args[1].shape[0], slot_args[0].shape[1]
    out_compiled = _allocate_outputs(n_slots, n_su)
    out_python = _allocate_outputs(n_slots, n_su)
    _kernels.simulate_slots(*slot_args, *out_compiled)
    _kernels.simulate_slots_py(*slot_args, *out_python)
    return all(np.array_equal(a, b) for a, b in zip(out_compiled, out_python))


if __name__ == "__main__":
    print(f"numba active: {_kernels.USING_NUMBA}")

    slot_args = slot_workload()
    print("slot kernel outputs identical:", check_outputs_identical(slot_args))

    n_slots, n_su = slot_args[1].shape[0], slot_args[0].shape[1]
    sink = _allocate_outputs(n_slots, n_su)
    t_nb = bench(lambda: _kernels.simulate_slots(*slot_args, *sink), ())
    t_py = bench(lambda: _kernels.simulate_slots_py(*slot_args, *sink), ())
    print(f"slot walk   ({n_slots} slots): python {t_py:.4f} s, "
          f"compiled {t_nb:.4f} s, speedup x{t_py / t_nb:.1f}")

    exact_args = exact_workload()
    v_nb = _kernels.exact_network_throughput(*exact_args)
    v_py = _kernels.exact_network_throughput_py(*exact_args)
    print("exact kernel outputs identical:", v_nb == v_py)
    t_nb = bench(_kernels.exact_network_throughput, exact_args)
    t_py = bench(_kernels.exact_network_throughput_py, exact_args)
    n_patterns = 1 << exact_args[0].shape[1]
    print(f"exact value ({n_patterns} patterns): python {t_py:.4f} s, "
          f"compiled {t_nb:.4f} s, speedup x{t_py / t_nb:.1f}")
