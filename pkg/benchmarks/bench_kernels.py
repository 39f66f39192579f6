"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py

Times the two hot kernels of the Fock engine: the sector fill of the
two-mode splitter unitary and the fused number-difference reduction over
the occupation lattice. Fill buffers are touched once beforehand so the
numbers measure compute, not first-touch page faults (which both lanes pay
equally on a fresh allocation).

Set TWINBEAM_BACKEND=numpy to check what the package would use without
numba; this script always times both lanes when numba is importable.
"""

import time

import numpy as np

from twinbeam.kernels import _fill_pair_unitary_numpy, _port_stats_numpy

try:
    from twinbeam.kernels import _fill_pair_unitary_numba, _port_stats_numba

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_pair_unitary():
    print("pair unitary sector fill (buffer pre-touched)")
    print(f"{'dim':>5} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    c, s = np.cos(0.4), np.sin(0.4)
    coeffs = (complex(c), 1j * s, 1j * s, complex(c))
    for dim in (11, 21, 41, 61):
        buf = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
        buf[:] = 0.0  # touch every page up front
        t_np = best_of(lambda: _fill_pair_unitary_numpy(buf, *coeffs, dim))
        if HAVE_NUMBA:
            _fill_pair_unitary_numba(buf, *coeffs, dim)  # compile
            t_nb = best_of(lambda: _fill_pair_unitary_numba(buf, *coeffs, dim))
            print(f"{dim:>5} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} {t_np / t_nb:>8.1f}x")
        else:
            print(f"{dim:>5} {t_np * 1e3:>12.3f} {'n/a':>12} {'':>9}")


def bench_port_stats():
    print("\nnumber-difference reduction over the occupation lattice")
    print(f"{'modes':>6} {'dim':>5} {'basis':>9} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    rng = np.random.default_rng(0)
    for n_modes, dim in ((2, 41), (2, 61), (4, 9), (4, 13), (6, 5)):
        size = dim**n_modes
        probs = rng.random(size)
        probs /= probs.sum()
        strides = dim ** np.arange(n_modes - 1, -1, -1, dtype=np.int64)
        sel_c = np.zeros(n_modes, dtype=np.bool_)
        sel_d = np.zeros(n_modes, dtype=np.bool_)
        sel_c[: n_modes // 2] = True
        sel_d[n_modes // 2 :] = True
        t_np = best_of(lambda: _port_stats_numpy(probs, strides, dim, sel_c, sel_d))
        if HAVE_NUMBA:
            _port_stats_numba(probs, strides, dim, sel_c, sel_d)  # compile
            t_nb = best_of(lambda: _port_stats_numba(probs, strides, dim, sel_c, sel_d))
            print(
                f"{n_modes:>6} {dim:>5} {size:>9} {t_np * 1e3:>12.3f} "
                f"{t_nb * 1e3:>12.3f} {t_np / t_nb:>8.1f}x"
            )
        else:
            print(f"{n_modes:>6} {dim:>5} {size:>9} {t_np * 1e3:>12.3f} {'n/a':>12}")


if __name__ == "__main__":
    if not HAVE_NUMBA:
        print("numba lane unavailable (TWINBEAM_BACKEND=numpy or numba missing)\n")
    bench_pair_unitary()
    bench_port_stats()
