"""Hot numeric kernels for the Fock engine.

Two interchangeable lanes: numba ``@njit`` kernels (default) and pure-numpy
fallbacks. Set ``TWINBEAM_BACKEND=numpy`` to force the fallback; the fallback
is also selected automatically when numba is not importable. The selected
lane is reported in ``BACKEND``.
"""

import os

import numpy as np

_requested = os.environ.get("TWINBEAM_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"TWINBEAM_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numba":
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        _HAVE_NUMBA = False
else:
    _HAVE_NUMBA = False

BACKEND = "numba" if _HAVE_NUMBA else "numpy"


def binomial_table(n_max: int) -> np.ndarray:
    """Pascal-triangle table C[n, k]; exact in float64 for n <= 56."""
    table = np.zeros((n_max + 1, n_max + 1))
    table[:, 0] = 1.0
    for n in range(1, n_max + 1):
        table[n, 1 : n + 1] = table[n - 1, 1 : n + 1] + table[n - 1, 0:n]
    return table


def _power_table(base, dim):
    out = np.empty(dim, dtype=np.complex128)
    out[0] = 1.0
    for p in range(1, dim):
        out[p] = out[p - 1] * base
    return out


# ---------------------------------------------------------------------------
# Two-mode unitary from the creation-operator map
#   a+ -> alpha c+ + beta d+,   b+ -> gamma c+ + delta d+.
#
# The map conserves the pair's total photon number n, so the matrix is built
# sector by sector. Sector n, input |k, n-k>, output |j, n-j>:
#   B[j, k] = sqrt(C(n,k)/C(n,j)) * sum_p C(k,p) C(n-k, j-p)
#             alpha^p beta^(k-p) gamma^(j-p) delta^(n-k-j+p).
# Sectors with n above the cutoff cannot be represented exactly under the
# truncation; they are left as the identity and callers must keep state
# support out of them.
# ---------------------------------------------------------------------------


def _fill_pair_unitary_numpy(big, alpha, beta, gamma, delta, dim):
    cutoff = dim - 1
    binom = binomial_table(cutoff)
    pow_a, pow_b = _power_table(alpha, dim), _power_table(beta, dim)
    pow_g, pow_d = _power_table(gamma, dim), _power_table(delta, dim)
    for n in range(cutoff + 1):
        js = np.arange(n + 1)
        out_rows = js * dim + (n - js)
        for k in range(n + 1):
            poly_a = binom[k, : k + 1] * pow_a[: k + 1] * pow_b[k::-1]
            poly_b = binom[n - k, : n - k + 1] * pow_g[: n - k + 1] * pow_d[n - k :: -1]
            row = np.convolve(poly_a, poly_b)
            prefactor = np.sqrt(binom[n, k] / binom[n, js])
            big[out_rows, k * dim + (n - k)] = prefactor * row
    n1, n2 = np.divmod(np.arange(dim * dim), dim)
    overflow = np.nonzero(n1 + n2 > cutoff)[0]
    big[overflow, overflow] = 1.0


# ---------------------------------------------------------------------------
# Fused reduction over the occupation lattice: number-difference histogram
# between two port groups plus the both-ports-occupied probability.
# ---------------------------------------------------------------------------


def _port_stats_numpy(probs, strides, dim, sel_c, sel_d):
    idx = np.arange(probs.shape[0])
    occ = (idx[None, :] // strides[:, None]) % dim
    n_c = occ[sel_c].sum(axis=0) if sel_c.any() else np.zeros(probs.shape[0], dtype=np.int64)
    n_d = occ[sel_d].sum(axis=0) if sel_d.any() else np.zeros(probs.shape[0], dtype=np.int64)
    n_max = (dim - 1) * strides.shape[0]
    hist = np.bincount(n_c - n_d + n_max, weights=probs, minlength=2 * n_max + 1)
    coincidence = float(probs[(n_c >= 1) & (n_d >= 1)].sum())
    return hist, coincidence


if _HAVE_NUMBA:

    @njit(cache=True)
    def _fill_pair_unitary_numba(big, alpha, beta, gamma, delta, dim):  # pragma: no cover
        cutoff = dim - 1
        binom = np.zeros((dim, dim))
        binom[:, 0] = 1.0
        for n in range(1, dim):
            for k in range(1, n + 1):
                binom[n, k] = binom[n - 1, k] + binom[n - 1, k - 1]
        pow_a = np.empty(dim, dtype=np.complex128)
        pow_b = np.empty(dim, dtype=np.complex128)
        pow_g = np.empty(dim, dtype=np.complex128)
        pow_d = np.empty(dim, dtype=np.complex128)
        pow_a[0] = pow_b[0] = pow_g[0] = pow_d[0] = 1.0
        for p in range(1, dim):
            pow_a[p] = pow_a[p - 1] * alpha
            pow_b[p] = pow_b[p - 1] * beta
            pow_g[p] = pow_g[p - 1] * gamma
            pow_d[p] = pow_d[p - 1] * delta
        for n in range(cutoff + 1):
            for k in range(n + 1):
                col = k * dim + (n - k)
                for j in range(n + 1):
                    acc = 0.0 + 0.0j
                    p_lo = max(0, j - (n - k))
                    p_hi = min(k, j)
                    for p in range(p_lo, p_hi + 1):
                        acc += (
                            binom[k, p]
                            * binom[n - k, j - p]
                            * pow_a[p]
                            * pow_b[k - p]
                            * pow_g[j - p]
                            * pow_d[n - k - j + p]
                        )
                    big[j * dim + (n - j), col] = np.sqrt(binom[n, k] / binom[n, j]) * acc
        for n1 in range(dim):
            for n2 in range(dim):
                if n1 + n2 > cutoff:
                    flat = n1 * dim + n2
                    big[flat, flat] = 1.0

    @njit(cache=True)
    def _port_stats_numba(probs, strides, dim, sel_c, sel_d):  # pragma: no cover
        n_modes = strides.shape[0]
        n_max = (dim - 1) * n_modes
        hist = np.zeros(2 * n_max + 1)
        coincidence = 0.0
        for idx in range(probs.shape[0]):
            n_c = 0
            n_d = 0
            for i in range(n_modes):
                occ = (idx // strides[i]) % dim
                if sel_c[i]:
                    n_c += occ
                if sel_d[i]:
                    n_d += occ
            hist[n_c - n_d + n_max] += probs[idx]
            if n_c >= 1 and n_d >= 1:
                coincidence += probs[idx]
        return hist, coincidence

    _fill_pair_unitary = _fill_pair_unitary_numba
    _port_stats = _port_stats_numba
else:
    _fill_pair_unitary = _fill_pair_unitary_numpy
    _port_stats = _port_stats_numpy


def pair_unitary(alpha, beta, gamma, delta, dim) -> np.ndarray:
    """(dim^2, dim^2) unitary of a two-mode passive optic on the pair basis.

    Allocation stays on the numpy side (lazily zeroed pages); only the sector
    fill runs on the selected backend lane.
    """
    big = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    _fill_pair_unitary(big, complex(alpha), complex(beta), complex(gamma), complex(delta), dim)
    return big


def port_stats(probs, strides, dim, sel_c, sel_d):
    """Number-difference histogram and coincidence probability for two port groups.

    Returns (hist, coincidence) where hist[k] is the probability of
    n_c - n_d == k - n_max with n_max = (dim-1) * n_modes.
    """
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    strides = np.ascontiguousarray(strides, dtype=np.int64)
    sel_c = np.ascontiguousarray(sel_c, dtype=np.bool_)
    sel_d = np.ascontiguousarray(sel_d, dtype=np.bool_)
    return _port_stats(probs, strides, dim, sel_c, sel_d)
