"""Exact simulation of beam-splitter scattering on truncated multimode Fock spaces.

States are immutable; every optic is a pure function returning a new state.
The per-mode cutoff is caller-supplied and photon-number conservation is
exploited: a pair of interfering modes must keep its total occupation at or
below the cutoff, otherwise the truncated unitary would not be the physical
one and a :class:`~twinbeam.errors.CapacityError` is raised.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, TruncationWarning, ValidationError
from .kernels import pair_unitary, port_stats
from .modes import ModeLabel, Polarization, Port

PURE = "pure_vector"
DENSITY = "density_matrix"

#: Mixing angle of a balanced (50/50) splitter.
BALANCED_ANGLE = np.pi / 4

#: Splitter conventions: reflection = i * transmission, or real orthogonal.
SYMMETRIC_I = "symmetric_i"
ROTATION = "rotation"

#: Leakage above this is surfaced to the caller as a TruncationWarning.
LEAKAGE_THRESHOLD = 1e-8

_NORM_TOL = 1e-8

_OUTPUT_PORT = {Port.A: Port.C, Port.B: Port.D, Port.C: Port.C, Port.D: Port.D}


@dataclass(frozen=True)
class MultimodeState:
    """Complex amplitudes over a truncated multimode occupation basis.

    ``amplitudes`` has shape ``(D,)`` for pure vectors and ``(D, D)`` for
    density matrices, ``D = (cutoff + 1) ** n_modes``, flat C-order over the
    per-mode occupations in ``modes`` order.
    """

    modes: tuple[ModeLabel, ...]
    cutoff: int
    amplitudes: np.ndarray
    representation: str = PURE
    truncation_leakage: float = 0.0

    def __post_init__(self):
        modes = tuple(self.modes)
        if len(set(modes)) != len(modes):
            raise ValidationError(f"duplicate mode labels in {modes}")
        if self.cutoff < 1:
            raise ValidationError("cutoff must be >= 1")
        arr = np.array(self.amplitudes, dtype=np.complex128)
        arr.setflags(write=False)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "amplitudes", arr)
        basis = self.dim ** len(modes)
        expected = (basis,) if self.representation == PURE else (basis, basis)
        if self.representation not in (PURE, DENSITY):
            raise ValidationError(f"unknown representation {self.representation!r}")
        if arr.shape != expected:
            raise ValidationError(
                f"amplitude shape {arr.shape} does not match basis size {expected}"
            )
        if abs(self.norm() - 1.0) > _NORM_TOL:
            raise ValidationError(f"state norm {self.norm()!r} is not 1")

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def basis_size(self) -> int:
        return self.dim**self.n_modes

    def norm(self) -> float:
        if self.representation == PURE:
            return float(np.sum(np.abs(self.amplitudes) ** 2))
        return float(np.real(np.trace(self.amplitudes)))

    def probabilities(self) -> np.ndarray:
        """Occupation-basis probabilities (diagonal for density matrices)."""
        if self.representation == PURE:
            probs = np.abs(self.amplitudes) ** 2
        else:
            probs = np.real(np.diagonal(self.amplitudes)).copy()
            probs[probs < 0.0] = 0.0
        return probs

    def mode_index(self, label: ModeLabel) -> int:
        return self.modes.index(label)

    def ports(self) -> set[Port]:
        return {m.spatial_port for m in self.modes}


@dataclass(frozen=True)
class ScatterOutcome:
    """Distribution of the photon-number difference between two output ports."""

    distribution: dict[int, float]
    mean: float
    variance: float

    @property
    def std(self) -> float:
        return float(np.sqrt(max(self.variance, 0.0)))


@lru_cache(maxsize=32)
def _strides(dim: int, n_modes: int) -> np.ndarray:
    s = dim ** np.arange(n_modes - 1, -1, -1, dtype=np.int64)
    s.setflags(write=False)
    return s


@lru_cache(maxsize=16)
def _occupations(dim: int, n_modes: int) -> np.ndarray:
    idx = np.arange(dim**n_modes, dtype=np.int64)
    occ = (idx[None, :] // _strides(dim, n_modes)[:, None]) % dim
    occ.setflags(write=False)
    return occ


def _default_modes(n: int) -> tuple[ModeLabel, ...]:
    ports = [Port.A, Port.B, Port.C, Port.D]
    if n > len(ports):
        raise ValidationError("explicit mode labels required for more than 4 modes")
    return tuple(ModeLabel(Polarization.H, 0, ports[i]) for i in range(n))


# ---------------------------------------------------------------------------
# State constructors
# ---------------------------------------------------------------------------


def make_fock(occupations, cutoff: int, modes=None) -> MultimodeState:
    """Basis state with the given per-mode occupations.

    Default mode labels put the occupations on ports a, b, ... with equal
    polarization and frequency; pass explicit ``modes`` for anything else.
    """
    occupations = [int(n) for n in occupations]
    if modes is None:
        modes = _default_modes(len(occupations))
    modes = tuple(ModeLabel(*m) if not isinstance(m, ModeLabel) else m for m in modes)
    if len(modes) != len(occupations):
        raise ValidationError("one occupation per mode required")
    for n in occupations:
        if n < 0:
            raise ValidationError(f"negative occupation {n}")
        if n > cutoff:
            raise CapacityError(f"occupation {n} exceeds cutoff {cutoff}")
    dim = cutoff + 1
    amps = np.zeros(dim ** len(modes), dtype=np.complex128)
    flat = int(np.dot(occupations, _strides(dim, len(modes))))
    amps[flat] = 1.0
    return MultimodeState(modes, cutoff, amps, PURE)


def make_twin_mode_mixture(weights, cutoff: int) -> MultimodeState:
    """Two-mode density matrix sum_np w[n,p] |n,n><p,p| on ports a and b.

    ``weights`` must be Hermitian, positive semidefinite, unit trace, with
    dimension at most cutoff + 1.
    """
    w = np.asarray(weights, dtype=np.complex128)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValidationError(f"weight matrix must be square, got shape {w.shape}")
    r = w.shape[0]
    if r > cutoff + 1:
        raise CapacityError(f"weight dimension {r} exceeds cutoff + 1 = {cutoff + 1}")
    if not np.allclose(w, w.conj().T, atol=1e-10):
        raise ValidationError("weight matrix is not Hermitian")
    if abs(np.trace(w).real - 1.0) > 1e-10:
        raise ValidationError(f"weight matrix trace {np.trace(w)} is not 1")
    if np.linalg.eigvalsh(w).min() < -1e-10:
        raise ValidationError("weight matrix is not positive semidefinite")

    dim = cutoff + 1
    rho = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    diag_flat = np.arange(r) * dim + np.arange(r)
    rho[np.ix_(diag_flat, diag_flat)] = w
    modes = (ModeLabel(Polarization.H, 0, Port.A), ModeLabel(Polarization.H, 0, Port.B))
    return MultimodeState(modes, cutoff, rho, DENSITY)


def _coherent_column(alpha: complex, cutoff: int) -> tuple[np.ndarray, float]:
    dim = cutoff + 1
    if alpha == 0:
        column = np.zeros(dim, dtype=np.complex128)
        column[0] = 1.0
        return column, 0.0
    n = np.arange(dim)
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, dim)))))
    log_mag = -abs(alpha) ** 2 / 2.0 + n * np.log(abs(alpha)) - 0.5 * log_fact
    column = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    kept = float(np.sum(np.abs(column) ** 2))
    leakage = max(0.0, 1.0 - kept)
    return column / np.sqrt(kept), leakage


def make_coherent_pair(alpha_a, alpha_b, cutoff: int, modes=None) -> MultimodeState:
    """Product of truncated, renormalized coherent states.

    Requires |alpha|^2 <= cutoff / 4 per mode (truncation safety floor); the
    combined leakage is stored on the state and a TruncationWarning is issued
    when it exceeds ``LEAKAGE_THRESHOLD``.
    """
    alpha_a, alpha_b = complex(alpha_a), complex(alpha_b)
    for alpha in (alpha_a, alpha_b):
        if abs(alpha) ** 2 > cutoff / 4.0:
            raise ValidationError(
                f"|alpha|^2 = {abs(alpha) ** 2:.3g} exceeds cutoff/4 = {cutoff / 4.0:.3g}"
            )
    col_a, leak_a = _coherent_column(alpha_a, cutoff)
    col_b, leak_b = _coherent_column(alpha_b, cutoff)
    leakage = 1.0 - (1.0 - leak_a) * (1.0 - leak_b)
    if leakage > LEAKAGE_THRESHOLD:
        warnings.warn(
            f"coherent-state truncation leakage {leakage:.3g} above {LEAKAGE_THRESHOLD}",
            TruncationWarning,
            stacklevel=2,
        )
    if modes is None:
        modes = _default_modes(2)
    modes = tuple(m if isinstance(m, ModeLabel) else ModeLabel(*m) for m in modes)
    amps = np.outer(col_a, col_b).ravel()
    return MultimodeState(modes, cutoff, amps, PURE, truncation_leakage=leakage)


# ---------------------------------------------------------------------------
# Optics
# ---------------------------------------------------------------------------


def _contract_pair(tensor: np.ndarray, ax1: int, ax2: int, matrix: np.ndarray) -> np.ndarray:
    dim = tensor.shape[ax1]
    moved = np.moveaxis(tensor, (ax1, ax2), (0, 1))
    shape = moved.shape
    out = (matrix @ moved.reshape(dim * dim, -1)).reshape(shape)
    return np.moveaxis(out, (0, 1), (ax1, ax2))


def _apply_pair(state: MultimodeState, i: int, j: int, matrix: np.ndarray) -> MultimodeState:
    dim, m = state.dim, state.n_modes
    if state.representation == PURE:
        tensor = state.amplitudes.reshape((dim,) * m)
        out = _contract_pair(tensor, i, j, matrix).ravel()
    else:
        tensor = state.amplitudes.reshape((dim,) * (2 * m))
        out = _contract_pair(tensor, i, j, matrix)
        out = _contract_pair(out, m + i, m + j, matrix.conj())
        out = out.reshape(state.basis_size, state.basis_size)
    return MultimodeState(
        state.modes, state.cutoff, out, state.representation, state.truncation_leakage
    )


def _append_vacuum(state: MultimodeState, label: ModeLabel) -> MultimodeState:
    dim, big = state.dim, state.basis_size
    if state.representation == PURE:
        out = np.zeros((big, dim), dtype=np.complex128)
        out[:, 0] = state.amplitudes
        out = out.ravel()
    else:
        out = np.zeros((big, dim, big, dim), dtype=np.complex128)
        out[:, 0, :, 0] = state.amplitudes
        out = out.reshape(big * dim, big * dim)
    return MultimodeState(
        state.modes + (label,), state.cutoff, out, state.representation,
        state.truncation_leakage,
    )


def _pair_overflow_weight(state: MultimodeState, i: int, j: int) -> float:
    """Probability weight on basis states whose pair total exceeds the cutoff.

    Those sectors cannot scatter exactly under the truncation; weight at the
    truncation-leakage level is tolerated and accounted, anything larger is a
    capacity error.
    """
    occ = _occupations(state.dim, state.n_modes)
    overflow = (occ[i] + occ[j]) > state.cutoff
    if not overflow.any():
        return 0.0
    weight = float(state.probabilities()[overflow].sum())
    if weight > LEAKAGE_THRESHOLD:
        raise CapacityError(
            f"interfering pair carries probability {weight:.3g} above cutoff "
            f"{state.cutoff}; rebuild the state with a larger cutoff"
        )
    return weight


def _pair_coefficients(mixing_angle: float, convention: str) -> tuple:
    c, s = np.cos(mixing_angle), np.sin(mixing_angle)
    if convention == SYMMETRIC_I:
        return c, 1j * s, 1j * s, c
    if convention == ROTATION:
        return c, -s, s, c
    raise ValidationError(f"unknown convention {convention!r}")


def apply_beam_splitter(
    state: MultimodeState,
    port_pair=(Port.A, Port.B),
    mixing_angle: float = BALANCED_ANGLE,
    convention: str = SYMMETRIC_I,
) -> MultimodeState:
    """Scatter the modes on the two input ports through a beam splitter.

    Modes interfere pairwise when their polarization and frequency tags
    match across the port pair; unmatched modes scatter against a vacuum
    partner added on the opposite port. Input ports a, b are relabeled to
    output ports c, d.
    """
    p, q = Port(port_pair[0]), Port(port_pair[1])
    if p == q:
        raise ValidationError("beam splitter needs two distinct ports")
    participants = [m for m in state.modes if m.spatial_port in (p, q)]
    if not participants:
        raise ValidationError(f"no modes on ports {p.value!r}, {q.value!r}")

    working = state
    for key in sorted({m.interference_key for m in participants}, key=str):
        present = {m.spatial_port for m in participants if m.interference_key == key}
        for port in (p, q):
            if port not in present:
                working = _append_vacuum(working, ModeLabel(key[0], key[1], port))

    coeffs = _pair_coefficients(mixing_angle, convention)
    matrix = pair_unitary(*coeffs, working.dim)
    keys = sorted(
        {m.interference_key for m in working.modes if m.spatial_port in (p, q)}, key=str
    )
    leakage = working.truncation_leakage
    for key in keys:
        i = working.mode_index(ModeLabel(key[0], key[1], p))
        j = working.mode_index(ModeLabel(key[0], key[1], q))
        leakage += _pair_overflow_weight(working, i, j)
        working = _apply_pair(working, i, j, matrix)

    out_modes = tuple(
        m.moved_to(_OUTPUT_PORT[m.spatial_port]) if m.spatial_port in (p, q) else m
        for m in working.modes
    )
    return MultimodeState(
        out_modes, working.cutoff, working.amplitudes, working.representation, leakage
    )


def apply_waveplate_polarizer(state: MultimodeState, theta: float) -> MultimodeState:
    """Half-wave plate at angle theta followed by a polarizing splitter.

    The plate rotates polarizations by 2*theta, so theta = pi/8 acts as a
    balanced splitter on the H/V pair and theta = pi/4 swaps the ports. The
    polarizer then routes H to port c and V to port d.
    """
    ports = state.ports()
    if len(ports) != 1:
        raise ValidationError("waveplate input must sit on a single spatial path")
    (path,) = ports

    working = state
    for tag in sorted({m.frequency_tag for m in working.modes}):
        present = {m.polarization for m in working.modes if m.frequency_tag == tag}
        for pol in (Polarization.H, Polarization.V):
            if pol not in present:
                working = _append_vacuum(working, ModeLabel(pol, tag, path))

    matrix = pair_unitary(*_pair_coefficients(2.0 * theta, ROTATION), working.dim)
    leakage = working.truncation_leakage
    for tag in sorted({m.frequency_tag for m in working.modes}):
        i = working.mode_index(ModeLabel(Polarization.H, tag, path))
        j = working.mode_index(ModeLabel(Polarization.V, tag, path))
        leakage += _pair_overflow_weight(working, i, j)
        working = _apply_pair(working, i, j, matrix)

    out_modes = tuple(
        m.moved_to(Port.C if m.polarization == Polarization.H else Port.D)
        for m in working.modes
    )
    return MultimodeState(
        out_modes, working.cutoff, working.amplitudes, working.representation, leakage
    )


# ---------------------------------------------------------------------------
# Measurement statistics
# ---------------------------------------------------------------------------


def _port_selectors(state: MultimodeState, port_c: Port, port_d: Port):
    sel_c = np.array([m.spatial_port == Port(port_c) for m in state.modes])
    sel_d = np.array([m.spatial_port == Port(port_d) for m in state.modes])
    return sel_c, sel_d


def number_difference_stats(
    state: MultimodeState, port_c=Port.C, port_d=Port.D
) -> ScatterOutcome:
    """Exact distribution, mean, and variance of n_c - n_d.

    Photon numbers are summed over every frequency tag within each port.
    """
    sel_c, sel_d = _port_selectors(state, port_c, port_d)
    hist, _ = port_stats(
        state.probabilities(), np.asarray(_strides(state.dim, state.n_modes)),
        state.dim, sel_c, sel_d,
    )
    n_max = (state.dim - 1) * state.n_modes
    values = np.arange(-n_max, n_max + 1)
    mean = float(np.dot(hist, values))
    variance = float(np.dot(hist, values.astype(float) ** 2) - mean**2)
    distribution = {int(v): float(pr) for v, pr in zip(values, hist) if pr > 1e-12}
    return ScatterOutcome(distribution, mean, max(variance, 0.0))


def coincidence_probability(state: MultimodeState, port_c=Port.C, port_d=Port.D) -> float:
    """Probability that both output ports hold at least one photon."""
    sel_c, sel_d = _port_selectors(state, port_c, port_d)
    _, coincidence = port_stats(
        state.probabilities(), np.asarray(_strides(state.dim, state.n_modes)),
        state.dim, sel_c, sel_d,
    )
    return float(coincidence)


def joint_port_distribution(
    state: MultimodeState, port_c=Port.C, port_d=Port.D, tol: float = 1e-12
) -> dict[tuple[int, int], float]:
    """Joint probability of (n_c, n_d) photon counts, entries above tol."""
    sel_c, sel_d = _port_selectors(state, port_c, port_d)
    occ = _occupations(state.dim, state.n_modes)
    n_c = occ[sel_c].sum(axis=0) if sel_c.any() else np.zeros(state.basis_size, dtype=int)
    n_d = occ[sel_d].sum(axis=0) if sel_d.any() else np.zeros(state.basis_size, dtype=int)
    probs = state.probabilities()
    out: dict[tuple[int, int], float] = {}
    for nc, nd, pr in zip(n_c, n_d, probs):
        if pr > 0.0:
            out[(int(nc), int(nd))] = out.get((int(nc), int(nd)), 0.0) + float(pr)
    return {k: v for k, v in out.items() if v > tol}
