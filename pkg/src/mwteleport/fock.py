"""Truncated Fock-space engine for the non-Gaussian parts of the lab.

Pure states live on a fixed per-mode photon-number cutoff.  Routines
that can leak probability past the cutoff either report the leaked
weight or renormalize and say so in their docstring.  Quadrature
conventions match the Gaussian engine: x = (a + adag)/sqrt(2),
p = -i(a - adag)/sqrt(2), vacuum variance 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FockState",
    "fock",
    "vacuum",
    "coherent",
    "tmss",
    "annihilation",
    "number_operator",
    "quadrature_operator",
    "apply_one_mode",
    "apply_cross_phase",
    "apply_loss_dilated",
    "loss_kernel",
    "ideal_nla",
    "quadrature_eigenvector",
    "homodyne_project",
    "weighted_quadrature",
    "reduced_density",
    "fidelity_mixed",
    "top_level_weight",
]


@dataclass(frozen=True)
class FockState:
    """Pure state on a tensor product of truncated Fock spaces.

    ``amps[n1, ..., nk]`` is the amplitude of |n1, ..., nk>.  The array
    is stored as given; call :meth:`normalized` when unit norm matters.
    """

    amps: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "amps", np.asarray(self.amps, dtype=complex))

    @property
    def n_modes(self) -> int:
        return self.amps.ndim

    @property
    def dims(self) -> tuple[int, ...]:
        return self.amps.shape

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def normalized(self) -> "FockState":
        n2 = self.norm2()
        if n2 <= 0.0:
            raise ValueError("cannot normalize a zero state")
        return FockState(self.amps / math.sqrt(n2))

    def tensor(self, other: "FockState") -> "FockState":
        return FockState(np.multiply.outer(self.amps, other.amps))


def fock(dims: Sequence[int], occupations: Sequence[int]) -> FockState:
    """Number basis state |n1, ..., nk>."""
    dims = tuple(int(d) for d in dims)
    occ = tuple(int(n) for n in occupations)
    if len(occ) != len(dims):
        raise ValueError("one occupation per mode")
    for n, d in zip(occ, dims):
        if not 0 <= n < d:
            raise ValueError(f"occupation {n} outside cutoff {d}")
    amps = np.zeros(dims, dtype=complex)
    amps[occ] = 1.0
    return FockState(amps)


def vacuum(dims: Sequence[int]) -> FockState:
    return fock(dims, [0] * len(dims))


def coherent(alpha: complex, levels: int) -> FockState:
    """Truncated coherent state, renormalized after the cutoff.

    Amplitudes follow the stable recursion c_n = c_{n-1} alpha/sqrt(n);
    keep ``levels`` comfortably above |alpha|^2 so the lost tail is
    negligible.
    """
    c = np.zeros(levels, dtype=complex)
    c[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, levels):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return FockState(c).normalized()


def tmss(lam: float, levels: int) -> tuple[FockState, float]:
    """Two-mode squeezed state with x_A + x_B as the squeezed quadrature.

    The amplitude sign alternates with photon number, which is what
    makes the joint statistics match the Gaussian engine's
    ``two_mode_squeezed`` (lam = tanh r).  Returns the renormalized
    truncated state and the probability weight beyond the cutoff.
    """
    if not 0.0 <= lam < 1.0:
        raise ValueError("lam must be in [0, 1)")
    n = np.arange(levels)
    diag = math.sqrt(1.0 - lam * lam) * (-lam) ** n
    amps = np.zeros((levels, levels), dtype=complex)
    amps[n, n] = diag
    tail = lam ** (2 * levels)
    return FockState(amps).normalized(), float(tail)


def annihilation(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, levels)), k=1)


def number_operator(levels: int) -> np.ndarray:
    return np.diag(np.arange(levels, dtype=float))


def quadrature_operator(levels: int, quadrature: str = "x") -> np.ndarray:
    a = annihilation(levels)
    if quadrature == "x":
        return (a + a.T) / math.sqrt(2.0)
    if quadrature == "p":
        return -1j * (a - a.T) / math.sqrt(2.0)
    raise ValueError("quadrature must be 'x' or 'p'")


def apply_one_mode(state: FockState, mode: int, op: np.ndarray) -> FockState:
    amps = np.tensordot(op, state.amps, axes=([1], [mode]))
    return FockState(np.moveaxis(amps, 0, mode))


def apply_cross_phase(state: FockState, mode_i: int, mode_j: int, theta: float) -> FockState:
    """Diagonal entangler exp(-i theta n_i n_j)."""
    ni = np.arange(state.dims[mode_i], dtype=float)
    nj = np.arange(state.dims[mode_j], dtype=float)
    phase = np.exp(-1j * theta * np.multiply.outer(ni, nj))
    shape = [1] * state.n_modes
    shape[mode_i] = state.dims[mode_i]
    shape[mode_j] = state.dims[mode_j]
    axes = sorted((mode_i, mode_j))
    if axes != [mode_i, mode_j]:
        phase = phase.T
    return FockState(state.amps * phase.reshape(shape))


def loss_kernel(levels: int, eta: float) -> np.ndarray:
    """Beam-splitter amplitudes K[k, m, n] for |n, vac> -> |k, m>.

    k photons survive, m = n - k leak into the ancilla; the convention
    keeps all amplitudes positive (kept-mode output sqrt(eta) a +
    sqrt(1-eta) e).
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must be in [0, 1]")
    kernel = np.zeros((levels, levels, levels))
    for n in range(levels):
        for k in range(n + 1):
            m = n - k
            kernel[k, m, n] = math.sqrt(math.comb(n, k)) * eta ** (k / 2.0) * (1.0 - eta) ** (m / 2.0)
    return kernel


def apply_loss_dilated(state: FockState, mode: int, eta: float) -> FockState:
    """Mix one mode with a vacuum ancilla instead of tracing it out.

    The ancilla carrying the lost photons is appended as the last mode,
    so the state stays pure and mixed-state figures can be taken later
    with :func:`reduced_density`.
    """
    kernel = loss_kernel(state.dims[mode], eta)
    amps = np.tensordot(kernel, state.amps, axes=([2], [mode]))
    # axes now (kept, leaked, rest...); put kept back, leaked at the end
    amps = np.moveaxis(np.moveaxis(amps, 1, -1), 0, mode)
    return FockState(amps)


def ideal_nla(
    state: FockState, mode: int, g: float, leakage_bound: float = 1e-6
) -> tuple[FockState, float]:
    """Noiseless amplification filter g**n on one mode.

    Returns the renormalized state and the raw norm ratio
    ||g^n psi||^2 / ||psi||^2, which fixes the success weight once an
    implementation's normalization is chosen.  Because the filter pushes
    weight toward high photon numbers, the output is rejected when the
    top retained level carries more than ``leakage_bound`` probability
    (for a pure two-mode squeezed input this is what rejects g lam >= 1).
    """
    if g <= 0.0:
        raise ValueError("g must be positive")
    weights = g ** np.arange(state.dims[mode], dtype=float)
    out = apply_one_mode(state, mode, np.diag(weights))
    raw = out.norm2() / state.norm2()
    normalized = out.normalized()
    top = top_level_weight(normalized, mode)
    if top > leakage_bound:
        raise ValueError(
            f"amplified state leaks past the cutoff (top-level weight {top:.3e})"
        )
    return normalized, float(raw)


def quadrature_eigenvector(value: float, levels: int, quadrature: str = "p") -> np.ndarray:
    """Number-basis coefficients <n|q=value> of a quadrature eigenket.

    Continuum normalization <q|q'> = delta(q - q').  The 'x' vector is
    the real Hermite-function column; 'p' carries the i**n Fourier
    phase.  The recursion embeds the Gaussian envelope, so far outside
    the cutoff's classical turning point the envelope underflows and
    every entry would silently be zero; reject that region instead.
    """
    if abs(value) > 25.0:
        raise ValueError("quadrature value outside the supported range |q| <= 25")
    h = np.zeros(levels)
    h[0] = math.pi ** -0.25 * math.exp(-0.5 * value * value)
    if levels > 1:
        h[1] = math.sqrt(2.0) * value * h[0]
    for n in range(2, levels):
        h[n] = math.sqrt(2.0 / n) * value * h[n - 1] - math.sqrt((n - 1.0) / n) * h[n - 2]
    if quadrature == "x":
        return h.astype(complex)
    if quadrature == "p":
        return (1j ** np.arange(levels)) * h
    raise ValueError("quadrature must be 'x' or 'p'")


def homodyne_project(
    state: FockState, mode: int, value: float, quadrature: str = "p"
) -> tuple[FockState, float]:
    """Project one mode onto a quadrature eigenstate and remove it.

    Returns the renormalized conditioned state and the outcome
    probability density at ``value`` (norm of the unnormalized
    projection, continuum measure).
    """
    eig = quadrature_eigenvector(value, state.dims[mode], quadrature)
    amps = np.tensordot(eig.conj(), state.amps, axes=([0], [mode]))
    density = float(np.vdot(amps, amps).real)
    if density <= 0.0:
        raise ValueError("projection annihilated the state")
    return FockState(amps / math.sqrt(density)), density


def weighted_quadrature(
    state: FockState, terms: Iterable[tuple[int, str, float]]
) -> tuple[float, float]:
    """Mean and variance of sum_i w_i q_i over the given (mode, 'x'|'p', w) terms."""
    psi = state.normalized()
    acc = np.zeros_like(psi.amps)
    for mode, quadrature, weight in terms:
        op = weight * quadrature_operator(psi.dims[mode], quadrature)
        acc = acc + apply_one_mode(psi, mode, op).amps
    mean = float(np.vdot(psi.amps, acc).real)
    second = float(np.vdot(acc, acc).real)
    return mean, second - mean * mean


def reduced_density(state: FockState, keep: Sequence[int]) -> np.ndarray:
    """Density matrix on the kept modes, tracing out the rest."""
    keep = tuple(keep)
    drop = tuple(i for i in range(state.n_modes) if i not in keep)
    mat = np.transpose(state.amps, keep + drop)
    d_keep = int(np.prod([state.dims[i] for i in keep], dtype=int))
    mat = mat.reshape(d_keep, -1)
    return mat @ mat.conj().T


def fidelity_mixed(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Both arguments must be (numerically) positive semidefinite with
    unit trace.  Eigenvalues at the roundoff floor are zeroed before
    the square roots: sqrt would otherwise inflate rank-deficient
    noise (dim * eps worth of garbage) into the result.
    """

    def _clipped(values: np.ndarray) -> np.ndarray:
        floor = np.max(values) * values.size * np.finfo(float).eps
        return np.where(values > floor, values, 0.0)

    w, v = np.linalg.eigh(rho)
    root = (v * np.sqrt(_clipped(w))) @ v.conj().T
    ev = np.linalg.eigvalsh(root @ sigma @ root)
    return float(np.sum(np.sqrt(_clipped(ev))) ** 2)


def top_level_weight(state: FockState, mode: int) -> float:
    """Probability weight sitting on the highest retained Fock level.

    A truncation-health figure: it should be negligible before trusting
    anything computed from the state.
    """
    psi = state.normalized()
    idx = [slice(None)] * psi.n_modes
    idx[mode] = psi.dims[mode] - 1
    block = psi.amps[tuple(idx)]
    return float(np.vdot(block, block).real)
