"""Gaussian-state calculus for microwave quadrature networks.

Conventions, fixed once here and used everywhere in the package:

* quadratures are x = (a + a†)/√2 and p = -i(a - a†)/√2, so that
  [x, p] = i and the vacuum has Var(x) = Var(p) = 1/2;
* an n-mode state stores its first moments and covariance over the
  quadrature vector (x_1, p_1, ..., x_n, p_n);
* decibel figures are power ratios, transmissivity = 10**(-dB/10);
* a symmetric matrix V is a valid covariance iff V + (i/2)·Ω ⪰ 0 with
  Ω the symplectic form returned by :func:`symplectic_form`.

All operations are functional: they return a new :class:`GaussianState`
and never mutate their input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray


class SingularConditioningError(ValueError):
    """Raised when a homodyne quadrature has (numerically) zero variance."""


def db_to_transmissivity(loss_db: float) -> float:
    """Convert a power loss in dB to a transmissivity in (0, 1]."""
    if loss_db < 0.0:
        raise ValueError(f"loss must be non-negative, got {loss_db} dB")
    return 10.0 ** (-loss_db / 10.0)


def thermal_occupancy(frequency_hz: float, temperature_k: float) -> float:
    """Bose-Einstein occupancy of a mode at the given frequency and temperature."""
    if frequency_hz <= 0.0 or temperature_k < 0.0:
        raise ValueError("frequency must be positive and temperature non-negative")
    if temperature_k == 0.0:
        return 0.0
    hbar = 1.054571817e-34
    kb = 1.380649e-23
    x = hbar * 2.0 * math.pi * frequency_hz / (kb * temperature_k)
    return 1.0 / math.expm1(x)


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """Symplectic form Ω for (x_1, p_1, ..., x_n, p_n) ordering.

    Satisfies [r_i, r_j] = i·Ω_ij with the commutation convention of this
    module; each mode contributes a 2x2 block [[0, 1], [-1, 0]].
    """
    if n_modes < 1:
        raise ValueError("need at least one mode")
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


def x_index(mode: int) -> int:
    return 2 * mode


def p_index(mode: int) -> int:
    return 2 * mode + 1


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of an n-mode Gaussian state.

    Parameters
    ----------
    n_modes:
        Number of bosonic modes.
    mean:
        Quadrature expectation values, shape ``(2*n_modes,)``.
    cov:
        Symmetric covariance matrix, shape ``(2*n_modes, 2*n_modes)``.
        Symmetrized on construction; must satisfy the uncertainty
        relation within a small numerical tolerance.
    """

    n_modes: int
    mean: NDArray[np.float64]
    cov: NDArray[np.float64]

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        d = 2 * self.n_modes
        if mean.shape != (d,) or cov.shape != (d, d):
            raise ValueError(
                f"moment shapes {mean.shape}, {cov.shape} do not match "
                f"{self.n_modes} modes"
            )
        scale = 1.0 + np.abs(cov).max(initial=0.0)
        if np.abs(cov - cov.T).max(initial=0.0) > 1e-12 * scale:
            raise ValueError("covariance matrix is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", (cov + cov.T) / 2.0)
        if not is_physical(self):
            raise ValueError("covariance violates the uncertainty relation")


def is_physical(state: GaussianState, tol: float = 1e-10) -> bool:
    """Check cov + (i/2)Ω ⪰ 0 via its eigenvalues.

    The tolerance is absolute for O(1) covariances and scales with the
    matrix norm so that strongly amplified states do not trip on float
    round-off.
    """
    omega = symplectic_form(state.n_modes)
    herm = state.cov + 0.5j * omega
    eigs = np.linalg.eigvalsh(herm)
    threshold = -max(tol, 1e-14 * (1.0 + np.abs(state.cov).max()))
    return bool(eigs.min() >= threshold)


def purity(state: GaussianState) -> float:
    """Tr ρ² = 1/√det(2V) for a Gaussian state."""
    return 1.0 / math.sqrt(float(np.linalg.det(2.0 * state.cov)))


def overlap(state_a: GaussianState, state_b: GaussianState) -> float:
    """Tr(ρ_a ρ_b) between two Gaussian states of equal mode number.

    For a pure ``state_a`` this is the fidelity of ``state_b`` with it.
    """
    if state_a.n_modes != state_b.n_modes:
        raise ValueError("states must have the same number of modes")
    sigma = state_a.cov + state_b.cov
    delta = state_b.mean - state_a.mean
    sol = np.linalg.solve(sigma, delta)
    return float(np.exp(-0.5 * delta @ sol) / math.sqrt(np.linalg.det(sigma)))


# ---------------------------------------------------------------------------
# state constructors


def vacuum(n_modes: int) -> GaussianState:
    """n-mode vacuum: zero mean, covariance I/2."""
    return GaussianState(n_modes, np.zeros(2 * n_modes), 0.5 * np.eye(2 * n_modes))


def thermal(n_modes: int, occupancy: float) -> GaussianState:
    """n-mode thermal state with the given mean photon number per mode."""
    if occupancy < 0.0:
        raise ValueError(f"occupancy must be non-negative, got {occupancy}")
    v = occupancy + 0.5
    return GaussianState(n_modes, np.zeros(2 * n_modes), v * np.eye(2 * n_modes))


def coherent(alpha: complex) -> GaussianState:
    """Single-mode coherent state; mean (√2·Re α, √2·Im α), vacuum covariance."""
    mean = np.array([math.sqrt(2.0) * alpha.real, math.sqrt(2.0) * alpha.imag])
    return GaussianState(1, mean, 0.5 * np.eye(2))


def squeezed_vacuum(variance: float, squeezed: str = "x") -> GaussianState:
    """Pure single-mode squeezed vacuum with the given squeezed-quadrature variance.

    The conjugate quadrature carries 1/(4·variance) so the state stays pure.
    """
    if not 0.0 < variance <= 0.5:
        raise ValueError(f"squeezed variance must be in (0, 0.5], got {variance}")
    if squeezed == "x":
        cov = np.diag([variance, 0.25 / variance])
    elif squeezed == "p":
        cov = np.diag([0.25 / variance, variance])
    else:
        raise ValueError("squeezed quadrature must be 'x' or 'p'")
    return GaussianState(1, np.zeros(2), cov)


def two_mode_squeezed(r: float) -> GaussianState:
    """Two-mode squeezed vacuum in the x-correlated convention.

    Var(x_A + x_B) = Var(p_A - p_B) = e^(-2r): the state approaches the
    ideal position-correlated, momentum-anticorrelated pair as r grows.
    """
    if r < 0.0:
        raise ValueError("squeezing parameter must be non-negative")
    c = 0.5 * math.cosh(2.0 * r)
    s = 0.5 * math.sinh(2.0 * r)
    cov = np.array(
        [
            [c, 0.0, -s, 0.0],
            [0.0, c, 0.0, s],
            [-s, 0.0, c, 0.0],
            [0.0, s, 0.0, c],
        ]
    )
    return GaussianState(2, np.zeros(4), cov)


def tensor(*states: GaussianState) -> GaussianState:
    """Tensor product; mode order follows the argument order."""
    if not states:
        raise ValueError("need at least one state")
    n = sum(s.n_modes for s in states)
    mean = np.concatenate([s.mean for s in states])
    cov = np.zeros((2 * n, 2 * n))
    at = 0
    for s in states:
        d = 2 * s.n_modes
        cov[at : at + d, at : at + d] = s.cov
        at += d
    return GaussianState(n, mean, cov)


# ---------------------------------------------------------------------------
# amplifier component models


@dataclass(frozen=True)
class JpaSpec:
    """Phase-sensitive amplifier acting on a single mode.

    One quadrature is amplified by the power factor ``g_x`` and picks up
    ``s_x`` units of coupled idler noise; the conjugate quadrature is
    deamplified by ``g_p`` and picks up ``s_p``.  Which physical
    quadrature is the amplified one is selected by ``pump_phase``.

    Parameters
    ----------
    g_x:
        Amplified-quadrature power gain, >= 1.
    g_p:
        Deamplified-quadrature power attenuation factor, >= 1.
    s_x, s_p:
        Power couplings of the internal-loss noise into the amplified /
        deamplified quadrature, >= 0.
    n_env:
        Thermal occupancy of the internal-loss bath.
    pump_phase:
        'x' to amplify x (squeeze p), 'p' to amplify p (squeeze x).
    """

    g_x: float
    g_p: float
    s_x: float = 0.0
    s_p: float = 0.0
    n_env: float = 0.0
    pump_phase: str = "x"

    def __post_init__(self) -> None:
        if self.g_x < 1.0 or self.g_p < 1.0:
            raise ValueError("gain factors must be >= 1")
        if self.s_x < 0.0 or self.s_p < 0.0 or self.n_env < 0.0:
            raise ValueError("noise couplings and occupancy must be >= 0")
        if self.pump_phase not in ("x", "p"):
            raise ValueError("pump_phase must be 'x' or 'p'")

    @classmethod
    def ideal(cls, r: float, pump_phase: str = "x") -> "JpaSpec":
        """Noiseless squeezer with amplitude gain e^r on the pumped quadrature."""
        g = math.exp(2.0 * r)
        return cls(g_x=g, g_p=g, pump_phase=pump_phase)

    @classmethod
    def from_squeezed_variance(cls, variance: float, pump_phase: str = "x") -> "JpaSpec":
        """Noiseless squeezer that takes vacuum to the given squeezed variance."""
        if not 0.0 < variance <= 0.5:
            raise ValueError(f"target variance must be in (0, 0.5], got {variance}")
        g = 0.5 / variance
        return cls(g_x=g, g_p=g, pump_phase=pump_phase)

    @classmethod
    def from_physical(
        cls,
        chi: float,
        k: float,
        gamma: float,
        n_env: float = 0.0,
        pump_phase: str = "x",
    ) -> "JpaSpec":
        """Build from pump strength chi, external coupling k and internal loss gamma.

        Input-output relations of a degenerate parametric amplifier with
        internal loss:

            x_out = (2χ+k-γ)/(2χ-k-γ)·x_in + 2√(kγ)/(2χ-k-γ)·x_h
            p_out = (2χ-k+γ)/(2χ+k+γ)·p_in - 2√(kγ)/(2χ+k+γ)·p_h

        The derived couplings satisfy s_x·s_p = (√(g_x/g_p) - 1)² exactly.
        """
        if k <= 0.0 or gamma < 0.0 or chi < 0.0:
            raise ValueError("require k > 0, gamma >= 0, chi >= 0")
        den_x = 2.0 * chi - k - gamma
        den_p = 2.0 * chi + k + gamma
        if abs(den_x) < 1e-12 * (k + gamma):
            raise ValueError("operating point 2*chi = k + gamma is singular")
        g_x = ((2.0 * chi + k - gamma) / den_x) ** 2
        g_p = (den_p / (2.0 * chi - k + gamma)) ** 2
        s_x = 4.0 * k * gamma / den_x**2
        s_p = 4.0 * k * gamma / den_p**2
        if g_x < 1.0 or g_p < 1.0:
            raise ValueError(
                "parameters put the amplifier below unit gain "
                f"(g_x={g_x:.4g}, g_p={g_p:.4g})"
            )
        return cls(g_x=g_x, g_p=g_p, s_x=s_x, s_p=s_p, n_env=n_env, pump_phase=pump_phase)

    def noise_relation_residual(self) -> float:
        """s_x·s_p - (√(g_x/g_p) - 1)², zero for a minimal-noise amplifier."""
        return self.s_x * self.s_p - (math.sqrt(self.g_x / self.g_p) - 1.0) ** 2


@dataclass(frozen=True)
class AmpSpec:
    """Phase-insensitive amplifier: power gain ``g`` and idler occupancy ``n_noise``.

    Both quadratures gain the factor g and (g-1)·(n_noise + 1/2) of added
    variance; g = 1 is the identity.
    """

    g: float
    n_noise: float = 0.0

    def __post_init__(self) -> None:
        if self.g < 1.0:
            raise ValueError(f"phase-insensitive gain must be >= 1, got {self.g}")
        if self.n_noise < 0.0:
            raise ValueError("idler occupancy must be >= 0")


# ---------------------------------------------------------------------------
# channels and unitaries


def _apply_one_mode(
    state: GaussianState,
    mode: int,
    x_block: NDArray[np.float64],
    y_block: NDArray[np.float64],
) -> GaussianState:
    """Apply the Gaussian channel V -> X V Xᵀ + Y acting on one mode."""
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range")
    d = 2 * state.n_modes
    x_full = np.eye(d)
    sl = slice(2 * mode, 2 * mode + 2)
    x_full[sl, sl] = x_block
    cov = x_full @ state.cov @ x_full.T
    cov[sl, sl] += y_block
    mean = x_full @ state.mean
    return GaussianState(state.n_modes, mean, cov)


def loss_channel(
    state: GaussianState, mode: int, eta: float, env_occupancy: float = 0.0
) -> GaussianState:
    """Mix one mode with a thermal environment of transmissivity ``eta``.

    x -> √η·x + √(1-η)·x_env; eta = 1 is the identity, eta = 0 replaces
    the mode by the environment state.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {eta}")
    if env_occupancy < 0.0:
        raise ValueError("environment occupancy must be >= 0")
    v_env = env_occupancy + 0.5
    x_block = math.sqrt(eta) * np.eye(2)
    y_block = (1.0 - eta) * v_env * np.eye(2)
    return _apply_one_mode(state, mode, x_block, y_block)


def phase_insensitive_amp(state: GaussianState, mode: int, spec: AmpSpec) -> GaussianState:
    """Amplify both quadratures of one mode: x -> √g·x + √(g-1)·x_idler."""
    x_block = math.sqrt(spec.g) * np.eye(2)
    y_block = (spec.g - 1.0) * (spec.n_noise + 0.5) * np.eye(2)
    return _apply_one_mode(state, mode, x_block, y_block)


def apply_jpa(state: GaussianState, mode: int, spec: JpaSpec) -> GaussianState:
    """Apply a phase-sensitive amplifier to one mode.

    With pump_phase='x' the transformation is

        x -> √g_x·x + √s_x·x_h,   p -> p/√g_p - √s_p·p_h

    with (x_h, p_h) a thermal mode at occupancy ``n_env``; 'p' swaps the
    roles of the two quadratures.
    """
    amp = math.sqrt(spec.g_x)
    att = 1.0 / math.sqrt(spec.g_p)
    v_env = spec.n_env + 0.5
    if spec.pump_phase == "x":
        x_block = np.diag([amp, att])
        y_block = np.diag([spec.s_x * v_env, spec.s_p * v_env])
    else:
        x_block = np.diag([att, amp])
        y_block = np.diag([spec.s_p * v_env, spec.s_x * v_env])
    return _apply_one_mode(state, mode, x_block, y_block)


def beam_splitter_symplectic(transmissivity: float) -> NDArray[np.float64]:
    """4x4 symplectic matrix of the two-port mixer used by :func:`beam_splitter`.

    Amplitude convention out_i = √τ·in_i + √(1-τ)·in_j,
    out_j = √(1-τ)·in_i - √τ·in_j; at τ = 1/2 this is the hybrid-ring
    (sum/difference) port convention.
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {transmissivity}")
    c = math.sqrt(transmissivity)
    s = math.sqrt(1.0 - transmissivity)
    o = np.array([[c, s], [s, -c]])
    smat = np.zeros((4, 4))
    smat[0::2, 0::2] = o
    smat[1::2, 1::2] = o
    return smat


def beam_splitter(
    state: GaussianState,
    mode_i: int,
    mode_j: int,
    transmissivity: float = 0.5,
    power_loss_db: float = 0.0,
) -> GaussianState:
    """Mix two modes on a (possibly lossy) beam splitter.

    Internal loss is modeled as a symmetric vacuum loss channel of
    10^(-dB/10) on both output ports, after the ideal mixer.
    """
    if mode_i == mode_j:
        raise ValueError("beam splitter needs two distinct modes")
    d = 2 * state.n_modes
    s4 = beam_splitter_symplectic(transmissivity)
    idx = [x_index(mode_i), p_index(mode_i), x_index(mode_j), p_index(mode_j)]
    x_full = np.eye(d)
    x_full[np.ix_(idx, idx)] = s4
    out = GaussianState(state.n_modes, x_full @ state.mean, x_full @ state.cov @ x_full.T)
    if power_loss_db > 0.0:
        eta = db_to_transmissivity(power_loss_db)
        out = loss_channel(out, mode_i, eta)
        out = loss_channel(out, mode_j, eta)
    return out


def displace(state: GaussianState, mode: int, dx: float, dp: float) -> GaussianState:
    """Shift the mean of one mode; the covariance is unchanged."""
    mean = state.mean.copy()
    mean[x_index(mode)] += dx
    mean[p_index(mode)] += dp
    return GaussianState(state.n_modes, mean, state.cov)


def drop_modes(state: GaussianState, modes: tuple[int, ...]) -> GaussianState:
    """Partial trace over the listed modes."""
    keep = [m for m in range(state.n_modes) if m not in modes]
    if not keep:
        raise ValueError("cannot drop every mode")
    idx = [i for m in keep for i in (x_index(m), p_index(m))]
    return GaussianState(len(keep), state.mean[idx], state.cov[np.ix_(idx, idx)])


def variance_of(state: GaussianState, coefficients: NDArray[np.float64]) -> float:
    """Variance of the linear combination cᵀ·r of quadratures."""
    c = np.asarray(coefficients, dtype=float)
    if c.shape != state.mean.shape:
        raise ValueError("coefficient vector has wrong length")
    return float(c @ state.cov @ c)


# ---------------------------------------------------------------------------
# homodyne detection


@dataclass(frozen=True)
class HomodyneMeasurement:
    """Outcome distribution and conditional map of a homodyne detection.

    ``mean`` and ``variance`` describe the Gaussian outcome density of the
    measured quadrature; ``condition(outcome)`` returns the state of the
    remaining modes (the detected mode is destroyed).
    """

    mean: float
    variance: float
    _keep_mean: NDArray[np.float64] = field(repr=False)
    _keep_cov: NDArray[np.float64] = field(repr=False)
    _cross: NDArray[np.float64] = field(repr=False)
    _n_keep_modes: int = field(repr=False)

    def condition(self, outcome: float) -> GaussianState:
        gain = self._cross / self.variance
        mean = self._keep_mean + gain * (outcome - self.mean)
        cov = self._keep_cov - np.outer(gain, self._cross)
        return GaussianState(self._n_keep_modes, mean, cov)

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.normal(self.mean, math.sqrt(self.variance)))


def homodyne(state: GaussianState, mode: int, quadrature: str = "x") -> HomodyneMeasurement:
    """Measure one quadrature of one mode.

    Returns the outcome distribution together with the conditional map;
    conditioning follows the Gaussian Schur-complement update and removes
    the measured mode.
    """
    if state.n_modes < 2:
        raise ValueError("conditioning needs at least one remaining mode")
    if quadrature == "x":
        m_idx = x_index(mode)
    elif quadrature == "p":
        m_idx = p_index(mode)
    else:
        raise ValueError("quadrature must be 'x' or 'p'")
    var = float(state.cov[m_idx, m_idx])
    if var < 1e-12:
        raise SingularConditioningError(
            f"quadrature variance {var:.3e} too small to condition on"
        )
    keep = [
        i
        for m in range(state.n_modes)
        if m != mode
        for i in (x_index(m), p_index(m))
    ]
    return HomodyneMeasurement(
        mean=float(state.mean[m_idx]),
        variance=var,
        _keep_mean=state.mean[keep],
        _keep_cov=state.cov[np.ix_(keep, keep)],
        _cross=state.cov[keep, m_idx],
        _n_keep_modes=state.n_modes - 1,
    )


# ---------------------------------------------------------------------------
# composite sources


def epr_from_jpas(
    jpa: JpaSpec,
    splitter_loss_db: float = 0.0,
    jpa_b: JpaSpec | None = None,
) -> GaussianState:
    """Entangled pair from two orthogonally squeezed modes on a 50:50 hybrid.

    Mode 0 is squeezed in x, mode 1 in p (``jpa_b`` defaults to ``jpa``
    with the orthogonal pump phase); the hybrid sum/difference ports then
    carry Var(x_A + x_B) = 2·Var(x_squeezed) and so on.
    """
    spec_a = replace(jpa, pump_phase="p")
    spec_b = replace(jpa_b if jpa_b is not None else jpa, pump_phase="x")
    state = vacuum(2)
    state = apply_jpa(state, 0, spec_a)
    state = apply_jpa(state, 1, spec_b)
    return beam_splitter(state, 0, 1, 0.5, power_loss_db=splitter_loss_db)
