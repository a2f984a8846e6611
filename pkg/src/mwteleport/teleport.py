"""Monte-Carlo simulation of the full teleportation protocol.

The protocol is simulated as an explicit Gaussian network: entangled-pair
generation, distribution losses, the joint (Bell-type) measurement via a
balanced hybrid plus per-line amplification chains, homodyne sampling,
and the feedforward displacement.  Everything the scalar budget in
:mod:`mwteleport.budget` predicts must fall out of this network, which is
the point: the two routes are independent and the tests hold them
together.

Feedforward flavours:

* digital — both measured quadratures are sampled, rescaled by the known
  chain amplitude gain, and applied as a displacement on the receiver;
* analog — the amplified lines are combined on a hybrid, attenuated, and
  injected into the receiver through a strongly asymmetric coupler.  No
  sampling happens; the output state is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from . import gaussian as ga
from .budget import (
    ChannelSpec,
    FeedforwardSpec,
    MeasChainSpec,
    analog_feedforward_noise,
    epr_quality,
    optimize_attenuation,
)


class GridResolutionError(ValueError):
    """Raised when a Wigner grid cannot resolve the convolution kernel."""


def measurement_jpa(chain: MeasChainSpec, pump_phase: str, n_env: float = 0.0) -> ga.JpaSpec:
    """Preamplifier model used on each measured line.

    Symmetric noise couplings s_x = s_p reproduce the chain's
    input-referred noise a_j on the amplified quadrature:
    a_j = s * (n_env + 1/2) / g_j.
    """
    s = chain.a_j * chain.g_j / (n_env + 0.5)
    return ga.JpaSpec(
        g_x=chain.g_j, g_p=chain.g_j, s_x=s, s_p=s, n_env=n_env, pump_phase=pump_phase
    )


def hemt_amp(chain: MeasChainSpec) -> ga.AmpSpec:
    """Phase-insensitive amplifier whose input-referred noise equals a_h."""
    if chain.g_h == 1.0:
        if chain.a_h != 0.0:
            raise ValueError("unit-gain amplifier cannot carry added noise")
        return ga.AmpSpec(1.0)
    occupancy = chain.a_h * chain.g_h / (chain.g_h - 1.0) - 0.5
    if occupancy < -1e-12:
        raise ValueError(
            f"a_h={chain.a_h} is below the quantum limit of a g={chain.g_h} amplifier"
        )
    return ga.AmpSpec(chain.g_h, max(occupancy, 0.0))


def resource_state(
    jpa: ga.JpaSpec,
    splitter_loss_db: float,
    ch: ChannelSpec,
    include_delay: bool,
) -> tuple[ga.GaussianState, float]:
    """Distributed entangled pair (sender mode 0, receiver mode 1).

    Applies the channel's path losses, the delay line when requested, and
    the optional attenuation of the better path.  Returns the state and
    the attenuation factor actually applied.
    """
    ch_eff = ch if include_delay else replace(ch, measurement_time_s=0.0)
    eta_a, eta_b = ch_eff.path_transmissivities()
    attenuation = 1.0
    if ch_eff.optimize_attenuation:
        attenuation, _ = optimize_attenuation(epr_quality(jpa, splitter_loss_db), ch_eff)
        if eta_a >= eta_b:
            eta_a *= attenuation
        else:
            eta_b *= attenuation
    st = ga.epr_from_jpas(jpa, splitter_loss_db)
    st = ga.loss_channel(st, 0, eta_a, ch_eff.n_va)
    st = ga.loss_channel(st, 1, eta_b, ch_eff.n_vb)
    return st, attenuation


def _amplified_bell_network(
    alpha_t: complex,
    jpa: ga.JpaSpec,
    splitter_loss_db: float,
    ch: ChannelSpec,
    chain: MeasChainSpec,
    include_delay: bool,
) -> ga.GaussianState:
    """Modes (0: x-measured line, 1: p-measured line, 2: receiver) after
    the hybrid split and both amplification chains."""
    resource, _ = resource_state(jpa, splitter_loss_db, ch, include_delay)
    st = ga.tensor(ga.coherent(alpha_t), resource)
    st = ga.beam_splitter(st, 0, 1, 0.5)  # 0: sum port, 1: difference port
    hemt = hemt_amp(chain)
    for mode, pump in ((0, "x"), (1, "p")):
        st = ga.loss_channel(st, mode, chain.alpha, chain.n_v_alpha)
        st = ga.apply_jpa(st, mode, measurement_jpa(chain, pump))
        st = ga.loss_channel(st, mode, chain.beta, chain.n_v_beta)
        st = ga.phase_insensitive_amp(st, mode, hemt)
    return st


def chain_amplitude_gain(chain: MeasChainSpec) -> float:
    """Amplitude gain from a Bell port quadrature to the sampled outcome."""
    return math.sqrt(chain.alpha * chain.beta * chain.g_j * chain.g_h)


@dataclass(frozen=True)
class TeleportRun:
    """A single protocol execution.

    ``outcome_a``/``outcome_b`` are the gain-rescaled displacement
    components actually applied to the receiver (None in analog mode,
    which applies no discrete displacement); fidelity is the overlap of
    the receiver output with the coherent input.
    """

    alpha_t: complex
    outcome_a: float | None
    outcome_b: float | None
    output_state: ga.GaussianState
    fidelity: float
    seed: int | None


@dataclass(frozen=True)
class TeleportBatch:
    """Vectorized set of digital runs sharing one scenario."""

    alpha_t: complex
    seed: int
    outcomes_a: NDArray[np.float64] = field(repr=False)
    outcomes_b: NDArray[np.float64] = field(repr=False)
    fidelities: NDArray[np.float64] = field(repr=False)
    output_cov: NDArray[np.float64] = field(repr=False)
    fidelity_mean: float = 0.0
    fidelity_stderr: float = 0.0

    @property
    def n_runs(self) -> int:
        return len(self.fidelities)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def run_teleport(
    alpha_t: complex,
    jpa: ga.JpaSpec,
    splitter_loss_db: float,
    ch: ChannelSpec,
    chain: MeasChainSpec,
    ff: FeedforwardSpec = FeedforwardSpec(),
    seed: int = 0,
) -> TeleportRun:
    """Execute the protocol once.

    Digital mode samples the two homodyne outcomes (reproducibly under
    ``seed``), conditions the receiver, and displaces it by the rescaled
    outcomes.  Analog mode evaluates the deterministic coupler network.
    An unfeasible scenario is not an error; the fidelity just lands below
    one half.
    """
    if ff.mode == "analog":
        out = analog_output_state(alpha_t, jpa, splitter_loss_db, ch, chain, ff)
        fid = ga.overlap(ga.coherent(alpha_t), out)
        return TeleportRun(alpha_t, None, None, out, fid, None)
    st = _amplified_bell_network(alpha_t, jpa, splitter_loss_db, ch, chain, True)
    gain = chain_amplitude_gain(chain)
    rng = _rng(seed)
    meas_x = ga.homodyne(st, 0, "x")
    m_x = meas_x.sample(rng)
    st = meas_x.condition(m_x)
    meas_p = ga.homodyne(st, 0, "p")  # the p line is mode 0 after removal
    m_p = meas_p.sample(rng)
    bob = meas_p.condition(m_p)
    a = math.sqrt(2.0) * m_x / gain
    b = math.sqrt(2.0) * m_p / gain
    bob = ga.displace(bob, 0, a, b)
    fid = ga.overlap(ga.coherent(alpha_t), bob)
    return TeleportRun(alpha_t, a, b, bob, fid, seed)


def batch_teleport(
    alpha_t: complex,
    jpa: ga.JpaSpec,
    splitter_loss_db: float,
    ch: ChannelSpec,
    chain: MeasChainSpec,
    n_runs: int,
    seed: int = 0,
) -> TeleportBatch:
    """Vectorized digital runs: joint outcome sampling plus conditional maps.

    The two measured quadratures (x of line 0, p of line 1) and the
    receiver form one Gaussian; outcomes are drawn from their joint
    marginal through its Cholesky factor (lower triangular, so run 0
    reproduces :func:`run_teleport` with the same seed) and the receiver
    conditional mean is affine in the outcomes.  The conditional
    covariance is outcome-independent, so fidelities reduce to one
    quadratic form per run.
    """
    if n_runs < 1:
        raise ValueError("need at least one run")
    st = _amplified_bell_network(alpha_t, jpa, splitter_loss_db, ch, chain, True)
    gain = chain_amplitude_gain(chain)
    m_idx = [ga.x_index(0), ga.p_index(1)]
    b_idx = [ga.x_index(2), ga.p_index(2)]
    sigma_m = st.cov[np.ix_(m_idx, m_idx)]
    cross = st.cov[np.ix_(b_idx, m_idx)]
    mu_m = st.mean[m_idx]
    mu_b = st.mean[b_idx]
    gain_matrix = np.linalg.solve(sigma_m.T, cross.T).T
    cov_b = st.cov[np.ix_(b_idx, b_idx)] - gain_matrix @ cross.T

    rng = _rng(seed)
    z = rng.standard_normal((n_runs, 2))
    chol = np.linalg.cholesky(sigma_m)
    outcomes = mu_m + z @ chol.T
    displacements = math.sqrt(2.0) / gain * outcomes
    means = mu_b + (outcomes - mu_m) @ gain_matrix.T + displacements

    target = np.array([math.sqrt(2.0) * alpha_t.real, math.sqrt(2.0) * alpha_t.imag])
    sigma_sum = cov_b + 0.5 * np.eye(2)
    delta = means - target
    sol = np.linalg.solve(sigma_sum, delta.T).T
    fids = np.exp(-0.5 * np.einsum("ij,ij->i", delta, sol)) / math.sqrt(
        np.linalg.det(sigma_sum)
    )
    mean = float(fids.mean())
    stderr = float(fids.std(ddof=1) / math.sqrt(n_runs)) if n_runs > 1 else math.inf
    return TeleportBatch(
        alpha_t=alpha_t,
        seed=seed,
        outcomes_a=displacements[:, 0],
        outcomes_b=displacements[:, 1],
        fidelities=fids,
        output_cov=cov_b,
        fidelity_mean=mean,
        fidelity_stderr=stderr,
    )


def expected_fidelity(
    jpa: ga.JpaSpec,
    splitter_loss_db: float,
    ch: ChannelSpec,
    chain: MeasChainSpec,
) -> float:
    """Closed-form mean fidelity of the digital protocol.

    Averaging the per-run overlap over the outcome distribution collapses
    to 1/sqrt(det(V_avg + V_in)) with V_avg the outcome-averaged output
    covariance, i.e. 1/sqrt((1 + n_x)(1 + n_p)) with the per-quadrature
    added noises of the budget calculus.
    """
    st = _amplified_bell_network(0.0, jpa, splitter_loss_db, ch, chain, True)
    gain = chain_amplitude_gain(chain)
    d = 2 * st.n_modes
    # receiver quadrature after displacement: x_B + sqrt(2)/G * m_x
    cx = np.zeros(d)
    cx[ga.x_index(2)] = 1.0
    cx[ga.x_index(0)] = math.sqrt(2.0) / gain
    cp = np.zeros(d)
    cp[ga.p_index(2)] = 1.0
    cp[ga.p_index(1)] = math.sqrt(2.0) / gain
    n_x = ga.variance_of(st, cx) - 0.5
    n_p = ga.variance_of(st, cp) - 0.5
    return 1.0 / math.sqrt((1.0 + n_x) * (1.0 + n_p))


def empirical_fidelity(runs: list[TeleportRun]) -> tuple[float, float]:
    """Mean fidelity and standard error over a set of runs."""
    if not runs:
        raise ValueError("need at least one run")
    fids = np.array([r.fidelity for r in runs])
    stderr = float(fids.std(ddof=1) / math.sqrt(len(fids))) if len(fids) > 1 else math.inf
    return float(fids.mean()), stderr


def analog_output_state(
    alpha_t: complex,
    jpa: ga.JpaSpec,
    splitter_loss_db: float,
    ch: ChannelSpec,
    chain: MeasChainSpec,
    ff: FeedforwardSpec,
) -> ga.GaussianState:
    """Receiver state of the analog-feedforward network (deterministic).

    The two amplified lines are combined on a balanced hybrid so the
    x signal of one and the p signal of the other share a single feed
    mode, which is attenuated and coupled into the receiver with the
    transmissivity that matches the digital displacement gain.  No delay
    line is charged.

    The hybrid necessarily also couples each line's deamplified
    quadrature into the feed, so the forward gain on the input is
    1 + 1/(g_j sqrt(eta_att)) instead of 1 and the added noise carries
    O(1/g_j) corrections to the scalar-budget formula; both effects
    vanish as the preamplifier gain grows.
    """
    _, tau = analog_feedforward_noise(chain, ff.eta_att, None, ff.att_occupancy)
    st = _amplified_bell_network(alpha_t, jpa, splitter_loss_db, ch, chain, False)
    st = ga.beam_splitter(st, 0, 1, 0.5)  # feed on the sum port
    st = ga.loss_channel(st, 0, ff.eta_att, ff.att_occupancy)
    st = ga.beam_splitter(st, 2, 0, tau)  # receiver keeps sqrt(tau) of itself
    return ga.drop_modes(st, (0, 1))


@dataclass(frozen=True)
class ConvolutionReport:
    """Grid-based convolution of a coherent Wigner function with the
    classical noise kernel of the protocol."""

    grid_points: int
    grid_step: float
    output_variance_x: float
    output_variance_p: float
    fidelity_grid: float
    fidelity_closed_form: float
    refinements: int


def convolution_check(
    alpha_t: complex,
    sigma_bar2: float,
    grid_points: int = 256,
    half_width_sigmas: float = 6.0,
    max_refinements: int = 4,
) -> ConvolutionReport:
    """Convolve the input Wigner function with the noise kernel on a grid.

    The kernel is an isotropic Gaussian of variance ``sigma_bar2`` per
    quadrature; the output variance must come out as input + sigma_bar2
    and the grid overlap fidelity as 1/(1 + sigma_bar2).  The grid is
    refined (points doubled) until the fidelity moves by less than 1e-4.
    """
    from scipy.signal import fftconvolve

    if sigma_bar2 <= 0.0:
        raise ValueError("kernel variance must be positive")

    center = np.array([math.sqrt(2.0) * alpha_t.real, math.sqrt(2.0) * alpha_t.imag])
    sigma_out = math.sqrt(0.5 + sigma_bar2)
    half_width = half_width_sigmas * sigma_out

    def evaluate(n: int) -> tuple[float, float, float, float]:
        xs = np.linspace(-half_width, half_width, n)
        dx = xs[1] - xs[0]
        if math.sqrt(sigma_bar2) < 3.0 * dx:
            raise GridResolutionError(
                f"kernel width {math.sqrt(sigma_bar2):.3g} under-resolved by "
                f"grid step {dx:.3g}; need at least 3 cells"
            )
        gx, gp = np.meshgrid(xs, xs, indexing="ij")
        w_in = np.exp(-((gx - center[0]) ** 2 + (gp - center[1]) ** 2)) / math.pi
        kernel = np.exp(-(gx**2 + gp**2) / (2.0 * sigma_bar2))
        kernel /= kernel.sum() * dx * dx
        w_out = fftconvolve(w_in, kernel, mode="same") * dx * dx
        norm = w_out.sum() * dx * dx
        var_x = float((w_out * (gx - center[0]) ** 2).sum() * dx * dx / norm)
        var_p = float((w_out * (gp - center[1]) ** 2).sum() * dx * dx / norm)
        fidelity = float(2.0 * math.pi * (w_in * w_out).sum() * dx * dx)
        return var_x, var_p, fidelity, dx

    n = grid_points
    var_x, var_p, fid, dx = evaluate(n)
    refinements = 0
    while refinements < max_refinements:
        var_x2, var_p2, fid2, dx2 = evaluate(2 * n)
        refinements += 1
        n *= 2
        converged = abs(fid2 - fid) < 1e-4
        var_x, var_p, fid, dx = var_x2, var_p2, fid2, dx2
        if converged:
            break
    return ConvolutionReport(
        grid_points=n,
        grid_step=dx,
        output_variance_x=var_x,
        output_variance_p=var_p,
        fidelity_grid=fid,
        fidelity_closed_form=1.0 / (1.0 + sigma_bar2),
        refinements=refinements,
    )
