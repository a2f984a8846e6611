"""Lossy-link entanglement distribution with a heralded noiseless amplifier.

The amplifier couples the target mode to a coherent probe through a weak
cross-Kerr phase and post-selects a narrow window of the probe's
p-quadrature homodyne record.  Conditioned on acceptance the target mode
is (approximately) multiplied by g**n with g = exp(k_dt * Im(A_w)),
where A_w is the number-operator weak value of the probe; the known
residual phase exp(-i k_dt Re(A_w) n) is undone deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .budget import EprQuality
from .fock import (
    FockState,
    apply_loss_dilated,
    apply_one_mode,
    coherent,
    ideal_nla,
    quadrature_eigenvector,
    tmss,
    top_level_weight,
    weighted_quadrature,
)

__all__ = [
    "WeakMeasSpec",
    "NlaOutcome",
    "RepeaterReport",
    "weak_value",
    "nla_effective_params",
    "ideal_nla_equivalence_fidelity",
    "postselection_density",
    "acceptance_probability",
    "weak_kerr_nla",
    "repeater_gain_report",
]


def weak_value(alpha: complex, p: float) -> complex:
    """Number-operator weak value of a coherent probe post-selected at p.

    Closed form alpha^2 - i sqrt(2) alpha p; its imaginary part sets the
    heralded gain, its real part the deterministic phase to undo.
    """
    return alpha * alpha - 1j * math.sqrt(2.0) * alpha * p


@dataclass(frozen=True)
class WeakMeasSpec:
    """Probe and post-selection settings for the weak-measurement amplifier.

    The acceptance window is a finite interval; point post-selection has
    zero probability.  Reported gain and phases use the window midpoint.
    """

    alpha: complex = -2.0
    p_window: tuple[float, float] = (0.975, 1.025)
    k_dt: float = 0.01
    probe_levels: int = 40

    def __post_init__(self) -> None:
        lo, hi = self.p_window
        if not lo < hi:
            raise ValueError("p_window must be an increasing interval")
        if self.k_dt < 0.0:
            raise ValueError("k_dt must be >= 0")
        needed = abs(self.alpha) ** 2 + 5.0 * abs(self.alpha) + 5.0
        if self.probe_levels < needed:
            raise ValueError(
                f"probe_levels={self.probe_levels} too small for |alpha|={abs(self.alpha):.3g}"
            )

    @property
    def p_mid(self) -> float:
        return 0.5 * (self.p_window[0] + self.p_window[1])

    def weak_value_at_mid(self) -> complex:
        return weak_value(self.alpha, self.p_mid)

    def nominal_gain(self) -> float:
        return math.exp(self.k_dt * self.weak_value_at_mid().imag)

    def validity_parameter(self) -> float:
        """k_dt |A_w|; the conditional map is close to g**n only when this is small."""
        return self.k_dt * abs(self.weak_value_at_mid())


def nla_effective_params(lam: float, eta_b: float, g: float) -> tuple[float, float]:
    """Equivalent (lam, loss) description of g**n acting after a lossy arm.

    A two-mode squeezed state with one arm transmitted at eta_b and then
    noiselessly amplified equals a state with stronger squeezing and
    weaker loss: d = 1 + (g^2 - 1) eta_b, lam_eff = lam sqrt(d),
    eta_eff = g^2 eta_b / d.  Rejects non-normalizable targets
    (lam_eff >= 1; lossless arm reduces to g lam >= 1).
    """
    if not 0.0 <= lam < 1.0:
        raise ValueError("lam must be in [0, 1)")
    if not 0.0 < eta_b <= 1.0:
        raise ValueError("eta_b must be in (0, 1]")
    if g <= 0.0:
        raise ValueError("g must be positive")
    d = 1.0 + (g * g - 1.0) * eta_b
    lam_eff = lam * math.sqrt(d)
    if lam_eff >= 1.0:
        raise ValueError(f"amplified state is non-normalizable (lam_eff={lam_eff:.4f})")
    return lam_eff, g * g * eta_b / d


def ideal_nla_equivalence_fidelity(
    lam: float, eta_b: float, g: float, levels: int = 25
) -> float:
    """Mixed-state fidelity between the two routes to the amplified link.

    Route one applies the exact g**n filter after the lossy arm; route
    two builds the effective (lam_eff, eta_eff) state directly.  Both are
    reduced to the two signal modes before the Uhlmann fidelity.
    """
    from .fock import fidelity_mixed, reduced_density

    lam_eff, eta_eff = nla_effective_params(lam, eta_b, g)
    direct, _ = tmss(lam, levels)
    direct = apply_loss_dilated(direct, 1, eta_b)
    direct, _ = ideal_nla(direct, 1, g)
    rebuilt, _ = tmss(lam_eff, levels)
    rebuilt = apply_loss_dilated(rebuilt, 1, eta_eff)
    return fidelity_mixed(
        reduced_density(direct, (0, 1)), reduced_density(rebuilt, (0, 1))
    )


def _number_marginal(state: FockState, mode: int) -> np.ndarray:
    psi = state.normalized()
    flat = np.moveaxis(psi.amps, mode, 0).reshape(psi.dims[mode], -1)
    return np.sum(np.abs(flat) ** 2, axis=1)


def _conditional_kraus(levels: int, spec: WeakMeasSpec, p: float) -> np.ndarray:
    """Diagonal Kraus vector over the target's photon number for outcome p.

    Entangling phase, probe state, and homodyne projection collapse into
    m_n = <p| exp(-i k_dt n n_probe) |alpha>, so the probe never has to
    be attached to the signal tensor.
    """
    probe = coherent(spec.alpha, spec.probe_levels).amps
    eig = quadrature_eigenvector(p, spec.probe_levels, "p")
    weights = eig.conj() * probe
    n = np.arange(levels, dtype=float)
    m = np.arange(spec.probe_levels, dtype=float)
    return np.exp(-1j * spec.k_dt * np.outer(n, m)) @ weights


def postselection_density(state: FockState, mode: int, spec: WeakMeasSpec, p: float) -> float:
    """Probability density of the probe homodyne record at outcome p."""
    marg = _number_marginal(state, mode)
    kraus = _conditional_kraus(marg.size, spec, p)
    return float(np.sum(marg * np.abs(kraus) ** 2))


def acceptance_probability(
    state: FockState, mode: int, spec: WeakMeasSpec, lo: float, hi: float
) -> float:
    """Probability that the probe record lands in [lo, hi]."""
    marg = _number_marginal(state, mode)

    def dens(p: float) -> float:
        if abs(p) > 25.0:
            # Gaussian envelope: zero to double precision out here
            return 0.0
        kraus = _conditional_kraus(marg.size, spec, p)
        return float(np.sum(marg * np.abs(kraus) ** 2))

    value, _ = quad(dens, lo, hi, limit=200)
    return value


@dataclass(frozen=True)
class NlaOutcome:
    """Conditional state and bookkeeping of one heralded amplification.

    ``approximation_error`` is the infidelity between the conditional
    state (after the deterministic phase undo) and the exact g**n output
    on the same input.
    """

    state: FockState
    gain: float
    success_density: float
    success_prob: float
    approximation_error: float


def weak_kerr_nla(
    state: FockState, mode: int, spec: WeakMeasSpec, enforce_validity: bool = True
) -> NlaOutcome:
    """Run the probe-mediated amplifier on one mode, post-selected at the window.

    The conditional state is evaluated at the window midpoint (the window
    is narrow by construction); the success probability integrates the
    outcome density over the full window.  Raises ValueError outside the
    weak-interaction validity region k_dt |A_w| < 0.1 unless told not to,
    and on measure-zero post-selection.
    """
    aw = spec.weak_value_at_mid()
    if enforce_validity and spec.k_dt * abs(aw) >= 0.1:
        raise ValueError(
            f"k_dt*|A_w| = {spec.k_dt * abs(aw):.3f} outside the weak-interaction regime"
        )
    psi = state.normalized()
    dim = psi.dims[mode]
    kraus = _conditional_kraus(dim, spec, spec.p_mid)
    cond = apply_one_mode(psi, mode, np.diag(kraus))
    density = cond.norm2()
    if density <= 1e-14:
        raise ValueError("post-selection landed on a measure-zero outcome")
    undo = np.exp(1j * spec.k_dt * aw.real * np.arange(dim))
    cond = apply_one_mode(cond, mode, np.diag(undo)).normalized()
    g = math.exp(spec.k_dt * aw.imag)
    ideal, _ = ideal_nla(psi, mode, g)
    err = max(0.0, 1.0 - abs(np.vdot(ideal.amps, cond.amps)) ** 2)
    prob = acceptance_probability(psi, mode, spec, *spec.p_window)
    return NlaOutcome(cond, g, float(density), prob, float(err))


@dataclass(frozen=True)
class RepeaterReport:
    """Entanglement figures of one repeater link, before and after amplification.

    ``after`` is conditioned on the midpoint outcome, ``after_averaged``
    mixes the conditional states over the acceptance window weighted by
    their outcome density.  ``refinement_delta`` is the change of
    after.delta_xi2 when the truncation is re-run 10 levels higher.
    """

    lam: float
    eta_a: float
    eta_b: float
    amplifier: str
    gain: float
    success_density: float
    success_prob: float
    approximation_error: float
    before: EprQuality
    after: EprQuality
    after_averaged: EprQuality
    lam_eff: float
    eta_b_eff: float
    levels: int
    refinement_delta: float
    truncation_weight: float


def _epr_figures(state: FockState) -> EprQuality:
    _, squeezed = weighted_quadrature(state, [(0, "x", 1.0), (1, "x", 1.0)])
    _, anti = weighted_quadrature(state, [(0, "p", 1.0), (1, "p", 1.0)])
    return EprQuality(squeezed, anti)


def _mixture_figures(
    states: list[FockState], weights: list[float]
) -> EprQuality:
    total = sum(weights)
    out = []
    for terms in ([(0, "x", 1.0), (1, "x", 1.0)], [(0, "p", 1.0), (1, "p", 1.0)]):
        first = second = 0.0
        for st, w in zip(states, weights):
            mean, var = weighted_quadrature(st, terms)
            first += w * mean
            second += w * (var + mean * mean)
        first /= total
        second /= total
        out.append(second - first * first)
    return EprQuality(out[0], out[1])


def repeater_gain_report(
    lam: float,
    eta_a: float,
    eta_b: float,
    amplifier: WeakMeasSpec | float,
    levels: int = 30,
    _refine: bool = True,
) -> RepeaterReport:
    """Distribute a two-mode squeezed link over lossy arms and amplify arm B.

    ``amplifier`` is either the weak-measurement probe spec or a bare
    gain for the exact g**n filter (diagnostic route; its success
    figures are undefined and reported as nan).  Loss ancillas are kept
    as purification modes, so every figure comes from pure-state algebra.
    """
    psi, _ = tmss(lam, levels)
    if eta_a < 1.0:
        psi = apply_loss_dilated(psi, 0, eta_a)
    if eta_b < 1.0:
        psi = apply_loss_dilated(psi, 1, eta_b)
    before = _epr_figures(psi)

    if isinstance(amplifier, WeakMeasSpec):
        outcome = weak_kerr_nla(psi, 1, amplifier)
        g = outcome.gain
        after_state = outcome.state
        after = _epr_figures(after_state)
        nodes, gl_weights = np.polynomial.legendre.leggauss(9)
        lo, hi = amplifier.p_window
        half = 0.5 * (hi - lo)
        states, mix_weights = [], []
        for node, glw in zip(nodes, gl_weights):
            p = 0.5 * (lo + hi) + half * node
            kraus = _conditional_kraus(psi.dims[1], amplifier, p)
            cond = apply_one_mode(psi, 1, np.diag(kraus))
            density = cond.norm2()
            undo = np.exp(
                1j * amplifier.k_dt * weak_value(amplifier.alpha, p).real * np.arange(psi.dims[1])
            )
            states.append(apply_one_mode(cond, 1, np.diag(undo)).normalized())
            mix_weights.append(glw * half * density)
        after_averaged = _mixture_figures(states, mix_weights)
        kind = "weak_kerr"
        density_mid, prob, err = (
            outcome.success_density,
            outcome.success_prob,
            outcome.approximation_error,
        )
    else:
        g = float(amplifier)
        after_state, _ = ideal_nla(psi, 1, g)
        after = _epr_figures(after_state)
        after_averaged = after
        kind = "ideal"
        density_mid = prob = math.nan
        err = 0.0

    lam_eff, eta_b_eff = nla_effective_params(lam, eta_b, g)
    delta = 0.0
    if _refine:
        finer = repeater_gain_report(lam, eta_a, eta_b, amplifier, levels + 10, _refine=False)
        delta = finer.after.delta_xi2 - after.delta_xi2
    return RepeaterReport(
        lam=lam,
        eta_a=eta_a,
        eta_b=eta_b,
        amplifier=kind,
        gain=g,
        success_density=density_mid,
        success_prob=prob,
        approximation_error=err,
        before=before,
        after=after,
        after_averaged=after_averaged,
        lam_eff=lam_eff,
        eta_b_eff=eta_b_eff,
        levels=levels,
        refinement_delta=delta,
        truncation_weight=top_level_weight(after_state, 1),
    )
