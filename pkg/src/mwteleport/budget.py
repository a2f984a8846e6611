"""Closed-form noise budgets for an entanglement-assisted microwave link.

Everything here is scalar arithmetic on quadrature variances; the Gaussian
state engine in :mod:`mwteleport.gaussian` reproduces each formula by
explicit simulation and the tests hold the two routes together.

The budget tracks three numbers through the protocol:

* ``delta_xi2``: variance of the entangled pair's correlated quadrature
  combinations, Var(x_A + x_B) = Var(p_A - p_B);
* ``delta_xi_prime2``: the same figure after distributing the pair over
  lossy and possibly asymmetric paths;
* ``a_total``: quadrature noise the measurement/feedforward chain adds to
  the receiver output, referred to the teleported state.

The classical boundary is ``xi = (1 + delta_xi_prime2 + a_total)**2 = 4``,
equivalently fidelity 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .gaussian import JpaSpec, db_to_transmissivity


def loss_added_noise(transmissivity: float, occupancy: float = 0.0) -> float:
    """Input-referred quadrature noise of a loss element.

    A beam-splitter loss of transmissivity t followed by renormalization
    to unit signal gain adds (1-t)/t * (occupancy + 1/2) per quadrature.
    """
    if not 0.0 < transmissivity <= 1.0:
        raise ValueError(f"transmissivity must be in (0, 1], got {transmissivity}")
    return (1.0 - transmissivity) / transmissivity * (occupancy + 0.5)


def hemt_added_noise(gain: float, occupancy: float) -> float:
    """Input-referred quadrature noise (g-1)/g * (occupancy + 1/2) of a
    phase-insensitive amplifier."""
    if gain < 1.0:
        raise ValueError("phase-insensitive gain must be >= 1")
    return (gain - 1.0) / gain * (occupancy + 0.5)


@dataclass(frozen=True)
class EprQuality:
    """Quadrature-correlation variances of a two-mode entangled resource.

    ``delta_xi2`` is Var(x_A + x_B) = Var(p_A - p_B); ``delta_xi_perp2``
    is the variance of the orthogonal combinations.  Vacuum (no
    entanglement) sits at (1, 1); the product is bounded below by 1.
    """

    delta_xi2: float
    delta_xi_perp2: float

    def __post_init__(self) -> None:
        if self.delta_xi2 <= 0.0 or self.delta_xi_perp2 <= 0.0:
            raise ValueError("correlation variances must be positive")
        if self.delta_xi2 * self.delta_xi_perp2 < 1.0 - 1e-9:
            raise ValueError(
                "delta_xi2 * delta_xi_perp2 >= 1 violated: "
                f"{self.delta_xi2} * {self.delta_xi_perp2}"
            )


def epr_quality(jpa: JpaSpec, splitter_loss_db: float = 0.0) -> EprQuality:
    """Correlation variances of the pair made from two such amplifiers.

    Two orthogonally pumped amplifiers squeeze the two hybrid inputs, so

        delta_xi2      = 1/g_p + 2 s_p (n_env + 1/2)
        delta_xi_perp2 = g_x   + 2 s_x (n_env + 1/2)

    and an internal splitter loss moves both toward the vacuum level 1.
    """
    v_env = jpa.n_env + 0.5
    d2 = 1.0 / jpa.g_p + 2.0 * jpa.s_p * v_env
    d2_perp = jpa.g_x + 2.0 * jpa.s_x * v_env
    eta = db_to_transmissivity(splitter_loss_db)
    return EprQuality(
        delta_xi2=eta * d2 + (1.0 - eta),
        delta_xi_perp2=eta * d2_perp + (1.0 - eta),
    )


@dataclass(frozen=True)
class ChannelSpec:
    """Distribution paths from the pair source to the two parties.

    ``eta_a`` and ``eta_b`` are explicit extra transmissivities (set them
    directly to sweep channel maps); on top of that each path loses
    ``cable_loss_db_per_m * distance_m + connector_loss_db``.  The
    receiving party's path additionally carries the feedforward delay
    line, ``measurement_time_s * group_velocity_m_per_s`` of extra cable,
    when the budget is evaluated in digital-feedforward mode.
    """

    eta_a: float = 1.0
    eta_b: float = 1.0
    n_va: float = 0.0
    n_vb: float = 0.0
    cable_loss_db_per_m: float = 0.0
    connector_loss_db: float = 0.0
    distance_m: float = 0.0
    measurement_time_s: float = 0.0
    group_velocity_m_per_s: float = 2.0e8
    optimize_attenuation: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta_a <= 1.0 or not 0.0 <= self.eta_b <= 1.0:
            raise ValueError("explicit transmissivities must be in [0, 1]")
        if self.n_va < 0.0 or self.n_vb < 0.0:
            raise ValueError("environment occupancies must be >= 0")
        if min(self.cable_loss_db_per_m, self.connector_loss_db, self.distance_m) < 0.0:
            raise ValueError("loss rates and distance must be >= 0")
        if self.measurement_time_s < 0.0 or self.group_velocity_m_per_s <= 0.0:
            raise ValueError("need measurement_time_s >= 0 and positive velocity")

    def delay_line_m(self) -> float:
        """Cable length that buffers the signal during the measurement."""
        return self.measurement_time_s * self.group_velocity_m_per_s

    def path_transmissivities(self) -> tuple[float, float]:
        """(eta_A, eta_B) including cable, connectors, and the delay line."""
        cable_a = self.cable_loss_db_per_m * self.distance_m + self.connector_loss_db
        cable_b = (
            self.cable_loss_db_per_m * (self.distance_m + self.delay_line_m())
            + self.connector_loss_db
        )
        return (
            self.eta_a * db_to_transmissivity(cable_a),
            self.eta_b * db_to_transmissivity(cable_b),
        )


def asymmetric_correlation(
    epr: EprQuality,
    eta_a: float,
    eta_b: float,
    n_va: float = 0.0,
    n_vb: float = 0.0,
) -> float:
    """Correlated-quadrature variance after independent path losses.

    Var(x_A' + x_B') for x' = sqrt(eta) x + sqrt(1-eta) x_env on each
    path:

        ((sqrt(eta_A)+sqrt(eta_B))^2 / 4) * delta_xi2
      + ((sqrt(eta_A)-sqrt(eta_B))^2 / 4) * delta_xi_perp2
      + (1-eta_A)(n_vA + 1/2) + (1-eta_B)(n_vB + 1/2)

    Unbalanced paths leak the anti-correlated (large) variance into the
    correlated combination, which is why attenuating the better path can
    help.
    """
    ra, rb = math.sqrt(eta_a), math.sqrt(eta_b)
    return (
        (ra + rb) ** 2 / 4.0 * epr.delta_xi2
        + (ra - rb) ** 2 / 4.0 * epr.delta_xi_perp2
        + (1.0 - eta_a) * (n_va + 0.5)
        + (1.0 - eta_b) * (n_vb + 0.5)
    )


def distributed_correlation(epr: EprQuality, ch: ChannelSpec) -> float:
    """``asymmetric_correlation`` with path transmissivities derived from
    the channel's distance, connector, and delay-line model."""
    eta_a, eta_b = ch.path_transmissivities()
    return asymmetric_correlation(epr, eta_a, eta_b, ch.n_va, ch.n_vb)


def optimize_attenuation(epr: EprQuality, ch: ChannelSpec) -> tuple[float, float]:
    """Best extra attenuation of the less lossy path and the value it buys.

    Returns ``(t, value)`` where t in (0, 1] multiplies the larger of the
    two path transmissivities and ``value`` is the minimized correlated
    variance.  In terms of u = sqrt(eta) the variance is quadratic with
    stationary point

        u* = sqrt(eta_other) * (delta_xi_perp2 - delta_xi2)
             / (delta_xi2 + delta_xi_perp2 - 4*(n_v + 1/2))

    attenuation pays off only when u*^2 falls below the path's own
    transmissivity; otherwise t = 1.  The returned t is exact (closed
    form), well inside the 1e-10 tolerance the interface promises.
    """
    eta_a, eta_b = ch.path_transmissivities()
    if eta_a >= eta_b:
        eta_hi, eta_lo, n_hi, n_lo, a_is_hi = eta_a, eta_b, ch.n_va, ch.n_vb, True
    else:
        eta_hi, eta_lo, n_hi, n_lo, a_is_hi = eta_b, eta_a, ch.n_vb, ch.n_va, False

    def value(eta: float) -> float:
        if a_is_hi:
            return asymmetric_correlation(epr, eta, eta_lo, n_hi, n_lo)
        return asymmetric_correlation(epr, eta_lo, eta, n_lo, n_hi)

    if eta_hi == 0.0:
        return 1.0, value(0.0)
    curvature = epr.delta_xi2 + epr.delta_xi_perp2 - 4.0 * (n_hi + 0.5)
    candidates = [(1.0, value(eta_hi))]
    # t cannot be exactly 0 (the interface promises (0, 1]); a fully
    # blocked path is approximated by a vanishing transmissivity
    t_floor = 1e-12
    if curvature <= 0.0:
        # concave in u = sqrt(eta): minimum at an interval endpoint
        candidates.append((t_floor, value(t_floor * eta_hi)))
    else:
        u_star = math.sqrt(eta_lo) * (epr.delta_xi_perp2 - epr.delta_xi2) / curvature
        if u_star <= 0.0:
            candidates.append((t_floor, value(t_floor * eta_hi)))
        elif u_star * u_star < eta_hi:
            t = u_star * u_star / eta_hi
            candidates.append((t, value(t * eta_hi)))
    return min(candidates, key=lambda tv: tv[1])


@dataclass(frozen=True)
class MeasChainSpec:
    """Loss and amplifier stack between the joint measurement and the ADC.

    ``alpha`` collects losses before the preamplifier, ``beta`` the
    losses between preamplifier and the following amplifier; ``a_j`` and
    ``a_h`` are the input-referred quadrature noises of the two
    amplifiers and ``g_j``, ``g_h`` their power gains.
    """

    alpha: float = 1.0
    beta: float = 1.0
    g_j: float = 1.0
    a_j: float = 0.0
    g_h: float = 1.0
    a_h: float = 0.0
    n_v_alpha: float = 0.0
    n_v_beta: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0 or not 0.0 < self.beta <= 1.0:
            raise ValueError("alpha and beta must be in (0, 1]")
        if self.g_j < 1.0 or self.g_h < 1.0:
            raise ValueError("amplifier gains must be >= 1")
        if min(self.a_j, self.a_h, self.n_v_alpha, self.n_v_beta) < 0.0:
            raise ValueError("noise figures and occupancies must be >= 0")

    @property
    def a_alpha(self) -> float:
        return loss_added_noise(self.alpha, self.n_v_alpha)

    @property
    def a_beta(self) -> float:
        return loss_added_noise(self.beta, self.n_v_beta)


def total_measurement_noise(m: MeasChainSpec) -> float:
    """Receiver-referred noise of the digital measurement chain.

    Each of the two quadrature outcomes is fed forward with amplitude
    gain sqrt(2), so every referred noise term enters twice:

        A = 2 (A_alpha + A_J/alpha + A_beta/(alpha g_J) + A_H/(alpha beta g_J))
    """
    return 2.0 * (
        m.a_alpha
        + m.a_j / m.alpha
        + m.a_beta / (m.alpha * m.g_j)
        + m.a_h / (m.alpha * m.beta * m.g_j)
    )


def xi_and_fidelity(delta_xi_prime2: float, a_total: float) -> tuple[float, float]:
    """Classicality figure and coherent-state fidelity for symmetric noise.

    xi = (1 + delta_xi_prime2 + a_total)^2, fidelity = 1/sqrt(xi); the
    protocol beats every classical strategy exactly when xi < 4.
    """
    if delta_xi_prime2 < 0.0 or a_total < 0.0:
        raise ValueError("noise inputs must be >= 0")
    xi = (1.0 + delta_xi_prime2 + a_total) ** 2
    return xi, 1.0 / math.sqrt(xi)


def asymmetric_xi(noise_x: float, noise_p: float) -> tuple[float, float]:
    """xi = (1 + n_x)(1 + n_p) and fidelity 1/sqrt(xi) when the two
    quadratures carry different added noise."""
    if noise_x < 0.0 or noise_p < 0.0:
        raise ValueError("noise inputs must be >= 0")
    xi = (1.0 + noise_x) * (1.0 + noise_p)
    return xi, 1.0 / math.sqrt(xi)


def solve_aj_max(
    epr: EprQuality, ch: ChannelSpec, m: MeasChainSpec
) -> float | None:
    """Largest preamplifier noise that keeps the link better than classical.

    Solves xi(a_j) = 4, i.e. delta_xi_prime2 + A(a_j) = 1, for a_j.  A is
    affine in a_j so the solve is exact:

        a_j_max = alpha * (1 - delta_xi_prime2 - A(a_j=0)) / 2

    Returns None when even a noiseless preamplifier cannot reach the
    boundary (negative solution); a_j_max = 0 itself counts as feasible.
    A bisection on the monotone map a_j -> xi cross-checks the closed
    form to 1e-12.
    """
    if ch.optimize_attenuation:
        _, dxp2 = optimize_attenuation(epr, ch)
    else:
        dxp2 = distributed_correlation(epr, ch)
    budget = 1.0 - dxp2 - total_measurement_noise(replace(m, a_j=0.0))
    if budget < 0.0:
        return None
    a_j_max = m.alpha * budget / 2.0
    # monotone bisection guard against regressions in the affine algebra
    lo, hi = 0.0, max(1.0, 2.0 * a_j_max)
    for _ in range(80):
        mid = (lo + hi) / 2.0
        xi, _ = xi_and_fidelity(dxp2, total_measurement_noise(replace(m, a_j=mid)))
        if xi <= 4.0:
            lo = mid
        else:
            hi = mid
    if abs(lo - a_j_max) > 1e-12 * max(1.0, a_j_max):
        raise AssertionError(
            f"closed-form a_j_max {a_j_max} disagrees with bisection {lo}"
        )
    return a_j_max


def analog_feedforward_noise(
    m: MeasChainSpec,
    eta_att: float = 1.0,
    tau: float | None = None,
    att_occupancy: float = 0.0,
) -> tuple[float, float]:
    """Added noise and required coupler transmissivity for analog feedforward.

    The two amplified measurement signals are combined on a hybrid,
    attenuated by ``eta_att`` at base temperature, and injected into the
    receiver mode through a strongly asymmetric coupler.  Matching the
    digital displacement gain fixes the coupler:

        1 - tau = 4 / (eta_att * alpha * beta * g_J * g_H)

    Because the coupler injects both feed quadratures, each receiver
    quadrature picks up the companion line's noise too; all terms except
    the pre-preamp loss (whose companion copy is deamplified) double:

        A_analog = 2 A - 2 A_alpha (1 - 1/g_J^2)
                   + 4 (1-eta_att)(att_occupancy + 1/2)
                     / (eta_att alpha beta g_J g_H)

    ``tau``, when given, overrides the computed coupler (the added
    attenuator noise then scales with the actual 1-tau); the required
    value is always returned alongside.
    """
    if not 0.0 < eta_att <= 1.0:
        raise ValueError("eta_att must be in (0, 1]")
    if att_occupancy < 0.0:
        raise ValueError("attenuator occupancy must be >= 0")
    chain_power_gain = eta_att * m.alpha * m.beta * m.g_j * m.g_h
    one_minus_tau = 4.0 / chain_power_gain
    tau_required = 1.0 - one_minus_tau
    if not 0.0 < tau_required < 1.0:
        raise ValueError(
            f"required coupler transmissivity {tau_required} outside (0, 1); "
            "increase the chain gain"
        )
    if tau is None:
        tau = tau_required
    elif not 0.0 < tau < 1.0:
        raise ValueError("coupler transmissivity must be in (0, 1)")
    a_digital = total_measurement_noise(m)
    companion_deficit = 2.0 * m.a_alpha * (1.0 - 1.0 / m.g_j**2)
    attenuator = (1.0 - tau) * (1.0 - eta_att) * (att_occupancy + 0.5)
    return a_digital * 2.0 - companion_deficit + attenuator, tau_required


@dataclass(frozen=True)
class FeedforwardSpec:
    """Feedforward flavor: 'digital' (measure, digitize, displace; needs a
    delay line) or 'analog' (amplified signal drives the coupler; no
    delay, doubled chain noise)."""

    mode: str = "digital"
    eta_att: float = 1.0
    att_occupancy: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("digital", "analog"):
            raise ValueError(f"feedforward mode must be digital or analog, got {self.mode!r}")
        if not 0.0 < self.eta_att <= 1.0:
            raise ValueError("eta_att must be in (0, 1]")
        if self.att_occupancy < 0.0:
            raise ValueError("attenuator occupancy must be >= 0")


@dataclass(frozen=True)
class LinkBudget:
    """One scenario, fully evaluated."""

    delta_xi_prime2: float
    a_total: float
    xi: float
    fidelity: float
    a_j_max: float | None
    attenuation_applied: float
    feasible: bool
    classical: bool


def scenario_budget(
    epr: EprQuality,
    ch: ChannelSpec,
    chain: MeasChainSpec,
    ff: FeedforwardSpec = FeedforwardSpec(),
) -> LinkBudget:
    """Compose distribution, measurement, and feedforward into one budget.

    Digital mode charges the delay line to the receiving path; analog
    mode removes the delay but doubles the chain noise as per
    :func:`analog_feedforward_noise`.
    """
    ch_eff = ch if ff.mode == "digital" else replace(ch, measurement_time_s=0.0)
    if ch_eff.optimize_attenuation:
        attenuation, dxp2 = optimize_attenuation(epr, ch_eff)
    else:
        attenuation, dxp2 = 1.0, distributed_correlation(epr, ch_eff)
    if ff.mode == "digital":
        a_total = total_measurement_noise(chain)
    else:
        a_total, _ = analog_feedforward_noise(chain, ff.eta_att, None, ff.att_occupancy)
    xi, fidelity = xi_and_fidelity(dxp2, a_total)
    a_j_max = solve_aj_max(epr, ch_eff, chain)
    return LinkBudget(
        delta_xi_prime2=dxp2,
        a_total=a_total,
        xi=xi,
        fidelity=fidelity,
        a_j_max=a_j_max,
        attenuation_applied=attenuation,
        feasible=a_j_max is not None,
        classical=dxp2 + a_total >= 1.0,
    )
