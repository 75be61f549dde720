"""Penalty-continuation phase design for a temperature-limited RIS.

The unit-modulus phase vector is lifted to a Hermitian PSD unit-diagonal
Gram matrix; the rank-one requirement is driven to zero by a growing
penalty on the nuclear-minus-spectral gap (linearized around the previous
iterate), the SNR-ratio bound gamma alternates with the matrix variable,
and the temperature-limited phase range enters as per-row linear trace
inequalities that are valid for budgets between pi and 2*pi.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelInstance, effective_channel, quadratic_form
from .lc import Regime, classify_range, max_phase_shift, TWO_PI
from .secrecy import Beamformer, gamma_update, los_beamformer, snr
from .sdp import SdpConfig, SdpProblem, SdpStatus, solve

logger = logging.getLogger(__name__)

_ETA_CAP = 1e8  # keeps the SDP objective scale within float conditioning


@dataclass(frozen=True)
class PhaseVector:
    """RIS phase shifts in radians, each entry in [0, 2*pi)."""

    omega: np.ndarray

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        if om.ndim != 1:
            raise ValueError("omega must be one-dimensional")
        if np.any(om < 0.0) or np.any(om >= TWO_PI):
            raise ValueError("phases must lie in [0, 2*pi)")
        object.__setattr__(self, "omega", om)


@dataclass(frozen=True)
class PenaltySchedule:
    """Continuation schedule for the rank-one penalty and gamma loop."""

    eta0: float = 0.01
    eta_growth: float = 5.0
    max_inner: int = 12
    max_outer: int = 4
    tol_inner: float = 0.01   # on ||S_i - S_{i-1}||_F^2
    tol_gamma: float = 0.1    # on |log2 gamma_j - log2 gamma_{j-1}|
    gamma0: float = 1e3
    rotation_steps: int = 720

    def __post_init__(self):
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        if self.eta_growth <= 1:
            raise ValueError("eta_growth must exceed 1")


class OptStatus(str, enum.Enum):
    CONVERGED = "converged"
    ITERATION_CAP = "iteration_cap"


@dataclass(frozen=True)
class OptStep:
    """One inner-iteration record of the continuation loop."""

    outer: int
    inner: int
    gap: float          # nuclear norm minus spectral norm of the iterate
    n_false: int        # phases over budget before clamping
    gamma: float        # ratio bound in effect during this solve
    sdp_status: SdpStatus
    sdp_iterations: int


@dataclass
class SolveReport:
    final_phases: PhaseVector
    final_gamma: float
    secrecy_rate_bits: float
    status: OptStatus
    n_false: int
    steps: list[OptStep] = field(default_factory=list)
    gamma_trace: list[float] = field(default_factory=list)

    @property
    def gap_trace(self) -> list[float]:
        return [s.gap for s in self.steps]

    @property
    def n_false_trace(self) -> list[int]:
        return [s.n_false for s in self.steps]


def spectral_linearization(s_prev: np.ndarray) -> tuple[np.ndarray, float]:
    """Affine minorant of the spectral norm around a Hermitian PSD point.

    Returns (G, c) with G the rank-one gradient from the principal
    eigenvector and c the constant, so that ||S||_2 >= c + Re tr(G S) for
    every Hermitian S. Eigenvalue ties resolve deterministically through
    the eigensolver's ascending order (the last column is used).
    """
    s_prev = 0.5 * (s_prev + s_prev.conj().T)
    eigvals, eigvecs = np.linalg.eigh(s_prev)
    lam = eigvecs[:, -1]
    grad = np.outer(lam, lam.conj())
    spectral = float(np.abs(eigvals).max())
    const = spectral - float(np.real(lam.conj() @ s_prev @ lam))
    return grad, const


def phase_range_constraints(omega_max: float, n: int) -> list[tuple[np.ndarray, float]]:
    """Per-row trace inequalities enforcing phases within [0, omega_max].

    Valid for pi < omega_max < 2*pi, where the scalar test
    cos(w) + tan(omega_max/2) sin(w) <= 1 holds iff w <= omega_max; the row
    sums of the lifted matrix stand in for exp(j*w_n) after normalization
    by the uniform-phase mean. A full-range budget returns no constraints.
    Inequalities are returned in the solver's ``Re tr(B S) >= b`` form.
    """
    rc = classify_range(omega_max)
    if rc.regime is Regime.FULL:
        return []
    if rc.regime is Regime.UNSUPPORTED:
        raise ValueError(
            f"phase budget {omega_max} rad is at or below pi; the range "
            "reformulation is invalid there"
        )
    zeta = 1j * omega_max / (n * (1.0 - np.exp(-1j * omega_max)))
    # Re(z) + tan(w/2) Im(z) == Re((1 - j tan(w/2)) z)
    coeff = (1.0 - 1j * np.tan(omega_max / 2.0)) * zeta
    out = []
    for row in range(n):
        m = np.zeros((n, n), dtype=complex)
        m[:, row] = coeff  # tr(M S) = coeff * sum_i S[row, i]
        herm = 0.5 * (m + m.conj().T)
        out.append((-herm, -1.0))
    return out


def assemble_penalized_sdp(
    a_u_list: list[np.ndarray],
    a_e_list: list[np.ndarray],
    gamma: float,
    s_prev: np.ndarray,
    eta: float,
    omega_max: float,
) -> SdpProblem:
    """Convex subproblem for fixed gamma and penalty weight.

    Objective: the nuclear norm of a unit-diagonal PSD matrix is tr(S), so
    the penalized gap reduces to the linear functional eta*(G - I) plus a
    constant; gamma itself is constant here and lands in the offset. One
    ratio inequality is generated per (user, eavesdropper) grid pair, plus
    the phase-range rows when the budget is below 2*pi.
    """
    if not a_u_list or not a_e_list:
        raise ValueError("quadratic-form lists must be non-empty")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    n = s_prev.shape[0]
    grad, const = spectral_linearization(s_prev)
    objective = eta * (grad - np.eye(n))
    offset = gamma + eta * const
    ineqs = [
        (a_u - gamma * a_e, gamma - 1.0) for a_u in a_u_list for a_e in a_e_list
    ]
    ineqs.extend(phase_range_constraints(omega_max, n))
    return SdpProblem(dim=n, objective=objective, ineqs=ineqs, unit_diagonal=True, offset=offset)


def extract_phases(
    s_matrix: np.ndarray,
    omega_max: float,
    rotation_steps: int = 720,
) -> tuple[PhaseVector, int]:
    """Recover a feasible phase vector from a (near) rank-one lifted matrix.

    The principal eigenvector is normalized entrywise to unit modulus
    (zero-magnitude entries get phase 0). Because a global rotation of the
    eigenvector is free, a grid of ``rotation_steps`` rotations is searched
    for the one minimizing the count of entries above the budget; that
    count is returned as ``n_false`` before the remaining violators are
    clamped to the nearer of 0 and omega_max. Garbage in, garbage out: a
    far-from-rank-one input still yields a valid phase vector.
    """
    s_matrix = 0.5 * (s_matrix + s_matrix.conj().T)
    _, eigvecs = np.linalg.eigh(s_matrix)
    vec = eigvecs[:, -1]
    mags = np.abs(vec)
    unit = np.where(mags > 0.0, vec / np.where(mags > 0.0, mags, 1.0), 1.0 + 0j)
    base = np.mod(np.angle(unit), TWO_PI)
    if omega_max >= TWO_PI - 1e-12:
        return PhaseVector(omega=base), 0

    shifts = TWO_PI * np.arange(rotation_steps) / rotation_steps
    rotated = np.mod(base[None, :] + shifts[:, None], TWO_PI)
    counts = (rotated > omega_max + 1e-12).sum(axis=1)
    best = int(np.argmin(counts))
    n_false = int(counts[best])
    omega = rotated[best]
    violators = omega > omega_max + 1e-12
    if np.any(violators):
        to_cap = (omega[violators] - omega_max) <= (TWO_PI - omega[violators])
        omega[violators] = np.where(to_cap, omega_max, 0.0)
    return PhaseVector(omega=omega), n_false


def _design_instances(scn) -> tuple[list[ChannelInstance], list[ChannelInstance], object]:
    from . import scenario as sc

    channels = sc.design_channels(scn)
    insts_u = [channels.instance_user(i) for i in range(channels.h_r_user.shape[0])]
    insts_e = [channels.instance_eve(i) for i in range(channels.h_r_eve.shape[0])]
    return insts_u, insts_e, channels


def worst_case_rates(
    insts_u: list[ChannelInstance],
    insts_e: list[ChannelInstance],
    phases: PhaseVector,
    q: Beamformer,
) -> tuple[float, float]:
    """(min user rate, max eavesdropper rate) in bits/s/Hz over the grids."""
    rate_u = min(
        np.log2(1.0 + snr(effective_channel(inst, "user", phases.omega), q, inst.noise_power))
        for inst in insts_u
    )
    rate_e = max(
        np.log2(1.0 + snr(effective_channel(inst, "eavesdropper", phases.omega), q, inst.noise_power))
        for inst in insts_e
    )
    return float(rate_u), float(rate_e)


def optimize_phases(
    scn,
    schedule: PenaltySchedule | None = None,
    sdp_cfg: SdpConfig | None = None,
    seed: int | None = None,
    _omega_max_override: float | None = None,
) -> SolveReport:
    """Run the full continuation loop on a scenario's design (LOS) channels.

    With blocked direct links the optimal transmit beamformer is independent
    of the RIS phases, so it is computed once up front and the alternating
    loop runs over (gamma, S) only. The inner loop grows the rank-one
    penalty and warm-starts each SDP from the previous iterate; eta and S
    carry across outer rounds. The reported secrecy rate is evaluated
    directly from the extracted phases, not read off gamma.
    """
    from . import scenario as sc

    schedule = schedule or scn.schedule
    sdp_cfg = sdp_cfg or scn.sdp
    seed = scn.seed if seed is None else seed

    omega_true = max_phase_shift(scn.lc, scn.temperature_c)
    omega_design = omega_true if _omega_max_override is None else _omega_max_override
    rc = classify_range(omega_design)
    if rc.regime is Regime.UNSUPPORTED:
        raise ValueError(
            f"phase budget {omega_design:.4f} rad at T={scn.temperature_c} degC "
            "is at or below pi; refusing to optimize"
        )

    insts_u, insts_e, channels = _design_instances(scn)
    q = los_beamformer(sc.bs_geometry(scn), np.zeros(3), sc.tx_power_w(scn))
    a_u_list = [quadratic_form(inst, "user", q.q) for inst in insts_u]
    a_e_list = [quadratic_form(inst, "eavesdropper", q.q) for inst in insts_e]

    n = channels.h_t.shape[0]
    rng = np.random.default_rng(seed)
    s0 = np.exp(1j * omega_design * rng.random(n))
    s_matrix = np.outer(s0, s0.conj())

    gamma = schedule.gamma0
    gamma_trace = [gamma]
    eta = schedule.eta0
    steps: list[OptStep] = []
    status = OptStatus.ITERATION_CAP

    for outer in range(1, schedule.max_outer + 1):
        for inner in range(1, schedule.max_inner + 1):
            problem = assemble_penalized_sdp(
                a_u_list, a_e_list, gamma, s_matrix, eta, omega_design
            )
            sol = solve(problem, sdp_cfg, initial=s_matrix)
            eigs = np.linalg.eigvalsh(sol.S)
            gap = float(np.abs(eigs).sum() - np.abs(eigs).max())
            _, n_false_i = extract_phases(
                sol.S, omega_design, rotation_steps=schedule.rotation_steps
            )
            steps.append(
                OptStep(outer, inner, gap, n_false_i, gamma, sol.status, sol.iterations)
            )
            delta = float(np.linalg.norm(sol.S - s_matrix) ** 2)
            s_matrix = sol.S
            eta = min(eta * schedule.eta_growth, _ETA_CAP)
            logger.debug(
                "outer %d inner %d: gap=%.3g n_false=%d delta=%.3g sdp=%s/%d",
                outer, inner, gap, n_false_i, delta, sol.status.value, sol.iterations,
            )
            if delta < schedule.tol_inner:
                break

        gamma_new = gamma_update(s_matrix, a_u_list, a_e_list)
        gamma_trace.append(gamma_new)
        converged = abs(np.log2(gamma_new) - np.log2(gamma)) < schedule.tol_gamma
        gamma = gamma_new
        if converged:
            status = OptStatus.CONVERGED
            break

    phases, n_false = extract_phases(
        s_matrix, omega_design, rotation_steps=schedule.rotation_steps
    )
    rate_u, rate_e = worst_case_rates(insts_u, insts_e, phases, q)
    return SolveReport(
        final_phases=phases,
        final_gamma=gamma,
        secrecy_rate_bits=max(0.0, rate_u - rate_e),
        status=status,
        n_false=n_false,
        steps=steps,
        gamma_trace=gamma_trace,
    )


def neglect_baseline(
    scn,
    schedule: PenaltySchedule | None = None,
    sdp_cfg: SdpConfig | None = None,
    seed: int | None = None,
) -> SolveReport:
    """Temperature-neglecting baseline: design with the full 2*pi range,
    then clamp every phase above the physical budget omega_max(T) to the
    budget and evaluate with the clamped phases."""
    omega_true = max_phase_shift(scn.lc, scn.temperature_c)
    if classify_range(omega_true).regime is Regime.UNSUPPORTED:
        raise ValueError(
            f"phase budget {omega_true:.4f} rad at T={scn.temperature_c} degC "
            "is at or below pi; refusing to optimize"
        )
    report = optimize_phases(
        scn, schedule=schedule, sdp_cfg=sdp_cfg, seed=seed, _omega_max_override=TWO_PI
    )
    if omega_true >= TWO_PI:
        return report

    omega = report.final_phases.omega.copy()
    omega[omega > omega_true] = omega_true
    phases = PhaseVector(omega=omega)
    insts_u, insts_e, _ = _design_instances(scn)
    from . import scenario as sc

    q = los_beamformer(sc.bs_geometry(scn), np.zeros(3), sc.tx_power_w(scn))
    rate_u, rate_e = worst_case_rates(insts_u, insts_e, phases, q)
    return replace(
        report,
        final_phases=phases,
        secrecy_rate_bits=max(0.0, rate_u - rate_e),
    )
