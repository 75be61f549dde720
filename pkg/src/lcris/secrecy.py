"""SNR, secrecy rate, worst-case rates over position grids, and the
closed-form LOS beamformer / ratio-bound update used by the optimizer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channel import ArrayGeometry, ChannelInstance, effective_channel, steering_vector

_TRACE_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class PositionGrid:
    """Sampled candidate positions for one terminal area."""

    points: np.ndarray  # (P, 3)
    label: str = ""

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[1] != 3 or self.points.shape[0] == 0:
            raise ValueError("points must be a non-empty (P, 3) array")


@dataclass(frozen=True)
class Beamformer:
    q: np.ndarray
    power_budget: float

    def __post_init__(self):
        power = float(np.linalg.norm(self.q) ** 2)
        if power > self.power_budget * (1.0 + 1e-9):
            raise ValueError(
                f"beamformer power {power} exceeds budget {self.power_budget}"
            )


def snr(h_eff: np.ndarray, q: Beamformer | np.ndarray, noise_power: float) -> float:
    """|h_eff^H q|^2 / sigma_n^2."""
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    q_vec = q.q if isinstance(q, Beamformer) else np.asarray(q)
    if q_vec.shape != h_eff.shape:
        raise ValueError("h_eff and q dimensions do not match")
    return float(np.abs(np.vdot(h_eff, q_vec)) ** 2 / noise_power)


def secrecy_rate(snr_u: float, snr_e: float) -> float:
    """Clamped rate difference log2(1+SNR_u) - log2(1+SNR_e), in bits/s/Hz."""
    if snr_u < 0 or snr_e < 0:
        raise ValueError("SNRs must be nonnegative")
    return max(0.0, float(np.log2(1.0 + snr_u) - np.log2(1.0 + snr_e)))


def worst_case_secrecy_rate(
    inst_builder: Callable[[np.ndarray], ChannelInstance],
    phases: np.ndarray,
    q: Beamformer,
    grids: tuple[PositionGrid, PositionGrid],
) -> float:
    """Worst-case rate over the user and eavesdropper grids.

    The rate difference is separable in the two positions, so the pairwise
    minimum equals min over the user grid minus max over the eavesdropper
    grid (clamped at zero); this avoids the |P_u| x |P_e| pair loop.
    """
    user_grid, eve_grid = grids
    rate_u = min(
        np.log2(1.0 + _snr_at(inst_builder, p, "user", phases, q))
        for p in user_grid.points
    )
    rate_e = max(
        np.log2(1.0 + _snr_at(inst_builder, p, "eavesdropper", phases, q))
        for p in eve_grid.points
    )
    return max(0.0, float(rate_u - rate_e))


def _snr_at(inst_builder, point, which, phases, q) -> float:
    inst = inst_builder(point)
    h_eff = effective_channel(inst, which, phases)
    return snr(h_eff, q, inst.noise_power)


def los_beamformer(bs_geom: ArrayGeometry, p_ris: np.ndarray, p_t: float) -> Beamformer:
    """Full-power beam toward the RIS center: q = sqrt(P_t) * a_BS(p_RIS).

    With a rank-one LOS feeder channel and blocked direct links this is the
    optimal transmit beamformer regardless of the RIS phase configuration,
    so one beamformer computation suffices for the whole alternating loop.
    """
    if p_t <= 0:
        raise ValueError("transmit power must be positive")
    q = np.sqrt(p_t) * steering_vector(bs_geom, np.asarray(p_ris, dtype=float))
    return Beamformer(q=q, power_budget=p_t)


def gamma_update(
    s_matrix: np.ndarray,
    a_u_list: Sequence[np.ndarray],
    a_e_list: Sequence[np.ndarray],
) -> float:
    """Best feasible SNR-ratio bound for a fixed lifted matrix S.

    gamma = min over position pairs of (tr(A_u S) + 1) / (tr(A_e S) + 1).
    Both traces are real for Hermitian arguments; the ratio minimum is
    separable into min numerator over users and max denominator over
    eavesdroppers.
    """
    if len(a_u_list) == 0 or len(a_e_list) == 0:
        raise ValueError("quadratic-form lists must be non-empty")
    num = min(_real_trace(a, s_matrix) for a in a_u_list) + 1.0
    den = max(_real_trace(a, s_matrix) for a in a_e_list) + 1.0
    if den <= 0.0 or num <= 0.0:
        raise ValueError(
            "nonpositive trace term in gamma update; PSD inputs cannot produce "
            "this, check the channel data"
        )
    return num / den


def _real_trace(a: np.ndarray, s: np.ndarray) -> float:
    value = np.trace(a @ s)
    if abs(value.imag) > _TRACE_IMAG_TOL * max(1.0, abs(value.real)):
        raise ValueError(f"trace imaginary residue {value.imag} too large")
    return float(value.real)
