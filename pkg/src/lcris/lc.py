"""Liquid-crystal phase-shifter model: temperature -> achievable phase range.

The birefringence of a nematic LC collapses as the cell approaches its
clearing temperature, which shrinks the differential phase shift a unit
cell can apply. Everything downstream only needs the resulting phase
budget ``omega_max(T)`` and its regime classification.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

_CELSIUS_TO_KELVIN = 273.15
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class LcParams:
    """Material constants of the LC mixture.

    Temperatures are in degrees Celsius. ``delta_n0`` (birefringence at the
    reference temperature) and ``cell_length_over_lambda`` are only needed
    by the raw Haller helper; the normalized phase-budget model does not
    use them.
    """

    beta: float
    clearing_temp_c: float
    reference_temp_c: float
    delta_n0: float | None = None
    cell_length_over_lambda: float | None = None

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.reference_temp_c < self.clearing_temp_c:
            raise ValueError(
                "reference temperature must be below the clearing temperature "
                f"(T_r={self.reference_temp_c}, T_c={self.clearing_temp_c})"
            )


class Regime(str, enum.Enum):
    """Constraint regime implied by a phase budget."""

    FULL = "full"                # omega_max >= 2*pi: range constraint vacuous
    CONSTRAINED = "constrained"  # pi < omega_max < 2*pi: constraint active
    UNSUPPORTED = "unsupported"  # omega_max <= pi: optimizer must refuse


@dataclass(frozen=True)
class RangeClass:
    regime: Regime
    omega_max: float


def _check_below_clearing(lc: LcParams, t_celsius: float) -> None:
    if t_celsius >= lc.clearing_temp_c:
        raise ValueError(
            f"temperature {t_celsius} degC is at or above the clearing "
            f"temperature {lc.clearing_temp_c} degC; the birefringence model "
            "is undefined there"
        )


def haller_birefringence(lc: LcParams, t_celsius: float) -> float:
    """Haller approximation Delta_n = Delta_n0 * (1 - T/T_c)^beta.

    The ratio is evaluated on the Kelvin scale; this is the raw material
    model, exposed mostly for cross-checks against the normalized phase
    budget. Requires ``lc.delta_n0``.
    """
    _check_below_clearing(lc, t_celsius)
    if lc.delta_n0 is None:
        raise ValueError("LcParams.delta_n0 is required by haller_birefringence")
    t_k = t_celsius + _CELSIUS_TO_KELVIN
    tc_k = lc.clearing_temp_c + _CELSIUS_TO_KELVIN
    return lc.delta_n0 * (1.0 - t_k / tc_k) ** lc.beta


def max_phase_shift(lc: LcParams, t_celsius: float) -> float:
    """Phase budget omega_max(T) = 2*pi * ((T_c - T)/(T_c - T_r))^beta.

    Normalized so the budget is exactly 2*pi at the reference temperature;
    temperature differences make the expression unit-safe in Celsius.
    Strictly decreasing in T, exceeding 2*pi below the reference point.
    """
    _check_below_clearing(lc, t_celsius)
    ratio = (lc.clearing_temp_c - t_celsius) / (lc.clearing_temp_c - lc.reference_temp_c)
    return TWO_PI * ratio**lc.beta


def classify_range(omega_max: float) -> RangeClass:
    """Classify a phase budget into its constraint regime.

    Full range means the downstream phase-range constraints are dropped
    entirely; unsupported budgets (<= pi) must be rejected because the
    convex range reformulation is only valid on (pi, 2*pi).
    """
    if omega_max <= 0.0:
        raise ValueError(f"omega_max must be positive, got {omega_max}")
    if omega_max >= TWO_PI:
        regime = Regime.FULL
    elif omega_max > np.pi:
        regime = Regime.CONSTRAINED
    else:
        regime = Regime.UNSUPPORTED
    return RangeClass(regime=regime, omega_max=float(omega_max))
