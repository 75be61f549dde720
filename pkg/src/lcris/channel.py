"""Array geometry, near-field steering, pathloss, and channel construction.

Conventions:
  * positions are length-3 numpy arrays in meters
  * steering phases use the outgoing-wave sign exp(-j*kappa*distance)
  * all dB quantities are converted to linear scale at the boundary;
    pathloss_gain returns an amplitude, its square is the power gain
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ArrayGeometry:
    """Element positions (n_elements x 3, meters) plus the carrier wavelength."""

    element_positions: np.ndarray
    carrier_wavelength: float

    @property
    def n_elements(self) -> int:
        return self.element_positions.shape[0]

    @property
    def center(self) -> np.ndarray:
        return self.element_positions.mean(axis=0)


@dataclass(frozen=True)
class PathlossParams:
    """rho*(d0/d)^exponent power-law model; rho is the power gain in dB at d0."""

    rho_db: float
    d0: float
    exponent: float

    def __post_init__(self):
        if self.d0 <= 0:
            raise ValueError(f"reference distance d0 must be positive, got {self.d0}")


@dataclass(frozen=True)
class ChannelInstance:
    """One draw of the channel matrices for a (user, eavesdropper) pair.

    Direct base-station links are blocked in this setup, so ``h_d_u`` and
    ``h_d_e`` are zero vectors; they are kept explicit so the effective
    channel composition stays general.
    """

    h_t: np.ndarray       # (N, N_t) base station -> RIS
    h_r_u: np.ndarray     # (N,) RIS -> user
    h_r_e: np.ndarray     # (N,) RIS -> eavesdropper
    h_d_u: np.ndarray     # (N_t,) blocked direct link, zeros
    h_d_e: np.ndarray     # (N_t,) blocked direct link, zeros
    noise_power: float    # linear watts

    def __post_init__(self):
        for name in ("h_t", "h_r_u", "h_r_e", "h_d_u", "h_d_e"):
            if not np.all(np.isfinite(getattr(self, name).view(float))):
                raise ValueError(f"non-finite entries in {name}")
        if self.noise_power <= 0:
            raise ValueError("noise_power must be positive")

    def h_r(self, which: str) -> np.ndarray:
        return self.h_r_u if which == "user" else self.h_r_e

    def h_d(self, which: str) -> np.ndarray:
        return self.h_d_u if which == "user" else self.h_d_e


def _check_which(which: str) -> None:
    if which not in ("user", "eavesdropper"):
        raise ValueError(f"which must be 'user' or 'eavesdropper', got {which!r}")


def build_upa(
    rows: int,
    cols: int,
    spacing: float,
    center: np.ndarray,
    axis_u: np.ndarray,
    axis_v: np.ndarray,
    carrier_wavelength: float,
) -> ArrayGeometry:
    """Uniform planar array on the plane spanned by two orthonormal axes.

    Element (i, j) sits at center + (i-(rows-1)/2)*spacing*axis_u
    + (j-(cols-1)/2)*spacing*axis_v, so the centroid equals ``center``.
    """
    if spacing <= 0:
        raise ValueError(f"element spacing must be positive, got {spacing}")
    axis_u = np.asarray(axis_u, dtype=float)
    axis_v = np.asarray(axis_v, dtype=float)
    for name, ax in (("axis_u", axis_u), ("axis_v", axis_v)):
        if abs(np.linalg.norm(ax) - 1.0) > 1e-9:
            raise ValueError(f"{name} must be unit-norm")
    if abs(float(axis_u @ axis_v)) > 1e-9:
        raise ValueError("array axes must be orthogonal")
    center = np.asarray(center, dtype=float)
    i = np.arange(rows) - (rows - 1) / 2.0
    j = np.arange(cols) - (cols - 1) / 2.0
    offsets = (
        i[:, None, None] * spacing * axis_u[None, None, :]
        + j[None, :, None] * spacing * axis_v[None, None, :]
    )
    positions = (center[None, None, :] + offsets).reshape(rows * cols, 3)
    return ArrayGeometry(element_positions=positions, carrier_wavelength=carrier_wavelength)


def point_array(point: np.ndarray, carrier_wavelength: float) -> ArrayGeometry:
    """Single-antenna 'array' at a point (receiver terminals)."""
    pos = np.asarray(point, dtype=float).reshape(1, 3)
    return ArrayGeometry(element_positions=pos, carrier_wavelength=carrier_wavelength)


def steering_vector(geom: ArrayGeometry, point: np.ndarray) -> np.ndarray:
    """Near-field steering vector toward ``point``, unit Euclidean norm.

    Entry n is exp(-j*kappa*||u_n - point||)/sqrt(N) with kappa = 2*pi/lambda;
    exact per-element distances keep the spherical wavefront curvature.
    """
    point = np.asarray(point, dtype=float)
    d = np.linalg.norm(geom.element_positions - point[None, :], axis=1)
    if np.any(d == 0.0):
        raise ValueError("steering point coincides with an array element")
    kappa = 2.0 * np.pi / geom.carrier_wavelength
    return np.exp(-1j * kappa * d) / np.sqrt(geom.n_elements)


def pathloss_gain(params: PathlossParams, d: float) -> float:
    """Amplitude gain sqrt(rho * (d0/d)^exponent); square it for power."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    power_gain = 10.0 ** (params.rho_db / 10.0) * (params.d0 / d) ** params.exponent
    return float(np.sqrt(power_gain))


def los_channel(
    tx_geom: ArrayGeometry,
    rx_geom: ArrayGeometry,
    pathloss: PathlossParams,
) -> np.ndarray:
    """Rank-one line-of-sight channel (n_rx x n_tx).

    H = c0 * a_rx(tx_center) * a_tx(rx_center)^H with unit-norm steering
    vectors, so the Frobenius norm equals |c0|. The amplitude c0 comes from
    the center-to-center distance; range differences across elements only
    enter through the steering phases.
    """
    d = float(np.linalg.norm(tx_geom.center - rx_geom.center))
    if d == 0.0:
        raise ValueError("transmit and receive arrays overlap")
    c0 = pathloss_gain(pathloss, d)
    a_rx = steering_vector(rx_geom, tx_geom.center)
    a_tx = steering_vector(tx_geom, rx_geom.center)
    return c0 * np.outer(a_rx, a_tx.conj())


def rician_channel(los: np.ndarray, k_factor: float, rng_seed: int) -> np.ndarray:
    """Rician draw: sqrt(K/(K+1))*LOS + sqrt(1/(K+1))*diffuse.

    The diffuse part has i.i.d. circularly-symmetric Gaussian entries scaled
    so its expected Frobenius-norm-squared matches the LOS part, keeping the
    total power budget independent of K. Deterministic for a given seed;
    K >= 1e12 short-circuits to the LOS matrix.
    """
    if k_factor < 0:
        raise ValueError(f"K-factor must be nonnegative, got {k_factor}")
    los = np.atleast_2d(np.asarray(los, dtype=complex))
    if k_factor >= 1e12:
        return los.copy()
    rng = np.random.default_rng(rng_seed)
    n_entries = los.size
    entry_var = float(np.linalg.norm(los) ** 2) / n_entries
    scale = np.sqrt(entry_var / 2.0)
    diffuse = scale * (
        rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape)
    )
    return np.sqrt(k_factor / (k_factor + 1.0)) * los + np.sqrt(1.0 / (k_factor + 1.0)) * diffuse


def reflection_vector(phases: np.ndarray) -> np.ndarray:
    """Unit-amplitude reflection coefficients exp(j*omega_n)."""
    return np.exp(1j * np.asarray(phases, dtype=float))


def effective_channel(inst: ChannelInstance, which: str, phases: np.ndarray) -> np.ndarray:
    """End-to-end channel h_eff (length N_t): h_eff^H = h_d^H + h_r^H Gamma H_t."""
    _check_which(which)
    phases = np.asarray(phases, dtype=float)
    h_r = inst.h_r(which)
    if phases.shape != h_r.shape:
        raise ValueError(
            f"phase vector length {phases.shape} does not match RIS size {h_r.shape}"
        )
    gamma = reflection_vector(phases)
    # (h_r^H Gamma H_t)^H = H_t^H Gamma^H h_r
    return inst.h_t.conj().T @ (gamma.conj() * h_r) + inst.h_d(which)


def quadratic_form(inst: ChannelInstance, which: str, q: np.ndarray) -> np.ndarray:
    """Hermitian PSD rank-one matrix A with s^H A s = SNR for s = exp(j*omega).

    A = u u^H / sigma_n^2 with u_n = h_r,n * conj((H_t q)_n), which makes
    s^H A s = |h_r^H Gamma H_t q|^2 / sigma_n^2 an identity in the phase
    vector. This lifts the SNR into a linear trace functional of S = s s^H.
    """
    _check_which(which)
    q = np.asarray(q, dtype=complex)
    if q.shape[0] != inst.h_t.shape[1]:
        raise ValueError(
            f"beamformer length {q.shape[0]} does not match {inst.h_t.shape[1]} tx antennas"
        )
    u = inst.h_r(which) * np.conj(inst.h_t @ q)
    return np.outer(u, u.conj()) / inst.noise_power
