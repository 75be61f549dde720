"""Scenario configuration: JSON loading with named defaults, validation,
canonical hashing, and construction of geometries and channels.

A scenario document is a single JSON object. The key ``defaults`` may name
a built-in profile (``paper``: the full-size reference setup; ``desk``: the
same setup with a 10x5 RIS and 2x2 grids so the whole pipeline runs in
minutes); all other keys deep-merge over the chosen profile. dB and dBm
quantities carry explicit unit suffixes and are converted to linear watts
here, at the boundary — internal math is linear-scale only.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .channel import (
    ArrayGeometry,
    ChannelInstance,
    PathlossParams,
    SPEED_OF_LIGHT,
    build_upa,
    los_channel,
    point_array,
    rician_channel,
)
from .lc import LcParams
from .optimizer import PenaltySchedule
from .sdp import SdpConfig
from .secrecy import PositionGrid

EVAL_MODES = ("los_only", "rician")
ORIENTATIONS = ("horizontal", "vertical")


@dataclass(frozen=True)
class UpaSpec:
    center_m: tuple[float, float, float]
    rows: int
    cols: int
    spacing_wavelengths: float = 0.5
    axis_u: tuple[float, float, float] = (0.0, 1.0, 0.0)
    axis_v: tuple[float, float, float] = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class BoxSpec:
    """Axis-aligned box in the z = const plane, with its sampling lattice.

    The lattice is uniform and includes the box corners; a single sample
    along an axis sits at the box center.
    """

    x_m: tuple[float, float]
    y_m: tuple[float, float]
    z_m: float
    grid: tuple[int, int] = (3, 3)


@dataclass(frozen=True)
class LinkParams:
    rho_db: float
    d0_m: float
    exponent: float
    k_factor: float

    def pathloss(self) -> PathlossParams:
        return PathlossParams(rho_db=self.rho_db, d0=self.d0_m, exponent=self.exponent)


@dataclass(frozen=True)
class Links:
    bs_user: LinkParams
    bs_ris: LinkParams
    ris_user: LinkParams


@dataclass(frozen=True)
class HeatmapSpec:
    x_m: tuple[float, float]
    y_m: tuple[float, float]
    z_m: float
    resolution_m: float


@dataclass(frozen=True)
class Scenario:
    bs: UpaSpec
    ris: UpaSpec
    user_box: BoxSpec
    eve_box: BoxSpec
    orientation: str
    eve_gap_m: float
    carrier_frequency_hz: float
    bandwidth_hz: float
    noise_psd_dbm_hz: float
    noise_figure_db: float
    tx_power_dbm: float
    links: Links
    lc: LcParams
    temperature_c: float
    seed: int
    eval_channel_mode: str
    schedule: PenaltySchedule
    sdp: SdpConfig
    heatmap: HeatmapSpec


def paper_defaults() -> dict:
    """Reference configuration of the full-size simulation setup."""
    return {
        "bs": {"center_m": [30.0, 0.0, 5.0], "rows": 4, "cols": 4,
               "spacing_wavelengths": 0.5},
        "ris": {"center_m": [0.0, 0.0, 0.0], "rows": 20, "cols": 10,
                "spacing_wavelengths": 0.5},
        "user_box": {"x_m": [4.5, 5.5], "y_m": [-0.5, 0.5], "z_m": -5.0,
                     "grid": [3, 3]},
        "eve": {"orientation": "horizontal", "gap_m": 1.5, "grid": [3, 3]},
        "carrier_frequency_hz": 28.0e9,
        "bandwidth_hz": 20.0e6,
        "noise_psd_dBm_per_Hz": -174.0,
        "noise_figure_dB": 6.0,
        "tx_power_dBm": 40.0,
        "links": {
            "bs_user": {"rho_dB": -61.0, "d0_m": 1.0, "exponent": 2.0, "k_factor": 0.0},
            "bs_ris": {"rho_dB": -61.0, "d0_m": 1.0, "exponent": 2.0, "k_factor": 10.0},
            "ris_user": {"rho_dB": -61.0, "d0_m": 1.0, "exponent": 2.0, "k_factor": 10.0},
        },
        "lc": {"beta": 0.25, "clearing_temp_C": 127.0, "reference_temp_C": 17.0},
        "temperature_C": 57.0,
        "seed": 1,
        "eval_channel_mode": "los_only",
        "schedule": {"eta0": 0.01, "eta_growth": 5.0, "max_inner": 12,
                     "max_outer": 4, "tol_inner": 0.01, "tol_gamma": 0.1,
                     "gamma0": 1.0e3, "rotation_steps": 720},
        "sdp": {"tol_primal": 1.0e-4, "tol_psd": 1.0e-6, "tol_eq": 1.0e-6,
                "max_iterations": 20000, "step_parameter": 1.0},
        "heatmap": {"x_m": [2.0, 8.0], "y_m": [-4.0, 4.0], "z_m": -5.0,
                    "resolution_m": 0.1},
    }


def desk_defaults() -> dict:
    """Reduced profile (10x5 RIS, 2x2 box grids) for fast end-to-end runs."""
    d = paper_defaults()
    d["ris"]["rows"] = 10
    d["ris"]["cols"] = 5
    d["user_box"]["grid"] = [2, 2]
    d["eve"]["grid"] = [2, 2]
    return d


_PROFILES = {"paper": paper_defaults, "desk": desk_defaults}


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_scenario(path: str | Path) -> Scenario:
    """Read, resolve, and validate a scenario JSON document."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text() or "{}")
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: scenario document must be a JSON object")
    return scenario_from_dict(raw)


def scenario_from_dict(doc: dict) -> Scenario:
    doc = dict(doc)
    profile = doc.pop("defaults", None)
    if profile is not None:
        if profile not in _PROFILES:
            raise ValueError(
                f"unknown defaults profile {profile!r}; choose from {sorted(_PROFILES)}"
            )
        doc = _deep_merge(_PROFILES[profile](), doc)
    return _build_scenario(doc)


def _build_scenario(d: dict) -> Scenario:
    errors: list[str] = []

    def need(path_keys: str, cast=float):
        node = d
        for key in path_keys.split("."):
            if not isinstance(node, dict) or key not in node:
                errors.append(f"missing field: {path_keys}")
                return None
            node = node[key]
        try:
            return cast(node)
        except (TypeError, ValueError):
            errors.append(f"field {path_keys} has invalid value {node!r}")
            return None

    def pair(path_keys: str):
        v = need(path_keys, cast=list)
        if v is None:
            return None
        if len(v) != 2:
            errors.append(f"field {path_keys} must have exactly 2 entries")
            return None
        return (float(v[0]), float(v[1]))

    def triple(path_keys: str):
        v = need(path_keys, cast=list)
        if v is None:
            return None
        if len(v) != 3:
            errors.append(f"field {path_keys} must have exactly 3 entries")
            return None
        return tuple(float(x) for x in v)

    def int_pair(path_keys: str):
        v = pair(path_keys)
        return None if v is None else (int(v[0]), int(v[1]))

    bs = _upa_from(d.get("bs", {}), "bs", need, triple, errors)
    ris = _upa_from(d.get("ris", {}), "ris", need, triple, errors)

    user_box = None
    ub_x, ub_y = pair("user_box.x_m"), pair("user_box.y_m")
    ub_z, ub_grid = need("user_box.z_m"), int_pair("user_box.grid")
    if None not in (ub_x, ub_y, ub_z, ub_grid):
        user_box = BoxSpec(x_m=ub_x, y_m=ub_y, z_m=ub_z, grid=ub_grid)
        if ub_x[1] <= ub_x[0] or ub_y[1] <= ub_y[0]:
            errors.append("user_box must be non-degenerate (x_m/y_m ranges ordered)")
        if min(ub_grid) < 1:
            errors.append("user_box.grid entries must be >= 1")

    orientation = need("eve.orientation", cast=str)
    gap = need("eve.gap_m")
    eve_grid = int_pair("eve.grid")
    if orientation is not None and orientation not in ORIENTATIONS:
        errors.append(f"eve.orientation must be one of {ORIENTATIONS}, got {orientation!r}")
    if gap is not None and gap <= 0:
        errors.append("eve.gap_m must be positive")

    carrier = need("carrier_frequency_hz")
    bandwidth = need("bandwidth_hz")
    if carrier is not None and carrier <= 0:
        errors.append("carrier_frequency_hz must be positive")
    if bandwidth is not None and bandwidth <= 0:
        errors.append("bandwidth_hz must be positive")
    noise_psd = need("noise_psd_dBm_per_Hz")
    noise_figure = need("noise_figure_dB")
    tx_power = need("tx_power_dBm")

    links = {}
    for link in ("bs_user", "bs_ris", "ris_user"):
        rho = need(f"links.{link}.rho_dB")
        d0 = need(f"links.{link}.d0_m")
        exponent = need(f"links.{link}.exponent")
        k = need(f"links.{link}.k_factor")
        if None not in (rho, d0, exponent, k):
            if d0 <= 0:
                errors.append(f"links.{link}.d0_m must be positive")
            if k < 0:
                errors.append(f"links.{link}.k_factor must be nonnegative")
            links[link] = LinkParams(rho_db=rho, d0_m=d0, exponent=exponent, k_factor=k)

    beta = need("lc.beta")
    t_c = need("lc.clearing_temp_C")
    t_r = need("lc.reference_temp_C")
    lc = None
    if None not in (beta, t_c, t_r):
        try:
            lc = LcParams(beta=beta, clearing_temp_c=t_c, reference_temp_c=t_r)
        except ValueError as exc:
            errors.append(f"lc: {exc}")

    temperature = need("temperature_C")
    if temperature is not None and t_c is not None and temperature >= t_c:
        errors.append(
            f"temperature_C={temperature} violates the T < T_c invariant "
            f"(clearing temperature {t_c} degC)"
        )

    seed = need("seed", cast=int)
    eval_mode = need("eval_channel_mode", cast=str)
    if eval_mode is not None and eval_mode not in EVAL_MODES:
        errors.append(f"eval_channel_mode must be one of {EVAL_MODES}, got {eval_mode!r}")

    schedule = None
    sched_d = d.get("schedule", {})
    try:
        schedule = PenaltySchedule(
            eta0=float(sched_d.get("eta0", 0.01)),
            eta_growth=float(sched_d.get("eta_growth", 5.0)),
            max_inner=int(sched_d.get("max_inner", 12)),
            max_outer=int(sched_d.get("max_outer", 4)),
            tol_inner=float(sched_d.get("tol_inner", 0.01)),
            tol_gamma=float(sched_d.get("tol_gamma", 0.1)),
            gamma0=float(sched_d.get("gamma0", 1e3)),
            rotation_steps=int(sched_d.get("rotation_steps", 720)),
        )
    except (TypeError, ValueError) as exc:
        errors.append(f"schedule: {exc}")

    sdp_cfg = None
    sdp_d = d.get("sdp", {})
    try:
        sdp_cfg = SdpConfig(
            tol_primal=float(sdp_d.get("tol_primal", 1e-4)),
            tol_psd=float(sdp_d.get("tol_psd", 1e-6)),
            tol_eq=float(sdp_d.get("tol_eq", 1e-6)),
            max_iterations=int(sdp_d.get("max_iterations", 20000)),
            step_parameter=float(sdp_d.get("step_parameter", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        errors.append(f"sdp: {exc}")

    hm_x, hm_y = pair("heatmap.x_m"), pair("heatmap.y_m")
    hm_z, hm_res = need("heatmap.z_m"), need("heatmap.resolution_m")
    heatmap = None
    if None not in (hm_x, hm_y, hm_z, hm_res):
        if hm_res <= 0:
            errors.append("heatmap.resolution_m must be positive")
        heatmap = HeatmapSpec(x_m=hm_x, y_m=hm_y, z_m=hm_z, resolution_m=hm_res)

    if errors:
        raise ValueError("invalid scenario:\n  " + "\n  ".join(errors))

    eve_box = _resolve_eve_box(d.get("eve", {}), user_box, orientation, gap, eve_grid)
    return Scenario(
        bs=bs, ris=ris, user_box=user_box, eve_box=eve_box,
        orientation=orientation, eve_gap_m=gap,
        carrier_frequency_hz=carrier, bandwidth_hz=bandwidth,
        noise_psd_dbm_hz=noise_psd, noise_figure_db=noise_figure,
        tx_power_dbm=tx_power, links=Links(**links), lc=lc,
        temperature_c=temperature, seed=seed, eval_channel_mode=eval_mode,
        schedule=schedule, sdp=sdp_cfg, heatmap=heatmap,
    )


def _upa_from(node: dict, name: str, need, triple, errors) -> UpaSpec | None:
    center = triple(f"{name}.center_m")
    rows = need(f"{name}.rows", cast=int)
    cols = need(f"{name}.cols", cast=int)
    spacing = need(f"{name}.spacing_wavelengths")
    axis_u = tuple(node.get("axis_u", (0.0, 1.0, 0.0)))
    axis_v = tuple(node.get("axis_v", (0.0, 0.0, 1.0)))
    if None in (center, rows, cols, spacing):
        return None
    if rows < 1 or cols < 1:
        errors.append(f"{name}: rows and cols must be >= 1")
    if spacing <= 0:
        errors.append(f"{name}.spacing_wavelengths must be positive")
    return UpaSpec(center_m=center, rows=rows, cols=cols,
                   spacing_wavelengths=spacing, axis_u=axis_u, axis_v=axis_v)


def _resolve_eve_box(eve_d: dict, user_box: BoxSpec, orientation: str,
                     gap: float, grid: tuple[int, int]) -> BoxSpec:
    """Place the eavesdropper box relative to the user box.

    Horizontal: same x-range, shifted to lower y; vertical: same y-range,
    shifted to lower x (toward the RIS). The shift leaves a nearest-point
    separation of ``gap`` meters. Explicit x_m/y_m/z_m keys override the
    placement entirely.
    """
    if "x_m" in eve_d or "y_m" in eve_d:
        return BoxSpec(
            x_m=tuple(float(v) for v in eve_d["x_m"]),
            y_m=tuple(float(v) for v in eve_d["y_m"]),
            z_m=float(eve_d.get("z_m", user_box.z_m)),
            grid=grid,
        )
    if orientation == "horizontal":
        width = user_box.y_m[1] - user_box.y_m[0]
        y = (user_box.y_m[0] - gap - width, user_box.y_m[0] - gap)
        return BoxSpec(x_m=user_box.x_m, y_m=y, z_m=user_box.z_m, grid=grid)
    width = user_box.x_m[1] - user_box.x_m[0]
    x = (user_box.x_m[0] - gap - width, user_box.x_m[0] - gap)
    return BoxSpec(x_m=x, y_m=user_box.y_m, z_m=user_box.z_m, grid=grid)


def with_eve_placement(scn: Scenario, orientation: str, gap: float) -> Scenario:
    """Same scenario with the eavesdropper box re-derived for a new gap."""
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")
    if gap <= 0:
        raise ValueError("gap must be positive")
    eve_box = _resolve_eve_box({}, scn.user_box, orientation, gap, scn.eve_box.grid)
    return replace(scn, eve_box=eve_box, orientation=orientation, eve_gap_m=gap)


# --- derived quantities -------------------------------------------------

def resolved_dict(scn: Scenario) -> dict:
    return asdict(scn)


def scenario_hash(scn: Scenario) -> str:
    blob = json.dumps(resolved_dict(scn), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def wavelength(scn: Scenario) -> float:
    return SPEED_OF_LIGHT / scn.carrier_frequency_hz


def noise_power_w(scn: Scenario) -> float:
    """sigma_n^2 = W * N0 * Nf, in linear watts."""
    dbm = scn.noise_psd_dbm_hz + 10.0 * np.log10(scn.bandwidth_hz) + scn.noise_figure_db
    return 10.0 ** ((dbm - 30.0) / 10.0)


def tx_power_w(scn: Scenario) -> float:
    return 10.0 ** ((scn.tx_power_dbm - 30.0) / 10.0)


def _upa_geometry(spec: UpaSpec, lam: float) -> ArrayGeometry:
    return build_upa(
        rows=spec.rows,
        cols=spec.cols,
        spacing=spec.spacing_wavelengths * lam,
        center=np.array(spec.center_m),
        axis_u=np.array(spec.axis_u),
        axis_v=np.array(spec.axis_v),
        carrier_wavelength=lam,
    )


def bs_geometry(scn: Scenario) -> ArrayGeometry:
    return _upa_geometry(scn.bs, wavelength(scn))


def ris_geometry(scn: Scenario) -> ArrayGeometry:
    return _upa_geometry(scn.ris, wavelength(scn))


def grid_points(box: BoxSpec) -> np.ndarray:
    """Uniform lattice over the box, corners included (center when n=1)."""
    def axis(lo: float, hi: float, n: int) -> np.ndarray:
        return np.array([(lo + hi) / 2.0]) if n == 1 else np.linspace(lo, hi, n)

    xs = axis(*box.x_m, box.grid[0])
    ys = axis(*box.y_m, box.grid[1])
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel(), np.full(gx.size, box.z_m)])
    return pts


def user_grid(scn: Scenario) -> PositionGrid:
    return PositionGrid(points=grid_points(scn.user_box), label="user_area")


def eve_grid(scn: Scenario) -> PositionGrid:
    return PositionGrid(points=grid_points(scn.eve_box), label="eve_area")


# --- channels ------------------------------------------------------------

@dataclass(frozen=True)
class DesignChannels:
    """Pure-LOS channels the optimizer designs against."""

    h_t: np.ndarray        # (N, N_t)
    h_r_user: np.ndarray   # (P_u, N)
    h_r_eve: np.ndarray    # (P_e, N)
    user_points: np.ndarray
    eve_points: np.ndarray
    noise_power: float

    def _instance(self, h_u: np.ndarray, h_e: np.ndarray) -> ChannelInstance:
        n_t = self.h_t.shape[1]
        zeros = np.zeros(n_t, dtype=complex)
        return ChannelInstance(
            h_t=self.h_t, h_r_u=h_u, h_r_e=h_e,
            h_d_u=zeros, h_d_e=zeros, noise_power=self.noise_power,
        )

    def instance_user(self, i: int) -> ChannelInstance:
        return self._instance(self.h_r_user[i], self.h_r_eve[0])

    def instance_eve(self, i: int) -> ChannelInstance:
        return self._instance(self.h_r_user[0], self.h_r_eve[i])


def _los_ris_point_channel(ris_geom: ArrayGeometry, point: np.ndarray,
                           pl: PathlossParams) -> np.ndarray:
    row = los_channel(ris_geom, point_array(point, ris_geom.carrier_wavelength), pl)[0]
    return row.conj()  # h_r such that h_r^H is the RIS -> point row


def design_channels(scn: Scenario) -> DesignChannels:
    lam = wavelength(scn)
    bs_g = _upa_geometry(scn.bs, lam)
    ris_g = _upa_geometry(scn.ris, lam)
    h_t = los_channel(bs_g, ris_g, scn.links.bs_ris.pathloss())
    pl_ru = scn.links.ris_user.pathloss()
    u_pts = grid_points(scn.user_box)
    e_pts = grid_points(scn.eve_box)
    h_r_user = np.stack([_los_ris_point_channel(ris_g, p, pl_ru) for p in u_pts])
    h_r_eve = np.stack([_los_ris_point_channel(ris_g, p, pl_ru) for p in e_pts])
    return DesignChannels(
        h_t=h_t, h_r_user=h_r_user, h_r_eve=h_r_eve,
        user_points=u_pts, eve_points=e_pts, noise_power=noise_power_w(scn),
    )


def _point_seed(seed: int, point: np.ndarray) -> int:
    bits = np.ascontiguousarray(np.asarray(point, dtype=np.float64)).view(np.uint64)
    ss = np.random.SeedSequence([int(seed)] + [int(b) for b in bits])
    return int(ss.generate_state(1)[0])


def eval_instance_builder(
    scn: Scenario, seed: int | None = None
) -> Callable[[np.ndarray], ChannelInstance]:
    """Builder mapping a terminal position to its evaluation channels.

    In ``rician`` mode the diffuse parts are drawn deterministically: the
    feeder channel from the scenario seed, each terminal channel from a
    sub-seed derived from (seed, position bits), so repeated evaluations
    of the same point agree bit for bit.
    """
    seed = scn.seed if seed is None else seed
    lam = wavelength(scn)
    bs_g = _upa_geometry(scn.bs, lam)
    ris_g = _upa_geometry(scn.ris, lam)
    noise = noise_power_w(scn)
    h_t = los_channel(bs_g, ris_g, scn.links.bs_ris.pathloss())
    if scn.eval_channel_mode == "rician":
        h_t = rician_channel(h_t, scn.links.bs_ris.k_factor, _point_seed(seed, np.zeros(3)))
    pl_ru = scn.links.ris_user.pathloss()
    n_t = h_t.shape[1]
    zeros = np.zeros(n_t, dtype=complex)

    def build(point: np.ndarray) -> ChannelInstance:
        row = los_channel(ris_g, point_array(point, lam), pl_ru)[0]
        if scn.eval_channel_mode == "rician":
            row = rician_channel(row, scn.links.ris_user.k_factor,
                                 _point_seed(seed, point))[0]
        h_r = row.conj()
        return ChannelInstance(h_t=h_t, h_r_u=h_r, h_r_e=h_r,
                               h_d_u=zeros, h_d_e=zeros, noise_power=noise)

    return build
