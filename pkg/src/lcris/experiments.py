"""Experiment drivers and delimited output.

Each driver produces a ResultTable: rectangular rows of real values plus a
metadata block (tool version, scenario hash, seed) that is emitted as
``#``-prefixed header lines in the CSV. Tables contain no timestamps or
environment state, so identical scenario + seed reproduce byte-identical
files. Floats are written with shortest round-trip formatting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import scenario as sc
from .channel import effective_channel, pathloss_gain
from .lc import LcParams, classify_range, max_phase_shift
from .optimizer import (
    PhaseVector,
    SolveReport,
    neglect_baseline,
    optimize_phases,
)
from .secrecy import los_beamformer, worst_case_secrecy_rate

logger = logging.getLogger(__name__)

POWER_FLOOR_DB = -300.0
RANGE_CLASS_CODES = {"full": 0, "constrained": 1, "unsupported": 2}
ORIENTATION_CODES = {"horizontal": 0, "vertical": 1}


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"row {i} has {len(row)} values, expected {len(self.columns)}")
            for v in row:
                if not np.isfinite(v):
                    raise ValueError(f"non-finite value in row {i}")

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([row[idx] for row in self.rows], dtype=float)

    def to_csv_text(self) -> str:
        lines = [f"# {key}: {value}" for key, value in self.metadata.items()]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv_text(), encoding="utf-8", newline="\n")
        return path


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        raise TypeError("boolean table values are ambiguous; use 0/1")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _base_metadata(table: str, scn: sc.Scenario | None, seed: int | None) -> dict[str, str]:
    meta = {"tool": f"lcris {__version__}", "table": table}
    if scn is not None:
        meta["scenario_hash"] = sc.scenario_hash(scn)
        meta["seed"] = str(scn.seed if seed is None else seed)
    elif seed is not None:
        meta["seed"] = str(seed)
    return meta


# --- LC curve --------------------------------------------------------------

def run_lc_curve(
    lc: LcParams,
    t_range,
    metadata: dict[str, str] | None = None,
) -> ResultTable:
    """Phase budget versus temperature, with the regime code per row
    (0 = full, 1 = constrained, 2 = unsupported)."""
    rows = []
    for t in t_range:
        omega = max_phase_shift(lc, float(t))
        regime = classify_range(omega).regime.value
        rows.append((float(t), omega, RANGE_CLASS_CODES[regime]))
    meta = {"tool": f"lcris {__version__}", "table": "lc_curve",
            "range_class_codes": "0=full,1=constrained,2=unsupported"}
    meta.update(metadata or {})
    return ResultTable(columns=["T_celsius", "omega_max_rad", "range_class"],
                       rows=rows, metadata=meta)


# --- convergence trace -------------------------------------------------------

def convergence_table(report: SolveReport, scn: sc.Scenario,
                      seed: int | None = None) -> ResultTable:
    rows = [(s.outer, s.inner, s.gap, s.n_false, s.gamma) for s in report.steps]
    meta = _base_metadata("convergence", scn, seed)
    meta["status"] = report.status.value
    meta["final_gamma"] = repr(report.final_gamma)
    meta["secrecy_rate_bits"] = repr(report.secrecy_rate_bits)
    return ResultTable(columns=["outer_iter", "inner_iter", "gap", "n_false", "gamma"],
                       rows=rows, metadata=meta)


def run_convergence(scn: sc.Scenario, schedule=None, sdp_cfg=None,
                    seed: int | None = None) -> ResultTable:
    report = optimize_phases(scn, schedule=schedule, sdp_cfg=sdp_cfg, seed=seed)
    return convergence_table(report, scn, seed)


# --- received power / heat map ----------------------------------------------

def received_power_w(scn: sc.Scenario, phases: PhaseVector,
                     points: np.ndarray, seed: int | None = None) -> np.ndarray:
    """|h_eff(p)^H q|^2 in watts at each point, full-power LOS beamformer.

    The LOS evaluation path is vectorized over points; the Rician path
    builds per-point instances with deterministic sub-seeds.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    lam = sc.wavelength(scn)
    q = los_beamformer(sc.bs_geometry(scn), np.zeros(3), sc.tx_power_w(scn))
    if scn.eval_channel_mode == "los_only":
        ris = sc.ris_geometry(scn)
        h_t = sc.design_channels(scn).h_t
        w = np.exp(1j * phases.omega) * (h_t @ q.q)
        d_elems = np.linalg.norm(points[:, None, :] - ris.element_positions[None, :, :], axis=2)
        d_center = np.linalg.norm(points - ris.center[None, :], axis=1)
        pl = scn.links.ris_user.pathloss()
        c0 = np.array([pathloss_gain(pl, d) for d in d_center])
        kappa = 2.0 * np.pi / lam
        rows = (c0 * np.exp(-1j * kappa * d_center))[:, None] * np.exp(
            1j * kappa * d_elems
        ) / np.sqrt(ris.n_elements)
        return np.abs(rows @ w) ** 2
    build = sc.eval_instance_builder(scn, seed)
    out = np.empty(points.shape[0])
    for i, p in enumerate(points):
        inst = build(p)
        h_eff = effective_channel(inst, "user", phases.omega)
        out[i] = np.abs(np.vdot(h_eff, q.q)) ** 2
    return out


def power_db(power_w: np.ndarray) -> np.ndarray:
    """10*log10 in dBW, floored at the -300 dB sentinel."""
    power_w = np.asarray(power_w, dtype=float)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(np.where(power_w > 0.0, power_w, np.nan))
    return np.where(np.isfinite(db), np.maximum(db, POWER_FLOOR_DB), POWER_FLOOR_DB)


def run_heatmap(scn: sc.Scenario, phases: PhaseVector,
                plane: sc.HeatmapSpec | None = None,
                seed: int | None = None) -> ResultTable:
    """Received power (dB) on the evaluation plane for fixed phases."""
    plane = plane or scn.heatmap
    res = plane.resolution_m
    xs = np.arange(plane.x_m[0], plane.x_m[1] + res / 2.0, res)
    ys = np.arange(plane.y_m[0], plane.y_m[1] + res / 2.0, res)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    points = np.column_stack([gx.ravel(), gy.ravel(), np.full(gx.size, plane.z_m)])
    db = power_db(received_power_w(scn, phases, points, seed))
    rows = [(float(p[0]), float(p[1]), float(v)) for p, v in zip(points, db)]
    meta = _base_metadata("heatmap", scn, seed)
    meta["power_units"] = "dBW"
    meta["plane_z_m"] = repr(plane.z_m)
    return ResultTable(columns=["x", "y", "power_dB"], rows=rows, metadata=meta)


def box_mean_power_w(scn: sc.Scenario, phases: PhaseVector, box: sc.BoxSpec,
                     samples: tuple[int, int] = (5, 5),
                     seed: int | None = None) -> float:
    """Mean received power (linear watts) over a box lattice."""
    dense = sc.BoxSpec(x_m=box.x_m, y_m=box.y_m, z_m=box.z_m, grid=samples)
    pts = sc.grid_points(dense)
    return float(received_power_w(scn, phases, pts, seed).mean())


# --- secrecy evaluation and distance sweep ------------------------------------

def eval_secrecy_rate(scn: sc.Scenario, phases: PhaseVector,
                      seed: int | None = None) -> float:
    """Worst-case rate over the configured grids, evaluation channel mode."""
    build = sc.eval_instance_builder(scn, seed)
    q = los_beamformer(sc.bs_geometry(scn), np.zeros(3), sc.tx_power_w(scn))
    return worst_case_secrecy_rate(
        build, phases.omega, q, (sc.user_grid(scn), sc.eve_grid(scn))
    )


def run_distance_sweep(scn: sc.Scenario, orientation: str, distances,
                       seed: int | None = None) -> ResultTable:
    """Optimized and temperature-neglecting secrecy rates per separation.

    Every row comes from one full optimization run plus the baseline on the
    same seed; the orientation column is coded 0 = horizontal, 1 = vertical.
    """
    seed = scn.seed if seed is None else seed
    rows = []
    statuses_opt, statuses_neg = [], []
    for dist in distances:
        scn_d = sc.with_eve_placement(scn, orientation, float(dist))
        report_opt = optimize_phases(scn_d, seed=seed)
        report_neg = neglect_baseline(scn_d, seed=seed)
        sr_opt = eval_secrecy_rate(scn_d, report_opt.final_phases, seed)
        sr_neg = eval_secrecy_rate(scn_d, report_neg.final_phases, seed)
        rows.append((float(dist), ORIENTATION_CODES[orientation], sr_opt, sr_neg))
        statuses_opt.append(report_opt.status.value)
        statuses_neg.append(report_neg.status.value)
        logger.info("sweep %s d=%.2f: sr_opt=%.4g sr_neglect=%.4g",
                    orientation, dist, sr_opt, sr_neg)
    meta = _base_metadata("distance_sweep", scn, seed)
    meta["orientation"] = orientation
    meta["orientation_codes"] = "0=horizontal,1=vertical"
    meta["status_optimized"] = ",".join(statuses_opt)
    meta["status_neglect"] = ",".join(statuses_neg)
    return ResultTable(
        columns=["distance", "orientation", "sr_optimized_bits", "sr_neglect_bits"],
        rows=rows, metadata=meta,
    )
