"""JSON run configuration in human units (dBm, GHz, MHz, Mbps).

Every key is optional; the defaults reproduce the standard simulation
setup. Validation is strict: unknown keys and wrong-typed values fail
with a message naming the offending key, so batch scripts get precise
errors instead of silently misconfigured runs.
"""

from __future__ import annotations

import dataclasses
import json

from .channel import SystemParams
from .dinkelbach import DinkelbachConfig
from .solver import SolverConfig
from .units import dbm_to_watts

__all__ = ["RunConfig", "SweepSettings", "DEFAULT_CONFIG", "load_config", "ConfigError"]


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    # physical / deployment (human units)
    "bandwidth_mhz": 100.0,
    "carrier_ghz": 10.0,
    "temperature_k": 724.0,
    "rcs_m2": 0.1,
    "path_loss_exp_comm": 2.5,
    "path_loss_exp_radar": 2.5,
    "tx_gain_dbi": 0.0,
    "p_max_dbm": 46.0,
    "circuit_power_dbm": 33.0,
    "qos_sensing_mbps": 5.0,
    "qos_comm_mbps": 20.0,
    "priorities": [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    "clutter_gains": [0.01, 0.001],
    "nakagami_m": 3.0,
    "cell_radius_m": 40.0,
    "min_distance_m": 1.0,
    # solver
    "kkt_tolerance": 1e-8,
    "max_iterations": 200,
    "barrier_initial_t": 1.0,
    "barrier_mu": 10.0,
    "variable_floor_epsilon": 1e-9,
    # energy-efficiency loop
    "ee_delta_tolerance_bps": None,  # None -> 1e-6 x starting objective
    "ee_max_outer_iterations": 30,
    "ee_eta_initial": 0.0,
    # sweeps
    "trials_per_point": 500,
    "base_seed": 12345,
    "qos_thresholds_mbps": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0],
    "priority_isac_values": [0.1, 0.3, 0.5, 0.7, 0.9],
    "priority_qos_profiles_mbps": [[5.0, 20.0], [30.0, 5.0]],
    "pmax_sweep_dbm": [40.0, 43.0, 46.0],
    "rcs_sweep_m2": [0.01, 0.1, 1.0],
    "ee_thresholds_mbps": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0],
    "trace_configs": [
        {"rcs_m2": 0.1, "clutter_gains": [0.01, 0.001]},
        {"rcs_m2": 1.0, "clutter_gains": [0.01, 0.001]},
        {"rcs_m2": 0.1, "clutter_gains": [0.01, 0.001, 0.01, 0.001]},
    ],
}


@dataclasses.dataclass(frozen=True)
class SweepSettings:
    trials_per_point: int
    base_seed: int
    qos_thresholds: tuple[float, ...]      # [bits/s]
    priority_isac_values: tuple[float, ...]
    priority_qos_profiles: tuple[tuple[float, float], ...]  # [bits/s]
    pmax_values: tuple[float, ...]         # [W]
    rcs_values: tuple[float, ...]          # [m^2]
    ee_thresholds: tuple[float, ...]       # [bits/s]
    trace_configs: tuple[tuple[float, tuple[float, ...]], ...]


@dataclasses.dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    solver: SolverConfig
    ee: DinkelbachConfig
    sweeps: SweepSettings


def _require_number(cfg: dict, key: str) -> float:
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"config key '{key}': expected a number, got {v!r}")
    return float(v)


def _require_int(cfg: dict, key: str) -> int:
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"config key '{key}': expected an integer, got {v!r}")
    return v


def _require_number_list(cfg: dict, key: str, length: int | None = None):
    v = cfg[key]
    if (not isinstance(v, list) or not v
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v)):
        raise ConfigError(f"config key '{key}': expected a list of numbers, got {v!r}")
    if length is not None and len(v) != length:
        raise ConfigError(f"config key '{key}': expected {length} entries, got {len(v)}")
    return [float(x) for x in v]


def load_config(path: str | None) -> RunConfig:
    """Read a JSON config (or use pure defaults when path is None)."""
    cfg = dict(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        for key in user:
            if key not in DEFAULT_CONFIG:
                raise ConfigError(f"unknown config key '{key}'")
        cfg.update(user)

    params = SystemParams(
        bandwidth_w=_require_number(cfg, "bandwidth_mhz") * 1e6,
        carrier_fc=_require_number(cfg, "carrier_ghz") * 1e9,
        temperature=_require_number(cfg, "temperature_k"),
        rcs_sigma=_require_number(cfg, "rcs_m2"),
        ple_comm_alpha_c=_require_number(cfg, "path_loss_exp_comm"),
        ple_radar_alpha_r=_require_number(cfg, "path_loss_exp_radar"),
        tx_gain_gtx=10.0 ** (_require_number(cfg, "tx_gain_dbi") / 10.0),
        p_max=dbm_to_watts(_require_number(cfg, "p_max_dbm")),
        circuit_power_omega=dbm_to_watts(_require_number(cfg, "circuit_power_dbm")),
        qos_sensing_rr=_require_number(cfg, "qos_sensing_mbps") * 1e6,
        qos_comm_rc=_require_number(cfg, "qos_comm_mbps") * 1e6,
        priorities_gamma=tuple(_require_number_list(cfg, "priorities", 3)),
        clutter_count_j=len(_require_number_list(cfg, "clutter_gains")),
        clutter_gains_zeta_sq=tuple(_require_number_list(cfg, "clutter_gains")),
        nakagami_m=_require_number(cfg, "nakagami_m"),
        cell_radius=_require_number(cfg, "cell_radius_m"),
        min_distance=_require_number(cfg, "min_distance_m"),
    )
    solver = SolverConfig(
        kkt_tolerance=_require_number(cfg, "kkt_tolerance"),
        max_iterations=_require_int(cfg, "max_iterations"),
        barrier_initial_t=_require_number(cfg, "barrier_initial_t"),
        barrier_mu=_require_number(cfg, "barrier_mu"),
        variable_floor_epsilon=_require_number(cfg, "variable_floor_epsilon"),
    )
    delta = cfg["ee_delta_tolerance_bps"]
    if delta is not None:
        if isinstance(delta, bool) or not isinstance(delta, (int, float)):
            raise ConfigError("config key 'ee_delta_tolerance_bps': expected a "
                              f"number or null, got {delta!r}")
        delta = float(delta)
    ee = DinkelbachConfig(
        delta_tolerance=delta,
        max_outer_iterations=_require_int(cfg, "ee_max_outer_iterations"),
        eta_initial=_require_number(cfg, "ee_eta_initial"),
    )

    profiles = cfg["priority_qos_profiles_mbps"]
    if (not isinstance(profiles, list)
            or any(not isinstance(p, list) or len(p) != 2 for p in profiles)):
        raise ConfigError("config key 'priority_qos_profiles_mbps': expected a "
                          "list of [rr_mbps, rc_mbps] pairs")
    traces = cfg["trace_configs"]
    if not isinstance(traces, list) or any(
            not isinstance(tc, dict) or set(tc) != {"rcs_m2", "clutter_gains"}
            for tc in traces):
        raise ConfigError("config key 'trace_configs': expected a list of "
                          "{rcs_m2, clutter_gains} objects")
    sweeps = SweepSettings(
        trials_per_point=_require_int(cfg, "trials_per_point"),
        base_seed=_require_int(cfg, "base_seed"),
        qos_thresholds=tuple(v * 1e6 for v in
                             _require_number_list(cfg, "qos_thresholds_mbps")),
        priority_isac_values=tuple(
            _require_number_list(cfg, "priority_isac_values")),
        priority_qos_profiles=tuple((float(p[0]) * 1e6, float(p[1]) * 1e6)
                                    for p in profiles),
        pmax_values=tuple(dbm_to_watts(v) for v in
                          _require_number_list(cfg, "pmax_sweep_dbm")),
        rcs_values=tuple(_require_number_list(cfg, "rcs_sweep_m2")),
        ee_thresholds=tuple(v * 1e6 for v in
                            _require_number_list(cfg, "ee_thresholds_mbps")),
        trace_configs=tuple(
            (float(tc["rcs_m2"]), tuple(float(z) for z in tc["clutter_gains"]))
            for tc in traces),
    )
    return RunConfig(params=params, solver=solver, ee=ee, sweeps=sweeps)
