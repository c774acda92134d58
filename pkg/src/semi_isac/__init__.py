"""Joint spectrum partitioning and power allocation for semi-ISaC downlinks.

A semi-ISaC base station serves three services on disjoint spectrum slices:
sensing-only, integrated sensing-and-communication, and communication-only.
This package models the three links, solves the convex joint
spectrum/power allocation problem that maximizes the weighted sum of radar
mutual information and data rate, maximizes energy efficiency through a
parametric (Dinkelbach) iteration, and provides benchmark schemes plus a
Monte Carlo sweep harness that emits CSV tables.

All internal computation is in SI units (Hz, W, m, K, bits/s); dBm / GHz /
Mbps appear only at config parsing and report emission.
"""

from .units import BOLTZMANN_K, LIGHT_SPEED_C, dbm_to_watts, watts_to_dbm
from .channel import (
    SystemParams,
    ScenarioRealization,
    StreamCoeffs,
    CleanStreamCoeffs,
    LinkCoefficients,
    comm_path_loss,
    radar_path_loss,
    sample_nakagami_power,
    sample_scenario,
    build_link_coefficients,
    default_system_params,
)
from .objective import (
    Allocation,
    StreamRates,
    mi_clutter,
    rate_clean,
    stream_rates,
    aggregate_objective,
    qos_slacks,
    gradient_objective,
    hessian_mi,
    hessian_clean,
)
from .solver import (
    Instance,
    SolverConfig,
    SolveReport,
    SolveStatus,
    FeasibilityResult,
    find_feasible_point,
    solve_sum_mi_rate,
    brute_force_oracle,
)
from .dinkelbach import (
    DinkelbachConfig,
    DinkelbachTrace,
    ee_value,
    solve_f_eta,
    maximize_ee,
)
from .baselines import BaselineKind, sp_epa, pa_esp, random_feasible

__version__ = "0.1.0"

__all__ = [
    "BOLTZMANN_K",
    "LIGHT_SPEED_C",
    "dbm_to_watts",
    "watts_to_dbm",
    "SystemParams",
    "ScenarioRealization",
    "StreamCoeffs",
    "CleanStreamCoeffs",
    "LinkCoefficients",
    "comm_path_loss",
    "radar_path_loss",
    "sample_nakagami_power",
    "sample_scenario",
    "build_link_coefficients",
    "default_system_params",
    "Allocation",
    "StreamRates",
    "mi_clutter",
    "rate_clean",
    "stream_rates",
    "aggregate_objective",
    "qos_slacks",
    "gradient_objective",
    "hessian_mi",
    "hessian_clean",
    "Instance",
    "SolverConfig",
    "SolveReport",
    "SolveStatus",
    "FeasibilityResult",
    "find_feasible_point",
    "solve_sum_mi_rate",
    "brute_force_oracle",
    "DinkelbachConfig",
    "DinkelbachTrace",
    "ee_value",
    "solve_f_eta",
    "maximize_ee",
    "BaselineKind",
    "sp_epa",
    "pa_esp",
    "random_feasible",
]
