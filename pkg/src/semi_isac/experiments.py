"""Monte Carlo sweep harness: drops, schemes, aggregation, CSV emission.

Each sweep point re-parameterizes the system, runs every requested scheme
on the same sampled drops (paired comparison), and aggregates means over
the feasible trials only. Output is deterministic for a fixed spec: trial
t of sweep point k draws its scenario from seed = base_seed XOR mix(k, t)
with an explicit 64-bit mixer, so runs are reproducible byte for byte.
"""

from __future__ import annotations

import dataclasses
import enum

import numpy as np

from .baselines import pa_esp, random_feasible, sp_epa
from .channel import SystemParams, build_link_coefficients, sample_scenario
from .dinkelbach import DinkelbachConfig, DinkelbachTrace, ee_value, maximize_ee
from .objective import Allocation, aggregate_objective, stream_rates
from .solver import Instance, SolveStatus, SolverConfig, solve_sum_mi_rate

__all__ = [
    "Scheme",
    "SweepKind",
    "SweepSpec",
    "SweepRow",
    "TraceRecord",
    "trial_seed",
    "run_qos_sweep",
    "run_priority_sweep",
    "run_rcs_power_sweep",
    "run_ee_suite",
    "write_sweep_csv",
    "write_trace_csv",
]

CSV_HEADER = ("sweep_value,scheme,mean_objective_bps,mean_ee_bps_per_w,"
              "tau1,tau2,tau3,p1_w,p2_w,p3_w,i1_bps,i2d_bps,i2u_bps,i3_bps,"
              "feasible_fraction,mean_iters,trials")


class Scheme(enum.Enum):
    JOINT = "joint"
    SP_EPA = "sp_epa"
    PA_ESP = "pa_esp"
    RANDOM = "random"
    DINKELBACH_EE = "dinkelbach_ee"


class SweepKind(enum.Enum):
    QOS_SWEEP = "qos"
    PRIORITY_SWEEP = "priority"
    RCS_POWER_SWEEP = "rcs_power"
    CONVERGENCE_TRACE = "trace"
    EE_QOS_SWEEP = "ee"


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    kind: SweepKind
    sweep_values: tuple[float, ...]
    trials_per_point: int = 500
    base_seed: int = 12345
    schemes: tuple[Scheme, ...] = (Scheme.JOINT, Scheme.SP_EPA,
                                   Scheme.PA_ESP, Scheme.RANDOM)

    def __post_init__(self):
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be at least 1")
        if not self.sweep_values:
            raise ValueError("sweep_values must be nonempty")
        vals = list(self.sweep_values)
        if sorted(vals) == vals and any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("ordered sweep_values must be strictly increasing")


@dataclasses.dataclass
class SweepRow:
    """Aggregate of one (sweep point, scheme): means over feasible trials.

    The standard errors are carried for statistical trend checks; they are
    not part of the CSV schema.
    """

    sweep_value: float
    scheme: str
    mean_objective_bps: float
    mean_ee_bps_per_w: float
    mean_tau: tuple[float, float, float]
    mean_power: tuple[float, float, float]
    per_stream_rates: tuple[float, float, float, float]
    feasible_fraction: float
    mean_iters: float
    trials: int  # count of feasible trials entering the means
    se_objective_bps: float = 0.0
    se_ee_bps_per_w: float = 0.0
    se_tau: tuple[float, float, float] = (0.0, 0.0, 0.0)
    se_rates: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)


@dataclasses.dataclass
class TraceRecord:
    """One Dinkelbach iteration row of a convergence-trace run."""

    config_label: str
    iteration: int
    eta: float
    f_value: float


_M64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def trial_seed(base_seed: int, point_index: int, trial_index: int) -> int:
    """base_seed XOR a 64-bit mix of (point, trial); stable across runs."""
    return (base_seed ^ _splitmix64(_splitmix64(point_index) + trial_index)) & _M64


@dataclasses.dataclass
class _TrialOutcome:
    feasible: bool
    objective: float = 0.0
    ee: float = 0.0
    tau: np.ndarray | None = None
    power: np.ndarray | None = None
    rates: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    iters: float = 0.0


def _outcome(alloc: Allocation | None, inst: Instance, objective: float,
             iters: float) -> _TrialOutcome:
    if alloc is None:
        return _TrialOutcome(feasible=False)
    r = stream_rates(alloc, inst.coeffs, inst.params)
    return _TrialOutcome(
        feasible=True, objective=objective,
        ee=ee_value(alloc, inst.coeffs, inst.params),
        tau=alloc.tau, power=alloc.power,
        rates=(r.mi_sensing, r.mi_isac_down, r.mi_isac_up, r.rate_comm),
        iters=iters)


def _run_scheme(scheme: Scheme, inst: Instance, seed: int,
                solver_cfg: SolverConfig, ee_cfg: DinkelbachConfig) -> _TrialOutcome:
    if scheme is Scheme.JOINT:
        rep = solve_sum_mi_rate(inst, solver_cfg)
        if rep.status is SolveStatus.INFEASIBLE:
            return _TrialOutcome(feasible=False)
        return _outcome(rep.allocation, inst, rep.objective_value, rep.iterations)
    if scheme is Scheme.SP_EPA:
        rep = sp_epa(inst, solver_cfg)
        if rep.status is SolveStatus.INFEASIBLE:
            return _TrialOutcome(feasible=False)
        return _outcome(rep.allocation, inst, rep.objective_value, rep.iterations)
    if scheme is Scheme.PA_ESP:
        rep = pa_esp(inst, solver_cfg)
        if rep.status is SolveStatus.INFEASIBLE:
            return _TrialOutcome(feasible=False)
        return _outcome(rep.allocation, inst, rep.objective_value, rep.iterations)
    if scheme is Scheme.RANDOM:
        rng = np.random.default_rng([seed, 0xAA])  # RA gets its own substream
        alloc = random_feasible(inst, rng)
        if alloc is None:
            return _TrialOutcome(feasible=False)
        return _outcome(alloc, inst,
                        aggregate_objective(alloc, inst.coeffs, inst.params), 1.0)
    if scheme is Scheme.DINKELBACH_EE:
        rep, eta, trace = maximize_ee(inst, ee_cfg, solver_cfg)
        if rep.status is SolveStatus.INFEASIBLE:
            return _TrialOutcome(feasible=False)
        out = _outcome(rep.allocation, inst, rep.objective_value, float(len(trace)))
        return out
    raise ValueError(f"unknown scheme {scheme}")


def _aggregate(value: float, scheme_label: str, outs: list[_TrialOutcome],
               total: int) -> SweepRow:
    feas = [o for o in outs if o.feasible]
    n = len(feas)
    if n == 0:
        nan3 = (float("nan"),) * 3
        return SweepRow(value, scheme_label, float("nan"), float("nan"),
                        nan3, nan3, (float("nan"),) * 4, 0.0, float("nan"), 0)
    taus = np.array([o.tau for o in feas])
    pows = np.mean([o.power for o in feas], axis=0)
    rates = np.array([o.rates for o in feas])
    objs = np.array([o.objective for o in feas])
    ees = np.array([o.ee for o in feas])
    root_n = np.sqrt(n)
    return SweepRow(
        sweep_value=value,
        scheme=scheme_label,
        mean_objective_bps=float(objs.mean()),
        mean_ee_bps_per_w=float(ees.mean()),
        mean_tau=tuple(taus.mean(axis=0)),
        mean_power=tuple(pows),
        per_stream_rates=tuple(rates.mean(axis=0)),
        feasible_fraction=n / total,
        mean_iters=float(np.mean([o.iters for o in feas])),
        trials=n,
        se_objective_bps=float(objs.std(ddof=1) / root_n) if n > 1 else 0.0,
        se_ee_bps_per_w=float(ees.std(ddof=1) / root_n) if n > 1 else 0.0,
        se_tau=tuple(taus.std(axis=0, ddof=1) / root_n) if n > 1 else (0.0,) * 3,
        se_rates=tuple(rates.std(axis=0, ddof=1) / root_n) if n > 1 else (0.0,) * 4,
    )


def _sweep_over(params_per_point, spec: SweepSpec, schemes,
                solver_cfg: SolverConfig, ee_cfg: DinkelbachConfig,
                labels=None) -> list[SweepRow]:
    """Shared driver: paired drops across schemes at each sweep point."""
    rows = []
    for k, (value, params_k) in enumerate(params_per_point):
        outs = {s: [] for s in schemes}
        for trial in range(spec.trials_per_point):
            seed = trial_seed(spec.base_seed, k, trial)
            scn = sample_scenario(params_k, seed)
            inst = Instance(build_link_coefficients(scn, params_k), params_k)
            for scheme in schemes:
                outs[scheme].append(_run_scheme(scheme, inst, seed,
                                                solver_cfg, ee_cfg))
        for scheme in schemes:
            label = labels[scheme] if labels else scheme.value
            rows.append(_aggregate(value, label, outs[scheme],
                                   spec.trials_per_point))
    return rows


def run_qos_sweep(params: SystemParams, spec: SweepSpec,
                  solver_cfg: SolverConfig | None = None,
                  ee_cfg: DinkelbachConfig | None = None) -> list[SweepRow]:
    """Sweep the QoS floor (R_r = R_c = value [bits/s]) over all schemes."""
    points = [(v, dataclasses.replace(params, qos_sensing_rr=v, qos_comm_rc=v))
              for v in spec.sweep_values]
    return _sweep_over(points, spec, spec.schemes,
                       solver_cfg or SolverConfig(), ee_cfg or DinkelbachConfig())


def run_priority_sweep(params: SystemParams, spec: SweepSpec,
                       qos_profiles: tuple[tuple[float, float], ...] = ((5e6, 20e6), (30e6, 5e6)),
                       solver_cfg: SolverConfig | None = None,
                       ee_cfg: DinkelbachConfig | None = None) -> list[SweepRow]:
    """Sweep the ISaC priority (values in (0,1)); the remaining weight is
    split equally between sensing-only and comm-only. Joint scheme only,
    once per QoS profile (rr, rc)."""
    if any(not 0.0 < v < 1.0 for v in spec.sweep_values):
        raise ValueError("priority sweep values must lie in (0, 1)")
    scfg = solver_cfg or SolverConfig()
    ecfg = ee_cfg or DinkelbachConfig()
    rows = []
    for rr, rc in qos_profiles:
        label = f"joint_rr{rr / 1e6:g}M_rc{rc / 1e6:g}M"
        points = []
        for g2 in spec.sweep_values:
            side = (1.0 - g2) / 2.0
            points.append((g2, dataclasses.replace(
                params, priorities_gamma=(side, g2, side),
                qos_sensing_rr=rr, qos_comm_rc=rc)))
        rows.extend(_sweep_over(points, spec, (Scheme.JOINT,), scfg, ecfg,
                                labels={Scheme.JOINT: label}))
    return rows


def run_rcs_power_sweep(params: SystemParams, spec: SweepSpec,
                        rcs_values: tuple[float, ...] = (0.01, 0.1, 1.0),
                        solver_cfg: SolverConfig | None = None,
                        ee_cfg: DinkelbachConfig | None = None) -> list[SweepRow]:
    """Joint-scheme objective over the (power budget [W]) x (RCS [m^2]) grid."""
    scfg = solver_cfg or SolverConfig()
    ecfg = ee_cfg or DinkelbachConfig()
    rows = []
    for rcs in rcs_values:
        label = f"joint_rcs{rcs:g}"
        points = [(p, dataclasses.replace(params, p_max=p, rcs_sigma=rcs))
                  for p in spec.sweep_values]
        rows.extend(_sweep_over(points, spec, (Scheme.JOINT,), scfg, ecfg,
                                labels={Scheme.JOINT: label}))
    return rows


def run_ee_suite(params: SystemParams, spec: SweepSpec,
                 trace_configs: tuple[tuple[float, tuple[float, ...]], ...] = (
                     (0.1, (0.01, 0.001)),
                     (1.0, (0.01, 0.001)),
                     (0.1, (0.01, 0.001, 0.01, 0.001))),
                 solver_cfg: SolverConfig | None = None,
                 ee_cfg: DinkelbachConfig | None = None):
    """EE sweep over QoS floors plus convergence traces.

    Returns (rows, traces): rows compare the Dinkelbach scheme against the
    benchmarks through their achieved EE; traces record the parametric
    iteration for one representative drop per (RCS, clutter) configuration.
    """
    scfg = solver_cfg or SolverConfig()
    ecfg = ee_cfg or DinkelbachConfig()
    schemes = tuple(s for s in spec.schemes) or (Scheme.DINKELBACH_EE,)
    points = [(v, dataclasses.replace(params, qos_sensing_rr=v, qos_comm_rc=v))
              for v in spec.sweep_values]
    rows = _sweep_over(points, spec, schemes, scfg, ecfg)

    traces: list[TraceRecord] = []
    for c_idx, (rcs, zeta) in enumerate(trace_configs):
        params_c = dataclasses.replace(params, rcs_sigma=rcs,
                                       clutter_count_j=len(zeta),
                                       clutter_gains_zeta_sq=tuple(zeta))
        label = f"rcs{rcs:g}_J{len(zeta)}"
        trace = _representative_trace(params_c, spec, c_idx, scfg, ecfg)
        if trace is not None:
            for j, (eta, f_val) in enumerate(zip(trace.etas, trace.f_values)):
                traces.append(TraceRecord(label, j, eta, f_val))
    return rows, traces


def _representative_trace(params: SystemParams, spec: SweepSpec, c_idx: int,
                          scfg: SolverConfig, ecfg: DinkelbachConfig) -> DinkelbachTrace | None:
    # first feasible drop in a dedicated seed stream per configuration
    for trial in range(200):
        seed = trial_seed(spec.base_seed, 1000 + c_idx, trial)
        scn = sample_scenario(params, seed)
        inst = Instance(build_link_coefficients(scn, params), params)
        rep, _, trace = maximize_ee(inst, ecfg, scfg)
        if rep.status is not SolveStatus.INFEASIBLE:
            return trace
    return None


def _fmt(x) -> str:
    return f"{x:.9g}"


def write_sweep_csv(path, rows: list[SweepRow]) -> None:
    """Fixed-schema CSV, floats at 9 significant digits, LF newlines."""
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fields = ([_fmt(r.sweep_value), r.scheme,
                       _fmt(r.mean_objective_bps), _fmt(r.mean_ee_bps_per_w)]
                      + [_fmt(v) for v in r.mean_tau]
                      + [_fmt(v) for v in r.mean_power]
                      + [_fmt(v) for v in r.per_stream_rates]
                      + [_fmt(r.feasible_fraction), _fmt(r.mean_iters),
                         str(r.trials)])
            fh.write(",".join(fields) + "\n")


def write_trace_csv(path, traces: list[TraceRecord]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("config,iteration,eta,f_value\n")
        for t in traces:
            fh.write(f"{t.config_label},{t.iteration},{_fmt(t.eta)},{_fmt(t.f_value)}\n")
