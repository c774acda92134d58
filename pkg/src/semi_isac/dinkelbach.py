"""Energy-efficiency maximization via the parametric (Dinkelbach) iteration.

EE is the weighted MI/rate sum divided by the consumed power including the
circuit draw. The ratio is maximized by repeatedly solving the concave
surrogate A(tau, P) - eta * B(P) and updating eta to the achieved ratio
until the surrogate optimum drops to ~0. Unlike the rate problem, the
power budget is NOT active at the EE optimum, so the subproblem keeps all
three powers as variables with the budget as an explicit inequality.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .barrier import ConvexProblem, solve_convex
from .channel import LinkCoefficients, SystemParams
from .objective import Allocation, aggregate_objective
from .solver import (
    Instance,
    SolveReport,
    SolveStatus,
    SolverConfig,
    _norm_streams,
    _phase1,
    _qos_cons,
)

__all__ = [
    "DinkelbachConfig",
    "DinkelbachTrace",
    "ee_value",
    "solve_f_eta",
    "maximize_ee",
]


@dataclasses.dataclass(frozen=True)
class DinkelbachConfig:
    """Outer-loop settings. delta_tolerance=None scales the stop threshold
    to 1e-6 of the objective at the feasible starting point."""

    delta_tolerance: float | None = None  # [bits/s]
    max_outer_iterations: int = 30
    eta_initial: float = 0.0              # [bits/s/W]

    def __post_init__(self):
        if self.delta_tolerance is not None and self.delta_tolerance <= 0.0:
            raise ValueError("delta_tolerance must be positive")
        if self.max_outer_iterations < 1 or self.eta_initial < 0.0:
            raise ValueError("invalid Dinkelbach config")


@dataclasses.dataclass
class DinkelbachTrace:
    """Per-iteration history: eta_j, the surrogate optimum F(eta_j), and
    the maximizing allocation."""

    etas: list[float] = dataclasses.field(default_factory=list)
    f_values: list[float] = dataclasses.field(default_factory=list)
    allocations: list[Allocation] = dataclasses.field(default_factory=list)

    def __len__(self) -> int:
        return len(self.etas)

    def rows(self) -> list[tuple[int, float, float]]:
        """(iteration, eta, f_value) rows for CSV export."""
        return [(j, e, f) for j, (e, f) in enumerate(zip(self.etas, self.f_values))]


def ee_value(alloc: Allocation, coeffs: LinkCoefficients,
             params: SystemParams) -> float:
    """Energy efficiency [bits/s/W]: weighted rate sum over total power draw."""
    total_power = float(np.sum(alloc.power)) + params.circuit_power_omega
    return aggregate_objective(alloc, coeffs, params) / total_power


def _total_power(alloc: Allocation, params: SystemParams) -> float:
    return float(np.sum(alloc.power)) + params.circuit_power_omega


def _surrogate_maps(p_max: float):
    # z = (tau1, tau2, P1, P2, P3); tau3 eliminated, powers all explicit
    return [
        ([[1, 0, 0, 0, 0], [0, 0, 1, 0, 0]], [0.0, 0.0]),
        ([[0, 1, 0, 0, 0], [0, 0, 0, 1, 0]], [0.0, 0.0]),
        ([[0, 1, 0, 0, 0], [0, 0, 0, 1, 0]], [0.0, 0.0]),
        ([[-1, -1, 0, 0, 0], [0, 0, 0, 0, 1]], [1.0, 0.0]),
    ]


def _surrogate_problem(inst: Instance, cfg: SolverConfig, eta: float,
                       f_scale: float) -> ConvexProblem:
    params = inst.params
    dim = 5
    streams = _norm_streams(inst, _surrogate_maps(params.p_max))
    g1, g2, g3 = params.priorities_gamma
    for st, g in zip(streams, (g1, g2, g2, g3)):
        st.obj_weight = g * params.bandwidth_w / f_scale
    lin_obj = np.zeros(dim)
    lin_obj[2:] = eta / f_scale  # the -eta * sum(P) part of the surrogate
    eps = cfg.variable_floor_epsilon
    aff_a = np.zeros((7, dim))
    aff_b = np.empty(7)
    aff_a[0, 0] = 1.0
    aff_b[0] = -eps
    aff_a[1, 1] = 1.0
    aff_b[1] = -eps
    aff_a[2, 0] = aff_a[2, 1] = -1.0
    aff_b[2] = 1.0 - eps
    for i in range(3):  # power floors
        aff_a[3 + i, 2 + i] = 1.0
        aff_b[3 + i] = -eps
    aff_a[6, 2:] = -1.0  # power budget as inequality
    aff_b[6] = params.p_max
    return ConvexProblem(dim=dim, streams=streams, lin_obj=lin_obj,
                         aff_a=aff_a, aff_b=aff_b,
                         rate_cons=_qos_cons(dim, params))


def _interior_start(inst: Instance, cfg: SolverConfig):
    """Strictly feasible 5-var point (budget inequality strict), or None.

    Reuses the reduced-problem phase-I and backs the powers off the budget
    by a margin small enough to keep every QoS slack positive (rates are
    concave in power with rate(x, 0) = 0, so scaling power by 1-s costs at
    most s times the rate)."""
    alloc, s_min, iters = _phase1(inst, cfg)
    if s_min <= 0.0:
        return None, alloc, s_min, iters
    w = inst.params.bandwidth_w
    rates_scaled = (aggregate_objective(
        Allocation(alloc.tau.copy(), alloc.power.copy()), inst.coeffs,
        dataclasses.replace(inst.params, priorities_gamma=(1.0, 1.0, 1.0))) / w)
    shrink = min(1e-3, 0.5 * s_min / max(rates_scaled, 1e-12))
    power = alloc.power * (1.0 - shrink)
    z0 = np.array([alloc.tau[0], alloc.tau[1], power[0], power[1], power[2]])
    return z0, Allocation(alloc.tau.copy(), power), s_min, iters


def _solve_surrogate(inst: Instance, eta: float, cfg: SolverConfig,
                     z0: np.ndarray, f_scale: float):
    pr = _surrogate_problem(inst, cfg, eta, f_scale)
    res = solve_convex(pr, z0, kkt_tolerance=cfg.kkt_tolerance,
                       max_iterations=cfg.max_iterations,
                       t_initial=cfg.barrier_initial_t, mu=cfg.barrier_mu)
    t1, t2, p1, p2, p3 = res.z
    alloc = Allocation(tau=np.array([t1, t2, 1.0 - t1 - t2]),
                       power=np.array([p1, p2, p3]))
    return alloc, res


def solve_f_eta(inst: Instance, eta: float,
                cfg: SolverConfig | None = None) -> SolveReport:
    """Maximize A(tau, P) - eta * (sum P + omega) under the QoS/budget set.

    At eta = 0 this is exactly the weighted MI/rate problem. The report's
    objective_value is the surrogate optimum F(eta) [bits/s].
    """
    if eta < 0.0:
        raise ValueError("eta must be nonnegative")
    cfg = cfg or SolverConfig()
    z0, alloc0, s_min, it0 = _interior_start(inst, cfg)
    if z0 is None:
        return SolveReport(allocation=alloc0, objective_value=-math.inf,
                           kkt_residual=math.inf, iterations=it0,
                           status=SolveStatus.INFEASIBLE)
    f_scale = max(aggregate_objective(alloc0, inst.coeffs, inst.params),
                  1e-12 * inst.params.bandwidth_w)
    alloc, res = _solve_surrogate(inst, eta, cfg, z0, f_scale)
    f_val = (aggregate_objective(alloc, inst.coeffs, inst.params)
             - eta * _total_power(alloc, inst.params))
    return SolveReport(
        allocation=alloc, objective_value=f_val, kkt_residual=res.kkt_residual,
        iterations=it0 + res.newton_iters,
        status=SolveStatus.OPTIMAL if res.optimal else SolveStatus.MAX_ITERATIONS)


def maximize_ee(inst: Instance, cfg: DinkelbachConfig | None = None,
                solver_cfg: SolverConfig | None = None):
    """Dinkelbach loop: returns (SolveReport, eta_star, DinkelbachTrace).

    eta is updated to the achieved ratio after each surrogate solve; the
    loop stops once the surrogate optimum F(eta) falls to the tolerance.
    The returned report carries the weighted rate sum A [bits/s] as its
    objective_value; eta_star equals the EE of the returned allocation.
    """
    cfg = cfg or DinkelbachConfig()
    scfg = solver_cfg or SolverConfig()
    trace = DinkelbachTrace()

    z0, alloc0, s_min, it0 = _interior_start(inst, scfg)
    if z0 is None:
        report = SolveReport(allocation=alloc0, objective_value=-math.inf,
                             kkt_residual=math.inf, iterations=it0,
                             status=SolveStatus.INFEASIBLE)
        return report, 0.0, trace
    a0 = aggregate_objective(alloc0, inst.coeffs, inst.params)
    f_scale = max(a0, 1e-12 * inst.params.bandwidth_w)
    delta = cfg.delta_tolerance if cfg.delta_tolerance is not None else 1e-6 * a0

    eta = cfg.eta_initial
    total_iters = it0
    z_interior = z0
    z_warm = z0
    alloc = alloc0
    res = None
    converged = False
    for _ in range(cfg.max_outer_iterations):
        alloc, res = _solve_surrogate(inst, eta, scfg, z_warm, f_scale)
        total_iters += res.newton_iters
        f_val = (aggregate_objective(alloc, inst.coeffs, inst.params)
                 - eta * _total_power(alloc, inst.params))
        trace.etas.append(eta)
        trace.f_values.append(f_val)
        trace.allocations.append(alloc)
        if f_val <= delta:
            converged = True
            break
        eta = (aggregate_objective(alloc, inst.coeffs, inst.params)
               / _total_power(alloc, inst.params))
        # blend toward the interior point: constraints are concave, so the
        # mix stays strictly feasible and warm-starts the next barrier run
        z_prev = np.array([alloc.tau[0], alloc.tau[1], *alloc.power])
        z_warm = 0.9 * z_prev + 0.1 * z_interior

    eta_star = (aggregate_objective(alloc, inst.coeffs, inst.params)
                / _total_power(alloc, inst.params))
    report = SolveReport(
        allocation=alloc,
        objective_value=aggregate_objective(alloc, inst.coeffs, inst.params),
        kkt_residual=res.kkt_residual if res is not None else math.inf,
        iterations=total_iters,
        status=SolveStatus.OPTIMAL if converged else SolveStatus.MAX_ITERATIONS)
    return report, eta_star, trace
