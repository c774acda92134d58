"""Joint spectrum/power allocation solver and its brute-force validation oracle.

The joint problem maximizes the priority-weighted sum of sensing MI and
data rate over (tau, P) subject to the four QoS floors, the spectrum
simplex, and the power budget. Because every rate is strictly increasing
in its own power, the power budget is active at any optimum, so the
solver eliminates tau3 and P3 and works on the 4-variable reduced
problem. Feasibility is decided by a max-min-slack phase-I run, never by
solver divergence.
"""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np

from .barrier import (
    ConvexProblem,
    RateStream,
    _cons_values,
    _newton_centering,
    solve_convex,
)
from .channel import LinkCoefficients, SystemParams
from .objective import Allocation, _mi_value_np, aggregate_objective, qos_slacks

__all__ = [
    "Instance",
    "SolverConfig",
    "SolveStatus",
    "SolveReport",
    "FeasibilityResult",
    "find_feasible_point",
    "solve_sum_mi_rate",
    "brute_force_oracle",
]


@dataclasses.dataclass(frozen=True)
class Instance:
    """One solvable problem: a drop's link coefficients plus system parameters."""

    coeffs: LinkCoefficients
    params: SystemParams


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    kkt_tolerance: float = 1e-8        # relative KKT residual for Optimal status
    max_iterations: int = 200          # total Newton-step budget per solve
    barrier_initial_t: float = 1.0
    barrier_mu: float = 10.0
    variable_floor_epsilon: float = 1e-9  # numeric floor realizing tau_s, P_s > 0

    def __post_init__(self):
        if min(self.kkt_tolerance, self.barrier_initial_t,
               self.variable_floor_epsilon) <= 0.0 or self.max_iterations <= 0:
            raise ValueError("solver config values must be positive")
        if self.barrier_mu <= 1.0:
            raise ValueError("barrier_mu must exceed 1")


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITERATIONS = "max_iterations"


@dataclasses.dataclass
class SolveReport:
    allocation: Allocation
    objective_value: float   # [bits/s]
    kkt_residual: float      # scaled, unitless
    iterations: int
    status: SolveStatus


@dataclasses.dataclass
class FeasibilityResult:
    """Phase-I verdict: the max-min-slack point backs either outcome."""

    feasible: bool
    allocation: Allocation
    min_qos_slack: float  # [bits/s] at the returned allocation


def _norm_streams(inst: Instance, maps):
    """The four rate terms with coefficients normalized so noise_coeff = 1.

    Order: sensing echo, ISaC echo, ISaC downlink, comm-only downlink.
    ``maps`` gives (gmap, offset) per stream for the chosen variable layout.
    """
    co = inst.coeffs
    triples = [
        (co.sensing.echo_gain / co.sensing.noise_coeff,
         co.sensing.clutter_gain / co.sensing.noise_coeff),
        (co.isac_uplink.echo_gain / co.isac_uplink.noise_coeff,
         co.isac_uplink.clutter_gain / co.isac_uplink.noise_coeff),
        (co.isac_downlink.link_gain / co.isac_downlink.noise_coeff, 0.0),
        (co.comm.link_gain / co.comm.noise_coeff, 0.0),
    ]
    streams = []
    for (a, b), (gmap, offset) in zip(triples, maps):
        streams.append(RateStream(gmap=np.asarray(gmap, dtype=float),
                                  offset=np.asarray(offset, dtype=float),
                                  a=a, b=b, c=1.0, obj_weight=0.0))
    return streams


def _joint_maps(dim: int, p_max: float):
    # z = (tau1, tau2, P1, P2) padded with zero columns up to dim
    def pad(row):
        return row + [0.0] * (dim - 4)
    return [
        ([pad([1, 0, 0, 0]), pad([0, 0, 1, 0])], [0.0, 0.0]),
        ([pad([0, 1, 0, 0]), pad([0, 0, 0, 1])], [0.0, 0.0]),
        ([pad([0, 1, 0, 0]), pad([0, 0, 0, 1])], [0.0, 0.0]),
        ([pad([-1, -1, 0, 0]), pad([0, 0, -1, -1])], [1.0, p_max]),
    ]


def _floor_rows(dim: int, p_max: float, eps: float):
    # tau floors, then power floors, for the (tau1, tau2, P1, P2, ...) layout
    a = np.zeros((6, dim))
    b = np.empty(6)
    a[0, 0] = 1.0
    b[0] = -eps
    a[1, 1] = 1.0
    b[1] = -eps
    a[2, 0] = a[2, 1] = -1.0
    b[2] = 1.0 - eps
    a[3, 2] = 1.0
    b[3] = -eps
    a[4, 3] = 1.0
    b[4] = -eps
    a[5, 2] = a[5, 3] = -1.0
    b[5] = p_max - eps
    return a, b


def _qos_cons(dim: int, params: SystemParams, slack_col: int | None = None):
    """Rate constraints in qos_slacks order; optionally minus a slack variable.

    Zero thresholds are pruned: rates are nonnegative by construction, so
    those constraints can never bind (and would break the log barrier when
    a stream gain is exactly zero).
    """
    w = params.bandwidth_w
    rr, rc = params.qos_sensing_rr / w, params.qos_comm_rc / w
    rows = []
    for s_idx, thr in ((0, rr), (2, rc), (1, rr), (3, rc)):
        if thr <= 0.0:
            continue
        lin = np.zeros(dim)
        if slack_col is not None:
            lin[slack_col] = -1.0
        rows.append((s_idx, lin, -thr))
    return rows


def _min_relevant_slack(alloc: Allocation, inst: Instance) -> float:
    """Smallest bandwidth-normalized QoS slack over the non-vacuous
    constraints; +inf when both thresholds are zero."""
    params = inst.params
    slacks = qos_slacks(alloc, inst.coeffs, params) / params.bandwidth_w
    keep = [s for s, thr in zip(slacks, (params.qos_sensing_rr, params.qos_comm_rc,
                                         params.qos_sensing_rr, params.qos_comm_rc))
            if thr > 0.0]
    return float(min(keep)) if keep else math.inf


def _joint_problem(inst: Instance, cfg: SolverConfig, f_scale: float) -> ConvexProblem:
    params = inst.params
    dim = 4
    streams = _norm_streams(inst, _joint_maps(dim, params.p_max))
    g1, g2, g3 = params.priorities_gamma
    for st, g in zip(streams, (g1, g2, g2, g3)):
        st.obj_weight = g * params.bandwidth_w / f_scale
    aff_a, aff_b = _floor_rows(dim, params.p_max, cfg.variable_floor_epsilon)
    return ConvexProblem(dim=dim, streams=streams, lin_obj=np.zeros(dim),
                         aff_a=aff_a, aff_b=aff_b,
                         rate_cons=_qos_cons(dim, params))


def _equal_split(params: SystemParams) -> Allocation:
    third = params.p_max / 3.0
    return Allocation(tau=np.array([1.0, 1.0, 1.0]) / 3.0,
                      power=np.array([third, third, third]))


def _alloc_from_z(z: np.ndarray, p_max: float) -> Allocation:
    t1, t2, p1, p2 = z[:4]
    return Allocation(tau=np.array([t1, t2, 1.0 - t1 - t2]),
                      power=np.array([p1, p2, p_max - p1 - p2]))


def _phase1(inst: Instance, cfg: SolverConfig):
    """Maximize the minimum scaled QoS slack over the reduced variables.

    Returns (allocation, min_slack_scaled, newton_iters) where a strictly
    positive slack certifies feasibility. Early exit as soon as an iterate
    is comfortably feasible; otherwise runs the barrier out and decides by
    the sign of the max-min slack (a positive barrier iterate is always a
    genuine certificate since the iterates stay strictly interior).
    """
    params = inst.params
    eq = _equal_split(params)
    s_eq = _min_relevant_slack(eq, inst)
    if s_eq >= 1e-6 or math.isinf(s_eq):
        return eq, s_eq, 0

    dim = 5  # (tau1, tau2, P1, P2, slack)
    streams = _norm_streams(inst, _joint_maps(dim, params.p_max))
    aff4, bff4 = _floor_rows(dim, params.p_max, cfg.variable_floor_epsilon)
    lin_obj = np.zeros(dim)
    lin_obj[4] = -1.0  # maximize the slack variable
    pr = ConvexProblem(dim=dim, streams=streams, lin_obj=lin_obj,
                       aff_a=aff4, aff_b=bff4,
                       rate_cons=_qos_cons(dim, params, slack_col=4))
    n_aff = aff4.shape[0]

    z = np.array([1.0 / 3.0, 1.0 / 3.0, params.p_max / 3.0, params.p_max / 3.0,
                  s_eq - 0.1 * (1.0 + abs(s_eq))])
    t = cfg.barrier_initial_t
    m = pr.n_cons
    iters = 0
    ts = s_eq
    while iters < cfg.max_iterations:
        z, steps, _ = _newton_centering(pr, z, t,
                                        min(60, cfg.max_iterations - iters),
                                        tol=1e-12 * (1.0 + t))
        iters += steps
        slack_now = float(
            np.min(_cons_values(pr, z)[n_aff:] + z[4]))  # undo the -slack shift
        ts = max(float(z[4]), slack_now if slack_now > 0 else -math.inf)
        if slack_now >= 1e-6:
            return _alloc_from_z(z, params.p_max), slack_now, iters
        if z[4] + m / t < 0.0:  # duality bound: max-min slack is negative
            return _alloc_from_z(z, params.p_max), z[4] + m / t, iters
        if m / t <= 1e-9:
            break
        t *= cfg.barrier_mu
    if ts > s_eq:
        return _alloc_from_z(z, params.p_max), ts, iters
    return eq, s_eq, iters


def find_feasible_point(inst: Instance, cfg: SolverConfig | None = None) -> FeasibilityResult:
    """Strictly feasible allocation for the joint problem, or an Infeasible verdict."""
    cfg = cfg or SolverConfig()
    alloc, s_min, _ = _phase1(inst, cfg)
    w = inst.params.bandwidth_w
    slack_bps = s_min * w if math.isfinite(s_min) else math.inf
    return FeasibilityResult(feasible=s_min > 0.0, allocation=alloc,
                             min_qos_slack=slack_bps)


def solve_sum_mi_rate(inst: Instance, cfg: SolverConfig | None = None) -> SolveReport:
    """Solve the joint weighted MI/rate maximization to the KKT tolerance."""
    cfg = cfg or SolverConfig()
    params = inst.params
    alloc0, s_min, it0 = _phase1(inst, cfg)
    if s_min <= 0.0:
        return SolveReport(allocation=alloc0,
                           objective_value=aggregate_objective(alloc0, inst.coeffs, params),
                           kkt_residual=math.inf, iterations=it0,
                           status=SolveStatus.INFEASIBLE)

    f0 = aggregate_objective(alloc0, inst.coeffs, params)
    f_scale = max(f0, 1e-12 * params.bandwidth_w)
    pr = _joint_problem(inst, cfg, f_scale)
    z0 = np.array([alloc0.tau[0], alloc0.tau[1], alloc0.power[0], alloc0.power[1]])
    res = solve_convex(pr, z0, kkt_tolerance=cfg.kkt_tolerance,
                       max_iterations=cfg.max_iterations - it0,
                       t_initial=cfg.barrier_initial_t, mu=cfg.barrier_mu)
    alloc = _alloc_from_z(res.z, params.p_max)
    return SolveReport(
        allocation=alloc,
        objective_value=aggregate_objective(alloc, inst.coeffs, params),
        kkt_residual=res.kkt_residual,
        iterations=it0 + res.newton_iters,
        status=SolveStatus.OPTIMAL if res.optimal else SolveStatus.MAX_ITERATIONS,
    )


def _simplex_grid(n: int) -> np.ndarray:
    """All (i, j, k)/n with i+j+k = n and i, j, k >= 1."""
    pts = [(i / n, j / n, (n - i - j) / n)
           for i in range(1, n - 1) for j in range(1, n - i)]
    return np.array(pts)


def brute_force_oracle(inst: Instance, grid_n: int) -> Allocation | None:
    """Exhaustive simplex-grid search over (tau, P); the validation oracle.

    tau ranges over the unit simplex at resolution 1/grid_n, P over the
    full-budget simplex (the objective never decreases in total power).
    Returns the best feasible grid point, or None when every grid point
    violates a QoS constraint. Runtime grows as grid_n^4.
    """
    if grid_n < 10:
        raise ValueError("grid_n must be at least 10")
    params = inst.params
    co = inst.coeffs
    w = params.bandwidth_w
    taus = _simplex_grid(grid_n)                    # (m1, 3)
    pows = _simplex_grid(grid_n) * params.p_max     # (m2, 3)

    def clutter_rate(col_t, col_p, sc):
        x = taus[:, col_t][:, None]
        q = pows[:, col_p][None, :]
        return _mi_value_np(x, q, sc.echo_gain, sc.clutter_gain, sc.noise_coeff, w)

    def clean_rate(col_t, col_p, sc):
        x = taus[:, col_t][:, None]
        q = pows[:, col_p][None, :]
        return _mi_value_np(x, q, sc.link_gain, 0.0, sc.noise_coeff, w)

    i1 = clutter_rate(0, 0, co.sensing)
    i2u = clutter_rate(1, 1, co.isac_uplink)
    i2d = clean_rate(1, 1, co.isac_downlink)
    i3 = clean_rate(2, 2, co.comm)

    feas = ((i1 >= params.qos_sensing_rr) & (i2d >= params.qos_comm_rc)
            & (i2u >= params.qos_sensing_rr) & (i3 >= params.qos_comm_rc))
    if not feas.any():
        return None
    g1, g2, g3 = params.priorities_gamma
    obj = g1 * i1 + g2 * (i2d + i2u) + g3 * i3
    obj[~feas] = -np.inf
    flat = int(np.argmax(obj))
    it, ip = divmod(flat, pows.shape[0])
    return Allocation(tau=taus[it].copy(), power=pows[ip].copy())
