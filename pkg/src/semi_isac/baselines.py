"""Benchmark allocation schemes: SP-EPA, PA-ESP, and feasible random draws.

SP-EPA splits the power budget equally and optimizes only the spectrum
fractions; PA-ESP splits the spectrum equally and optimizes only the
powers; RA rejection-samples uniform simplex points until one meets the
QoS floors. Each restricted optimization reuses the shared barrier
machinery on its 2-variable problem.
"""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np

from .barrier import ConvexProblem, _cons_values, _newton_centering, solve_convex
from .objective import Allocation, _mi_value_np, aggregate_objective, qos_slacks
from .solver import (
    Instance,
    SolveReport,
    SolveStatus,
    SolverConfig,
    _min_relevant_slack,
    _norm_streams,
    _qos_cons,
)

__all__ = ["BaselineKind", "sp_epa", "pa_esp", "random_feasible"]


class BaselineKind(enum.Enum):
    SP_EPA = "sp_epa"
    PA_ESP = "pa_esp"
    RANDOM = "random"


def _sp_epa_maps(p_max: float, dim: int):
    third = p_max / 3.0

    def pad(row):
        return row + [0.0] * (dim - 2)
    return [
        ([pad([1, 0]), pad([0, 0])], [0.0, third]),
        ([pad([0, 1]), pad([0, 0])], [0.0, third]),
        ([pad([0, 1]), pad([0, 0])], [0.0, third]),
        ([pad([-1, -1]), pad([0, 0])], [1.0, third]),
    ]


def _pa_esp_maps(p_max: float, dim: int):
    def pad(row):
        return row + [0.0] * (dim - 2)
    return [
        ([pad([0, 0]), pad([1, 0])], [1.0 / 3.0, 0.0]),
        ([pad([0, 0]), pad([0, 1])], [1.0 / 3.0, 0.0]),
        ([pad([0, 0]), pad([0, 1])], [1.0 / 3.0, 0.0]),
        ([pad([0, 0]), pad([-1, -1])], [1.0 / 3.0, p_max]),
    ]


def _pair_floors(dim: int, total: float, eps: float):
    # v1 >= eps, v2 >= eps, total - v1 - v2 >= eps, padded to dim columns
    a = np.zeros((3, dim))
    b = np.empty(3)
    a[0, 0] = 1.0
    b[0] = -eps
    a[1, 1] = 1.0
    b[1] = -eps
    a[2, 0] = a[2, 1] = -1.0
    b[2] = total - eps
    return a, b


def _solve_restricted(inst: Instance, cfg: SolverConfig, maps_fn, total: float,
                      alloc_fn) -> SolveReport:
    """Shared 2-variable solve: phase-I with a slack variable if the equal
    split is not strictly feasible, then barrier + polish on the restriction."""
    params = inst.params
    w = params.bandwidth_w
    eps = cfg.variable_floor_epsilon

    # feasibility at the equal split first
    z_eq = np.array([total / 3.0, total / 3.0])
    alloc_eq = alloc_fn(z_eq)
    s_min = _min_relevant_slack(alloc_eq, inst)
    iters = 0
    if s_min < 1e-6:
        dim = 3
        streams = _norm_streams(inst, maps_fn(params.p_max, dim))
        aff_a, aff_b = _pair_floors(dim, total, eps)
        lin_obj = np.zeros(dim)
        lin_obj[2] = -1.0
        pr1 = ConvexProblem(dim=dim, streams=streams, lin_obj=lin_obj,
                            aff_a=aff_a, aff_b=aff_b,
                            rate_cons=_qos_cons(dim, params, slack_col=2))
        z = np.array([total / 3.0, total / 3.0, s_min - 0.1 * (1.0 + abs(s_min))])
        t = cfg.barrier_initial_t
        m = pr1.n_cons
        feasible = False
        while iters < cfg.max_iterations:
            z, steps, _ = _newton_centering(pr1, z, t,
                                            min(60, cfg.max_iterations - iters),
                                            tol=1e-12 * (1.0 + t))
            iters += steps
            slack_now = float(min(_cons_values(pr1, z)[3:] + z[2]))
            if slack_now >= 1e-6:
                feasible = True
                break
            if z[2] + m / t < 0.0 or m / t <= 1e-9:
                break
            t *= cfg.barrier_mu
        s_min = max(slack_now, float(z[2]))
        if not feasible and s_min <= 0.0:
            alloc = alloc_fn(z[:2])
            return SolveReport(allocation=alloc,
                               objective_value=aggregate_objective(alloc, inst.coeffs, params),
                               kkt_residual=math.inf, iterations=iters,
                               status=SolveStatus.INFEASIBLE)
        z0 = z[:2].copy()
    else:
        z0 = z_eq

    alloc0 = alloc_fn(z0)
    f0 = aggregate_objective(alloc0, inst.coeffs, params)
    f_scale = max(f0, 1e-12 * w)
    dim = 2
    streams = _norm_streams(inst, maps_fn(params.p_max, dim))
    g1, g2, g3 = params.priorities_gamma
    for st, g in zip(streams, (g1, g2, g2, g3)):
        st.obj_weight = g * w / f_scale
    aff_a, aff_b = _pair_floors(dim, total, eps)
    pr = ConvexProblem(dim=dim, streams=streams, lin_obj=np.zeros(dim),
                       aff_a=aff_a, aff_b=aff_b, rate_cons=_qos_cons(dim, params))
    res = solve_convex(pr, z0, kkt_tolerance=cfg.kkt_tolerance,
                       max_iterations=cfg.max_iterations - iters,
                       t_initial=cfg.barrier_initial_t, mu=cfg.barrier_mu)
    alloc = alloc_fn(res.z)
    return SolveReport(
        allocation=alloc,
        objective_value=aggregate_objective(alloc, inst.coeffs, params),
        kkt_residual=res.kkt_residual, iterations=iters + res.newton_iters,
        status=SolveStatus.OPTIMAL if res.optimal else SolveStatus.MAX_ITERATIONS)


def sp_epa(inst: Instance, cfg: SolverConfig | None = None) -> SolveReport:
    """Equal power split, spectrum fractions optimized."""
    cfg = cfg or SolverConfig()
    third = inst.params.p_max / 3.0

    def alloc_fn(z):
        return Allocation(tau=np.array([z[0], z[1], 1.0 - z[0] - z[1]]),
                          power=np.array([third, third, third]))
    return _solve_restricted(inst, cfg, _sp_epa_maps, 1.0, alloc_fn)


def pa_esp(inst: Instance, cfg: SolverConfig | None = None) -> SolveReport:
    """Equal spectrum split, powers optimized at full budget."""
    cfg = cfg or SolverConfig()
    p_max = inst.params.p_max

    def alloc_fn(z):
        return Allocation(tau=np.array([1.0, 1.0, 1.0]) / 3.0,
                          power=np.array([z[0], z[1], p_max - z[0] - z[1]]))
    return _solve_restricted(inst, cfg, _pa_esp_maps, p_max, alloc_fn)


def random_feasible(inst: Instance, rng: np.random.Generator,
                    max_tries: int = 10000) -> Allocation | None:
    """First QoS-feasible draw of (tau, P) uniform on their simplexes.

    tau and P/p_max are sampled as normalized exponentials (flat Dirichlet);
    draws violating any QoS floor are rejected. None after max_tries.
    """
    if max_tries < 1:
        raise ValueError("max_tries must be at least 1")
    params = inst.params
    co = inst.coeffs
    w = params.bandwidth_w
    remaining = max_tries
    while remaining > 0:
        n = min(256, remaining)
        remaining -= n
        e_tau = rng.exponential(size=(n, 3))
        taus = e_tau / e_tau.sum(axis=1, keepdims=True)
        e_pow = rng.exponential(size=(n, 3))
        pows = params.p_max * e_pow / e_pow.sum(axis=1, keepdims=True)
        i1 = _mi_value_np(taus[:, 0], pows[:, 0], co.sensing.echo_gain,
                          co.sensing.clutter_gain, co.sensing.noise_coeff, w)
        i2u = _mi_value_np(taus[:, 1], pows[:, 1], co.isac_uplink.echo_gain,
                           co.isac_uplink.clutter_gain, co.isac_uplink.noise_coeff, w)
        i2d = _mi_value_np(taus[:, 1], pows[:, 1], co.isac_downlink.link_gain,
                           0.0, co.isac_downlink.noise_coeff, w)
        i3 = _mi_value_np(taus[:, 2], pows[:, 2], co.comm.link_gain,
                          0.0, co.comm.noise_coeff, w)
        ok = ((i1 >= params.qos_sensing_rr) & (i2d >= params.qos_comm_rc)
              & (i2u >= params.qos_sensing_rr) & (i3 >= params.qos_comm_rc))
        hits = np.nonzero(ok)[0]
        if hits.size:
            k = int(hits[0])
            return Allocation(tau=taus[k].copy(), power=pows[k].copy())
    return None
