"""Small dense interior-point machinery shared by every solve in the package.

Problems are expressed over a low-dimensional variable z (2..6 entries)
as a weighted sum of concave rate terms plus a linear part, subject to
affine constraints and rate-based (QoS) constraints, all written as
c_i(z) >= 0. Rates inside the engine are normalized by the bandwidth
(bits/s/Hz) and the objective by a caller-supplied scale, so all
quantities are O(1)-ish.

The solve is a classic log-barrier path (damped Newton centering,
geometric t schedule) followed by an active-set "polish": the nearly
active constraints are promoted to equalities and the KKT system is
solved to machine precision, which is what makes 1e-8-level KKT
residuals attainable without pushing the barrier parameter into
ill-conditioned territory. Every Hessian in sight is an exact rank-1
outer product (degree-1 homogeneity of the rate terms), which the
assembly exploits.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .objective import _mi_grad, _mi_hess_factor, _mi_value

__all__ = [
    "RateStream",
    "ConvexProblem",
    "ConvexResult",
    "solve_convex",
]


@dataclasses.dataclass
class RateStream:
    """One rate term m(x, q) = x log2(1 + a q / (b q + c x)) with affine (x, q).

    (x, q) = gmap @ z + offset. ``obj_weight`` is the term's weight in the
    (normalized, maximized) objective; 0 for terms that only appear in
    constraints.
    """

    gmap: np.ndarray    # (2, dim)
    offset: np.ndarray  # (2,)
    a: float
    b: float
    c: float
    obj_weight: float


@dataclasses.dataclass
class ConvexProblem:
    """max sum_s w_s m_s(z) - lin_obj . z   s.t.  c(z) >= 0 (affine + rate)."""

    dim: int
    streams: list[RateStream]
    lin_obj: np.ndarray   # (dim,), subtracted from the maximized objective
    aff_a: np.ndarray     # (na, dim): affine constraints aff_a @ z + aff_b >= 0
    aff_b: np.ndarray     # (na,)
    rate_cons: list[tuple[int, np.ndarray, float]]  # (stream idx, lin row, const)

    @property
    def n_cons(self) -> int:
        return self.aff_a.shape[0] + len(self.rate_cons)


@dataclasses.dataclass
class ConvexResult:
    z: np.ndarray
    multipliers: np.ndarray  # one per constraint, ordered affine then rate
    kkt_residual: float
    newton_iters: int
    optimal: bool


class _Eval:
    """All quantities the Newton steps need at a point z."""

    __slots__ = ("h", "gh", "hh", "c", "jac", "phis", "us")

    def __init__(self, pr: ConvexProblem, z: np.ndarray):
        dim = pr.dim
        n_s = len(pr.streams)
        vals = [0.0] * n_s
        grads = np.empty((n_s, dim))
        self.phis = np.empty(n_s)
        self.us = np.empty((n_s, dim))
        hh = np.zeros((dim, dim))
        h = float(pr.lin_obj @ z)
        gh = pr.lin_obj.copy()
        for k, st in enumerate(pr.streams):
            x = st.gmap[0] @ z + st.offset[0]
            q = st.gmap[1] @ z + st.offset[1]
            vals[k] = _mi_value(x, q, st.a, st.b, st.c, 1.0)
            gx, gq = _mi_grad(x, q, st.a, st.b, st.c, 1.0)
            grads[k] = st.gmap[0] * gx + st.gmap[1] * gq
            self.phis[k] = _mi_hess_factor(x, q, st.a, st.b, st.c, 1.0)
            self.us[k] = st.gmap[0] * q - st.gmap[1] * x
            if st.obj_weight != 0.0:
                h -= st.obj_weight * vals[k]
                gh -= st.obj_weight * grads[k]
                hh += (st.obj_weight * self.phis[k]) * np.outer(self.us[k], self.us[k])
        self.h = h
        self.gh = gh
        self.hh = hh

        n_rc = len(pr.rate_cons)
        c = np.empty(pr.aff_a.shape[0] + n_rc)
        jac = np.empty((c.size, dim))
        na = pr.aff_a.shape[0]
        c[:na] = pr.aff_a @ z + pr.aff_b
        jac[:na] = pr.aff_a
        for i, (s_idx, lin_row, lin_const) in enumerate(pr.rate_cons):
            c[na + i] = vals[s_idx] + lin_row @ z + lin_const
            jac[na + i] = grads[s_idx] + lin_row
        self.c = c
        self.jac = jac


def _cons_values(pr: ConvexProblem, z: np.ndarray) -> np.ndarray:
    na = pr.aff_a.shape[0]
    c = np.empty(pr.n_cons)
    c[:na] = pr.aff_a @ z + pr.aff_b
    for i, (s_idx, lin_row, lin_const) in enumerate(pr.rate_cons):
        st = pr.streams[s_idx]
        x = st.gmap[0] @ z + st.offset[0]
        q = st.gmap[1] @ z + st.offset[1]
        if x <= 0.0 or q <= 0.0:  # off-domain trial point: reject via -inf
            c[na + i] = -np.inf
        else:
            c[na + i] = _mi_value(x, q, st.a, st.b, st.c, 1.0) + lin_row @ z + lin_const
    return c


def _objective_h(pr: ConvexProblem, z: np.ndarray) -> float:
    h = float(pr.lin_obj @ z)
    for st in pr.streams:
        if st.obj_weight != 0.0:
            x = st.gmap[0] @ z + st.offset[0]
            q = st.gmap[1] @ z + st.offset[1]
            h -= st.obj_weight * _mi_value(x, q, st.a, st.b, st.c, 1.0)
    return h


def _barrier_hessian(pr: ConvexProblem, ev: _Eval, t: float) -> np.ndarray:
    inv_c = 1.0 / ev.c
    hess = t * ev.hh + (ev.jac * (inv_c ** 2)[:, None]).T @ ev.jac
    na = pr.aff_a.shape[0]
    for i, (s_idx, _, _) in enumerate(pr.rate_cons):
        w = inv_c[na + i] * ev.phis[s_idx]
        u = ev.us[s_idx]
        hess += w * np.outer(u, u)
    return hess


def _solve_psd(hess: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(hess, rhs)
    except np.linalg.LinAlgError:
        reg = 1e-12 * max(1.0, float(np.trace(hess)) / hess.shape[0])
        return np.linalg.lstsq(hess + reg * np.eye(hess.shape[0]), rhs, rcond=None)[0]


def _affine_step_bound(pr: ConvexProblem, z: np.ndarray, dz: np.ndarray,
                       skip: set[int] | None = None) -> float:
    """Largest step keeping the affine constraints strictly positive."""
    c_aff = pr.aff_a @ z + pr.aff_b
    dc = pr.aff_a @ dz
    bound = np.inf
    for i in range(c_aff.size):
        if skip and i in skip:
            continue
        if dc[i] < 0.0 and c_aff[i] > 0.0:
            bound = min(bound, -c_aff[i] / dc[i])
    return bound


def _newton_centering(pr: ConvexProblem, z: np.ndarray, t: float,
                      max_steps: int, tol: float):
    """Damped Newton on t*h(z) - sum log c_i(z). Returns (z, steps, converged)."""
    for step in range(max_steps):
        ev = _Eval(pr, z)
        grad = t * ev.gh - ev.jac.T @ (1.0 / ev.c)
        hess = _barrier_hessian(pr, ev, t)
        dz = _solve_psd(hess, -grad)
        decrement = float(-grad @ dz)
        if decrement < 0.0:  # numerical breakdown; retry steepest-ish
            dz = -grad
            decrement = float(grad @ grad)
        if 0.5 * decrement <= tol:
            return z, step, True
        psi0 = t * ev.h - float(np.log(ev.c).sum())
        slope = float(grad @ dz)
        alpha = 1.0
        ok = False
        for _ in range(60):
            z_try = z + alpha * dz
            c_try = _cons_values(pr, z_try)
            if np.all(c_try > 0.0):
                psi_try = t * _objective_h(pr, z_try) - float(np.log(c_try).sum())
                if psi_try <= psi0 + 0.25 * alpha * slope:
                    ok = True
                    break
            alpha *= 0.5
        if not ok:
            return z, step + 1, False
        z = z_try
    return z, max_steps, False


def _kkt_parts(pr: ConvexProblem, ev: _Eval, lam: np.ndarray):
    stat = float(np.max(np.abs(ev.gh - ev.jac.T @ lam)))
    stat /= max(1.0, float(np.max(np.abs(ev.gh))))
    feas = max(0.0, float(-ev.c.min()))
    comp = float(np.max(np.abs(lam * ev.c))) if lam.size else 0.0
    return max(stat, feas, comp)


def _polish(pr: ConvexProblem, z: np.ndarray, t: float, max_steps: int,
            target: float):
    """Promote near-active constraints to equalities and solve KKT exactly.

    Returns (z, lam_full, residual, steps). The active set is seeded from
    the barrier multipliers and adjusted: wrong-sign multipliers drop out,
    violated or near-zero-slack constraints join, until the residual meets
    ``target`` or the adjustment rounds run out. The caller keeps the
    barrier point whenever the polished one is worse.
    """
    ev = _Eval(pr, z)
    lam_bar = 1.0 / (t * ev.c)
    thresh = math.sqrt(1.0 / t)
    active = set(np.nonzero(lam_bar >= thresh)[0].tolist())
    na = pr.aff_a.shape[0]
    dim = pr.dim
    steps_used = 0
    best = None

    z_round = z.copy()
    for _ in range(6):  # active-set adjustment rounds
        idx = sorted(active)
        k = len(idx)
        lam_a = np.maximum(lam_bar[idx], 0.0) if k else np.empty(0)
        zc = z_round.copy()

        # snap onto the affine members of the active set (floors, budget):
        # the Newton iteration below converges poorly when started a long
        # way from a corner, while the least-norm correction lands exactly.
        # A snap that wrecks an active rate constraint (e.g. a floor that
        # was misclassified as active against a binding QoS) is rejected.
        aff_idx = [i for i in idx if i < na]
        rate_act = [i for i in idx if i >= na]
        if aff_idx:
            rows = pr.aff_a[aff_idx]
            gap = -(rows @ zc + pr.aff_b[aff_idx])
            corr = np.linalg.lstsq(rows, gap, rcond=None)[0]
            inactive0 = [i for i in range(pr.n_cons) if i not in active]
            c_now = _cons_values(pr, zc)
            rate_floor = -np.maximum(np.abs(c_now[rate_act]), 1e-6) * 2.0 \
                if rate_act else None
            alpha = 1.0
            for _ in range(30):
                c_try = _cons_values(pr, zc + alpha * corr)
                ok = not inactive0 or np.all(c_try[inactive0] > 0.0)
                if ok and rate_act:
                    ok = np.all(c_try[rate_act] > rate_floor)
                if ok:
                    zc = zc + alpha * corr
                    break
                alpha *= 0.5
        blockers: set[int] = set()
        for _ in range(60):
            if steps_used >= max_steps:
                break
            steps_used += 1
            ev = _Eval(pr, zc)
            resid = ev.gh - (ev.jac[idx].T @ lam_a if k else 0.0)
            gvec = np.concatenate([resid, ev.c[idx]])
            if float(np.max(np.abs(gvec))) <= 1e-13 * max(1.0, float(np.max(np.abs(ev.gh)))):
                break
            # Lagrangian Hessian: hh plus curvature of active rate constraints
            hl = ev.hh.copy()
            for pos, i in enumerate(idx):
                if i >= na:
                    s_idx = pr.rate_cons[i - na][0]
                    hl += (lam_a[pos] * ev.phis[s_idx]) * np.outer(ev.us[s_idx], ev.us[s_idx])
            kkt = np.zeros((dim + k, dim + k))
            kkt[:dim, :dim] = hl
            if k:
                kkt[:dim, dim:] = -ev.jac[idx].T
                kkt[dim:, :dim] = ev.jac[idx]
            try:
                delta = np.linalg.solve(kkt, -gvec)
            except np.linalg.LinAlgError:
                delta = np.linalg.lstsq(kkt, -gvec, rcond=None)[0]
            # keep inactive constraints strictly positive; cap the step at
            # a fraction of the distance to the nearest inactive affine
            # boundary so corner approaches do not trigger halving cascades
            inactive = [i for i in range(pr.n_cons) if i not in active]
            alpha = min(1.0, 0.995 * _affine_step_bound(pr, zc, delta[:dim],
                                                        skip=active))
            norm0 = float(np.linalg.norm(gvec))
            accepted = False
            for _ in range(60):
                z_try = zc + alpha * delta[:dim]
                lam_try = lam_a + alpha * delta[dim:] if k else lam_a
                c_try = _cons_values(pr, z_try)
                feas_try = not inactive or np.all(c_try[inactive] > 0.0)
                if not feas_try:
                    blockers |= {i for i in inactive if c_try[i] <= 0.0}
                elif np.all(np.isfinite(c_try)):
                    ev_try = _Eval(pr, z_try)
                    r_try = ev_try.gh - (ev_try.jac[idx].T @ lam_try if k else 0.0)
                    g_try = np.concatenate([r_try, ev_try.c[idx]])
                    if float(np.linalg.norm(g_try)) <= (1.0 - 1e-4 * alpha) * norm0:
                        accepted = True
                        break
                alpha *= 0.5
            if not accepted:
                break
            zc, lam_a = z_try, lam_try
            if float(np.linalg.norm(g_try)) > (1.0 - 1e-9) * norm0:
                break  # progress below float resolution: converged to floor

        lam_full = np.zeros(pr.n_cons)
        if k:
            lam_full[idx] = lam_a
        ev = _Eval(pr, zc)
        solved = float(np.max(np.abs(ev.c[idx]))) <= 1e-8 if k else True
        if not solved:
            # the equality system was not reached: either an inactive
            # constraint blocked the path (it belongs in the working set),
            # or the set is inconsistent (shed the weakest member)
            if blockers:
                active |= blockers
            else:
                active.discard(idx[int(np.argmin(lam_a))])
            continue
        z_round = zc.copy()  # next round continues from here
        wrong_sign = [i for pos, i in enumerate(idx) if k and lam_a[pos] < -1e-10]
        violated = [i for i in range(pr.n_cons)
                    if i not in active and ev.c[i] < -1e-12]
        if not wrong_sign and not violated:
            lam_pos = np.maximum(lam_full, 0.0)
            residual = _kkt_parts(pr, ev, lam_pos)
            if best is None or residual < best[2]:
                best = (zc, lam_pos, residual)
            if residual <= target:
                return best + (steps_used,)
            # a weakly active constraint (tiny multiplier) may have been
            # missed: promote near-zero slacks and retry
            near = [i for i in range(pr.n_cons)
                    if i not in active and ev.c[i] < 1e-7]
            if not near:
                break
            active |= set(near)
        else:
            active -= set(wrong_sign)
            active |= set(violated)

    if best is not None:
        return best + (steps_used,)
    lam_full = np.zeros(pr.n_cons)
    ev = _Eval(pr, z)
    return z, lam_full, _kkt_parts(pr, ev, lam_full), steps_used


def solve_convex(pr: ConvexProblem, z0: np.ndarray, kkt_tolerance: float = 1e-8,
                 max_iterations: int = 200, t_initial: float = 1.0,
                 mu: float = 10.0, gap_polish: float = 1e-6) -> ConvexResult:
    """Barrier path + polish. ``z0`` must satisfy c(z0) > 0 strictly."""
    m = pr.n_cons
    z = np.asarray(z0, dtype=float).copy()
    t = t_initial
    iters = 0
    ok = True
    while True:
        z, steps, converged = _newton_centering(
            pr, z, t, min(60, max_iterations - iters), tol=1e-12 * (1.0 + t))
        iters += steps
        ok = ok and converged
        if m / t <= gap_polish or iters >= max_iterations:
            break
        t *= mu
    z_bar, t_bar = z, t

    z_pol, lam, residual, steps = _polish(pr, z_bar, t_bar,
                                          max(10, max_iterations - iters),
                                          target=kkt_tolerance)
    iters += steps
    if residual <= kkt_tolerance:
        return ConvexResult(z_pol, lam, residual, iters, True)

    # polish could not certify: push the barrier parameter itself high
    # enough that the central-path multipliers certify the tolerance
    t_hi = 4.0 * m / kkt_tolerance
    stale = 0
    while t < t_hi and iters < max_iterations:
        t *= mu
        z, steps, _ = _newton_centering(
            pr, z, min(t, t_hi), min(20, max(1, max_iterations - iters)),
            tol=1e-15 * (1.0 + t))
        iters += steps
        ev = _Eval(pr, z)
        lam_bar = 1.0 / (min(t, t_hi) * ev.c)
        res_bar = _kkt_parts(pr, ev, lam_bar)
        if res_bar < 0.9 * residual:
            stale = 0
        else:
            stale += 1
        if res_bar < residual:
            z_pol, lam, residual = z.copy(), lam_bar, res_bar
        if residual <= kkt_tolerance or stale >= 2:
            break
    return ConvexResult(z_pol, lam, residual, iters, residual <= kkt_tolerance)
