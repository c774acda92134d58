"""Rate/MI expressions, the weighted aggregate objective, and their calculus.

Two shapes cover all four streams:

    clutter form  M(x, q) = W x log2(1 + a q / (b q + c x))
    clean form    K(x, q) = W x log2(1 + d q / (e x))

with x the spectrum fraction and q the power [W]. K is M with b = 0.
Both are concave and degree-1 homogeneous; their 2x2 Hessians are exact
rank-1 outer products, which the closed forms below exploit.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .channel import LinkCoefficients, SystemParams

__all__ = [
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
]

_LN2 = math.log(2.0)


@dataclasses.dataclass
class Allocation:
    """Decision variables: spectrum fractions tau and powers [W], one per service."""

    tau: np.ndarray    # shape (3,), positive, sums to 1
    power: np.ndarray  # shape (3,), positive, sums to <= p_max

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        self.power = np.asarray(self.power, dtype=float)


@dataclasses.dataclass(frozen=True)
class StreamRates:
    """Achieved per-stream MI / data rates [bits/s]."""

    mi_sensing: float
    mi_isac_down: float
    mi_isac_up: float
    rate_comm: float


def _check_domain(x: float, q: float, c: float) -> None:
    if not (0.0 < x <= 1.0):
        raise ValueError(f"spectrum fraction must be in (0, 1], got {x}")
    if not q > 0.0:
        raise ValueError(f"power must be positive, got {q}")
    if not c > 0.0:
        raise ValueError(f"noise coefficient must be positive, got {c}")


def _mi_value(x: float, q: float, a: float, b: float, c: float, w: float) -> float:
    # M(x,q) without domain checks; log1p keeps accuracy at tiny SNR
    noise = b * q + c * x
    return (w / _LN2) * x * math.log1p(a * q / noise)


def _mi_grad(x: float, q: float, a: float, b: float, c: float, w: float):
    noise = b * q + c * x
    total = noise + a * q
    return ((w / _LN2) * (math.log1p(a * q / noise) - a * c * q * x / (total * noise)),
            (w / _LN2) * a * c * x * x / (total * noise))


def _mi_hess_factor(x: float, q: float, a: float, b: float, c: float, w: float) -> float:
    # H = -factor * [[q^2, -qx], [-qx, x^2]]
    noise = b * q + c * x
    total = noise + a * q
    return (w / _LN2) * a * c * (2.0 * b * total + a * c * x) / (total * total * noise * noise)


def _mi_value_np(x, q, a: float, b: float, c: float, w: float):
    # vectorized M over numpy arrays (grid oracle, rejection sampling)
    noise = b * q + c * x
    return (w / _LN2) * x * np.log1p(a * q / noise)


def mi_clutter(x: float, q: float, a: float, b: float, c: float, w: float) -> float:
    """MI of a clutter-limited stream: W x log2(1 + a q / (b q + c x)) [bits/s]."""
    _check_domain(x, q, c)
    if a < 0.0 or b < 0.0:
        raise ValueError("gain coefficients must be nonnegative")
    return _mi_value(x, q, a, b, c, w)


def rate_clean(x: float, q: float, d: float, e: float, w: float) -> float:
    """Rate of a noise-limited stream: W x log2(1 + d q / (e x)) [bits/s]."""
    _check_domain(x, q, e)
    if d < 0.0:
        raise ValueError("gain coefficient must be nonnegative")
    return _mi_value(x, q, d, 0.0, e, w)


def stream_rates(alloc: Allocation, coeffs: LinkCoefficients,
                 params: SystemParams) -> StreamRates:
    """Evaluate all four stream rates at an allocation."""
    t1, t2, t3 = alloc.tau
    p1, p2, p3 = alloc.power
    w = params.bandwidth_w
    s, u = coeffs.sensing, coeffs.isac_uplink
    dn, cm = coeffs.isac_downlink, coeffs.comm
    return StreamRates(
        mi_sensing=mi_clutter(t1, p1, s.echo_gain, s.clutter_gain, s.noise_coeff, w),
        mi_isac_down=rate_clean(t2, p2, dn.link_gain, dn.noise_coeff, w),
        mi_isac_up=mi_clutter(t2, p2, u.echo_gain, u.clutter_gain, u.noise_coeff, w),
        rate_comm=rate_clean(t3, p3, cm.link_gain, cm.noise_coeff, w),
    )


def aggregate_objective(alloc: Allocation, coeffs: LinkCoefficients,
                        params: SystemParams) -> float:
    """Priority-weighted sum of sensing MI and data rates [bits/s].

    The ISaC service contributes both its downlink data rate and its echo
    MI under the single weight of that service.
    """
    r = stream_rates(alloc, coeffs, params)
    g1, g2, g3 = params.priorities_gamma
    return g1 * r.mi_sensing + g2 * (r.mi_isac_down + r.mi_isac_up) + g3 * r.rate_comm


def qos_slacks(alloc: Allocation, coeffs: LinkCoefficients,
               params: SystemParams) -> np.ndarray:
    """Slack of the four QoS constraints [bits/s]; feasible iff all >= 0.

    Order: sensing MI vs R_r, ISaC downlink vs R_c, ISaC echo MI vs R_r,
    comm rate vs R_c.
    """
    r = stream_rates(alloc, coeffs, params)
    rr, rc = params.qos_sensing_rr, params.qos_comm_rc
    return np.array([r.mi_sensing - rr, r.mi_isac_down - rc,
                     r.mi_isac_up - rr, r.rate_comm - rc])


def gradient_objective(alloc: Allocation, coeffs: LinkCoefficients,
                       params: SystemParams) -> np.ndarray:
    """Gradient of the aggregate objective: (d/dtau1..3, d/dP1..3)."""
    t1, t2, t3 = alloc.tau
    p1, p2, p3 = alloc.power
    w = params.bandwidth_w
    g1, g2, g3 = params.priorities_gamma
    s, u = coeffs.sensing, coeffs.isac_uplink
    dn, cm = coeffs.isac_downlink, coeffs.comm

    gx1, gq1 = _mi_grad(t1, p1, s.echo_gain, s.clutter_gain, s.noise_coeff, w)
    gx2u, gq2u = _mi_grad(t2, p2, u.echo_gain, u.clutter_gain, u.noise_coeff, w)
    gx2d, gq2d = _mi_grad(t2, p2, dn.link_gain, 0.0, dn.noise_coeff, w)
    gx3, gq3 = _mi_grad(t3, p3, cm.link_gain, 0.0, cm.noise_coeff, w)
    return np.array([
        g1 * gx1,
        g2 * (gx2u + gx2d),
        g3 * gx3,
        g1 * gq1,
        g2 * (gq2u + gq2d),
        g3 * gq3,
    ])


def hessian_mi(x: float, q: float, a: float, b: float, c: float, w: float) -> np.ndarray:
    """Closed-form 2x2 Hessian of the clutter-form MI in (x, q).

    Exactly -factor * outer((q, -x), (q, -x)): negative semidefinite with a
    zero determinant, the signature of degree-1 homogeneity.
    """
    _check_domain(x, q, c)
    f = _mi_hess_factor(x, q, a, b, c, w)
    return -f * np.array([[q * q, -q * x], [-q * x, x * x]])


def hessian_clean(x: float, q: float, d: float, e: float, w: float) -> np.ndarray:
    """Closed-form 2x2 Hessian of the clean-form rate in (x, q)."""
    return hessian_mi(x, q, d, 0.0, e, w)
