"""Link geometry, fading, and the reduced per-stream link coefficients.

A scenario drop fixes user/target/clutter distances and Nakagami-m power
gains. Every downstream rate expression only needs a handful of reduced
constants per stream, so that the SNR/SCNR ratios become

    clutter streams (sensing echo, ISaC echo):
        gamma = echo_gain * P / (clutter_gain * P + noise_coeff * tau)
    clean streams (ISaC downlink, communication-only):
        gamma = link_gain * P / (noise_coeff * tau)

with P the allocated transmit power [W] and tau the spectrum fraction.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .units import BOLTZMANN_K, LIGHT_SPEED_C, dbm_to_watts

__all__ = [
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
]


@dataclasses.dataclass(frozen=True)
class SystemParams:
    """Deployment and physical-layer constants, all in SI units."""

    bandwidth_w: float          # total bandwidth [Hz]
    carrier_fc: float           # carrier frequency [Hz]
    temperature: float          # noise temperature [K]
    rcs_sigma: float            # target radar cross section [m^2]
    ple_comm_alpha_c: float     # path-loss exponent, one-way comm links
    ple_radar_alpha_r: float    # path-loss exponent, two-way radar echoes
    tx_gain_gtx: float          # transmit antenna gain, linear
    p_max: float                # transmit power budget [W]
    circuit_power_omega: float  # static circuit power [W]
    qos_sensing_rr: float       # minimum sensing MI [bits/s]
    qos_comm_rc: float          # minimum data rate [bits/s]
    priorities_gamma: tuple[float, float, float]  # per-service weights
    clutter_count_j: int
    clutter_gains_zeta_sq: tuple[float, ...]  # cascaded clutter power gains
    nakagami_m: float
    cell_radius: float          # [m]
    min_distance: float         # [m]

    def __post_init__(self):
        for name in ("bandwidth_w", "carrier_fc", "temperature", "rcs_sigma",
                     "p_max", "circuit_power_omega", "tx_gain_gtx"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.qos_sensing_rr < 0.0 or self.qos_comm_rc < 0.0:
            raise ValueError("QoS thresholds must be nonnegative")
        if len(self.priorities_gamma) != 3 or any(g < 0.0 for g in self.priorities_gamma):
            raise ValueError("priorities_gamma must be 3 nonnegative weights")
        if len(self.clutter_gains_zeta_sq) != self.clutter_count_j:
            raise ValueError("clutter_gains_zeta_sq length must equal clutter_count_j")
        if any(z < 0.0 for z in self.clutter_gains_zeta_sq):
            raise ValueError("clutter gains must be nonnegative")
        if self.nakagami_m < 0.5:
            raise ValueError("nakagami_m must be >= 0.5")
        if not (0.0 < self.min_distance < self.cell_radius):
            raise ValueError("require 0 < min_distance < cell_radius")


def default_system_params(**overrides) -> SystemParams:
    """Default deployment: 100 MHz at 10 GHz, 46 dBm budget, 40 m cell.

    Keyword overrides are applied on top of the defaults via
    ``dataclasses.replace`` semantics.
    """
    base = SystemParams(
        bandwidth_w=100e6,
        carrier_fc=10e9,
        temperature=724.0,
        rcs_sigma=0.1,
        ple_comm_alpha_c=2.5,
        ple_radar_alpha_r=2.5,
        tx_gain_gtx=1.0,
        p_max=dbm_to_watts(46.0),
        circuit_power_omega=dbm_to_watts(33.0),
        qos_sensing_rr=5e6,
        qos_comm_rc=20e6,
        priorities_gamma=(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
        clutter_count_j=2,
        clutter_gains_zeta_sq=(0.01, 0.001),
        nakagami_m=3.0,
        cell_radius=40.0,
        min_distance=1.0,
    )
    if overrides:
        base = dataclasses.replace(base, **overrides)
    return base


@dataclasses.dataclass(frozen=True)
class ScenarioRealization:
    """One sampled drop: geometry plus fading power gains."""

    dist_target_d1: float       # BS -> radar target [m]
    dist_isac_d2: float         # BS -> ISaC user [m]
    dist_comm_d3: float         # BS -> comm-only user [m]
    dist_clutter_dj: tuple[float, ...]  # BS -> clutters [m]
    gain_g1_sq: float           # cascaded |h_1d|^2 |h_1u|^2 on the target echo
    gain_h2d_sq: float          # ISaC downlink |h_2d|^2
    gain_g2_sq: float           # cascaded |h_2d|^2 |h_2u|^2 on the ISaC echo
    gain_h3_sq: float           # comm-only |h_3|^2
    seed: int


@dataclasses.dataclass(frozen=True)
class StreamCoeffs:
    """Clutter-limited stream: gamma = echo_gain*P / (clutter_gain*P + noise_coeff*tau)."""

    echo_gain: float
    clutter_gain: float
    noise_coeff: float


@dataclasses.dataclass(frozen=True)
class CleanStreamCoeffs:
    """Noise-limited stream: gamma = link_gain*P / (noise_coeff*tau)."""

    link_gain: float
    noise_coeff: float


@dataclasses.dataclass(frozen=True)
class LinkCoefficients:
    """Reduced constants making every rate a function of (tau, P) only."""

    sensing: StreamCoeffs        # sensing-only echo at the BS
    isac_uplink: StreamCoeffs    # ISaC echo at the BS
    isac_downlink: CleanStreamCoeffs  # ISaC data link at the user
    comm: CleanStreamCoeffs      # communication-only data link


def comm_path_loss(dist: float, params: SystemParams) -> float:
    """One-way path gain G_tx * d^-alpha_c * c^2 / (4 pi f_c)^2, linear."""
    if dist < params.min_distance:
        raise ValueError(f"distance {dist} below min_distance {params.min_distance}")
    return (params.tx_gain_gtx * dist ** (-params.ple_comm_alpha_c)
            * LIGHT_SPEED_C ** 2 / (4.0 * math.pi * params.carrier_fc) ** 2)


def radar_path_loss(dist: float, params: SystemParams) -> float:
    """Two-way echo path gain G_tx * d^-2alpha_r * sigma_rcs * lambda^2 / (4 pi)^3.

    The same model covers clutter reflectors at their own distances.
    """
    if dist < params.min_distance:
        raise ValueError(f"distance {dist} below min_distance {params.min_distance}")
    lam = LIGHT_SPEED_C / params.carrier_fc
    return (params.tx_gain_gtx * dist ** (-2.0 * params.ple_radar_alpha_r)
            * params.rcs_sigma * lam ** 2 / (4.0 * math.pi) ** 3)


def sample_nakagami_power(m: float, mean_omega: float, rng: np.random.Generator) -> float:
    """Draw a squared Nakagami-m envelope: Gamma(shape=m, mean=mean_omega)."""
    if m < 0.5:
        raise ValueError(f"nakagami m must be >= 0.5, got {m}")
    if not mean_omega > 0.0:
        raise ValueError(f"mean_omega must be positive, got {mean_omega}")
    return float(rng.gamma(shape=m, scale=mean_omega / m))


def _area_uniform_distance(params: SystemParams, rng: np.random.Generator) -> float:
    # uniform over the annulus area: CDF proportional to r^2
    u = rng.uniform()
    r_min_sq = params.min_distance ** 2
    r_max_sq = params.cell_radius ** 2
    return math.sqrt(r_min_sq + u * (r_max_sq - r_min_sq))


def sample_scenario(params: SystemParams, seed: int) -> ScenarioRealization:
    """Sample one drop deterministically from ``seed``.

    Draw order (fixed contract): target, ISaC, and comm distances; the J
    clutter distances; then the five fading power gains h_1d, h_1u, h_2d,
    h_2u, h_3. Distances are area-uniform in the cell; gains are unit-mean
    Nakagami-m powers. Cascaded gains are products of the matching draws.
    """
    rng = np.random.default_rng(seed)
    d1 = _area_uniform_distance(params, rng)
    d2 = _area_uniform_distance(params, rng)
    d3 = _area_uniform_distance(params, rng)
    dj = tuple(_area_uniform_distance(params, rng)
               for _ in range(params.clutter_count_j))
    m = params.nakagami_m
    h1d = sample_nakagami_power(m, 1.0, rng)
    h1u = sample_nakagami_power(m, 1.0, rng)
    h2d = sample_nakagami_power(m, 1.0, rng)
    h2u = sample_nakagami_power(m, 1.0, rng)
    h3 = sample_nakagami_power(m, 1.0, rng)
    return ScenarioRealization(
        dist_target_d1=d1,
        dist_isac_d2=d2,
        dist_comm_d3=d3,
        dist_clutter_dj=dj,
        gain_g1_sq=h1d * h1u,
        gain_h2d_sq=h2d,
        gain_g2_sq=h2d * h2u,
        gain_h3_sq=h3,
        seed=seed,
    )


def build_link_coefficients(scn: ScenarioRealization, params: SystemParams) -> LinkCoefficients:
    """Reduce a drop to the per-stream constants.

    For the echo streams the common factor (4 pi)^3 is multiplied through,
    so noise_coeff = (4 pi)^3 k_B T W; for the clean streams the factor
    (4 pi f_c)^2 is multiplied through instead. The resulting ratios equal
    the raw received-power ratios exactly.
    """
    g = params.tx_gain_gtx
    sig = params.rcs_sigma
    lam = LIGHT_SPEED_C / params.carrier_fc
    two_ar = 2.0 * params.ple_radar_alpha_r
    ktw = BOLTZMANN_K * params.temperature * params.bandwidth_w

    clutter_sum = sum(g * dj ** (-two_ar) * sig * lam ** 2 * z
                      for dj, z in zip(scn.dist_clutter_dj, params.clutter_gains_zeta_sq))
    echo_noise = (4.0 * math.pi) ** 3 * ktw
    clean_noise = (4.0 * math.pi * params.carrier_fc) ** 2 * ktw

    sensing = StreamCoeffs(
        echo_gain=g * scn.dist_target_d1 ** (-two_ar) * sig * lam ** 2 * scn.gain_g1_sq,
        clutter_gain=clutter_sum,
        noise_coeff=echo_noise,
    )
    isac_uplink = StreamCoeffs(
        echo_gain=g * scn.dist_isac_d2 ** (-two_ar) * sig * lam ** 2 * scn.gain_g2_sq,
        clutter_gain=clutter_sum,
        noise_coeff=echo_noise,
    )
    isac_downlink = CleanStreamCoeffs(
        link_gain=(g * scn.dist_isac_d2 ** (-params.ple_comm_alpha_c)
                   * LIGHT_SPEED_C ** 2 * scn.gain_h2d_sq),
        noise_coeff=clean_noise,
    )
    comm = CleanStreamCoeffs(
        link_gain=(g * scn.dist_comm_d3 ** (-params.ple_comm_alpha_c)
                   * LIGHT_SPEED_C ** 2 * scn.gain_h3_sq),
        noise_coeff=clean_noise,
    )
    return LinkCoefficients(sensing=sensing, isac_uplink=isac_uplink,
                            isac_downlink=isac_downlink, comm=comm)
