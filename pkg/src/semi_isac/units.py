"""Physical constants and unit conversions.

Everything downstream of config parsing works in SI units; the two
conversions here are the only place the dBm scale appears.
"""

import math

BOLTZMANN_K = 1.380649e-23  # [J/K]
LIGHT_SPEED_C = 3.0e8       # [m/s]


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a power level from dBm to watts."""
    if not math.isfinite(p_dbm):
        raise ValueError(f"power in dBm must be finite, got {p_dbm}")
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    """Convert a power level from watts to dBm. Requires p_watts > 0."""
    if not (p_watts > 0.0):
        raise ValueError(f"power in watts must be positive, got {p_watts}")
    return 10.0 * math.log10(p_watts) + 30.0
