import math

import numpy as np
import pytest

from semi_isac.units import BOLTZMANN_K, LIGHT_SPEED_C, dbm_to_watts, watts_to_dbm


def test_constants():
    assert BOLTZMANN_K == 1.380649e-23
    assert LIGHT_SPEED_C == 3.0e8


def test_dbm_to_watts_definition_points():
    assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-15)
    assert dbm_to_watts(0.0) == pytest.approx(1e-3, rel=1e-15)
    # 10^1.6, frozen from a 40-digit evaluation
    assert dbm_to_watts(46.0) == pytest.approx(39.81071705534972, rel=1e-14)


def test_watts_to_dbm_inverse():
    assert watts_to_dbm(1.0) == pytest.approx(30.0, abs=1e-12)
    assert watts_to_dbm(1e-3) == pytest.approx(0.0, abs=1e-12)
    assert watts_to_dbm(39.8107) == pytest.approx(46.0, abs=1e-3)


def test_round_trip_relative_error():
    for x in np.linspace(-100.0, 100.0, 81):
        back = watts_to_dbm(dbm_to_watts(x))
        assert back == pytest.approx(x, abs=1e-12 * max(1.0, abs(x)))


def test_domain_errors():
    with pytest.raises(ValueError):
        watts_to_dbm(0.0)
    with pytest.raises(ValueError):
        watts_to_dbm(-1.0)
    with pytest.raises(ValueError):
        dbm_to_watts(math.inf)
