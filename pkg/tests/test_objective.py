import dataclasses

import numpy as np
import pytest

from semi_isac.channel import build_link_coefficients, default_system_params, sample_scenario
from semi_isac.objective import (
    Allocation,
    aggregate_objective,
    gradient_objective,
    hessian_clean,
    hessian_mi,
    mi_clutter,
    qos_slacks,
    rate_clean,
    stream_rates,
)


@pytest.fixture
def params():
    return default_system_params()


def random_interior_allocation(rng, p_max):
    tau = rng.dirichlet((2.0, 2.0, 2.0))
    power = p_max * rng.dirichlet((2.0, 2.0, 2.0))
    return Allocation(tau=tau, power=power)


def random_coeff_point(rng):
    """Random interior (x, q, a, b, c) spanning several decades."""
    x = rng.uniform(0.05, 0.9)
    q = 10.0 ** rng.uniform(-1.0, 1.5)
    a = 10.0 ** rng.uniform(-3.0, 3.0)
    b = 10.0 ** rng.uniform(-4.0, 0.0)
    c = 10.0 ** rng.uniform(-1.0, 1.0)
    return x, q, a, b, c


def test_mi_clutter_zero_power_limit():
    w = 1e8
    vals = [mi_clutter(0.4, q, 2.0, 0.5, 1.0, w) for q in (1e-3, 1e-6, 1e-9)]
    assert vals[0] > vals[1] > vals[2] > 0.0
    assert vals[2] < 1.0  # -> 0 as q -> 0+


def test_mi_clutter_homogeneity():
    w = 1e8
    v1 = mi_clutter(0.3, 4.0, 2.0, 0.5, 1.0, w)
    v2 = mi_clutter(0.6, 8.0, 2.0, 0.5, 1.0, w)
    assert v2 == pytest.approx(2.0 * v1, rel=1e-12)


def test_mi_clutter_unit_snr_point():
    # b=0 and a q = c x gives W x exactly
    w = 1e8
    assert mi_clutter(0.5, 2.5, 1.0, 0.0, 5.0, w) == pytest.approx(w * 0.5, rel=1e-12)


def test_rate_clean_matches_b0_clutter_form():
    w = 1e8
    assert rate_clean(0.4, 3.0, 2.0, 1.5, w) == mi_clutter(0.4, 3.0, 2.0, 0.0, 1.5, w)
    # unit-SNR point: d q = e x gives W x exactly
    assert rate_clean(0.5, 1.0, 3.0, 6.0, w) == pytest.approx(0.5 * w, rel=1e-12)


def test_domain_errors():
    with pytest.raises(ValueError):
        mi_clutter(0.0, 1.0, 1.0, 0.0, 1.0, 1e8)
    with pytest.raises(ValueError):
        mi_clutter(1.2, 1.0, 1.0, 0.0, 1.0, 1e8)
    with pytest.raises(ValueError):
        mi_clutter(0.5, 0.0, 1.0, 0.0, 1.0, 1e8)
    with pytest.raises(ValueError):
        mi_clutter(0.5, 1.0, 1.0, 0.0, 0.0, 1e8)
    with pytest.raises(ValueError):
        rate_clean(0.5, 1.0, -1.0, 1.0, 1e8)


def test_stream_rates_dual_path(params):
    """Rates computed through the reduced coefficients must agree with a
    direct evaluation of tau W log2(1 + gamma) from the same coefficients."""
    rng = np.random.default_rng(3)
    for seed in range(10):
        scn = sample_scenario(params, seed)
        co = build_link_coefficients(scn, params)
        alloc = random_interior_allocation(rng, params.p_max)
        r = stream_rates(alloc, co, params)
        w = params.bandwidth_w
        t, p = alloc.tau, alloc.power
        s = co.sensing
        g1 = s.echo_gain * p[0] / (s.clutter_gain * p[0] + s.noise_coeff * t[0])
        assert r.mi_sensing == pytest.approx(t[0] * w * np.log2(1 + g1), rel=1e-12)
        u = co.isac_uplink
        g2u = u.echo_gain * p[1] / (u.clutter_gain * p[1] + u.noise_coeff * t[1])
        assert r.mi_isac_up == pytest.approx(t[1] * w * np.log2(1 + g2u), rel=1e-12)
        dn = co.isac_downlink
        g2d = dn.link_gain * p[1] / (dn.noise_coeff * t[1])
        assert r.mi_isac_down == pytest.approx(t[1] * w * np.log2(1 + g2d), rel=1e-12)
        cm = co.comm
        g3 = cm.link_gain * p[2] / (cm.noise_coeff * t[2])
        assert r.rate_comm == pytest.approx(t[2] * w * np.log2(1 + g3), rel=1e-12)


def test_aggregate_objective_weights(params):
    scn = sample_scenario(params, 4)
    co = build_link_coefficients(scn, params)
    alloc = Allocation(tau=np.array([0.3, 0.4, 0.3]), power=np.array([10.0, 15.0, 14.0]))
    r = stream_rates(alloc, co, params)

    p_zero = dataclasses.replace(params, priorities_gamma=(0.0, 0.0, 0.0))
    assert aggregate_objective(alloc, co, p_zero) == 0.0

    p_sel = dataclasses.replace(params, priorities_gamma=(1.0, 0.0, 0.0))
    assert aggregate_objective(alloc, co, p_sel) == pytest.approx(r.mi_sensing, rel=1e-12)

    expected = (r.mi_sensing + r.mi_isac_down + r.mi_isac_up + r.rate_comm) / 3.0
    assert aggregate_objective(alloc, co, params) == pytest.approx(expected, rel=1e-12)


def test_qos_slacks(params):
    scn = sample_scenario(params, 4)
    co = build_link_coefficients(scn, params)
    alloc = Allocation(tau=np.array([0.3, 0.4, 0.3]), power=np.array([10.0, 15.0, 14.0]))
    r = stream_rates(alloc, co, params)

    p0 = dataclasses.replace(params, qos_sensing_rr=0.0, qos_comm_rc=0.0)
    assert qos_slacks(alloc, co, p0) == pytest.approx(
        [r.mi_sensing, r.mi_isac_down, r.mi_isac_up, r.rate_comm], rel=1e-12)

    tiny = Allocation(tau=alloc.tau, power=np.array([1e-12, 1e-12, 1e-12]))
    assert np.all(qos_slacks(tiny, co, params) < 0.0)

    slacks = qos_slacks(alloc, co, params)
    direct = np.array([r.mi_sensing - 5e6, r.mi_isac_down - 20e6,
                       r.mi_isac_up - 5e6, r.rate_comm - 20e6])
    assert np.sign(slacks) == pytest.approx(np.sign(direct))
    assert slacks == pytest.approx(direct, rel=1e-12)


def fd_gradient(f, z, rel_step=1e-6):
    g = np.zeros_like(z)
    for i in range(z.size):
        h = rel_step * max(abs(z[i]), 1e-3)
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        g[i] = (f(zp) - f(zm)) / (2.0 * h)
    return g


def test_gradient_vs_finite_differences(params):
    rng = np.random.default_rng(11)
    checked = 0
    for seed in range(40):
        scn = sample_scenario(params, seed)
        co = build_link_coefficients(scn, params)
        for _ in range(3):
            alloc = random_interior_allocation(rng, params.p_max)
            z = np.concatenate([alloc.tau, alloc.power])

            def f(zv):
                return aggregate_objective(
                    Allocation(tau=zv[:3], power=zv[3:]), co, params)

            g_an = gradient_objective(alloc, co, params)
            g_fd = fd_gradient(f, z)
            scale = np.max(np.abs(g_an))
            assert g_an == pytest.approx(g_fd, abs=1e-5 * scale)
            checked += 1
    assert checked >= 100


def test_gradient_decoupled_streams(params):
    p_sel = dataclasses.replace(params, priorities_gamma=(1.0, 0.0, 0.0))
    scn = sample_scenario(params, 8)
    co = build_link_coefficients(scn, params)
    alloc = Allocation(tau=np.array([0.3, 0.4, 0.3]), power=np.array([10.0, 15.0, 14.0]))
    g = gradient_objective(alloc, co, p_sel)
    assert g[1] == g[2] == g[4] == g[5] == 0.0
    assert g[0] > 0.0 and g[3] > 0.0


def test_euler_identity_per_stream():
    # degree-1 homogeneity: x M_x + q M_q = M for every stream form
    rng = np.random.default_rng(5)
    w = 1e8
    for _ in range(50):
        x, q, a, b, c = random_coeff_point(rng)
        v = mi_clutter(x, q, a, b, c, w)

        def f(zv):
            return mi_clutter(zv[0], zv[1], a, b, c, w)

        g = fd_gradient(f, np.array([x, q]), rel_step=1e-7)
        assert x * g[0] + q * g[1] == pytest.approx(v, rel=1e-5)


def fd_hessian(f, z, rel_step=1e-4):
    n = z.size
    h = np.array([rel_step * max(abs(v), 1e-4) for v in z])
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            zpp, zpm, zmp, zmm = z.copy(), z.copy(), z.copy(), z.copy()
            zpp[[i, j]] += [h[i], h[j]] if i != j else [2 * h[i], 0]
            if i == j:
                zpp = z.copy()
                zpp[i] += h[i]
                zmm = z.copy()
                zmm[i] -= h[i]
                out[i, i] = (f(zpp) - 2 * f(z) + f(zmm)) / h[i] ** 2
            else:
                zpm[i] += h[i]
                zpm[j] -= h[j]
                zmp[i] -= h[i]
                zmp[j] += h[j]
                zmm[i] -= h[i]
                zmm[j] -= h[j]
                out[i, j] = (f(zpp) - f(zpm) - f(zmp) + f(zmm)) / (4 * h[i] * h[j])
    return out


def test_hessian_mi_vs_finite_differences():
    rng = np.random.default_rng(17)
    w = 1e8
    for _ in range(100):
        x, q, a, b, c = random_coeff_point(rng)
        h_an = hessian_mi(x, q, a, b, c, w)

        def f(zv):
            return mi_clutter(zv[0], zv[1], a, b, c, w)

        h_fd = fd_hessian(f, np.array([x, q]))
        scale = np.max(np.abs(h_an))
        assert h_an == pytest.approx(h_fd, abs=1e-4 * scale)


def test_hessian_structure():
    rng = np.random.default_rng(23)
    w = 1e8
    for _ in range(100):
        x, q, a, b, c = random_coeff_point(rng)
        h = hessian_mi(x, q, a, b, c, w)
        assert h[0, 0] < 0.0
        assert h[0, 1] == h[1, 0]
        norm = np.linalg.norm(h)
        assert abs(np.linalg.det(h)) <= 1e-8 * norm ** 2
        # negative semidefinite: largest eigenvalue at numerical zero
        assert np.linalg.eigvalsh(h).max() <= 1e-8 * norm
        # homogeneity null direction
        assert h @ np.array([x, q]) == pytest.approx([0.0, 0.0], abs=1e-10 * norm)


def test_hessian_clean_is_b0_reduction():
    rng = np.random.default_rng(29)
    w = 1e8
    for _ in range(30):
        x, q, d, _, e = random_coeff_point(rng)
        h1 = hessian_clean(x, q, d, e, w)
        h2 = hessian_mi(x, q, d, 0.0, e, w)
        assert h1 == pytest.approx(h2, rel=1e-15)
        assert h1[0, 0] < 0.0
        assert abs(np.linalg.det(h1)) <= 1e-8 * np.linalg.norm(h1) ** 2


def test_aggregate_homogeneity(params):
    rng = np.random.default_rng(31)
    for seed in range(10):
        scn = sample_scenario(params, seed)
        co = build_link_coefficients(scn, params)
        tau = rng.dirichlet((2.0, 2.0, 2.0)) * 0.4  # room to scale up
        power = rng.uniform(1.0, 5.0, size=3)
        v1 = aggregate_objective(Allocation(tau=tau, power=power), co, params)
        for t in (0.5, 2.0):
            vt = aggregate_objective(Allocation(tau=t * tau, power=t * power), co, params)
            assert vt == pytest.approx(t * v1, rel=1e-9)


def test_aggregate_concavity(params):
    rng = np.random.default_rng(37)
    scn = sample_scenario(params, 6)
    co = build_link_coefficients(scn, params)
    for _ in range(200):
        a1 = random_interior_allocation(rng, params.p_max)
        a2 = random_interior_allocation(rng, params.p_max)
        th = rng.uniform(0.1, 0.9)
        mid = Allocation(tau=th * a1.tau + (1 - th) * a2.tau,
                         power=th * a1.power + (1 - th) * a2.power)
        f_mid = aggregate_objective(mid, co, params)
        f_bound = (th * aggregate_objective(a1, co, params)
                   + (1 - th) * aggregate_objective(a2, co, params))
        assert f_mid >= f_bound - 1e-9 * abs(f_mid)


def test_aggregate_monotone_in_power(params):
    scn = sample_scenario(params, 6)
    co = build_link_coefficients(scn, params)
    base = Allocation(tau=np.array([0.3, 0.4, 0.3]), power=np.array([5.0, 5.0, 5.0]))
    v0 = aggregate_objective(base, co, params)
    for i in range(3):
        power = base.power.copy()
        power[i] *= 2.0
        assert aggregate_objective(Allocation(base.tau, power), co, params) > v0
