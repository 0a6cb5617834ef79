"""Coverage probability: analytic form, Monte Carlo, Laplace functional."""

import math

import numpy as np
import pytest

from uavnet.a2a import (A2aScenario, AirspaceVolume,
                        averaged_sinr_sweep, coverage_probability_analytic,
                        coverage_probability_mc, interference_laplace)
from uavnet.errors import DomainError, QuadratureError, UnsupportedFading
from uavnet.fading import gamma_power

VOL = AirspaceVolume()
DENS20 = 20.0 / VOL.volume_V


def _scen(**kw):
    base = dict(density_lambda=DENS20)
    base.update(kw)
    return A2aScenario(**base)


# independent references for the default scenario (8 W, 20 UAVs,
# delta = 2) at three thresholds, computed with scipy.integrate.quad
# (outer, epsrel 1e-9) over a scrambled-Sobol evaluation of the box
# interference integral (2^20 points); quadrature error estimate <= 1e-10
P_COV_REF = {
    7.0: 0.010967299511294357,
    10.0: 0.003980128658810247,
    14.0: 0.0010098772299355647,
}


def test_analytic_matches_independent_reference():
    # the implementation's inner absolute tolerance (1e-4 on the
    # exponent) bounds its relative error near 1e-4; observed agreement
    # is ~3e-4 relative at all three thresholds
    for theta_db, want in P_COV_REF.items():
        scen = _scen(threshold_theta=10.0 ** (theta_db / 10.0))
        res = coverage_probability_analytic(scen, VOL)
        assert res.p_cov == pytest.approx(want, rel=1e-3), theta_db
        assert res.method == "analytic"


def test_analytic_agrees_with_mc():
    scen = _scen()
    ana = coverage_probability_analytic(scen, VOL)
    mc = coverage_probability_mc(scen, VOL, 30000, seed=99)
    tol = max(0.02, 3.0 * mc.std_error)
    assert abs(ana.p_cov - mc.p_cov) <= tol


def test_mc_reproducible_and_se():
    scen = _scen()
    a = coverage_probability_mc(scen, VOL, 30000, seed=5)
    b = coverage_probability_mc(scen, VOL, 30000, seed=5)
    c = coverage_probability_mc(scen, VOL, 30000, seed=6)
    assert a.p_cov == b.p_cov
    assert a.p_cov != c.p_cov
    assert a.std_error == pytest.approx(
        math.sqrt(a.p_cov * (1.0 - a.p_cov) / 30000), rel=1e-12)
    assert 0.0 <= a.p_cov <= 1.0


def test_mc_chunking_does_not_change_results():
    # crossing the 50k chunk boundary must not perturb earlier draws
    scen = _scen()
    small = coverage_probability_mc(scen, VOL, 60000, seed=7)
    again = coverage_probability_mc(scen, VOL, 60000, seed=7)
    assert small.p_cov == again.p_cov


def test_threshold_limits():
    # theta -> 0: every non-empty realization is covered
    lo = _scen(threshold_theta=1e-12)
    mc = coverage_probability_mc(lo, VOL, 3000, seed=1)
    assert mc.p_cov > 0.999
    ana = coverage_probability_analytic(lo, VOL, rel_tol=1e-6)
    assert ana.p_cov > 0.999999
    # enormous theta: nobody is covered
    hi = _scen(threshold_theta=1e12)
    assert coverage_probability_mc(hi, VOL, 3000, seed=2).p_cov == 0.0
    assert coverage_probability_analytic(hi, VOL).p_cov < 1e-6


def test_overwhelming_noise_kills_coverage():
    scen = _scen(noise_density_n0=1.0)
    assert coverage_probability_analytic(scen, VOL).p_cov < 1e-6
    assert coverage_probability_mc(scen, VOL, 2000, seed=3).p_cov == 0.0


def test_noise_free_scale_invariance():
    # with N = 0 the transmit power cancels from every SINR sample, so
    # scaling it by a power of two leaves the MC coverage bit-identical
    base = _scen(noise_density_n0=0.0, tx_power_Ps=4.0)
    quad = _scen(noise_density_n0=0.0, tx_power_Ps=16.0)
    a = coverage_probability_mc(base, VOL, 20000, seed=11)
    b = coverage_probability_mc(quad, VOL, 20000, seed=11)
    assert a.p_cov == b.p_cov


def test_monotone_in_threshold_and_density():
    # coverage falls as the threshold rises and as the sky fills up;
    # a loose outer tolerance is fine because adjacent grid values
    # differ by tens of percent
    thetas_db = [5.0, 8.0, 10.0, 12.0, 14.0]
    ps = [coverage_probability_analytic(
        _scen(threshold_theta=10.0 ** (t / 10.0)), VOL,
        rel_tol=1e-3).p_cov for t in thetas_db]
    assert all(a > b for a, b in zip(ps, ps[1:]))
    counts = [10.0, 20.0, 40.0]
    pd = [coverage_probability_analytic(
        _scen(density_lambda=c / VOL.volume_V), VOL,
        rel_tol=1e-3).p_cov for c in counts]
    assert all(a > b for a, b in zip(pd, pd[1:]))


def test_monotone_in_power_with_shared_nodes():
    # the power only enters through the noise term, a per-node factor
    # exp(-coef * N / (Ps Ga)); with identical quadrature nodes the
    # ordering is exact even though the differences sit near 1e-16
    ps = []
    evals = []
    for pw in (4.0, 8.0, 16.0):
        res = coverage_probability_analytic(_scen(tx_power_Ps=pw), VOL)
        ps.append(res.p_cov)
        evals.append(res.trials_or_quadrature_info["outer_evals"])
    assert evals[0] == evals[1] == evals[2]
    assert ps[0] <= ps[1] <= ps[2]


def test_laplace_trivial_argument():
    scen = _scen()
    assert interference_laplace(0.0, scen, VOL) == 1.0
    with pytest.raises(DomainError):
        interference_laplace(-1.0, scen, VOL)


def test_laplace_vanishing_density():
    scen = _scen(density_lambda=1e-30)
    lam_arg = (scen.threshold_theta * 500.0 ** 2 / scen.channel_gain_Ga)
    assert interference_laplace(lam_arg, scen, VOL) == pytest.approx(
        1.0, abs=1e-9)


def _laplace_mc(lam_arg, scen, vol, trials, seed):
    """Direct Monte Carlo of E[exp(-Lambda * I)] with exponential fades."""
    rng = np.random.default_rng(seed)
    x0, x1, y0, y1, z0, z1 = vol.bounds
    c = vol.center
    counts = rng.poisson(scen.density_lambda * vol.volume_V, trials)
    tot = int(counts.sum())
    pts = rng.uniform([x0, y0, z0], [x1, y1, z1], (tot, 3))
    rho = gamma_power(rng, 1.0, tot)
    r = np.linalg.norm(pts - c, axis=1)
    contrib = (lam_arg * scen.channel_gain_Ga * rho
               * r ** (-scen.pathloss_exp_delta))
    seg = np.repeat(np.arange(trials), counts)
    s = np.bincount(seg, weights=contrib, minlength=trials)
    vals = np.exp(-s)
    return float(vals.mean()), float(vals.std() / math.sqrt(trials))


def test_laplace_against_mc_moderate_argument():
    # at d = 50 m the factor is order one half, so a relative check is
    # meaningful
    scen = _scen()
    lam_arg = scen.threshold_theta * 50.0 ** 2 / scen.channel_gain_Ga
    want = interference_laplace(lam_arg, scen, VOL)
    got, se = _laplace_mc(lam_arg, scen, VOL, 100000, seed=21)
    assert 0.1 < want < 0.9
    assert abs(got - want) / want < 0.01
    assert abs(got - want) < 4.0 * se


def test_laplace_against_mc_large_argument():
    # at d = 500 m the factor is tiny; the quadrature and the MC must
    # agree in absolute terms (an MC of a ~1e-6 mean cannot support a
    # tight relative bound at this trial count)
    scen = _scen()
    lam_arg = scen.threshold_theta * 500.0 ** 2 / scen.channel_gain_Ga
    want = interference_laplace(lam_arg, scen, VOL)
    got, _ = _laplace_mc(lam_arg, scen, VOL, 100000, seed=22)
    assert want < 1e-3
    assert abs(got - want) < 0.01


def test_analytic_requires_exponential_fading():
    scen = _scen(fading_shape_iota=2.0)
    with pytest.raises(UnsupportedFading):
        coverage_probability_analytic(scen, VOL)
    # the MC engine accepts any iota >= 1
    res = coverage_probability_mc(scen, VOL, 2000, seed=4)
    assert 0.0 <= res.p_cov <= 1.0


def test_analytic_budget_exhaustion():
    with pytest.raises(QuadratureError):
        coverage_probability_analytic(_scen(), VOL, outer_budget=30)


def test_single_uav_no_interference_mean():
    # realizations with exactly one point see no interference, so their
    # mean dB SINR is a pure geometry average: compare the MC mean to a
    # deterministic midpoint-grid evaluation of E[10 log10(Ps Ga d^-2/N)]
    # for one uniform point in the box
    scen = _scen(density_lambda=1.0 / VOL.volume_V)
    rng_seeds = range(12000)
    vals = []
    from uavnet.a2a import sample_ppp, sinr
    from uavnet.errors import EmptyRealization
    for seed in rng_seeds:
        try:
            real = sample_ppp(VOL, scen.density_lambda, seed)
        except EmptyRealization:
            continue
        if real.points.shape[0] != 1:
            continue
        vals.append(10.0 * math.log10(sinr(real, scen)))
    vals = np.array(vals)
    assert vals.size > 3000

    n = 64
    xs = (np.arange(n) + 0.5) / n * 2000.0 - 1000.0
    zs = (np.arange(n) + 0.5) / n * 1000.0
    gx, gy, gz = np.meshgrid(xs, xs, zs, indexing="ij")
    d = np.sqrt(gx ** 2 + gy ** 2 + (gz - 500.0) ** 2)
    db = 10.0 * np.log10(scen.tx_power_Ps * scen.channel_gain_Ga
                         * d ** -2.0 / scen.noise_N)
    want = float(db.mean())
    sem = float(vals.std() / math.sqrt(vals.size))
    assert abs(vals.mean() - want) < max(3.0 * sem, 0.05)


def test_sinr_sweep_determinism_and_shape():
    scen = _scen()
    sweep1 = averaged_sinr_sweep([10.0 / 4e9, 40.0 / 4e9], scen, VOL,
                                 5000, seed=1234)
    sweep2 = averaged_sinr_sweep([10.0 / 4e9, 40.0 / 4e9], scen, VOL,
                                 5000, seed=1234)
    assert sweep1 == sweep2
    assert sweep1[0][1] > sweep1[1][1]  # denser sky, lower mean SINR
    with pytest.raises(ValueError):
        averaged_sinr_sweep([], scen, VOL, 100, seed=0)


def test_sinr_sweep_grid_independence():
    # dropping a grid point must not change the other points' values
    scen = _scen()
    full = averaged_sinr_sweep([10.0 / 4e9, 20.0 / 4e9, 40.0 / 4e9],
                               scen, VOL, 4000, seed=77)
    part = averaged_sinr_sweep([10.0 / 4e9, 40.0 / 4e9], scen, VOL,
                               4000, seed=77)
    assert full[0] == part[0]
    # the third point moved to index 1, so its draws differ by design;
    # the density value itself still matches
    assert part[1][0] == full[2][0]
