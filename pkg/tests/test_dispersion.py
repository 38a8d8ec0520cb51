"""Minimal speed, decay-rate roots, closed-form bounds, convexity."""
import numpy as np
import pytest

from kpplab import (
    HypothesisViolation,
    SpeedBelowCritical,
    dispersion_curve,
    kappa,
    minimal_speed,
    mu_roots,
    require_supercritical,
    speed_bounds_check,
)

# frozen against an independent dense-eig + scalar-minimization run
MIX_C_STAR = 4.392756820976027
MIX_MU_STAR = 0.6077992037718178


def test_minimal_speed_equal_diffusion_closed_form(eq2):
    # d = 1, lambda_PF = 1: speed(mu) = (mu^2 + 1)/mu, minimized at mu = 1
    rep = minimal_speed(eq2)
    assert abs(rep.c_star - 2.0) <= 1e-10
    assert abs(rep.mu_star - 1.0) <= 1e-6
    assert abs(rep.lambda_pf - 1.0) <= 1e-12
    # equal diffusion: kappa_mu = -(mu^2 + lambda_PF) exactly
    assert abs(rep.kappa_star + rep.mu_star ** 2 + rep.lambda_pf) <= 1e-9


def test_minimal_speed_mixed_diffusion_frozen(mix):
    rep = minimal_speed(mix)
    assert abs(rep.c_star - MIX_C_STAR) <= 1e-8
    assert abs(rep.mu_star - MIX_MU_STAR) <= 1e-6
    assert abs(rep.lambda_pf - 1.5) <= 1e-12


def test_minimal_speed_needs_positive_perron_root(ext):
    with pytest.raises(HypothesisViolation):
        minimal_speed(ext)


def test_mu_roots_quadratic_closed_form(eq2):
    rep = minimal_speed(eq2)
    # (mu^2+1)/mu = 2.5  <=>  mu in {1/2, 2}
    roots = mu_roots(eq2, 2.5, rep)
    assert len(roots) == 2
    assert abs(roots[0] - 0.5) <= 1e-9
    assert abs(roots[1] - 2.0) <= 1e-9
    # at the minimal speed a single tangency root
    assert mu_roots(eq2, rep.c_star, rep) == (rep.mu_star,)
    # below it, none
    assert mu_roots(eq2, 1.9, rep) == ()


def test_mu_roots_surround_the_minimizer(mix):
    rep = minimal_speed(mix)
    for c in (1.05 * rep.c_star, 1.5 * rep.c_star, 3.0 * rep.c_star):
        r1, r2 = mu_roots(mix, c, rep)
        assert 0.0 < r1 < rep.mu_star < r2
        # both really solve -kappa_mu/mu = c
        for mu in (r1, r2):
            kap, _ = kappa(mix, mu)
            assert abs(-kap / mu - c) <= 1e-8 * max(1.0, c)


def test_speed_bounds_equal_diffusion_degenerates_to_equality(eq2):
    rep = minimal_speed(eq2)
    checks = {b.name: b for b in speed_bounds_check(eq2, rep)}
    assert checks["lower_sandwich"].satisfied
    assert not checks["lower_sandwich"].strict
    assert abs(checks["lower_sandwich"].slack) <= 1e-9
    assert checks["upper_sandwich"].satisfied
    assert checks["first_order_identity"].satisfied
    assert all(b.satisfied for b in checks.values())


def test_speed_bounds_mixed_diffusion_are_strict(mix):
    rep = minimal_speed(mix)
    checks = {b.name: b for b in speed_bounds_check(mix, rep)}
    assert checks["lower_sandwich"].strict
    assert checks["lower_sandwich"].slack > 1e-3
    assert checks["upper_sandwich"].slack > 1e-3
    assert all(b.satisfied for b in checks.values())
    # sandwich recomputed directly
    lam = rep.lambda_pf
    assert 2.0 * np.sqrt(mix.d.min() * lam) < rep.c_star \
        < 2.0 * np.sqrt(mix.d.max() * lam)


def test_first_order_identity_on_random_models(make_random_model):
    # mu*^2 <d> + <r> = mu* c* with Perron-vector weights; holds to the
    # precision of the Perron residual irrespective of mu* localization
    for seed in range(10):
        m = make_random_model(seed)
        rep = minimal_speed(m)
        ident = rep.mu_star ** 2 * rep.d_avg + rep.r_avg \
            - rep.mu_star * rep.c_star
        assert abs(ident) <= 1e-8, seed
        checks = speed_bounds_check(m, rep)
        assert all(b.satisfied for b in checks), (seed, checks)
        # the growth/exchange split L = diag(r) + M leaves M with zero
        # column sums, and <r> is the r-vector under the same weights
        assert np.abs(rep.m_matrix.sum(axis=0)).max() <= 1e-12
        assert np.allclose(np.diag(rep.r) + rep.m_matrix, m.L)


def test_dispersion_curve_is_convex(eq2, mix, gp):
    for m in (eq2, mix, gp):
        curve = dispersion_curve(m, 1e-2, 1e2, 160)
        assert curve.is_convex()
        assert curve.mu.shape == curve.speed.shape == (160,)
        # the sampled minimum cannot beat the reported one
        rep = minimal_speed(m)
        assert curve.speed.min() >= rep.c_star - 1e-9


def test_dispersion_curve_guards():
    from kpplab import Model, LotkaVolterra
    m = Model(np.ones(2), np.array([[0.9, 0.1], [0.1, 0.9]]),
              LotkaVolterra(np.ones((2, 2))))
    with pytest.raises(HypothesisViolation):
        dispersion_curve(m, 1.0, 0.5)
    with pytest.raises(HypothesisViolation):
        dispersion_curve(m, 1e-2, 1e2, count=2)


def test_require_supercritical(eq2):
    rep = minimal_speed(eq2)
    require_supercritical(rep, 2.5)          # fine
    with pytest.raises(SpeedBelowCritical):
        require_supercritical(rep, rep.c_star)   # tangency is not enough
    with pytest.raises(SpeedBelowCritical):
        require_supercritical(rep, 1.0)
