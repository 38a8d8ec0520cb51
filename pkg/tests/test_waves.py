"""Envelope algebra, barrier inequalities, truncated-profile solves."""
import math

import numpy as np
import pytest

from kpplab import (
    HypothesisViolation,
    SpeedBelowCritical,
    WaveProfile,
    build_envelope,
    default_domain,
    kappa,
    minimal_speed,
    mu_roots,
    perron_frobenius,
    solve_truncated,
    super_solution,
    wave_diagnostics,
)

# eq2 at c = 2.5: decay rates 1/2 and 2, eps = (2 - 1/2 capped by mu1)/2
EQ2_C = 2.5
EQ2_A = 4.525483399593568
EQ2_XI_CROSS = 6.038897607686432


def test_super_solution_solves_linearization(eq2, mix):
    for model, c in ((eq2, 2.5), (mix, 1.1 * minimal_speed(mix).c_star)):
        mu1 = mu_roots(model, c)[0]
        n = super_solution(model, c, [0.0])[:, 0]
        # e^{-mu xi} n solves the linearization iff (mu^2 D + L) n = mu c n
        lhs = (mu1 ** 2 * np.diag(model.d) + model.L) @ n
        assert np.max(np.abs(lhs - mu1 * c * n)) <= 1e-10
        # and the profile is the plain exponential in xi
        xi = np.array([-1.0, 0.0, 2.0])
        prof = super_solution(model, c, xi)
        assert np.allclose(prof, np.exp(-mu1 * xi)[None, :] * n[:, None],
                           rtol=1e-13)


def test_super_solution_critical_and_subcritical(eq2):
    rep = minimal_speed(eq2)
    prof = super_solution(eq2, rep.c_star, [0.0], rep)   # tangency root ok
    assert prof.shape == (2, 1)
    with pytest.raises(SpeedBelowCritical):
        super_solution(eq2, 1.5, [0.0], rep)


def test_envelope_constants_recomputed(eq2):
    env = build_envelope(eq2, EQ2_C)
    assert abs(env.mu1 - 0.5) <= 1e-9
    assert abs(env.mu2 - 2.0) <= 1e-9
    assert abs(env.eps - 0.25) <= 1e-9          # half of min(mu2-mu1, mu1)
    assert abs(env.A - EQ2_A) <= 1e-9 * EQ2_A
    assert np.allclose(env.xi_cross, EQ2_XI_CROSS, atol=1e-7)

    # independent reassembly from spectral quantities only
    kap1 = -perron_frobenius(env.mu1 ** 2 * np.diag(eq2.d) + eq2.L).value
    kap2 = -perron_frobenius((env.mu1 + env.eps) ** 2 * np.diag(eq2.d)
                             + eq2.L).value
    n1 = perron_frobenius(env.mu1 ** 2 * np.diag(eq2.d) + eq2.L).vector
    n2 = perron_frobenius((env.mu1 + env.eps) ** 2 * np.diag(eq2.d)
                          + eq2.L).vector
    gap = kap2 / (env.mu1 + env.eps) - kap1 / env.mu1
    assert gap > 0.0
    M = eq2.competition.C @ n1
    A = max(np.max(n2 / n1), np.max(M * n1 / ((env.mu1 + env.eps) * gap * n2)))
    assert abs(env.A - A) <= 1e-12 * A


def test_envelope_ordering_and_support(eq2):
    env = build_envelope(eq2, EQ2_C)
    xi = np.linspace(-20.0, 40.0, 400)
    lo, hi = env.lower(xi), env.upper(xi)
    assert np.all(lo <= hi + 1e-15)
    assert np.all(lo >= 0.0)
    assert np.all(hi > 0.0)
    # the lower barrier turns on exactly past its crossing point
    assert np.all(env.lower(env.xi_cross.max() - 0.1) == 0.0)
    assert np.all(env.lower(env.xi_cross.max() + 0.5) > 0.0)


def _wave_operator(model, c, phi, xi, h):
    """-D phi'' - c phi' - L phi + c(phi) o phi by central differences."""
    d2 = (phi(xi + h) - 2.0 * phi(xi) + phi(xi - h)) / h ** 2
    d1 = (phi(xi + h) - phi(xi - h)) / (2.0 * h)
    val = phi(xi)
    comp = model.competition.field(val)
    return (-model.d[:, None] * d2 - c * d1 - model.L @ val + comp * val)


def test_barriers_satisfy_differential_inequalities(eq2):
    env = build_envelope(eq2, EQ2_C)
    h = 1e-3
    xi = np.linspace(float(env.xi_cross.max()) + 0.1,
                     float(env.xi_cross.max()) + 10.0, 300)
    # upper barrier: exact solution of the linearization, so the full
    # operator equals the nonnegative competition term
    lin = _wave_operator(eq2, EQ2_C, env.upper, xi, h) \
        - eq2.competition.field(env.upper(xi)) * env.upper(xi)
    assert np.max(np.abs(lin)) <= 5e-6
    # lower barrier: genuine sub-solution on its positivity set
    sub = _wave_operator(eq2, EQ2_C, env.lower, xi, h)
    assert float(sub.max()) <= 5e-6


def test_envelope_guards(eq2):
    rep = minimal_speed(eq2)
    with pytest.raises(SpeedBelowCritical):
        build_envelope(eq2, 1.5)
    with pytest.raises(SpeedBelowCritical):
        build_envelope(eq2, rep.c_star)        # tangency: one root only
    with pytest.raises(HypothesisViolation):
        build_envelope(eq2, EQ2_C, eps=0.6)    # above min(mu2-mu1, mu1)
    with pytest.raises(HypothesisViolation):
        build_envelope(eq2, EQ2_C, eps=0.0)
    with pytest.raises(HypothesisViolation):
        solve_truncated(eq2, EQ2_C, envelope=None)   # R is then mandatory


def test_default_domain(eq2):
    env = build_envelope(eq2, EQ2_C)
    R, m = default_domain(env)
    assert R == 73.0
    assert m == 4097
    assert math.log2(m - 1) == int(math.log2(m - 1))


def test_truncated_wave_is_certified(eq2):
    prof = solve_truncated(eq2, EQ2_C, R=60.0)
    assert prof.bracket_ok
    assert prof.residual < 1e-9
    assert prof.method == "newton"
    assert prof.p.shape == (2, prof.x.size)

    diag = wave_diagnostics(eq2, prof, v_star=np.array([0.5, 0.5]),
                            saturation=np.array([0.945, 0.945]))
    assert diag["nonnegative"]
    assert diag["bounded_above"]
    assert all(diag["decreasing_tail"])
    assert diag["front_vanishing"]
    assert diag["back_floor"]["ok"]
    assert not diag["orientation_flipped"]
    assert not diag["constant_profile"]
    # tail decays at the slow rate mu1 = 1/2
    for rate in diag["decay_rate"]:
        assert abs(rate - 0.5) <= 0.025


def test_explicit_bc_and_warm_start_reproduce(eq2):
    env = build_envelope(eq2, EQ2_C)
    prof = solve_truncated(eq2, EQ2_C, R=60.0, envelope=env)
    bc = (env.lower(-60.0)[:, 0], env.lower(60.0)[:, 0])
    again = solve_truncated(eq2, EQ2_C, R=60.0, envelope=env, bc=bc,
                            init=prof.p)
    assert np.max(np.abs(again.p - prof.p)) <= 1e-10


def test_truncation_insensitivity(eq2):
    # doubling the half-width at fixed spacing moves the shared-window
    # values by less than the barrier-tail scale
    p60 = solve_truncated(eq2, EQ2_C, R=60.0, m=4097)
    p120 = solve_truncated(eq2, EQ2_C, R=120.0, m=8193)
    h = p60.x[1] - p60.x[0]
    assert abs((p120.x[1] - p120.x[0]) - h) <= 1e-14
    half = int(round(30.0 / h))
    sel60 = slice(half, 3 * half + 1)          # [-30, 30] inside [-60, 60]
    sel120 = slice(3 * half, 5 * half + 1)     # [-30, 30] inside [-120, 120]
    assert np.allclose(p60.x[sel60], p120.x[sel120], atol=1e-10)
    # the truncation pins the translate only through boundary terms, so
    # doubling R re-selects it within ~1e-3 in xi; with front slopes of
    # order 0.2 that caps the pointwise move well under 5e-4
    assert np.max(np.abs(p60.p[:, sel60] - p120.p[:, sel120])) <= 5e-4


def test_grid_refinement_converges(eq2):
    coarse = solve_truncated(eq2, EQ2_C, R=60.0, m=4097)
    fine = solve_truncated(eq2, EQ2_C, R=60.0, m=8193)
    assert np.allclose(fine.x[::2], coarse.x, atol=1e-12)
    assert np.max(np.abs(fine.p[:, ::2] - coarse.p)) <= 1e-3


def test_quadratic_competition_wave(gp):
    rep = minimal_speed(gp)
    prof = solve_truncated(gp, 1.2 * rep.c_star, report=rep)
    assert prof.bracket_ok
    assert prof.residual < 1e-8
    diag = wave_diagnostics(gp, prof)
    assert diag["nonnegative"] and all(diag["decreasing_tail"])


def test_diagnostics_flag_defects(eq2):
    prof = solve_truncated(eq2, EQ2_C, R=60.0)
    # reflected profile: the front points the wrong way
    refl = WaveProfile(prof.c, prof.R, prof.x, prof.p[:, ::-1].copy(),
                       prof.residual, prof.method, None, None,
                       prof.solver_rounds)
    d = wave_diagnostics(eq2, refl)
    assert d["orientation_flipped"]
    assert not d["front_vanishing"]
    # constant profile: no front at all
    flat = WaveProfile(prof.c, prof.R, prof.x,
                       0.5 * np.ones_like(prof.p), 0.0, "newton", None,
                       None, 1)
    d2 = wave_diagnostics(eq2, flat)
    assert d2["constant_profile"]
    assert not d2["front_vanishing"]
    assert math.isnan(d2["decay_rate"][0])


def test_subcritical_free_run_is_a_ghost(eq2):
    # below the minimal speed the decay rates are complex, so a free
    # (envelope-less) solve can only produce an oscillatory artifact;
    # the diagnostics must expose it instead of blessing it
    prof = solve_truncated(eq2, 1.5, R=30.0, envelope=None, tol=1e-8)
    diag = wave_diagnostics(eq2, prof, v_star=np.array([0.5, 0.5]))
    assert prof.bracket_ok is None
    assert not diag["nonnegative"]
    assert diag["min_value"] < -1e-6
