"""Positive constant steady states and the nonexistence certificate."""
import numpy as np
import pytest

from kpplab import (
    HypothesisViolation,
    find_constant_steady,
    nonexistence_certificate,
    reaction,
    saturation_vector,
)

# frozen from an independent dense nonlinear solve
ASYM_V = np.array([0.6886744871810924, 0.7414316070132948])


def test_symmetric_linear_state_is_exact(eq2):
    ss = find_constant_steady(eq2)
    assert np.max(np.abs(ss.v - 0.5)) <= 1e-12
    assert ss.residual <= 1e-11
    assert ss.distinct_count >= 1


def test_asymmetric_state_matches_frozen(asym):
    ss = find_constant_steady(asym)
    assert np.max(np.abs(ss.v - ASYM_V)) <= 1e-10


def test_quadratic_state_is_positive_and_boxed(gp):
    ss = find_constant_steady(gp)
    sat = saturation_vector(gp)
    assert ss.v.min() > 0.0
    assert np.all(ss.v <= sat.k * (1.0 + 1e-9))
    assert np.max(np.abs(reaction(gp, ss.v))) <= 1e-10


def test_no_state_without_positive_perron_root(ext):
    with pytest.raises(HypothesisViolation):
        find_constant_steady(ext)
    cert = nonexistence_certificate(ext)
    assert cert["certified"]
    assert abs(cert["lambda_pf"] + 0.3) <= 1e-10
    assert cert["ray_scan_min_scaled_residual"] > 0.0
    assert cert["scope"] == "strictly positive constant states"


def test_certificate_declines_when_root_is_positive(eq2):
    cert = nonexistence_certificate(eq2)
    assert not cert["certified"]
    assert cert["lambda_pf"] > 0.0


def test_random_models_have_certified_states(make_random_model):
    for seed in range(10):
        m = make_random_model(seed)
        sat = saturation_vector(m)
        ss = find_constant_steady(m, sat)
        assert ss.v.min() > 0.0, seed
        assert np.all(ss.v <= sat.k * (1.0 + 1e-9)), seed
        assert np.max(np.abs(reaction(m, ss.v))) <= 1e-9, seed
