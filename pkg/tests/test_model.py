"""Structural validation, saturation constants, and model serialization."""
import numpy as np
import pytest

from kpplab import (
    Custom,
    GrossPitaevskii,
    HypothesisViolation,
    ConfigError,
    LotkaVolterra,
    Model,
    absorbing_bound,
    alpha_half,
    model_from_dict,
    model_from_json,
    model_to_dict,
    model_to_json,
    reaction,
    reaction_jacobian,
    saturation_vector,
    validate,
)


# ---------------------------------------------------------------------------
# validation statuses
# ---------------------------------------------------------------------------

def test_validate_matrix_competitions_all_exact(eq2, gp):
    for model in (eq2, gp):
        rep = validate(model)
        assert rep.ok
        assert rep["linear_coupling"].status == "pass"
        assert rep["competition_range"].status == "pass"
        assert rep["competition_origin"].status == "pass"
        assert rep["competition_growth"].status == "pass"


def test_validate_custom_competition_is_sampled():
    # a genuinely nonlinear field with mixing, so each component keeps a
    # positive growth floor along every cone ray (axes included)
    Cm = np.array([[1.0, 0.5], [0.5, 1.0]])
    comp = Custom(lambda v: Cm @ (v + v ** 3), delta=1.0,
                  floor=np.array([0.45, 0.45]))
    m = Model(np.ones(2), np.array([[0.9, 0.1], [0.1, 0.9]]), comp)
    rep = validate(m)
    assert rep.ok
    assert rep["competition_range"].status == "sampled-pass"
    assert rep["competition_growth"].status == "sampled-pass"


def test_validate_flags_negative_rates():
    comp = Custom(lambda v: v - 0.5, delta=1.0, floor=np.array([0.1, 0.1]))
    m = Model(np.ones(2), np.array([[0.9, 0.1], [0.1, 0.9]]), comp)
    rep = validate(m)
    assert not rep.ok
    assert rep["competition_range"].status == "fail"
    # nonzero at the origin too
    assert rep["competition_origin"].status == "fail"


def test_validate_flags_sublinear_growth():
    comp = Custom(lambda v: np.sqrt(np.abs(v)), delta=1.0,
                  floor=np.array([1.0, 1.0]))
    m = Model(np.ones(2), np.array([[0.9, 0.1], [0.1, 0.9]]), comp)
    rep = validate(m)
    assert rep["competition_growth"].status == "fail"
    assert not rep.ok


def test_validate_flags_reducible_coupling():
    comp = LotkaVolterra(np.ones((2, 2)))
    m = Model(np.ones(2), np.array([[0.5, 0.0], [0.0, 0.5]]), comp)
    rep = validate(m)
    assert rep["linear_coupling"].status == "fail"


# ---------------------------------------------------------------------------
# model construction guards
# ---------------------------------------------------------------------------

def test_model_rejects_bad_shapes_and_signs():
    comp = LotkaVolterra(np.ones((2, 2)))
    L = np.array([[0.9, 0.1], [0.1, 0.9]])
    with pytest.raises(HypothesisViolation):
        Model(np.array([1.0, -1.0]), L, comp)          # negative diffusivity
    with pytest.raises(HypothesisViolation):
        Model(np.array([1.0, 1.0, 1.0]), L, comp)      # length mismatch
    with pytest.raises(HypothesisViolation):
        Model(np.ones(1), np.array([[1.0]]),
              LotkaVolterra(np.ones((1, 1))))          # scalar system
    with pytest.raises(HypothesisViolation):
        LotkaVolterra(np.array([[1.0, 0.0], [1.0, 1.0]]))   # zero entry
    with pytest.raises(HypothesisViolation):
        Custom(lambda v: v, delta=0.5, floor=np.ones(2))    # exponent < 1
    with pytest.raises(HypothesisViolation):
        Custom(lambda v: v, delta=1.0, floor=np.array([1.0, 0.0]))


# ---------------------------------------------------------------------------
# saturation levels
# ---------------------------------------------------------------------------

def test_saturation_linear_vertex_values(eq2, asym):
    # linear competition: the per-component supremum is max_j L_ij / C_ij,
    # attained on an axis — closed form, no sampling, 1.05 margin on top
    sat = saturation_vector(eq2)
    assert np.allclose(sat.k, 1.05 * 0.9, rtol=1e-12)
    assert sat.samples_used == 0

    sat2 = saturation_vector(asym)
    expect = 1.05 * np.array([0.75, 0.9])
    assert np.allclose(sat2.k, expect, rtol=1e-12)


def test_saturation_quadratic_frozen(gp):
    sat = saturation_vector(gp)
    frozen = np.array([0.7601788777748939, 0.8529312526596033])
    assert np.allclose(sat.k / 1.05, frozen, rtol=2e-3)


def test_alpha_half_closed_forms(eq2, gp):
    # linear: lam / (2 max row sum C); quadratic: the square root of that
    assert abs(alpha_half(eq2) - 0.25) <= 1e-12
    assert abs(alpha_half(gp) - 0.5368349004757605) <= 1e-12


def test_alpha_half_requires_positive_perron_root(ext):
    with pytest.raises(HypothesisViolation):
        alpha_half(ext)


def test_saturation_caps_reaction(make_random_model):
    # on the box [0, k], pinning any component at its level makes that
    # component's reaction nonpositive -- the absorbing-set mechanism
    rng = np.random.default_rng(7)
    for seed in range(12):
        m = make_random_model(seed)
        sat = saturation_vector(m)
        for _ in range(20):
            v = rng.uniform(0.0, 1.0, size=m.n) * sat.k
            i = rng.integers(m.n)
            v[i] = sat.k[i]
            assert reaction(m, v)[i] <= 1e-9, (seed, i)


def test_absorbing_bound_componentwise(eq2):
    sat = saturation_vector(eq2)
    m0 = np.array([2.0, 0.1])
    cap = absorbing_bound(sat, m0)
    assert cap[0] == 2.0 and cap[1] == sat.k[1]
    with pytest.raises(HypothesisViolation):
        absorbing_bound(sat, np.ones(3))


def test_reaction_jacobian_matches_finite_differences(gp, asym):
    rng = np.random.default_rng(3)
    for m in (gp, asym):
        v = rng.uniform(0.1, 0.8, size=m.n)
        J = reaction_jacobian(m, v)
        Jfd = np.empty_like(J)
        h = 1e-7
        for j in range(m.n):
            vp = v.copy(); vp[j] += h
            vm = v.copy(); vm[j] -= h
            Jfd[:, j] = (reaction(m, vp) - reaction(m, vm)) / (2 * h)
        assert np.allclose(J, Jfd, atol=1e-6)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_round_trip_through_dict_and_json(eq2, gp):
    for m in (eq2, gp):
        data = model_to_dict(m)
        assert set(data) == {"n", "d", "L", "competition"}
        assert set(data["competition"]) == {"variant", "C"}
        assert data["n"] == m.n
        m2 = model_from_dict(data)
        assert np.array_equal(m2.d, m.d)
        assert np.array_equal(m2.L, m.L)
        assert type(m2.competition) is type(m.competition)
        assert np.array_equal(m2.competition.C, m.competition.C)
        m3 = model_from_json(model_to_json(m))
        assert np.array_equal(m3.L, m.L)


def test_from_dict_accepts_kind_alias_and_checks_n(eq2):
    data = model_to_dict(eq2)
    aliased = dict(data)
    aliased["competition"] = {"kind": data["competition"]["variant"],
                              "C": data["competition"]["C"]}
    m2 = model_from_dict(aliased)
    assert type(m2.competition) is type(eq2.competition)
    conflicted = dict(data)
    conflicted["competition"] = dict(data["competition"],
                                     kind="gross_pitaevskii")
    with pytest.raises(ConfigError):
        model_from_dict(conflicted)
    mismatched = dict(data); mismatched["n"] = eq2.n + 1
    with pytest.raises(ConfigError):
        model_from_dict(mismatched)


def test_custom_competition_is_not_serializable():
    comp = Custom(lambda v: v, delta=1.0, floor=np.ones(2))
    m = Model(np.ones(2), np.array([[0.9, 0.1], [0.1, 0.9]]), comp)
    with pytest.raises(ConfigError):
        model_to_dict(m)


def test_from_dict_rejects_unknown_fields(eq2):
    data = model_to_dict(eq2)
    bad = dict(data); bad["extra"] = 1
    with pytest.raises(ConfigError):
        model_from_dict(bad)
    bad2 = dict(data)
    bad2["competition"] = dict(data["competition"], delta=2.0)
    with pytest.raises(ConfigError):
        model_from_dict(bad2)
    with pytest.raises(ConfigError):
        model_from_dict({"d": [1, 1], "L": [[0.9, 0.1], [0.1, 0.9]],
                         "competition": {"kind": "nope", "C": [[1, 1], [1, 1]]}})
    with pytest.raises(ConfigError):
        model_from_dict({"d": [1, 1]})
