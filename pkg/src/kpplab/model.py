"""Model container, structural validation, and absorbing-set constants.

A model is ``u_t - D u_xx = L u - c(u) o u`` with positive diffusivities
``D = diag(d)``, an essentially nonnegative irreducible coupling matrix
``L``, and a competition field ``c`` that is nonnegative on the cone,
vanishes at the origin, and grows at least like a positive power along rays.
Three competition kinds are supported:

* :class:`LotkaVolterra` -- ``c(v) = C v`` with ``C`` entrywise positive,
* :class:`GrossPitaevskii` -- ``c(v) = C (v o v)``,
* :class:`Custom` -- a user callable plus its declared growth data.

The main quantitative export is :func:`saturation_vector`: a componentwise
constant ``k`` such that adding ``k_i e_i`` to any state on the cone makes
the i-th reaction strictly negative.  It upper-bounds every steady state and
caps simulations through :func:`absorbing_bound`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (ConfigError, HypothesisViolation, SamplingInconclusive)
from .spectral import check_essentially_nonnegative_irreducible, perron_frobenius

__all__ = [
    "LotkaVolterra",
    "GrossPitaevskii",
    "Custom",
    "Model",
    "CheckResult",
    "ValidationReport",
    "SaturationData",
    "validate",
    "saturation_vector",
    "alpha_half",
    "absorbing_bound",
    "reaction",
    "reaction_jacobian",
    "model_to_dict",
    "model_from_dict",
    "model_to_json",
    "model_from_json",
]

_SAMPLER_SEED = 20210628  # fixed: sampling must be reproducible run-to-run


def _positive_matrix(C, who: str) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise HypothesisViolation(f"{who}: competition matrix must be square")
    if not np.all(np.isfinite(C)) or C.min() <= 0.0:
        raise HypothesisViolation(
            f"{who}: competition matrix must be entrywise positive and finite")
    return C


@dataclass(frozen=True, eq=False)
class LotkaVolterra:
    """Linear competition ``c(v) = C v`` with entrywise positive ``C``."""

    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "C", _positive_matrix(self.C, "LotkaVolterra"))

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.C @ v

    def field(self, U: np.ndarray) -> np.ndarray:
        """Apply columnwise to an (N, m) array of states."""
        return self.C @ U


@dataclass(frozen=True, eq=False)
class GrossPitaevskii:
    """Quadratic competition ``c(v) = C (v o v)``."""

    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "C", _positive_matrix(self.C, "GrossPitaevskii"))

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.C @ (v * v)

    def field(self, U: np.ndarray) -> np.ndarray:
        return self.C @ (U * U)


@dataclass(frozen=True, eq=False)
class Custom:
    """User-supplied competition.

    Parameters
    ----------
    evaluator : callable
        Maps a length-N state to length-N rates.  May optionally accept an
        (N, m) array columnwise; if it does not, columns are looped.
    delta : float
        Declared growth exponent (>= 1): along rays,
        ``c_i(alpha n) >= alpha**delta * floor_i`` for alpha >= 1.
    floor : array_like
        Positive per-component growth floors.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    delta: float
    floor: np.ndarray

    def __post_init__(self):
        fl = np.asarray(self.floor, dtype=float).ravel()
        if fl.min() <= 0.0 or not np.all(np.isfinite(fl)):
            raise HypothesisViolation("Custom: growth floors must be positive")
        if self.delta < 1.0:
            raise HypothesisViolation("Custom: growth exponent must be >= 1")
        object.__setattr__(self, "floor", fl)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(v, dtype=float)), dtype=float)

    def field(self, U: np.ndarray) -> np.ndarray:
        try:
            out = np.asarray(self.evaluator(U), dtype=float)
            if out.shape == U.shape:
                return out
        except Exception:
            pass
        return np.stack([self(U[:, j]) for j in range(U.shape[1])], axis=1)


Competition = LotkaVolterra | GrossPitaevskii | Custom


@dataclass(frozen=True, eq=False)
class Model:
    """Reaction-diffusion system data: diffusivities, coupling, competition."""

    d: np.ndarray
    L: np.ndarray
    competition: Competition

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float).ravel()
        L = np.asarray(self.L, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise HypothesisViolation("coupling matrix must be square")
        if L.shape[0] < 2:
            raise HypothesisViolation("at least two components are required")
        if d.shape != (L.shape[0],):
            raise HypothesisViolation("diffusivity vector length must match "
                                      "the coupling matrix")
        if np.any(d <= 0.0) or not np.all(np.isfinite(d)):
            raise HypothesisViolation("diffusivities must be positive and finite")
        if not np.all(np.isfinite(L)):
            raise HypothesisViolation("coupling matrix has non-finite entries")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "L", L)

    @property
    def n(self) -> int:
        return self.L.shape[0]


def reaction(model: Model, v: np.ndarray) -> np.ndarray:
    """``L v - c(v) o v`` for a single state vector."""
    return model.L @ v - model.competition(v) * v


def reaction_jacobian(model: Model, v: np.ndarray) -> np.ndarray:
    """Jacobian of the reaction at ``v`` (analytic where available)."""
    comp = model.competition
    v = np.asarray(v, dtype=float)
    if isinstance(comp, LotkaVolterra):
        return model.L - np.diag(comp.C @ v) - np.diag(v) @ comp.C
    if isinstance(comp, GrossPitaevskii):
        return model.L - np.diag(comp.C @ (v * v)) - 2.0 * (np.diag(v) @ comp.C @ np.diag(v))
    n = v.size
    J = np.empty((n, n))
    for j in range(n):
        h = 1e-6 * max(1.0, abs(v[j]))
        vp = v.copy(); vp[j] += h
        vm = v.copy(); vm[j] -= h
        J[:, j] = ((comp(vp) * vp) - (comp(vm) * vm)) / (2.0 * h)
    return model.L - J


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str          # "pass" | "sampled-pass" | "fail"
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def validate(model: Model, samples: int = 200) -> ValidationReport:
    """Check the structural hypotheses; exact where possible, else sampled.

    Checks reported (in order): ``linear_coupling`` (essentially nonnegative
    and irreducible coupling), ``competition_range`` (the rates stay
    nonnegative on the cone), ``competition_origin`` (zero rates at the
    origin), ``competition_growth`` (at least power-delta growth along rays).
    """
    checks = []
    n = model.n
    comp = model.competition

    okL = check_essentially_nonnegative_irreducible(model.L)
    checks.append(CheckResult(
        "linear_coupling", "pass" if okL else "fail",
        "off-diagonal entries nonnegative and sparsity digraph strongly "
        "connected" if okL else "coupling matrix is not essentially "
        "nonnegative irreducible"))

    rng = np.random.default_rng(_SAMPLER_SEED)
    if isinstance(comp, (LotkaVolterra, GrossPitaevskii)):
        checks.append(CheckResult(
            "competition_range", "pass",
            "positive matrix action preserves the nonnegative cone"))
    else:
        V = rng.uniform(0.0, 10.0, size=(samples, n))
        worst = min(float(comp(v).min()) for v in V)
        ok = worst >= -1e-12
        checks.append(CheckResult(
            "competition_range", "sampled-pass" if ok else "fail",
            f"min sampled rate {worst:.3e} over {samples} cone points"))

    c0 = np.max(np.abs(comp(np.zeros(n))))
    ok0 = c0 <= 1e-14
    checks.append(CheckResult(
        "competition_origin", "pass" if ok0 else "fail",
        f"|c(0)|_inf = {c0:.3e}"))

    if isinstance(comp, LotkaVolterra):
        checks.append(CheckResult(
            "competition_growth", "pass",
            "linear rates: exponent 1 with floor min_j C_ij > 0"))
    elif isinstance(comp, GrossPitaevskii):
        checks.append(CheckResult(
            "competition_growth", "pass",
            "quadratic rates: exponent 2 with floor min_ij C_ij > 0"))
    else:
        dirs = np.abs(rng.standard_normal((max(20, samples // 10), n)))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        ok = True
        worst = math.inf
        for nv in dirs:
            for alpha in (1.0, 2.0, 4.0, 8.0, 16.0, 64.0):
                got = comp(alpha * nv)
                need = (alpha ** comp.delta) * comp.floor
                margin = float(np.min(got - need * (1.0 - 1e-9)))
                worst = min(worst, margin)
                if margin < 0.0:
                    ok = False
        checks.append(CheckResult(
            "competition_growth", "sampled-pass" if ok else "fail",
            f"worst sampled margin {worst:.3e} against "
            f"alpha^{comp.delta} * floor"))

    return ValidationReport(tuple(checks))


# ---------------------------------------------------------------------------
# saturation constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SaturationData:
    """Componentwise saturation levels and the half-rate box size.

    ``k[i]`` makes ``(L(v + k_i e_i) - c(v + k_i e_i) o (v + k_i e_i))_i < 0``
    for every cone state ``v`` with ``v_i > 0``.  ``alpha_half`` (present
    only for a positive Perron root) is the edge of a box on which all
    competition rates stay below half that root.
    """

    k: np.ndarray
    alpha_half: float | None
    levels_used: int
    samples_used: int


def _sector_samples(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """`count` unit vectors in the closed positive sector of the sphere.

    n == 2 uses an inclusive angular grid; n in (3, 4) a golden-ratio
    Kronecker lattice on the angle cube; larger n falls back to seeded
    half-normal directions.  Rows are the samples.
    """
    if n == 2:
        ang = np.linspace(0.0, math.pi / 2.0, count)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if n <= 4:
        dim = n - 1
        # generalized golden ratios: root of x**(dim+1) = x + 1
        phi = 1.0
        for _ in range(64):
            phi = (1.0 + phi) ** (1.0 / (dim + 1))
        alpha = np.array([phi ** -(j + 1) for j in range(dim)])
        k = np.arange(1, count + 1)[:, None]
        angles = (0.5 + k * alpha) % 1.0 * (math.pi / 2.0)
        pts = np.ones((count, n))
        for j in range(dim):
            pts[:, j] *= np.cos(angles[:, j])
            pts[:, j + 1:] *= np.sin(angles[:, j:j + 1])
        return pts
    pts = np.abs(rng.standard_normal((count, n)))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts


def _lv_vals(L, C, S, i):
    num = S @ L[i]
    den = S @ C[i]
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where((num >= 0.0) & (S[:, i] > 1e-12), num / den, -np.inf)
    return vals


def _gp_vals(L, C, S, i):
    num = (S @ L[i]) * S[:, i]
    den = (S * S) @ C[i]
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where((S @ L[i] >= 0.0) & (S[:, i] > 1e-12),
                        np.sqrt(np.maximum(num, 0.0) / den), -np.inf)
    return vals


def _custom_val(model: Model, nvec: np.ndarray, i: int) -> float:
    """alpha_{i,n} * n_i for one direction, by doubling + bisection."""
    comp = model.competition
    Ln_i = float(model.L[i] @ nvec)
    if Ln_i < 0.0 or nvec[i] <= 1e-12:
        return -math.inf

    def fneg(alpha: float) -> bool:
        return float(comp(alpha * nvec)[i]) * nvec[i] > Ln_i

    hi = 1.0
    for _ in range(80):
        if fneg(hi):
            break
        hi *= 2.0
    else:
        raise SamplingInconclusive(
            f"competition rate along a sampled ray never overtook the linear "
            f"growth for component {i}; declared superlinear growth looks "
            f"violated")
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if fneg(mid):
            hi = mid
        else:
            lo = mid
    return hi * float(nvec[i])


def _batch_vals(model: Model, S: np.ndarray, i: int) -> np.ndarray:
    comp = model.competition
    if isinstance(comp, LotkaVolterra):
        return _lv_vals(model.L, comp.C, S, i)
    if isinstance(comp, GrossPitaevskii):
        return _gp_vals(model.L, comp.C, S, i)
    return np.array([_custom_val(model, row, i) for row in S])


def _hill_climb(model: Model, i: int, x0: np.ndarray, f0: float,
                rng: np.random.Generator, rounds: int, batch: int) -> float:
    """Refine a sampled supremum locally on the sphere sector."""
    x, fx = x0, f0
    step = 0.3
    for _ in range(rounds):
        cand = np.abs(x[None, :] + step * rng.standard_normal((batch, x.size)))
        nrm = np.linalg.norm(cand, axis=1, keepdims=True)
        cand /= np.where(nrm == 0.0, 1.0, nrm)
        vals = _batch_vals(model, cand, i)
        j = int(np.argmax(vals))
        if vals[j] > fx:
            x, fx = cand[j], float(vals[j])
        else:
            step *= 0.5
            if step < 1e-10:
                break
    return fx


def saturation_vector(model: Model, grid_density: int = 64) -> SaturationData:
    """Componentwise saturation levels by refined sector sampling.

    For each component the supremum of ``alpha_{i,n} n_i`` over unit cone
    directions with ``(L n)_i >= 0`` is sampled on a deterministic sector
    lattice, sharpened by a seeded local hill climb, and accepted once two
    consecutive refinement levels agree to a relative 1e-3.  The result is
    inflated by 1.05 so downstream strict inequalities have margin.

    For linear competition no sampling happens at all: the objective
    ``(L n)_i / (C n)_i`` is linear-fractional over the simplex, so its
    supremum sits on an axis and equals ``max_j L_ij / C_ij`` exactly
    (``levels_used`` and ``samples_used`` are then 0).

    Raises
    ------
    SamplingInconclusive
        If the refinement levels never stabilize, or a custom competition
        never overtakes the linear growth along some sampled ray.
    HypothesisViolation
        If the coupling matrix is inadmissible.
    """
    if not check_essentially_nonnegative_irreducible(model.L):
        raise HypothesisViolation("coupling matrix must be essentially "
                                  "nonnegative and irreducible")
    if isinstance(model.competition, LotkaVolterra):
        # every irreducible row has a positive off-diagonal entry, so the
        # rowwise maximum is positive
        khat = (model.L / model.competition.C).max(axis=1)
        lam = perron_frobenius(model.L).value
        ah = alpha_half(model) if lam > 0.0 else None
        return SaturationData(1.05 * khat, ah, 0, 0)
    n = model.n
    rng = np.random.default_rng(_SAMPLER_SEED)
    is_custom = isinstance(model.competition, Custom)
    rounds = 25 if is_custom else 40
    batch = 12 if is_custom else 24

    prev = None
    total = 0
    for level in range(4):
        count = grid_density * 4 ** level
        S = _sector_samples(n, count, rng)
        total += count
        khat = np.empty(n)
        for i in range(n):
            vals = _batch_vals(model, S, i)
            j = int(np.argmax(vals))
            if not math.isfinite(vals[j]):
                raise SamplingInconclusive(
                    f"no admissible direction sampled for component {i}")
            khat[i] = _hill_climb(model, i, S[j], float(vals[j]), rng,
                                  rounds, batch)
        if prev is not None:
            rel = np.abs(khat - prev) / np.maximum(np.abs(prev), 1e-12)
            if float(rel.max()) <= 1e-3:
                if khat.min() <= 0.0:
                    raise SamplingInconclusive("sampled saturation level "
                                               "collapsed to zero")
                lam = perron_frobenius(model.L).value
                ah = alpha_half(model) if lam > 0.0 else None
                return SaturationData(1.05 * np.maximum(khat, prev),
                                      ah, level + 1, total)
        prev = khat
    raise SamplingInconclusive(
        "saturation suprema did not stabilize to 1e-3 across refinement "
        "levels; increase grid_density or check the growth hypothesis")


def alpha_half(model: Model) -> float:
    """Edge of a box where every competition rate is at most half the
    Perron root of the coupling matrix.

    Requires that Perron root to be positive.  Closed form for the matrix
    competitions; for custom ones, a doubling/bisection scan of the box's
    upper corner (rates are sampled there).
    """
    lam = perron_frobenius(model.L).value
    if lam <= 0.0:
        raise HypothesisViolation(
            "half-rate box needs a positive Perron root of the coupling "
            f"matrix, got {lam!r}")
    comp = model.competition
    if isinstance(comp, LotkaVolterra):
        return float(lam / (2.0 * comp.C.sum(axis=1).max()))
    if isinstance(comp, GrossPitaevskii):
        return float(math.sqrt(lam / (2.0 * comp.C.sum(axis=1).max())))
    ones = np.ones(model.n)

    def ok(alpha: float) -> bool:
        return float(comp(alpha * ones).max()) <= lam / 2.0

    alpha = 1.0
    if ok(alpha):
        for _ in range(60):
            if not ok(2.0 * alpha):
                break
            alpha *= 2.0
        else:
            raise SamplingInconclusive("half-rate box did not close under "
                                       "doubling; rates appear bounded")
        lo, hi = alpha, 2.0 * alpha
    else:
        for _ in range(60):
            alpha *= 0.5
            if ok(alpha):
                break
        else:
            raise SamplingInconclusive("no box with rates below half the "
                                       "Perron root was found")
        lo, hi = alpha, 2.0 * alpha
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def absorbing_bound(sat: SaturationData, m) -> np.ndarray:
    """Componentwise absorbing cap ``g(m) = max(m, k)``."""
    m = np.asarray(m, dtype=float).ravel()
    if m.shape != sat.k.shape:
        raise HypothesisViolation("initial bound vector length mismatch")
    return np.maximum(m, sat.k)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def model_to_dict(model: Model) -> dict:
    comp = model.competition
    if isinstance(comp, LotkaVolterra):
        cblock = {"variant": "lotka_volterra", "C": comp.C.tolist()}
    elif isinstance(comp, GrossPitaevskii):
        cblock = {"variant": "gross_pitaevskii", "C": comp.C.tolist()}
    else:
        raise ConfigError("custom competition is defined by a callable and "
                          "cannot be serialized")
    return {"n": model.n, "d": model.d.tolist(), "L": model.L.tolist(),
            "competition": cblock}


def model_from_dict(data: dict) -> Model:
    try:
        d = data["d"]
        L = data["L"]
        cblock = data["competition"]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"model block is missing field: {exc}") from exc
    # "variant" is the canonical name in emitted JSON; "kind" is accepted as
    # an input alias because TOML configs read more naturally with it.
    if "variant" in cblock:
        variant = cblock["variant"]
        if "kind" in cblock and cblock["kind"] != variant:
            raise ConfigError("competition gives both 'variant' and 'kind' "
                              "and they disagree")
    elif "kind" in cblock:
        variant = cblock["kind"]
    else:
        raise ConfigError("competition block needs a 'variant' field")
    extra = set(data) - {"n", "d", "L", "competition"}
    if extra:
        raise ConfigError(f"unknown model fields: {sorted(extra)}")
    cextra = set(cblock) - {"variant", "kind", "C"}
    if cextra:
        raise ConfigError(f"unknown competition fields: {sorted(cextra)}")
    if "n" in data and int(data["n"]) != len(d):
        raise ConfigError(f"declared n={data['n']} but d has {len(d)} entries")
    if variant == "lotka_volterra":
        comp: Competition = LotkaVolterra(np.asarray(cblock["C"], dtype=float))
    elif variant == "gross_pitaevskii":
        comp = GrossPitaevskii(np.asarray(cblock["C"], dtype=float))
    else:
        raise ConfigError(f"unknown competition variant {variant!r} (custom "
                          "competitions are code-only)")
    return Model(np.asarray(d, dtype=float), np.asarray(L, dtype=float), comp)


def model_to_json(model: Model) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True, indent=2) + "\n"


def model_from_json(text: str) -> Model:
    return model_from_dict(json.loads(text))
