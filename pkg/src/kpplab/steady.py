"""Constant steady states: positive zeros of ``v -> Lv - c(v) o v``.

When the coupling matrix is linearly unstable at the origin the system
admits a positive constant state; :func:`find_constant_steady` hunts for it
with damped Newton iterations launched from a fixed list of starts inside
the box ``[0, k]`` and keeps iterates away from the trivial zero by
projecting onto the half-space ``{w . v >= eta}`` spanned by the left
principal vector.  When the origin is stable no strictly positive steady
can exist (pairing a candidate zero with the left principal vector gives a
strictly negative number); :func:`nonexistence_certificate` packages that
argument together with a numerical ray scan.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolation, NoConvergence
from .model import Model, SaturationData, alpha_half, reaction, \
    reaction_jacobian, saturation_vector
from .spectral import perron_frobenius

__all__ = ["SteadyState", "find_constant_steady", "nonexistence_certificate"]


@dataclass(frozen=True, eq=False)
class SteadyState:
    """A positive constant equilibrium and how it was reached."""

    v: np.ndarray
    residual: float
    iterations: int
    start_index: int
    distinct_count: int
    method: str


def _starts(model: Model, k: np.ndarray, a_half: float) -> list[np.ndarray]:
    n = model.n
    pf = perron_frobenius(model.L).vector
    pf = pf / pf.max()
    alt = np.where(np.arange(n) % 2 == 0, k, a_half)
    level = float(np.sqrt(a_half * max(float(k.min()), 1e-12)))
    return [
        np.full(n, a_half),
        k.copy(),
        0.5 * k,
        a_half * pf,
        float(k.max()) * pf,
        0.9 * k + 0.1 * a_half,
        alt.astype(float),
        np.full(n, level),
    ]


def _project(v: np.ndarray, k: np.ndarray, w: np.ndarray,
             eta: float) -> np.ndarray:
    v = np.clip(v, 0.0, k + 1.0)
    gap = eta - float(w @ v)
    if gap > 0.0:
        v = v + (gap / float(w @ w)) * w
        v = np.clip(v, 0.0, k + 1.0)
    return v


def _newton_from(model: Model, v0: np.ndarray, k: np.ndarray,
                 w: np.ndarray, eta: float, tol_abs: float,
                 max_iter: int) -> tuple[np.ndarray, float, int] | None:
    v = v0.copy()
    res = float(np.max(np.abs(reaction(model, v))))
    for it in range(1, max_iter + 1):
        if res <= tol_abs:
            return v, res, it - 1
        J = reaction_jacobian(model, v)
        try:
            delta = np.linalg.solve(J, reaction(model, v))
        except np.linalg.LinAlgError:
            return None
        s = 1.0
        improved = False
        while s > 2.0 ** -20:
            cand = _project(v - s * delta, k, w, eta)
            rc = float(np.max(np.abs(reaction(model, cand))))
            if rc < (1.0 - 1e-4 * s) * res:
                v, res = cand, rc
                improved = True
                break
            s *= 0.5
        if not improved:
            return None
    if res <= tol_abs:
        return v, res, max_iter
    return None


def find_constant_steady(model: Model, sat: SaturationData | None = None,
                         tol: float = 1e-12,
                         max_iter: int = 200) -> SteadyState:
    """Locate a positive constant equilibrium.

    Runs damped Newton from eight deterministic starts inside the
    saturation box, projecting every iterate back into
    ``{0 <= v <= k+1, w.v >= eta}`` (``w`` the left principal vector,
    ``eta`` a small multiple of the persistence level) so the trivial zero
    cannot capture the iteration.  If several distinct equilibria are
    found, the most interior one (largest smallest-component) is returned
    and ``distinct_count`` says how many there were.  A damped fixed-point
    run is used as a fallback before giving up.

    Raises
    ------
    HypothesisViolation
        The origin is not linearly unstable (no positive steady expected;
        see :func:`nonexistence_certificate`).
    NoConvergence
        No start converged to an interior zero.
    """
    lam = perron_frobenius(model.L).value
    if lam <= 0.0:
        raise HypothesisViolation(
            f"coupling matrix has principal value {lam!r} <= 0; no positive "
            "constant steady state is expected")
    if sat is None:
        sat = saturation_vector(model)
    k = sat.k
    a_half = sat.alpha_half if sat.alpha_half is not None \
        else alpha_half(model)
    w = perron_frobenius(model.L.T).vector
    eta = 1e-3 * a_half * float(w.min())
    tol_abs = tol * max(1.0, float(np.abs(model.L).sum(axis=1).max())
                        * float(k.max()))

    found: list[tuple[np.ndarray, float, int, int, str]] = []
    for idx, v0 in enumerate(_starts(model, k, a_half)):
        got = _newton_from(model, _project(v0, k, w, eta), k, w, eta,
                           tol_abs, max_iter)
        if got is not None:
            v, res, its = got
            if float(w @ v) >= eta and v.max() > 0.0:
                found.append((v, res, its, idx, "newton"))

    if not found:
        # damped explicit fixed-point run, then a Newton polish
        v = np.full(model.n, a_half)
        tau = 0.25 / max(1.0, float(np.abs(model.L).sum(axis=1).max())
                         + float(model.competition(k + 1.0).max()))
        for _ in range(5000):
            v = _project(v + tau * reaction(model, v), k, w, eta)
        got = _newton_from(model, v, k, w, eta, tol_abs, max_iter)
        if got is not None:
            v, res, its = got
            if float(w @ v) >= eta and v.max() > 0.0:
                found.append((v, res, its, -1, "fixed-point+newton"))

    if not found:
        raise NoConvergence(
            "no interior constant steady state was reached from any start")

    distinct: list[np.ndarray] = []
    for v, *_ in found:
        if not any(np.max(np.abs(v - u)) <= 1e-8 * max(1.0, float(u.max()))
                   for u in distinct):
            distinct.append(v)
    best = max(found, key=lambda t: float(t[0].min()))
    return SteadyState(best[0], best[1], best[2], best[3], len(distinct),
                       best[4])


def nonexistence_certificate(model: Model, rays: int = 64,
                             t_max: float = 50.0) -> dict:
    """Certify the absence of strictly positive constant steady states.

    When the principal value of the coupling matrix is nonpositive, pairing
    ``Lv - c(v) o v`` with the strictly positive left principal vector
    gives a nonpositive number that vanishes only if both ``lambda . w . v``
    and ``w . (c(v) o v)`` vanish — impossible for a strictly positive
    ``v`` with nontrivial competition, and strictly negative outright when
    the principal value is negative.  The returned dict carries the
    verdict, the principal value, and a corroborating ray scan (smallest
    residual norm of the balance law along positive rays).
    """
    lam = perron_frobenius(model.L).value
    pair_w = perron_frobenius(model.L.T).vector

    rng = np.random.default_rng(20210628)
    dirs = rng.dirichlet(np.ones(model.n), size=rays)
    ts = np.geomspace(1e-3, t_max, 120)
    smallest = np.inf
    for d in dirs:
        for t in ts:
            v = t * d
            r = float(np.linalg.norm(reaction(model, v))) / max(t, 1e-300)
            smallest = min(smallest, r)

    certified = lam <= 0.0
    if lam < 0.0:
        reason = ("origin is linearly stable (principal value "
                  f"{lam:.6g} < 0): the left-vector pairing of any "
                  "candidate equilibrium is strictly negative")
    elif lam == 0.0:
        reason = ("principal value is zero: the left-vector pairing forces "
                  "the competition term to vanish, excluding strictly "
                  "positive equilibria")
    else:
        reason = (f"origin is linearly unstable (principal value {lam:.6g} "
                  "> 0); positive equilibria are expected, not excluded")
    return {
        "certified": certified,
        "scope": "strictly positive constant states",
        "lambda_pf": lam,
        "left_vector": pair_w,
        "ray_scan_min_scaled_residual": float(smallest),
        "reason": reason,
    }
