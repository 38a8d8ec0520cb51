"""Dispersion relation, minimal wave speed, and speed bounds.

For decay rate ``mu > 0`` the exponential ansatz ``e^{-mu xi} n`` reduces the
linearized traveling-wave problem to the Perron problem for
``mu^2 D + L``; we write ``kappa_mu = -lambda_PF(mu^2 D + L)`` and
``n_mu`` for the Perron vector.  The minimal admissible speed is
``c* = min_{mu > 0} (-kappa_mu / mu)``, attained at ``mu*``; for a speed
``c > c*`` the equation ``-kappa_mu / mu = c`` has exactly two roots
``0 < mu_1 < mu* < mu_2`` used by the wave construction.

:func:`speed_report` packages ``c*`` together with the closed-form bounds
that sandwich it (extreme diffusivities, per-component diagonal rates, and
the averaged bound built from the column-sum decomposition ``L = diag(r) + M``
with zero-column-sum ``M``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolation, NoConvergence, SpeedBelowCritical
from .model import Model
from .spectral import SpectralPair, golden_max, perron_frobenius

__all__ = [
    "kappa",
    "minimal_speed",
    "mu_roots",
    "dispersion_curve",
    "speed_bounds_check",
    "require_supercritical",
    "SpeedReport",
    "DispersionCurve",
    "BoundCheck",
]

_REL_WINDOW = 1e-8  # |c - c*| below this (relative) counts as critical


def kappa(model: Model, mu: float, tol: float = 1e-12) -> tuple[float, SpectralPair]:
    """``(kappa_mu, Perron pair of mu^2 D + L)`` for one decay rate."""
    mu = float(mu)
    pair = perron_frobenius(np.diag(model.d) * mu * mu + model.L, tol=tol)
    return -pair.value, pair


def _speed_of(model: Model, mu: float) -> float:
    k, _ = kappa(model, mu)
    return -k / mu


@dataclass(frozen=True, eq=False)
class SpeedReport:
    """Minimal speed, its minimizer, and the closed-form bounds around it."""

    c_star: float
    mu_star: float
    kappa_star: float
    n_mu_star: np.ndarray
    lambda_pf: float
    lower_bound: float                  # 2 sqrt(d_min lambda_PF)
    upper_bound: float                  # 2 sqrt(d_max lambda_PF)
    per_component_bounds: tuple         # (i, 2 sqrt(d_i l_ii)) for l_ii > 0
    r: np.ndarray                       # column sums of L
    m_matrix: np.ndarray                # L - diag(r); columns sum to zero
    d_avg: float                        # Perron-vector-weighted mean of d
    r_avg: float                        # same weighting of r
    avg_bound: float | None             # 2 sqrt(d_avg r_avg) when r_avg >= 0


@dataclass(frozen=True, eq=False)
class DispersionCurve:
    """Samples of ``mu -> -kappa_mu / mu`` on a strictly increasing grid."""

    mu: np.ndarray
    speed: np.ndarray

    def slope_increments(self) -> np.ndarray:
        """Consecutive divided-difference increments (convexity witnesses).

        The grid may be non-uniform, so convexity is monotonicity of the
        chord slopes; this returns their consecutive differences.
        """
        slopes = np.diff(self.speed) / np.diff(self.mu)
        return np.diff(slopes)

    def is_convex(self, tol: float = -1e-10) -> bool:
        return bool(self.slope_increments().min() > tol)


def minimal_speed(model: Model, mu_tol: float = 1e-10) -> SpeedReport:
    """Minimal admissible wave speed and its data.

    The speed function ``mu -> -kappa_mu / mu`` on ``(0, inf)`` blows up at
    both ends once the Perron root of ``L`` is positive, and is strictly
    convex, so golden-section search on a doubling-expanded bracket finds the
    minimum.  All derived report entries (averages, the identity pair) are
    evaluated at the *returned* ``mu*``, which keeps the Perron-relation
    identities exact to residual precision regardless of how precisely
    ``mu*`` itself is located.

    Raises
    ------
    HypothesisViolation
        If the Perron root of the coupling matrix is not positive (no
        spreading regime, no finite minimal speed).
    NoConvergence
        If bracket expansion fails (it should not for admissible data).
    """
    pairL = perron_frobenius(model.L)
    lam = pairL.value
    if lam <= 0.0:
        raise HypothesisViolation(
            "minimal speed requires a positive Perron root of the coupling "
            f"matrix; got {lam!r}")

    f = lambda mu: _speed_of(model, mu)
    a, b = 1e-3, 10.0
    # push the right end until the function is climbing there
    for _ in range(60):
        if f(b) > f(b / 2.0):
            break
        b *= 4.0
    else:
        raise NoConvergence("minimal-speed bracket expansion failed on the "
                            "right")
    for _ in range(60):
        if f(a) > f(2.0 * a):
            break
        a /= 4.0
    else:
        raise NoConvergence("minimal-speed bracket expansion failed on the "
                            "left")
    mu_star, neg = golden_max(lambda m: -f(m), a, b, mu_tol)
    c_star = -neg

    kap, pair = kappa(model, mu_star)
    c_star = -kap / mu_star
    nvec = pair.vector
    w = nvec / nvec.sum()
    d_avg = float(model.d @ w)
    r = model.L.sum(axis=0)
    r_avg = float(r @ w)
    d_min, d_max = float(model.d.min()), float(model.d.max())
    per_comp = tuple((i, 2.0 * math.sqrt(model.d[i] * model.L[i, i]))
                     for i in range(model.n) if model.L[i, i] > 0.0)
    return SpeedReport(
        c_star=float(c_star),
        mu_star=float(mu_star),
        kappa_star=float(kap),
        n_mu_star=nvec,
        lambda_pf=float(lam),
        lower_bound=2.0 * math.sqrt(d_min * lam),
        upper_bound=2.0 * math.sqrt(d_max * lam),
        per_component_bounds=per_comp,
        r=r,
        m_matrix=model.L - np.diag(r),
        d_avg=d_avg,
        r_avg=r_avg,
        avg_bound=(2.0 * math.sqrt(d_avg * r_avg) if r_avg >= 0.0 else None),
    )


def mu_roots(model: Model, c: float,
             report: SpeedReport | None = None) -> tuple[float, ...]:
    """Decay rates solving ``-kappa_mu / mu = c``.

    Returns ``()`` for subcritical speeds, ``(mu*,)`` within a relative
    1e-8 window of the minimal speed, and ``(mu_1, mu_2)`` above it; the
    two roots are separated by bisection on either side of ``mu*`` (the
    speed function is strictly convex).
    """
    if report is None:
        report = minimal_speed(model)
    c = float(c)
    window = _REL_WINDOW * max(1.0, abs(report.c_star))
    if c < report.c_star - window:
        return ()
    if abs(c - report.c_star) <= window:
        return (report.mu_star,)

    def g(mu: float) -> float:
        return _speed_of(model, mu) - c

    # left root: g > 0 for small mu, g < 0 at mu*
    lo = report.mu_star
    for _ in range(200):
        lo *= 0.5
        if g(lo) >= 0.0:
            break
    else:
        raise NoConvergence("left decay-rate root not bracketed")
    left = _bisect(g, lo, report.mu_star)
    hi = report.mu_star
    for _ in range(200):
        hi *= 2.0
        if g(hi) >= 0.0:
            break
    else:
        raise NoConvergence("right decay-rate root not bracketed")
    right = _bisect(lambda m: -g(m), report.mu_star, hi)
    return (left, right)


def _bisect(g, lo: float, hi: float) -> float:
    """Root of g (>=0 at lo, <0 at hi) by plain bisection to ~1e-13 rel."""
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if g(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def dispersion_curve(model: Model, mu_min: float = 1e-2, mu_max: float = 1e2,
                     count: int = 200) -> DispersionCurve:
    """Log-spaced samples of the speed function ``mu -> -kappa_mu / mu``."""
    if not (0.0 < mu_min < mu_max) or count < 3:
        raise HypothesisViolation("need 0 < mu_min < mu_max and count >= 3")
    mus = np.geomspace(mu_min, mu_max, count)
    vals = np.array([_speed_of(model, m) for m in mus])
    return DispersionCurve(mus, vals)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    satisfied: bool
    slack: float
    strict: bool


def speed_bounds_check(model: Model, report: SpeedReport,
                       tol: float = 1e-9) -> tuple[BoundCheck, ...]:
    """Evaluate every closed-form bound in the report against ``c*``.

    ``slack`` is the margin by which the inequality holds (negative means
    violated beyond ``tol``).  Sandwich bounds are strict when the extreme
    diffusivities differ and equalities when they coincide; per-component
    and averaged bounds are strict, and the identity
    ``mu*^2 d_avg + r_avg = mu* c*`` is checked as an equality.
    """
    out = []
    cs = report.c_star
    equal_d = math.isclose(model.d.min(), model.d.max(), rel_tol=0.0,
                           abs_tol=0.0)

    lo_slack = cs - report.lower_bound
    hi_slack = report.upper_bound - cs
    if equal_d:
        out.append(BoundCheck("lower_sandwich", abs(lo_slack) <= tol,
                              lo_slack, False))
        out.append(BoundCheck("upper_sandwich", abs(hi_slack) <= tol,
                              hi_slack, False))
    else:
        out.append(BoundCheck("lower_sandwich", lo_slack > 0.0, lo_slack, True))
        out.append(BoundCheck("upper_sandwich", hi_slack > 0.0, hi_slack, True))

    for i, bnd in report.per_component_bounds:
        slack = cs - bnd
        out.append(BoundCheck(f"diagonal_rate_{i}", slack > 0.0, slack, True))

    if report.avg_bound is not None:
        slack = cs - report.avg_bound
        out.append(BoundCheck("averaged_rates", slack >= -tol, slack, False))

    ident = report.mu_star ** 2 * report.d_avg + report.r_avg \
        - report.mu_star * cs
    out.append(BoundCheck("first_order_identity", abs(ident) <= 1e-8,
                          -abs(ident), False))
    return tuple(out)


def require_supercritical(report: SpeedReport, c: float) -> None:
    """Raise SpeedBelowCritical unless ``c`` exceeds the minimal speed."""
    window = _REL_WINDOW * max(1.0, abs(report.c_star))
    if c < report.c_star + window:
        raise SpeedBelowCritical(
            f"requested speed {c!r} does not exceed the minimal speed "
            f"{report.c_star!r}")
