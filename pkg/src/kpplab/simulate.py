"""Direct simulation of the reaction-diffusion system on a segment.

Time stepping is IMEX Euler: the reaction ``L u - c(u) o u`` is explicit
(whence a stability budget on ``dt``), the diffusion is implicit through one
tridiagonal solve per component per step, with reflecting (Neumann mirror)
ends.  The scheme is positivity-preserving up to roundoff: tiny negative
excursions are clamped, genuine ones raise :class:`PositivityBreach`.

Front tracking reads the rightmost point where any component exceeds a
threshold (interpolated between grid nodes), and
:func:`measure_spreading_speed` fits a line through the tracked positions
after a burn-in, returning the slope and its standard error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_banded

from .errors import (FrontAtBoundary, HypothesisViolation, InsufficientSamples,
                     PositivityBreach, StabilityBudgetExceeded)
from .model import Model, SaturationData, absorbing_bound, saturation_vector

__all__ = [
    "Grid1D",
    "HistoryRow",
    "SimState",
    "FrontTrace",
    "RunResult",
    "make_state",
    "initial_front",
    "initial_constant",
    "initial_bump",
    "step",
    "run",
    "front_position",
    "measure_spreading_speed",
]

_CLAMP = -1e-13  # negative values above this are treated as roundoff


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [xmin, xmax] with m nodes (ends included)."""

    xmin: float
    xmax: float
    m: int

    def __post_init__(self):
        if not (self.xmin < self.xmax) or self.m < 64:
            raise HypothesisViolation("grid needs xmin < xmax and m >= 64")

    @property
    def h(self) -> float:
        return (self.xmax - self.xmin) / (self.m - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.xmin, self.xmax, self.m)


@dataclass(frozen=True)
class HistoryRow:
    t: float
    front_x: float          # -inf when everything is below threshold
    sup: np.ndarray         # per-component max over the domain
    floor: np.ndarray       # per-component min over the probe window


@dataclass
class SimState:
    """Mutable simulation state: field values plus recording history.

    ``reaction_bound`` is ``|L|_inf + max_i c_i(g(sup u0))`` frozen at
    construction time; the stability budget ``dt * reaction_bound <= 0.5``
    is enforced against it by every step.
    """

    grid: Grid1D
    t: float
    u: np.ndarray
    reaction_bound: float
    cap: np.ndarray                      # absorbing levels g(sup u0)
    history: list = field(default_factory=list)
    frames: list = field(default_factory=list)   # (t, field copy) pairs


class RunResult(NamedTuple):
    state: SimState
    trace: "FrontTrace"
    diagnostics: dict


@dataclass
class FrontTrace:
    """Tracked front positions and (after fitting) the measured speed."""

    threshold: float
    t: np.ndarray
    x: np.ndarray
    speed: float | None = None
    halfwidth: float | None = None
    window: tuple | None = None
    r2: float | None = None


def initial_front(grid: Grid1D, level, x0: float = 0.0) -> np.ndarray:
    """Step data: ``level`` (vector or scalar) for x <= x0, zero beyond."""
    lv = np.atleast_1d(np.asarray(level, dtype=float))
    return np.where(grid.x[None, :] <= x0, lv[:, None], 0.0)


def initial_constant(grid: Grid1D, level) -> np.ndarray:
    lv = np.atleast_1d(np.asarray(level, dtype=float))
    return np.tile(lv[:, None], (1, grid.m))


def initial_bump(grid: Grid1D, level, center: float = 0.0,
                 width: float = 5.0) -> np.ndarray:
    lv = np.atleast_1d(np.asarray(level, dtype=float))
    prof = np.exp(-((grid.x - center) / width) ** 2)
    return lv[:, None] * prof[None, :]


def make_state(model: Model, grid: Grid1D, u0: np.ndarray,
               sat: SaturationData | None = None) -> SimState:
    """Wrap initial data into a state, computing the absorbing cap.

    ``u0`` must be (N, m), nonnegative and finite.
    """
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (model.n, grid.m):
        raise HypothesisViolation(
            f"initial data must have shape {(model.n, grid.m)}, got {u0.shape}")
    if not np.all(np.isfinite(u0)) or u0.min() < 0.0:
        raise HypothesisViolation("initial data must be finite and nonnegative")
    if sat is None:
        sat = saturation_vector(model)
    sup0 = u0.max(axis=1)
    cap = absorbing_bound(sat, sup0)
    bound = float(np.linalg.norm(model.L, np.inf)
                  + model.competition(cap).max())
    return SimState(grid, 0.0, u0.copy(), bound, cap)


def _diffusion_bands(model: Model, grid: Grid1D, dt: float) -> list:
    """Banded storage of (I - dt d_i Lap) with mirror ends, per component."""
    m = grid.m
    bands = []
    for i in range(model.n):
        r = dt * model.d[i] / grid.h ** 2
        ab = np.zeros((3, m))
        ab[1, :] = 1.0 + 2.0 * r
        ab[0, 1:] = -r          # super-diagonal, rows 0..m-2
        ab[2, :-1] = -r         # sub-diagonal, rows 1..m-1
        ab[0, 1] = -2.0 * r     # mirror end: row 0 couples twice to node 1
        ab[2, m - 2] = -2.0 * r
        bands.append(ab)
    return bands


def _clamp_positive(U: np.ndarray) -> None:
    worst = U.min()
    if worst < _CLAMP:
        i, j = np.unravel_index(int(np.argmin(U)), U.shape)
        raise PositivityBreach(
            f"component {i} reached {worst!r} at node {j}; beyond roundoff "
            "clamping")
    if worst < 0.0:
        np.maximum(U, 0.0, out=U)


def _advance(model: Model, U: np.ndarray, dt: float, bands: list) -> np.ndarray:
    W = U + dt * (model.L @ U - model.competition.field(U) * U)
    _clamp_positive(W)
    out = np.empty_like(W)
    for i in range(model.n):
        out[i] = solve_banded((1, 1), bands[i], W[i])
    _clamp_positive(out)
    return out


def step(model: Model, state: SimState, dt: float) -> SimState:
    """One IMEX step; returns a new state (history is shared)."""
    if dt <= 0.0:
        raise HypothesisViolation("time step must be positive")
    if dt * state.reaction_bound > 0.5:
        raise StabilityBudgetExceeded(
            f"dt = {dt!r} exceeds the explicit-reaction budget "
            f"0.5 / {state.reaction_bound!r}")
    bands = _diffusion_bands(model, state.grid, dt)
    u = _advance(model, state.u, dt, bands)
    return SimState(state.grid, state.t + dt, u, state.reaction_bound,
                    state.cap, state.history)


def front_position(grid: Grid1D, U: np.ndarray, threshold: float) -> float:
    """Rightmost interpolated crossing of ``max_i u_i`` through threshold."""
    prof = U.max(axis=0)
    above = prof >= threshold
    if not above.any():
        return -math.inf
    j = int(np.nonzero(above)[0][-1])
    if j == grid.m - 1:
        return float(grid.x[-1])
    x = grid.x
    p0, p1 = prof[j], prof[j + 1]
    frac = (p0 - threshold) / (p0 - p1) if p0 > p1 else 0.0
    return float(x[j] + frac * (x[j + 1] - x[j]))


def run(model: Model, grid: Grid1D, u0: np.ndarray, T: float, dt: float, *,
        sat: SaturationData | None = None, threshold: float | None = None,
        probe: tuple = (-5.0, 5.0), record_every: int = 0,
        frame_every: int = 0,
        abort_near_boundary: bool = True) -> RunResult:
    """Advance to time T, tracking front position, suprema and floors.

    Parameters
    ----------
    threshold : float, optional
        Front-tracking level; default is 1% of the smallest saturation
        level.
    probe : (float, float)
        Window whose per-component minimum is recorded at every record
        time (persistence monitoring).
    record_every : int
        Record each this-many steps; 0 picks roughly 400 records.
    frame_every : int
        Store a full field snapshot ``(t, u.copy())`` in ``state.frames``
        each this-many steps (initial and final states always included);
        0 stores none.  Snapshots are memory-heavy — pick a coarse stride.
    abort_near_boundary : bool
        Raise :class:`FrontAtBoundary` if the front comes within 10 grid
        cells of the right end (the measured speed would be polluted).

    Returns
    -------
    RunResult
        Final state (with history), the front trace (unfitted), and a
        diagnostics dict with the absorbing/positivity summaries.
    """
    if sat is None:
        sat = saturation_vector(model)
    state = make_state(model, grid, u0, sat)
    if dt <= 0.0 or T <= 0.0:
        raise HypothesisViolation("need positive dt and horizon")
    if dt * state.reaction_bound > 0.5:
        raise StabilityBudgetExceeded(
            f"dt = {dt!r} exceeds the explicit-reaction budget "
            f"0.5 / {state.reaction_bound!r}")
    nsteps = int(math.ceil(T / dt - 1e-9))
    if record_every <= 0:
        record_every = max(1, nsteps // 400)
    if threshold is None:
        threshold = 0.01 * float(sat.k.min())

    x = grid.x
    sel = (x >= probe[0]) & (x <= probe[1])
    if not sel.any():
        sel = slice(None)

    bands = _diffusion_bands(model, grid, dt)
    guard = grid.xmax - 10.0 * grid.h
    sup_alltime = state.u.max(axis=1)

    def record(st: SimState) -> None:
        fx = front_position(grid, st.u, threshold)
        st.history.append(HistoryRow(st.t, fx, st.u.max(axis=1),
                                     st.u[:, sel].min(axis=1)))

    record(state)
    if frame_every > 0:
        state.frames.append((state.t, state.u.copy()))
    u = state.u
    for k in range(nsteps):
        u = _advance(model, u, dt, bands)
        state.t = round((k + 1) * dt, 12)
        state.u = u
        sup_alltime = np.maximum(sup_alltime, u.max(axis=1))
        if frame_every > 0 and ((k + 1) % frame_every == 0
                                or k == nsteps - 1):
            state.frames.append((state.t, u.copy()))
        if (k + 1) % record_every == 0 or k == nsteps - 1:
            record(state)
            fx = state.history[-1].front_x
            if abort_near_boundary and fx >= guard:
                raise FrontAtBoundary(
                    f"front reached {fx!r} at t = {state.t!r}, within 10 "
                    "cells of the domain edge; enlarge the domain")

    times = np.array([row.t for row in state.history])
    fronts = np.array([row.front_x for row in state.history])
    keep = np.isfinite(fronts)
    trace = FrontTrace(threshold, times[keep], fronts[keep])

    final_sup = state.u.max(axis=1)
    diagnostics = {
        "positivity_ok": bool(state.u.min() >= 0.0),
        "absorbing_cap": sat.k.copy(),
        "initial_cap": state.cap.copy(),
        "sup_final": final_sup,
        "sup_alltime": sup_alltime,
        "bounded_by_initial_cap": bool(
            np.all(sup_alltime <= 1.001 * state.cap)),
        "final_below_saturation": bool(np.all(final_sup <= 1.05 * sat.k)),
    }
    return RunResult(state, trace, diagnostics)


def measure_spreading_speed(trace: FrontTrace,
                            burn_in: float = 0.25) -> tuple[float, float]:
    """Least-squares front speed after discarding the early transient.

    Drops the first ``burn_in`` fraction of the time window, requires at
    least 20 surviving samples, fits ``x = a + s t`` and returns
    ``(s, stderr(s))``.  The trace's ``speed``, ``halfwidth``, ``window``
    and ``r2`` fields are filled in.

    Raises
    ------
    InsufficientSamples
        Fewer than 20 usable samples after burn-in.
    """
    if trace.t.size == 0:
        raise InsufficientSamples("empty front trace")
    t0, t1 = float(trace.t[0]), float(trace.t[-1])
    cut = t0 + burn_in * (t1 - t0)
    keep = trace.t >= cut
    t = trace.t[keep]
    xx = trace.x[keep]
    if t.size < 20:
        raise InsufficientSamples(
            f"only {t.size} front samples after burn-in; need 20")
    tm = t - t.mean()
    sxx = float(tm @ tm)
    slope = float(tm @ xx) / sxx
    intercept = float(xx.mean() - slope * t.mean())
    resid = xx - (intercept + slope * t)
    dof = max(t.size - 2, 1)
    sigma2 = float(resid @ resid) / dof
    stderr = math.sqrt(sigma2 / sxx)
    tss = float((xx - xx.mean()) @ (xx - xx.mean()))
    trace.speed = slope
    trace.halfwidth = stderr
    trace.window = (float(t[0]), float(t[-1]))
    trace.r2 = 1.0 - (float(resid @ resid) / tss if tss > 0.0 else 0.0)
    return slope, stderr
