"""Command-line front end.

``kpp-lab <command> --config cfg.toml [--out DIR] [--threads K] [--prefix NAME]``

Commands: ``speed`` (minimal front speed and bound checks), ``simulate``
(line run + fitted spreading speed), ``wave`` (truncated profile),
``steady`` (constant equilibrium / nonexistence certificate), ``spectra``
(principal values, decay-rate curve samples, half-line values), ``sweep``
(rerun one task over a list of values for a single dotted config key,
isolating per-point failures).

Configs are TOML or JSON with strict schemas: any unrecognized section or
key aborts with exit code 4.  The model is given either inline
(``[model]`` with ``d``, ``L`` and a ``competition`` block) or through a
named builder (``builder = "toads_local"`` plus its numeric arguments).

Every run writes ``<prefix>.json`` (sorted keys, no timestamps — reruns
are byte-identical), CSV files whose first line pins the config digest
(``speed``: a one-row scalar report plus the sampled speed curve;
``wave``: the profile plus, when one was used, the barrier envelope;
``simulate``: the front trace plus optional field snapshots), and a
``<prefix>.meta.json`` sidecar holding the wall-clock timestamp (nothing
else does).  Failures still write the report skeleton
with an ``error`` block, and map to exit codes: 2 for violated
mathematical hypotheses, 3 for numerical non-convergence or breached
invariants, 4 for configuration problems.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - py310 path
    import tomli as tomllib

from . import __version__
from .dispersion import dispersion_curve, minimal_speed, speed_bounds_check
from .errors import (BracketingViolation, ConfigError, FrontAtBoundary,
                     HypothesisViolation, InsufficientSamples,
                     NoConvergence, PositivityBreach, SamplingInconclusive,
                     SpeedBelowCritical, StabilityBudgetExceeded)
from .model import (Model, alpha_half, model_from_dict, model_to_json,
                    saturation_vector)
from .simulate import (Grid1D, initial_bump, initial_constant,
                       initial_front, measure_spreading_speed, run)
from .spectral import (dirichlet_principal_eigenvalue, generalized_lambda1,
                       perron_frobenius)
from .steady import find_constant_steady, nonexistence_certificate
from .waves import solve_truncated, wave_diagnostics
from .zoo import gurtin_maccamy, toads_local, toads_nonlocal

_HYPOTHESIS_EXIT = (HypothesisViolation, SpeedBelowCritical)
_NUMERIC_EXIT = (NoConvergence, SamplingInconclusive, PositivityBreach,
                 StabilityBudgetExceeded, BracketingViolation,
                 InsufficientSamples, FrontAtBoundary)

_BUILDERS = {
    "toads_local": (toads_local,
                    {"n", "theta_min", "theta_max", "r", "alpha"}),
    "toads_nonlocal": (toads_nonlocal,
                       {"n", "theta_min", "theta_max", "r", "alpha",
                        "kernel_width"}),
    "gurtin_maccamy": (gurtin_maccamy, {"n", "age_max", "age_mature"}),
}

_SECTION_KEYS = {
    "speed": {"mu_tol", "bounds", "curve", "curve_points", "curve_mu_min",
              "curve_mu_max"},
    "simulate": {"xmin", "xmax", "m", "T", "dt", "threshold", "initial",
                 "level", "x0", "center", "width", "record_every",
                 "frames_every", "burn_in", "probe_lo", "probe_hi"},
    "wave": {"c", "R", "m", "eps", "tol", "envelope"},
    "steady": {"tol"},
    "spectra": {"R_values", "c", "mu_values", "tol"},
    "sweep": {"task", "parameter", "values", "max_workers"},
    "output": {"dir", "prefix"},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 4
        raise ConfigError(message)


def _load_config(path: str) -> tuple[dict, bytes]:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    if p.suffix == ".json":
        try:
            return json.loads(raw.decode("utf-8")), raw
        except ValueError as exc:
            raise ConfigError(f"invalid JSON in {path!r}: {exc}") from exc
    try:
        return tomllib.loads(raw.decode("utf-8")), raw
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"invalid TOML in {path!r}: {exc}") from exc


def _check_sections(cfg: dict, command: str) -> None:
    known = set(_SECTION_KEYS) | {"model"}
    extra = set(cfg) - known
    if extra:
        raise ConfigError(f"unknown config sections: {sorted(extra)}")
    for name, keys in _SECTION_KEYS.items():
        block = cfg.get(name)
        if block is None:
            continue
        if not isinstance(block, dict):
            raise ConfigError(f"section [{name}] must be a table")
        bad = set(block) - keys
        if bad:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(bad)}")
    if "model" not in cfg:
        raise ConfigError("config needs a [model] section")


def _build_model(block: dict) -> Model:
    if not isinstance(block, dict):
        raise ConfigError("[model] must be a table")
    if "builder" in block:
        name = block["builder"]
        if name not in _BUILDERS:
            raise ConfigError(f"unknown model builder {name!r}; available: "
                              f"{sorted(_BUILDERS)}")
        fn, allowed = _BUILDERS[name]
        kwargs = {k: v for k, v in block.items() if k != "builder"}
        bad = set(kwargs) - allowed
        if bad:
            raise ConfigError(
                f"unknown keys for builder {name!r}: {sorted(bad)} "
                f"(allowed: {sorted(allowed)})")
        return fn(**kwargs)
    return model_from_dict(block)


def _np_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _jdump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_np_default,
                      allow_nan=True) + "\n"


def _write_csv(path: Path, header: list[str], rows, config_hash: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config_hash={config_hash}\r\n")
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float,
                            np.floating)) else v for v in row])


def _fnum(cfg: dict, key: str, default=None, required: bool = False):
    if key not in cfg:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"key {key!r} must be a number, got {v!r}")
    return float(v)


# ----------------------------------------------------------------- tasks

def _compute_speed(cfg: dict, model: Model):
    sec = cfg.get("speed", {})
    mu_tol = _fnum(sec, "mu_tol", 1e-10)
    report = minimal_speed(model, mu_tol=mu_tol)
    out = {
        "c_star": report.c_star,
        "mu_star": report.mu_star,
        "kappa_star": report.kappa_star,
        "lambda_pf": report.lambda_pf,
        "lower_bound": report.lower_bound,
        "upper_bound": report.upper_bound,
        "avg_bound": report.avg_bound,
        "d_avg": report.d_avg,
        "r_avg": report.r_avg,
        "per_component_bounds": [
            {"component": int(i), "value": float(v)}
            for i, v in report.per_component_bounds],
        "n_mu_star": report.n_mu_star.tolist(),
        "r": report.r.tolist(),
        "m_matrix": report.m_matrix.tolist(),
    }
    if sec.get("bounds", True):
        checks = speed_bounds_check(model, report)
        out["bound_checks"] = [
            {"name": b.name, "satisfied": bool(b.satisfied),
             "slack": float(b.slack), "strict": bool(b.strict)}
            for b in checks]
    extras = {}
    scalar_cols = ["c_star", "mu_star", "kappa_star", "lambda_pf",
                   "lower_bound", "upper_bound", "avg_bound", "d_avg",
                   "r_avg"]
    extras["report"] = (scalar_cols,
                        [tuple("" if out[k] is None else out[k]
                               for k in scalar_cols)])
    if sec.get("curve", True):
        curve = dispersion_curve(
            model,
            mu_min=_fnum(sec, "curve_mu_min", 1e-2),
            mu_max=_fnum(sec, "curve_mu_max", 1e2),
            count=int(sec.get("curve_points", 200)))
        out["curve_convex"] = bool(curve.is_convex())
        extras["curve"] = (["mu", "speed"],
                           list(zip(curve.mu.tolist(), curve.speed.tolist())))
    return out, extras


def _compute_simulate(cfg: dict, model: Model):
    sec = cfg.get("simulate", {})
    xmin = _fnum(sec, "xmin", -20.0)
    xmax = _fnum(sec, "xmax", 130.0)
    m = int(sec.get("m", 3001))
    T = _fnum(sec, "T", 100.0)
    dt = _fnum(sec, "dt", 0.02)
    grid = Grid1D(xmin, xmax, m)
    sat = saturation_vector(model)
    level_cfg = sec.get("level")
    if level_cfg is None:
        level = sat.alpha_half if sat.alpha_half is not None \
            else alpha_half(model)
    else:
        level = float(level_cfg)
    kind = sec.get("initial", "front")
    if kind == "front":
        u0 = initial_front(grid, level * np.ones(model.n),
                           x0=_fnum(sec, "x0", 0.0))
    elif kind == "constant":
        u0 = initial_constant(grid, level * np.ones(model.n))
    elif kind == "bump":
        u0 = initial_bump(grid, level * np.ones(model.n),
                          center=_fnum(sec, "center", 0.0),
                          width=_fnum(sec, "width", 5.0))
    else:
        raise ConfigError(f"unknown initial kind {kind!r} "
                          "(front, constant, bump)")
    result = run(model, grid, u0, T, dt, sat=sat,
                 threshold=_fnum(sec, "threshold"),
                 probe=(_fnum(sec, "probe_lo", -5.0),
                        _fnum(sec, "probe_hi", 5.0)),
                 record_every=int(sec.get("record_every", 0)),
                 frame_every=int(sec.get("frames_every", 0)))
    try:
        speed, stderr = measure_spreading_speed(
            result.trace, burn_in=_fnum(sec, "burn_in", 0.25))
    except InsufficientSamples:
        # no trackable front (decaying or level data): a valid outcome,
        # reported as a null fit rather than a failure
        speed, stderr = None, None
    try:
        c_star = minimal_speed(model).c_star
    except HypothesisViolation:
        c_star = None
    rel_gap = abs(speed - c_star) / abs(c_star) \
        if speed is not None and c_star is not None else None
    out = {
        "fitted_speed": speed,
        "fitted_stderr": stderr,
        "r2": result.trace.r2,
        "fit_window": list(result.trace.window)
        if result.trace.window is not None else None,
        "threshold": result.trace.threshold,
        "c_star": c_star,
        "relative_gap": rel_gap,
        "diagnostics": result.diagnostics,
        "run_metadata": {
            "model_hash": hashlib.sha256(
                model_to_json(model).encode()).hexdigest(),
            "grid": {"xmin": grid.xmin, "xmax": grid.xmax,
                     "m": grid.m, "h": grid.h},
            "dt": dt,
            "T": T,
            "seed": None,   # the integrator is deterministic; no RNG is used
        },
    }
    header = ["t", "front_x"] \
        + [f"sup{i}" for i in range(model.n)] \
        + [f"floor{i}" for i in range(model.n)]
    rows = [(h.t, h.front_x, *h.sup, *h.floor)
            for h in result.state.history]
    extras = {"trace": (header, rows)}
    if result.state.frames:
        fheader = ["t", "x"] + [f"u{i}" for i in range(model.n)]
        frows = [(t, grid.x[j], *U[:, j])
                 for t, U in result.state.frames
                 for j in range(grid.m)]
        extras["frames"] = (fheader, frows)
    return out, extras


def _compute_wave(cfg: dict, model: Model):
    sec = cfg.get("wave", {})
    c = _fnum(sec, "c", required=True)
    R = _fnum(sec, "R")
    m = sec.get("m")
    use_env = sec.get("envelope", True)
    profile = solve_truncated(
        model, c, R=R, m=int(m) if m is not None else None,
        envelope=("auto",) if use_env else None,
        eps=_fnum(sec, "eps"), tol=_fnum(sec, "tol", 1e-10))
    v_star = None
    try:
        v_star = find_constant_steady(model).v
    except (HypothesisViolation, NoConvergence):
        pass
    diag = wave_diagnostics(model, profile, v_star=v_star,
                            saturation=saturation_vector(model).k)
    out = {
        "c": profile.c,
        "R": profile.R,
        "m": int(profile.x.size),
        "residual": profile.residual,
        "method": profile.method,
        "solver_rounds": profile.solver_rounds,
        "bracket_ok": profile.bracket_ok,
        "diagnostics": diag,
    }
    if profile.envelope is not None:
        env = profile.envelope
        out["envelope"] = {
            "mu1": env.mu1, "mu2": env.mu2, "eps": env.eps, "A": env.A,
            "xi_cross": env.xi_cross.tolist(),
        }
    header = ["xi"] + [f"p{i}" for i in range(model.n)]
    rows = [(profile.x[j], *profile.p[:, j]) for j in range(profile.x.size)]
    extras = {"profile": (header, rows)}
    if profile.envelope is not None:
        up = profile.envelope.upper(profile.x)
        lo = profile.envelope.lower(profile.x)
        eheader = ["xi"] + [f"upper{i}" for i in range(model.n)] \
            + [f"lower{i}" for i in range(model.n)]
        erows = [(profile.x[j], *up[:, j], *lo[:, j])
                 for j in range(profile.x.size)]
        extras["envelope"] = (eheader, erows)
    return out, extras


def _compute_steady(cfg: dict, model: Model):
    sec = cfg.get("steady", {})
    tol = _fnum(sec, "tol", 1e-12)
    try:
        state = find_constant_steady(model, tol=tol)
    except HypothesisViolation:
        cert = nonexistence_certificate(model)
        out = {
            "status": "no_positive_steady",
            "certificate": {
                "certified": cert["certified"],
                "scope": cert["scope"],
                "lambda_pf": cert["lambda_pf"],
                "ray_scan_min_scaled_residual":
                    cert["ray_scan_min_scaled_residual"],
                "reason": cert["reason"],
            },
        }
        return out, {}
    out = {
        "status": "found",
        "v": state.v.tolist(),
        "residual": state.residual,
        "iterations": state.iterations,
        "start_index": state.start_index,
        "distinct_count": state.distinct_count,
        "method": state.method,
    }
    return out, {}


def _compute_spectra(cfg: dict, model: Model):
    sec = cfg.get("spectra", {})
    tol = _fnum(sec, "tol", 1e-12)
    pair = perron_frobenius(model.L, tol=tol)
    out: dict = {
        "lambda_pf": pair.value,
        "pf_vector": pair.vector.tolist(),
        "pf_residual": pair.residual,
    }
    mus = sec.get("mu_values", [])
    if mus:
        from .dispersion import kappa as _kappa
        out["kappa"] = [
            {"mu": float(mu), "value": _kappa(model, float(mu))[0]}
            for mu in mus]
    c = _fnum(sec, "c", 0.0)
    out["generalized_lambda1"] = {
        "c": c, "value": generalized_lambda1(model.d, c, model.L)}
    extras = {}
    rvals = sec.get("R_values", [])
    if rvals:
        rows = []
        ds = []
        for R in rvals:
            res = dirichlet_principal_eigenvalue(model.d, c, model.L,
                                                 float(R))
            rows.append((float(R), res.value))
            ds.append({"R": float(R), "value": res.value,
                       "grid_size": int(res.grid_size)})
        out["dirichlet"] = ds
        extras["lambda1"] = (["R", "lambda1"], rows)
    return out, extras


_TASKS = {
    "speed": _compute_speed,
    "simulate": _compute_simulate,
    "wave": _compute_wave,
    "steady": _compute_steady,
    "spectra": _compute_spectra,
}

_SWEEP_SUMMARY = {
    "speed": ("c_star", "mu_star", "lambda_pf"),
    "wave": ("residual", "solver_rounds", "bracket_ok"),
    "steady": ("status", "residual"),
    "simulate": ("fitted_speed", "fitted_stderr", "r2"),
    "spectra": ("lambda_pf",),
}


def _set_path(cfg: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = cfg
    for part in parts[:-1]:
        nxt = node.get(part)
        if not isinstance(nxt, dict):
            nxt = {}
            node[part] = nxt
        node = nxt
    node[parts[-1]] = value


def _compute_sweep(cfg: dict, model: Model, threads: int | None = None):
    sec = cfg.get("sweep")
    if not sec:
        raise ConfigError("sweep command needs a [sweep] section")
    task = sec.get("task")
    if task not in _TASKS:
        raise ConfigError(f"unknown sweep task {task!r}; available: "
                          f"{sorted(_TASKS)}")
    dotted = sec.get("parameter")
    if not isinstance(dotted, str) or not dotted:
        raise ConfigError("sweep needs a dotted 'parameter' string")
    values = sec.get("values")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep needs a nonempty 'values' list")
    workers = threads if threads is not None \
        else int(sec.get("max_workers", 4))

    def run_point(value):
        local = copy.deepcopy(cfg)
        local.pop("sweep", None)
        _set_path(local, dotted, value)
        local_model = _build_model(local["model"])
        report, _ = _TASKS[task](local, local_model)
        return report

    results: list[dict] = [{} for _ in values]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {pool.submit(run_point, v): i
                   for i, v in enumerate(values)}
        for fut, i in futures.items():
            try:
                results[i] = {"value": values[i], "status": "ok",
                              "report": fut.result(), "error": None}
            except Exception as exc:  # isolate per-point failures
                results[i] = {"value": values[i],
                              "status": type(exc).__name__,
                              "report": None, "error": str(exc)}

    fields = _SWEEP_SUMMARY[task]
    # a report field may share its name with an envelope column (steady
    # reports carry their own "status"); prefix it in the header only
    header = ["index", "value", "status",
              *[f"report_{f}" if f in ("index", "value", "status") else f
                for f in fields]]
    rows = []
    for i, entry in enumerate(results):
        rep = entry["report"] or {}
        rows.append((i, entry["value"], entry["status"],
                     *[rep.get(f, "") for f in fields]))
    out = {
        "task": task,
        "parameter": dotted,
        "points": results,
        "ok_count": sum(1 for e in results if e["status"] == "ok"),
    }
    return out, {"sweep": (header, rows)}


# ------------------------------------------------------------- plumbing

def _write_outputs(out_dir: Path, prefix: str, command: str, report: dict,
                   extras: dict, config_hash: str) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    main = out_dir / f"{prefix}.json"
    body = dict(report)
    body["command"] = command
    body["config_hash"] = config_hash
    main.write_text(_jdump(body), encoding="utf-8")
    written.append(str(main))
    for name, (header, rows) in extras.items():
        path = out_dir / f"{prefix}_{name}.csv"
        _write_csv(path, header, rows, config_hash)
        written.append(str(path))
    meta = out_dir / f"{prefix}.meta.json"
    meta.write_text(_jdump({
        "command": command,
        "config_hash": config_hash,
        "created": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
    }), encoding="utf-8")
    written.append(str(meta))
    return written


def main(argv=None) -> int:
    parser = _Parser(prog="kpp-lab",
                     description="spectral toolkit for coupled KPP systems")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*_TASKS, "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", "--out-dir", dest="out_dir", default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--prefix", default=None)

    try:
        args = parser.parse_args(argv)
        cfg, raw = _load_config(args.config)
        _check_sections(cfg, args.command)
        config_hash = hashlib.sha256(raw).hexdigest()[:16]
        out_block = cfg.get("output", {})
        out_dir = Path(args.out_dir or out_block.get("dir", "."))
        prefix = args.prefix or out_block.get("prefix", args.command)
        if args.command == "sweep":
            model = _build_model(cfg["model"])
            report, extras = _compute_sweep(cfg, model,
                                            threads=args.threads)
        else:
            model = _build_model(cfg["model"])
            report, extras = _TASKS[args.command](cfg, model)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 4
    except _HYPOTHESIS_EXIT as exc:
        _emit_error(args, exc)
        return 2
    except _NUMERIC_EXIT as exc:
        _emit_error(args, exc)
        return 3

    files = _write_outputs(out_dir, prefix, args.command, report, extras,
                           config_hash)
    print(f"{args.command}: ok ({', '.join(files)})")
    return 0


def _emit_error(args, exc) -> None:
    print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
    try:
        cfg, raw = _load_config(args.config)
        config_hash = hashlib.sha256(raw).hexdigest()[:16]
        out_block = cfg.get("output", {})
        out_dir = Path(args.out_dir or out_block.get("dir", "."))
        prefix = args.prefix or out_block.get("prefix", args.command)
        _write_outputs(out_dir, prefix, args.command, {
            "status": "error",
            "error": type(exc).__name__,
            "message": str(exc),
        }, {}, config_hash)
    except Exception:
        pass  # error reporting must not mask the root exit code


if __name__ == "__main__":
    sys.exit(main())
