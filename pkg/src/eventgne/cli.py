"""Command-line runs: synthesise scenes, segment event files, verify and render results.

Settings come from dataclass defaults, then an INI file (``--config``), then
flags. Every command writes a ``manifest.ini`` holding the resolved settings;
passing it back as ``--config`` repeats the run byte for byte.
"""

from __future__ import annotations

import argparse
import configparser
import io
import json
import logging
import math
import os
import sys
from dataclasses import asdict, fields, replace

import numpy as np

from .errors import EventGNEError, SolverError
from .events import (
    Circle,
    EventSet,
    SceneSpec,
    filter_time_window,
    load_events,
    random_circle_scene,
    save_events,
    synthesize,
    two_circle_scene,
)
from .imaging import ModelParams, entropy, image_of_warped_events, write_pgm
from .kinematics import RelaxParams, Theta, reference_time
from .solver import EquilibriumResult, GAConfig, RefineConfig, solve_nlevel, verify_equilibrium
from .solver.nlevel import HARD_THRESHOLD

log = logging.getLogger("eventgne")

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3

RESULT_FILE = "result.json"
MANIFEST_FILE = "manifest.ini"
EVENTS_FILE = "events.csv"
TIME_BINS = 128
UNASSIGNED_GRAY = 32


class ConfigError(EventGNEError, ValueError):
    """Bad configuration value or flag."""


# ---------------------------------------------------------------- settings

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ",".join(_fmt(e) for e in v)
    return str(v)


_RELAX_KEYS = {"m": "m", "n": "n", "gamma": "gamma"}

DEFAULTS = {
    "run": {"events": "", "grid": "", "players": "", "seed": "0", "keep_window": ""},
    "scene": {
        "kind": "two_circle", "grid": "64,48", "timesteps": "0.0,1.0,2.0,3.0,4.0",
        "radius": "6.0", "speed": "4.0", "noise_events": "0",
        "objects": "2", "radius_min": "5.0", "radius_max": "8.0",
        "speed_min": "2.5", "speed_max": "6.0", "noise_fraction": "0.03",
    },
    "model": {
        "lambda1": _fmt(ModelParams.lambda1), "lambda2": _fmt(ModelParams.lambda2),
        "alpha": _fmt(ModelParams.alpha), "beta": _fmt(ModelParams.beta),
        "m": _fmt(RelaxParams.m), "n": _fmt(RelaxParams.n), "gamma": _fmt(RelaxParams.gamma),
        "t0": "min", "variance": ModelParams.variance,
    },
    "ga": {f.name: _fmt(f.default) for f in fields(GAConfig) if f.name != "seed"},
    "refine": {f.name: _fmt(f.default) for f in fields(RefineConfig)},
}

SECTIONS_FOR = {
    "synth": ("run", "scene"),
    "segment": ("run", "model", "ga", "refine"),
    "verify": ("run", "model"),
    "render": ("run", "model"),
}


def load_settings(path=None):
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_dict(DEFAULTS)
    if path:
        if not os.path.isfile(path):
            raise OSError(f"config file not found: {path}")
        user = configparser.ConfigParser(interpolation=None)
        try:
            user.read(path, encoding="ascii")
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        for sec in user.sections():
            if sec == "report" or sec.startswith("object "):
                if sec.startswith("object "):
                    cp[sec] = dict(user[sec])
                continue
            if sec not in DEFAULTS:
                raise ConfigError(f"{path}: unknown section [{sec}]")
            for key, val in user[sec].items():
                if key not in DEFAULTS[sec]:
                    raise ConfigError(f"{path}: unknown key {sec}.{key}")
                cp[sec][key] = val
    return cp


def _get(cp, sec, key, conv):
    raw = cp[sec][key].strip()
    try:
        return conv(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{sec}.{key}: cannot use {raw!r} ({exc})") from exc


def _floats(raw):
    return tuple(float(v) for v in raw.split(",") if v.strip())


def _grid(raw):
    if not raw:
        return None
    parts = raw.replace("x", ",").split(",")
    if len(parts) != 2:
        raise ValueError("expected NX,NY")
    nx, ny = (int(p) for p in parts)
    if nx <= 0 or ny <= 0:
        raise ValueError("grid dimensions must be positive")
    return nx, ny


def _windows(raw):
    out = []
    for item in raw.split(";"):
        item = item.strip()
        if not item:
            continue
        lo, sep, hi = item.partition(":")
        if not sep:
            raise ValueError(f"window {item!r} must look like t_lo:t_hi")
        out.append((float(lo), float(hi)))
    return out


def _optional_float(raw):
    return None if raw in ("", "None") else float(raw)


def _t0_policy(raw):
    if raw in ("min", "mid"):
        return raw
    v = float(raw)
    if not math.isfinite(v):
        raise ValueError("t0 must be finite")
    return v


def model_params(cp, es=None):
    relax = RelaxParams(**{k: _get(cp, "model", k, float) for k in _RELAX_KEYS})
    policy = _get(cp, "model", "t0", _t0_policy)
    t0 = None
    if policy != "min":
        if es is None and policy == "mid":
            raise ConfigError("model.t0 = mid needs the event set")
        t0 = reference_time(es, policy) if policy == "mid" else float(policy)
    try:
        return ModelParams(
            lambda1=_get(cp, "model", "lambda1", float),
            lambda2=_get(cp, "model", "lambda2", float),
            alpha=_get(cp, "model", "alpha", float),
            beta=_get(cp, "model", "beta", float),
            relax=relax,
            t0=t0,
            variance=cp["model"]["variance"].strip(),
        )
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc


def ga_config(cp):
    conv = {f.name: f.type for f in fields(GAConfig)}
    kw = {}
    for key in DEFAULTS["ga"]:
        if key == "mutation_rate":
            kw[key] = _get(cp, "ga", key, _optional_float)
        elif key == "seeding":
            kw[key] = cp["ga"][key].strip()
        else:
            kw[key] = _get(cp, "ga", key, float if "float" in str(conv[key]) else int)
    kw["seed"] = _get(cp, "run", "seed", int)
    try:
        return GAConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"ga: {exc}") from exc


def refine_config(cp):
    kw = {}
    for f in fields(RefineConfig):
        kw[f.name] = _get(cp, "refine", f.name, int if "int" in str(f.type) else float)
    try:
        return RefineConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"refine: {exc}") from exc


def scene_spec(cp):
    kind = cp["scene"]["kind"].strip()
    grid = _get(cp, "scene", "grid", _grid)
    if grid is None:
        raise ConfigError("scene.grid is required")
    ts = _get(cp, "scene", "timesteps", _floats)
    if kind == "two_circle":
        return two_circle_scene(
            grid=grid, radius=_get(cp, "scene", "radius", float),
            speed=_get(cp, "scene", "speed", float),
            noise_events=_get(cp, "scene", "noise_events", int), timesteps=ts,
        )
    if kind == "random":
        return random_circle_scene(
            _get(cp, "run", "seed", int),
            n_objects=_get(cp, "scene", "objects", int), grid=grid,
            radius=(_get(cp, "scene", "radius_min", float), _get(cp, "scene", "radius_max", float)),
            speed=(_get(cp, "scene", "speed_min", float), _get(cp, "scene", "speed_max", float)),
            timesteps=ts, noise_fraction=_get(cp, "scene", "noise_fraction", float),
        )
    if kind == "explicit":
        objs = []
        for sec in sorted((s for s in cp.sections() if s.startswith("object ")),
                          key=lambda s: int(s.split()[1])):
            objs.append(Circle(
                _get(cp, sec, "center", _floats), _get(cp, sec, "radius", float),
                _get(cp, sec, "velocity", _floats),
            ))
        return SceneSpec(objs, list(ts), grid, _get(cp, "scene", "noise_events", int))
    raise ConfigError(f"scene.kind: unknown scene kind {kind!r} (two_circle, random, explicit)")


def _write_manifest(cp, command, out, report=None):
    buf = io.StringIO()
    buf.write(f"# eventgne {command}\n")
    w = configparser.ConfigParser(interpolation=None)
    for sec in SECTIONS_FOR[command]:
        w[sec] = {k: cp[sec][k] for k in DEFAULTS[sec]}
    if command == "synth" and cp["scene"]["kind"].strip() == "explicit":
        for sec in cp.sections():
            if sec.startswith("object "):
                w[sec] = dict(cp[sec])
    if report:
        w["report"] = report
    w.write(buf)
    with open(os.path.join(out, MANIFEST_FILE), "w", encoding="ascii", newline="\n") as fh:
        fh.write(buf.getvalue())


# ---------------------------------------------------------------- helpers

def _infer_grid(path):
    """Smallest grid covering every event of an event file."""
    es = load_events(path, (2**31 - 1, 2**31 - 1))
    return int(es.x.max()), int(es.y.max())


def read_events(path, grid=None):
    if not path:
        raise ConfigError("an event file is required (--events or run.events)")
    if not os.path.isfile(path):
        raise OSError(f"event file not found: {path}")
    grid = grid or _infer_grid(path)
    return load_events(path, grid)


def _model_dict(params):
    d = {"lambda1": params.lambda1, "lambda2": params.lambda2, "alpha": params.alpha,
         "beta": params.beta, "t0": params.t0, "variance": params.variance}
    d.update(asdict(params.relax))
    return d


def _params_from_dict(d):
    return ModelParams(
        lambda1=d["lambda1"], lambda2=d["lambda2"], alpha=d["alpha"], beta=d["beta"],
        relax=RelaxParams(m=d["m"], n=d["n"], gamma=d["gamma"]), t0=d["t0"],
        variance=d.get("variance", "coordinate"),
    )


def _dump_json(obj, path):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_result(path):
    if not os.path.isfile(path):
        raise OSError(f"result file not found: {path}")
    with open(path, "r", encoding="ascii") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not a result file ({exc})") from exc
    try:
        res = EquilibriumResult.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed result ({exc})") from exc
    return res, d


def _check_dims(res, es):
    for j, z in enumerate(res.strategies, start=1):
        if z.size != len(es):
            raise ConfigError(
                f"result has {z.size} confidences for player {j} but the event file has {len(es)} events"
            )


def player_gray(j, n_players):
    return 64 + int(round(191 * j / n_players))


def composite_image(res, es):
    """Pixel -> gray level of the player owning most hard-assigned events there."""
    nx, ny = es.grid
    hard = res.assignments()
    counts = np.zeros((res.n_players, nx * ny))
    flat = (es.x - 1) * ny + (es.y - 1)
    for j in range(res.n_players):
        counts[j] = np.bincount(flat[hard[j]], minlength=nx * ny)
    owner = np.argmax(counts, axis=0)
    img = np.zeros(nx * ny)
    hit = counts.max(axis=0) > 0
    img[hit] = [player_gray(j + 1, res.n_players) for j in owner[hit]]
    return img.reshape(nx, ny)


def projection_images(res, es, bins=TIME_BINS):
    """x-y, x-t and y-t scatter projections; later players draw over earlier."""
    nx, ny = es.grid
    span = float(es.t.max() - es.t.min())
    tb = np.zeros(len(es), dtype=np.int64) if span == 0 else np.minimum(
        ((es.t - es.t.min()) / span * bins).astype(np.int64), bins - 1)
    xi, yi = es.x - 1, es.y - 1
    gray = np.full(len(es), UNASSIGNED_GRAY, dtype=float)
    for j, h in enumerate(res.assignments(), start=1):
        gray[h] = player_gray(j, res.n_players)
    order = np.argsort(gray, kind="stable")
    xy, xt, yt = np.zeros((nx, ny)), np.zeros((nx, bins)), np.zeros((ny, bins))
    xy[xi[order], yi[order]] = gray[order]
    xt[xi[order], tb[order]] = gray[order]
    yt[yi[order], tb[order]] = gray[order]
    return {"xy": xy, "xt": xt, "yt": yt}


def render_outputs(res, es, params, out):
    os.makedirs(out, exist_ok=True)
    written = []
    for j, (z, th) in enumerate(zip(res.strategies, res.thetas), start=1):
        path = os.path.join(out, f"player_{j}.pgm")
        if not np.any(z):
            log.warning("player %d selected no events; writing a blank layer", j)
        img = image_of_warped_events(z, es, th, params, "exact")
        write_pgm(img.values, path)
        written.append(path)
    path = os.path.join(out, "composite.pgm")
    write_pgm(composite_image(res, es), path, normalize=False)
    written.append(path)
    for name, img in projection_images(res, es).items():
        path = os.path.join(out, f"projection_{name}.pgm")
        write_pgm(img, path, normalize=False)
        written.append(path)
    return written


def segment_report(res, es, params, verification):
    rep = {"events": str(len(es)), "players": str(res.n_players),
           "t0": _fmt(res.t0), "verification": "pass" if verification.passed else "fail"}
    for j, (z, th, obj) in enumerate(zip(res.strategies, res.thetas, res.objectives), start=1):
        sel = z >= HARD_THRESHOLD
        e_warp = entropy(image_of_warped_events(z, es, th, params, "exact"), params)
        e_flat = entropy(image_of_warped_events(z, es, Theta(0.0, 0.0), params, "exact"), params)
        p = f"player{j}_"
        rep[p + "selected"] = str(int(sel.sum()))
        rep[p + "objective"] = _fmt(float(obj))
        rep[p + "theta"] = _fmt((float(th[0]), float(th[1])))
        rep[p + "entropy"] = _fmt(float(e_warp))
        rep[p + "entropy_unwarped"] = _fmt(float(e_flat))
        rep[p + "sharper_than_unwarped"] = str(bool(e_warp > e_flat)).lower()
        if es.labels is not None and sel.any():
            labs, cnt = np.unique(es.labels[sel], return_counts=True)
            rep[p + "majority_label"] = str(int(labs[np.argmax(cnt)]))
            rep[p + "purity"] = _fmt(float(cnt.max() / cnt.sum()))
    return rep


# ---------------------------------------------------------------- commands

def _apply_overrides(cp, args):
    run = {"events": "events", "players": "players", "seed": "seed", "grid": "grid"}
    for attr, key in run.items():
        v = getattr(args, attr, None)
        if v is not None:
            cp["run"][key] = str(v)
    if getattr(args, "keep_window", None):
        cp["run"]["keep_window"] = ";".join(args.keep_window)
    for key in ("lambda1", "lambda2", "alpha", "beta", "gamma", "m", "n", "t0", "variance"):
        v = getattr(args, key, None)
        if v is not None:
            cp["model"][key] = str(v)
    # alpha + beta = 1: a lone flag fixes the other weight
    a, b = getattr(args, "alpha", None), getattr(args, "beta", None)
    if a is not None and b is None:
        cp["model"]["beta"] = repr(1.0 - float(a))
    if b is not None and a is None:
        cp["model"]["alpha"] = repr(1.0 - float(b))
    for key in ("kind", "objects", "noise_events", "noise_fraction"):
        v = getattr(args, f"scene_{key}", None)
        if v is not None:
            cp["scene"][key] = str(v)
    if getattr(args, "scene_grid", None):
        cp["scene"]["grid"] = args.scene_grid


def cmd_synth(args):
    cp = load_settings(args.config)
    _apply_overrides(cp, args)
    spec = scene_spec(cp)
    es = synthesize(spec, seed=_get(cp, "run", "seed", int))
    os.makedirs(args.out, exist_ok=True)
    save_events(es, os.path.join(args.out, EVENTS_FILE))
    report = {"events": str(len(es)), "grid": _fmt(tuple(es.grid))}
    for i, o in enumerate(spec.objects):
        report[f"object{i}"] = (f"center={_fmt(tuple(float(c) for c in o.center))} "
                                f"radius={_fmt(float(o.radius))} "
                                f"velocity={_fmt(tuple(float(v) for v in o.velocity))}")
    report["noise_events"] = str(int(spec.noise_events))
    _write_manifest(cp, "synth", args.out, report)
    print(f"wrote {len(es)} events to {os.path.join(args.out, EVENTS_FILE)}")
    return EXIT_OK


def cmd_segment(args):
    cp = load_settings(args.config)
    _apply_overrides(cp, args)
    events_path = cp["run"]["events"].strip()
    if events_path:
        cp["run"]["events"] = os.path.abspath(events_path)
    es = read_events(cp["run"]["events"], _get(cp, "run", "grid", _grid))
    cp["run"]["grid"] = _fmt(tuple(es.grid))
    windows = _get(cp, "run", "keep_window", _windows)
    if windows:
        es = filter_time_window(es, windows)
    players = _get(cp, "run", "players", lambda r: int(r) if r else None)
    if players is None or players < 1:
        raise ConfigError("run.players: a player count of at least 1 is required (--players)")
    params = model_params(cp, es)
    res = solve_nlevel(players, es, params, ga_config(cp), refine_config(cp))
    res_params = replace(params, t0=res.t0)
    os.makedirs(args.out, exist_ok=True)
    save_events(es, os.path.join(args.out, EVENTS_FILE))
    d = res.to_dict()
    d["grid"] = list(es.grid)
    d["model"] = _model_dict(res_params)
    _dump_json(d, os.path.join(args.out, RESULT_FILE))
    for j, h in enumerate(res.assignments(), start=1):
        path = os.path.join(args.out, f"player_{j}.csv")
        if h.any():
            save_events(es.subset(h), path)
        else:
            open(path, "w").close()
    render_outputs(res, es, res_params, args.out)
    report = verify_equilibrium(res, es, res_params)
    _write_manifest(cp, "segment", args.out, segment_report(res, es, res_params, report))
    for j, dg in enumerate(res.diagnostics, start=1):
        print(f"player {j}: {dg['selected']} events, theta=({res.thetas[j-1][0]:.4g}, "
              f"{res.thetas[j-1][1]:.4g}), GA {dg['ga_generations']} gens ({dg['ga_termination']}), "
              f"refine {dg['refine_iterations']} its ({dg['refine_termination']})")
    return EXIT_OK


def _result_and_events(args):
    res, d = read_result(args.result)
    grid = _grid(args.grid) if args.grid else (tuple(d["grid"]) if "grid" in d else None)
    es = read_events(args.events, grid)
    _check_dims(res, es)
    params = _params_from_dict(d["model"]) if "model" in d else ModelParams(t0=res.t0)
    return res, es, params


def cmd_verify(args):
    res, es, params = _result_and_events(args)
    report = verify_equilibrium(res, es, params, strict=args.strict)
    print(report.summary())
    if args.report:
        _dump_json(report.to_dict(), args.report)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_render(args):
    res, es, params = _result_and_events(args)
    for path in render_outputs(res, es, params, args.out):
        print(path)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="eventgne", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=True):
        sp.add_argument("--config", help="INI file; flags override its values")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", required=out_required, help="output directory")

    sp = sub.add_parser("synth", help="write a synthetic circle scene with labels")
    common(sp)
    sp.add_argument("--scene", dest="scene_kind", choices=("two_circle", "random", "explicit"))
    sp.add_argument("--objects", dest="scene_objects", type=int, help="object count (random scenes)")
    sp.add_argument("--grid", dest="scene_grid", help="NX,NY")
    sp.add_argument("--noise-events", dest="scene_noise_events", type=int)
    sp.add_argument("--noise-fraction", dest="scene_noise_fraction", type=float)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("segment", help="solve the N-player segmentation of an event file")
    common(sp)
    sp.add_argument("--events")
    sp.add_argument("--grid", help="NX,NY (default: smallest grid covering the events)")
    sp.add_argument("--players", type=int)
    for name in ("lambda1", "lambda2", "alpha", "beta", "gamma", "m", "n"):
        sp.add_argument(f"--{name}", type=float)
    sp.add_argument("--t0", help="min, mid or a time in seconds")
    sp.add_argument("--variance", choices=("coordinate", "residual"))
    sp.add_argument("--keep-window", action="append", metavar="T_LO:T_HI",
                    help="keep events in this closed time window (repeatable)")
    sp.set_defaults(func=cmd_segment)

    for name, func, helptext in (("verify", cmd_verify, "check feasibility and masking of a result"),
                                 ("render", cmd_render, "write warped, composite and projection images")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--result", required=True)
        sp.add_argument("--events", required=True)
        sp.add_argument("--grid", help="NX,NY (default: taken from the result)")
        if name == "verify":
            sp.add_argument("--strict", action="store_true",
                            help="also fail on improving single-bit flips")
            sp.add_argument("--report", help="write the JSON report here")
        else:
            sp.add_argument("--out", required=True)
        sp.set_defaults(func=func)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"error: solver failed at level {exc.level}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (EventGNEError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
