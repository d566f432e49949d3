"""Command-line front end.

Subcommands:
  action    - action function values, mean action, measure actions
  rotation  - boundary / measure rotation numbers and the boundary identity
  orbits    - periodic orbit census for one winding or a windowed range
  verify    - full theorem verification, writes text/JSON/CSV reports
  example41 - the local-perturbation pipeline with parameter flags
  audit     - property suites (area preservation, path independence,
              additivity, primitive-shift invariance)

Exit codes: 0 success/PASS, 1 FAIL verdict present, 2 INCONCLUSIVE or
non-convergent, 3 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
import jsonschema

from . import __version__
from .action import (
    ActionContext,
    MeasureSpec,
    action_function,
    additivity_defect,
    calabi,
    measure_action,
    path_independence_defect,
    shifted_action_difference,
)
from .errors import AnnactError, ConfigError, DegenerateGapError, NonConvergentError
from .harness import (
    VerificationReport,
    action_gap,
    candidate_windings,
    example_local_perturbation,
    q_threshold,
    verify_theorem,
)
from .maps import (
    LinearProfile,
    LocalDiskTwist,
    MapExpr,
    PolyBumpProfile,
    RigidRotation,
    Twist,
    area_defect,
    map_from_config,
    map_from_shorthand,
)
from .orbits import SearchConfig, find_periodic_orbits, orbits_to_csv
from .phase_space import AnnulusPoint, LiftedPoint, PolylinePath, ShiftedBeta
from .rotation import (
    boundary_rotation_number,
    lemma_boundary_identity_defect,
    mean_rotation_area,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3


# ---------------------------------------------------------------------------
# configuration schema (v1)
# ---------------------------------------------------------------------------

_MAP_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"variant": {"const": "rigid_rotation"}, "a": {"type": "number"}},
            "required": ["variant", "a"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "variant": {"const": "twist"},
                "profile": {"$ref": "#/$defs/twist_profile"},
            },
            "required": ["variant", "profile"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "variant": {"const": "local_disk_twist"},
                "center": {"$ref": "#/$defs/point"},
                "radius": {"type": "number", "exclusiveMinimum": 0},
                "profile": {"$ref": "#/$defs/radial_profile"},
            },
            "required": ["variant", "center", "radius", "profile"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "variant": {"const": "compose"},
                "outer": {"$ref": "#/$defs/map"},
                "inner": {"$ref": "#/$defs/map"},
            },
            "required": ["variant", "outer", "inner"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "variant": {"const": "iterate"},
                "base": {"$ref": "#/$defs/map"},
                "k": {"type": "integer", "minimum": 1},
            },
            "required": ["variant", "base", "k"],
            "additionalProperties": False,
        },
    ]
}

_MEASURE_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "kind": {"enum": ["boundary_lower", "boundary_upper", "area"]},
                "n_iter": {"type": "integer", "minimum": 1000},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "empirical"},
                "seed": {"$ref": "#/$defs/point"},
                "n_iter": {"type": "integer", "minimum": 1000},
            },
            "required": ["kind", "seed"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "orbit"},
                "q": {"type": "integer", "minimum": 1},
                "p": {"type": "integer"},
                "index": {"type": "integer", "minimum": 0},
            },
            "required": ["kind", "q", "p"],
            "additionalProperties": False,
        },
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema_version": {"const": 1},
        "map": {"$ref": "#/$defs/map"},
        "context": {
            "type": "object",
            "properties": {
                "beta": {
                    "oneOf": [
                        {"const": "canonical"},
                        {
                            "type": "object",
                            "properties": {"shift": {"type": "number"}},
                            "required": ["shift"],
                            "additionalProperties": False,
                        },
                    ]
                },
                "base_point": {"$ref": "#/$defs/point"},
            },
            "additionalProperties": False,
        },
        "measures": {
            "type": "object",
            "properties": {
                "mu1": {"$ref": "#/$defs/measure"},
                "mu2": {"$ref": "#/$defs/measure"},
            },
            "required": ["mu1", "mu2"],
            "additionalProperties": False,
        },
        "search": {
            "type": "object",
            "properties": {
                "grid": {"type": "integer", "minimum": 2},
                "newton_max_steps": {"type": "integer", "minimum": 1},
                "newton_damping": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "dedup_tolerance": {"type": "number", "exclusiveMinimum": 0},
                "boundary_margin": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.5},
                "max_grid": {"type": "integer", "minimum": 2},
            },
            "additionalProperties": False,
        },
        "task": {
            "type": "object",
            "properties": {
                "q_max": {"type": "integer", "minimum": 1},
                "n_iter": {"type": "integer", "minimum": 1000},
                "workers": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {
                "dir": {"type": "string"},
                "prefix": {"type": "string"},
            },
            "additionalProperties": False,
        },
    },
    "required": ["schema_version", "map"],
    "additionalProperties": False,
    "$defs": {
        "point": {
            "type": "array",
            "items": {"type": "number"},
            "minItems": 2,
            "maxItems": 2,
        },
        "map": _MAP_SCHEMA,
        "measure": _MEASURE_SCHEMA,
        "twist_profile": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {"kind": {"const": "linear"}},
                    "required": ["kind"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {"kind": {"const": "poly_bump"}, "c": {"type": "number"}},
                    "required": ["kind", "c"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "kind": {"const": "tabulated"},
                        "y": {"type": "array", "items": {"type": "number"}, "minItems": 4},
                        "phi": {"type": "array", "items": {"type": "number"}, "minItems": 4},
                    },
                    "required": ["kind", "y", "phi"],
                    "additionalProperties": False,
                },
            ]
        },
        "radial_profile": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {"kind": {"const": "poly_bump"}, "c": {"type": "number"}},
                    "required": ["kind", "c"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "kind": {"const": "tabulated"},
                        "r": {"type": "array", "items": {"type": "number"}, "minItems": 4},
                        "phi": {"type": "array", "items": {"type": "number"}, "minItems": 4},
                    },
                    "required": ["kind", "r", "phi"],
                    "additionalProperties": False,
                },
            ]
        },
    },
}


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: line {e.lineno} col {e.colno}: {e.msg}") from e
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        loc = "/".join(str(x) for x in e.absolute_path) or "<root>"
        raise ConfigError(f"config {path}: at {loc}: {e.message}") from e
    return cfg


def _context_from_config(cfg: dict) -> ActionContext:
    ctx_cfg = cfg.get("context", {})
    beta_cfg = ctx_cfg.get("beta", "canonical")
    base = ctx_cfg.get("base_point", [0.0, 0.0])
    base_point = AnnulusPoint(float(base[0]), float(base[1]))
    if beta_cfg == "canonical":
        return ActionContext(base_point=base_point)
    return ActionContext(beta=ShiftedBeta(float(beta_cfg["shift"])), base_point=base_point)


def _search_from_config(cfg: dict) -> SearchConfig:
    s = cfg.get("search", {})
    return SearchConfig(
        grid=s.get("grid", 48),
        newton_max_steps=s.get("newton_max_steps", 50),
        newton_damping=s.get("newton_damping", 0.5),
        dedup_tolerance=s.get("dedup_tolerance", 1e-6),
        boundary_margin=s.get("boundary_margin", 0.0),
        max_grid=s.get("max_grid", 384),
    )


def _measure_from_config(mcfg: dict, m: MapExpr, cfg_search: SearchConfig) -> MeasureSpec:
    kind = mcfg["kind"]
    if kind in ("boundary_lower", "boundary_upper", "area"):
        return MeasureSpec(kind, n_iter=mcfg.get("n_iter", 1_000_000))
    if kind == "empirical":
        seed = mcfg["seed"]
        return MeasureSpec.empirical(AnnulusPoint(seed[0], seed[1]), mcfg.get("n_iter", 100_000))
    if kind == "orbit":
        orbits = find_periodic_orbits(m, mcfg["q"], mcfg["p"], cfg_search)
        idx = mcfg.get("index", 0)
        if idx >= len(orbits):
            raise ConfigError(
                f"orbit measure: census found {len(orbits)} orbit(s) of type "
                f"({mcfg['q']},{mcfg['p']}), index {idx} unavailable")
        return MeasureSpec.from_orbit(orbits[idx])
    raise ConfigError(f"unknown measure kind {kind!r}")


def _workers(args_workers: int | None, cfg: dict | None = None) -> int:
    if args_workers is not None:
        return max(1, args_workers)
    if cfg is not None and "task" in cfg and "workers" in cfg["task"]:
        return max(1, cfg["task"]["workers"])
    env = os.environ.get("ANNACT_WORKERS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# report rendering
# ---------------------------------------------------------------------------

def render_report_text(rep: VerificationReport) -> str:
    lines = []
    lines.append(f"map: {rep.map_description}")
    for role, s in (("mu1", rep.mu1), ("mu2", rep.mu2)):
        lines.append(
            f"{role}: {s.description}  action={s.action!r} (err {s.action_error!r})  "
            f"rotation={s.rotation!r} (err {s.rotation_error!r})"
        )
    lines.append(f"action gap: delta={rep.gap!r} (err {rep.gap_error!r})")
    lines.append(f"q_threshold: {rep.q_threshold}")
    for r in rep.results:
        lines.append(
            f"q={r.q}: {r.verdict}  distinct_orbits={r.distinct_orbits}  "
            f"grid={r.grid_used}  prime_least_period_ok={r.prime_least_period_ok}"
        )
        for w in r.windings:
            lines.append(f"  p={w.p}: {len(w.orbits)} orbit(s)")
            for o in w.orbits:
                lines.append(
                    f"    start=({o.points[0].xt!r},{o.points[0].y!r})  "
                    f"residual={o.residual!r}  least_period={o.least_period}  "
                    f"action={o.action!r}  degenerate={o.degenerate_flag}"
                )
        for n in r.notes:
            lines.append(f"  note: {n}")
    lines.append(f"overall: {rep.overall_verdict}")
    for n in rep.notes:
        lines.append(f"note: {n}")
    return "\n".join(lines) + "\n"


def render_report_json(rep: VerificationReport) -> str:
    return json.dumps(rep.to_dict(), sort_keys=True, indent=2) + "\n"


def phase_portrait_csv(m: MapExpr, seeds_per_axis: int = 12, steps: int = 200) -> str:
    """Plot-ready trajectories: kind,id,step,x,y with deterministic seeds."""
    lines = ["kind,id,step,x,y"]
    sid = 0
    for i in range(seeds_per_axis):
        for j in range(seeds_per_axis):
            x = (i + 0.5) / seeds_per_axis
            y = (j + 0.5) / seeds_per_axis
            xt, yy = x, y
            for step in range(steps):
                lines.append(f"trajectory,{sid},{step},{xt % 1.0!r},{yy!r}")
                xt2, yy2 = m.apply_lift(xt, yy)
                xt, yy = float(xt2), float(yy2)
            sid += 1
    return "\n".join(lines) + "\n"


def report_orbit_rows(rep: VerificationReport) -> list:
    orbits = []
    for r in rep.results:
        for w in r.windings:
            orbits.extend(w.orbits)
    return orbits


def write_verification_outputs(rep: VerificationReport, m: MapExpr, out_dir: str,
                               prefix: str = "report") -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    txt = out / f"{prefix}.txt"
    txt.write_text(render_report_text(rep))
    written.append(str(txt))
    js = out / f"{prefix}.json"
    js.write_text(render_report_json(rep))
    written.append(str(js))
    csv_path = out / f"{prefix}_orbits.csv"
    csv_path.write_text(orbits_to_csv(report_orbit_rows(rep)))
    written.append(str(csv_path))
    plot_path = out / f"{prefix}_plot.csv"
    orbit_rows = []
    for oid, orb in enumerate(report_orbit_rows(rep)):
        for step, pt in enumerate(orb.points):
            orbit_rows.append(f"orbit,{oid},{step},{pt.xt % 1.0!r},{pt.y!r}")
    header = phase_portrait_csv(m)
    plot_path.write_text(header + ("\n".join(orbit_rows) + "\n" if orbit_rows else ""))
    written.append(str(plot_path))
    return written


def _exit_code_for(rep: VerificationReport) -> int:
    if rep.overall_verdict == "PASS":
        return EXIT_OK
    if rep.overall_verdict == "FAIL":
        return EXIT_FAIL
    return EXIT_INCONCLUSIVE


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _resolve_map(args, cfg: dict | None) -> MapExpr:
    if getattr(args, "map", None):
        return map_from_shorthand(args.map)
    if cfg is not None:
        return map_from_config(cfg["map"])
    raise ConfigError("no map given: use --map SHORTHAND or --config FILE")


def _maybe_config(args) -> dict | None:
    if getattr(args, "config", None):
        return load_config(args.config)
    return None


def cmd_action(args) -> int:
    cfg = _maybe_config(args)
    m = _resolve_map(args, cfg)
    ctx = _context_from_config(cfg) if cfg else ActionContext.default()
    if args.beta_shift is not None:
        ctx = ActionContext(beta=ShiftedBeta(args.beta_shift), base_point=ctx.base_point)
    print(f"map: {m.describe()}")
    for spec in args.point or []:
        x, y = (float(t) for t in spec.split(","))
        p = AnnulusPoint(x, y)
        print(f"g({p.x!r},{p.y!r}) = {action_function(m, ctx, p)!r}")
    cv = calabi(m, ctx)
    print(f"mean action (Calabi) = {cv.value!r} (err {cv.error_estimate!r})")
    for name in ("boundary_lower", "boundary_upper", "area"):
        mv = measure_action(m, ctx, MeasureSpec(name, n_iter=args.n_iter))
        print(f"action[{name}] = {mv.value!r} (err {mv.error_estimate!r})")
    return EXIT_OK


def cmd_rotation(args) -> int:
    cfg = _maybe_config(args)
    m = _resolve_map(args, cfg)
    print(f"map: {m.describe()}")
    lo = boundary_rotation_number(m, "lower")
    hi = boundary_rotation_number(m, "upper")
    ar = mean_rotation_area(m)
    print(f"rotation[lower] = {lo.value!r} (err {lo.error_estimate!r}, exact={lo.exact})")
    print(f"rotation[upper] = {hi.value!r} (err {hi.error_estimate!r}, exact={hi.exact})")
    print(f"rotation[area]  = {ar.value!r} (err {ar.error_estimate!r})")
    defect = lemma_boundary_identity_defect(m, n_iter=args.n_iter)
    print(f"boundary identity defect = {defect!r}")
    return EXIT_OK


def cmd_orbits(args) -> int:
    cfg = _maybe_config(args)
    m = _resolve_map(args, cfg)
    search = _search_from_config(cfg) if cfg else SearchConfig()
    if args.grid:
        from dataclasses import replace

        search = replace(search, grid=args.grid)
    ps = [args.p] if args.p is not None else candidate_windings(m, args.q)
    workers = _workers(args.workers, cfg)
    all_orbits = []
    for p in ps:
        orbits = find_periodic_orbits(m, args.q, p, search, workers=workers)
        print(f"q={args.q} p={p}: {len(orbits)} orbit(s)")
        for o in orbits:
            print(
                f"  start=({o.points[0].xt!r},{o.points[0].y!r}) residual={o.residual!r} "
                f"least_period={o.least_period} action={o.action!r} degenerate={o.degenerate_flag}"
            )
        all_orbits.extend(orbits)
    if args.out:
        Path(args.out).write_text(orbits_to_csv(all_orbits))
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    if "measures" not in cfg:
        raise ConfigError("verify needs a 'measures' section with mu1 and mu2")
    m = map_from_config(cfg["map"])
    ctx = _context_from_config(cfg)
    search = _search_from_config(cfg)
    mu1 = _measure_from_config(cfg["measures"]["mu1"], m, search)
    mu2 = _measure_from_config(cfg["measures"]["mu2"], m, search)
    q_max = cfg.get("task", {}).get("q_max")
    workers = _workers(args.workers, cfg)
    try:
        if q_max is None:
            delta, _ = action_gap(m, mu1, mu2, ctx)
            q_max = q_threshold(delta) + 2
            if q_max > 66:
                raise ConfigError(
                    f"action gap {delta:.3e} puts the period threshold at {q_max - 2}; "
                    "set task.q_max explicitly for a search this deep")
        rep = verify_theorem(m, mu1, mu2, q_max=q_max, cfg=search, ctx=ctx, workers=workers)
    except DegenerateGapError as e:
        print(f"DegenerateGap: {e}")
        return EXIT_INCONCLUSIVE
    out_cfg = cfg.get("output", {})
    out_dir = args.out_dir or out_cfg.get("dir")
    if out_dir:
        prefix = out_cfg.get("prefix", "report")
        for path in write_verification_outputs(rep, m, out_dir, prefix):
            print(f"wrote {path}")
    print(render_report_text(rep), end="")
    return _exit_code_for(rep)


def cmd_example41(args) -> int:
    cx, cy = (float(t) for t in args.center.split(","))
    try:
        rep = example_local_perturbation(
            args.a, AnnulusPoint(cx, cy), args.radius, args.c,
            q_max=args.q_max, workers=_workers(args.workers),
        )
    except DegenerateGapError as e:
        print(f"DegenerateGap: {e}")
        return EXIT_INCONCLUSIVE
    if args.out_dir:
        bump = LocalDiskTwist.poly_bump(AnnulusPoint(cx, cy), args.radius, args.c)
        from .maps import Compose as _Compose

        m = _Compose(RigidRotation(args.a), bump)
        for path in write_verification_outputs(rep, m, args.out_dir, "example41"):
            print(f"wrote {path}")
    print(render_report_text(rep), end="")
    return _exit_code_for(rep)


# ---------------------------------------------------------------------------
# audit suites
# ---------------------------------------------------------------------------

def _random_built_in(rng: np.random.Generator) -> MapExpr:
    kind = rng.integers(0, 4)
    if kind == 0:
        return RigidRotation(float(rng.uniform(-1.0, 1.0)))
    if kind == 1:
        return Twist(LinearProfile())
    if kind == 2:
        return Twist(PolyBumpProfile(float(rng.uniform(-1.5, 1.5))))
    cy = float(rng.uniform(0.25, 0.75))
    cx = float(rng.uniform(0.0, 1.0))
    radius = float(rng.uniform(0.3, 0.9)) * min(cy, 1.0 - cy)
    c = float(rng.uniform(-6.0, 6.0))
    return LocalDiskTwist.poly_bump(AnnulusPoint(cx, cy), radius, c)


def _random_composition(rng: np.random.Generator, max_leaves: int = 3) -> MapExpr:
    from .maps import Compose as _Compose

    n = int(rng.integers(1, max_leaves + 1))
    expr = _random_built_in(rng)
    for _ in range(n - 1):
        expr = _Compose(_random_built_in(rng), expr)
    return expr


def _audit_line(name: str, worst: float, tol: float) -> tuple[str, bool]:
    ok = worst < tol
    return f"[{'PASS' if ok else 'FAIL'}] {name}: worst {worst:.3e} (tol {tol:g})", ok


def cmd_audit(args) -> int:
    rng = np.random.default_rng(args.seed)
    ok_all = True
    lines = []

    families = [
        RigidRotation(0.6180339887),
        Twist(LinearProfile()),
        Twist(PolyBumpProfile(0.8)),
        LocalDiskTwist.poly_bump(AnnulusPoint(0.5, 0.5), 0.35, 50.85),
    ]
    worst = max(area_defect(m, 64) for m in families)
    for _ in range(args.trials // 4):
        worst = max(worst, area_defect(_random_composition(rng), 64))
    line, ok = _audit_line("area preservation (64x64 grids)", worst, 1e-9)
    lines.append(line)
    ok_all &= ok

    ctx = ActionContext.default()
    worst = 0.0
    for _ in range(args.trials):
        m = _random_composition(rng)
        target = AnnulusPoint(float(rng.uniform(0, 1)), float(rng.uniform(0.05, 1)))
        mid = LiftedPoint(float(rng.uniform(0, 1)), float(rng.uniform(0, 1)))
        dogleg = PolylinePath((LiftedPoint(0.0, 0.0), mid, LiftedPoint(target.x, target.y)))
        worst = max(worst, path_independence_defect(m, ctx, target, dogleg))
    line, ok = _audit_line("path independence (random dog-legs)", worst, 1e-8)
    lines.append(line)
    ok_all &= ok

    worst = 0.0
    for _ in range(args.trials):
        m1 = _random_built_in(rng)
        m2 = _random_built_in(rng)
        worst = max(worst, additivity_defect(m1, m2, ctx))
    line, ok = _audit_line("mean-action additivity (random pairs)", worst, 1e-8)
    lines.append(line)
    ok_all &= ok

    tw = Twist(LinearProfile())
    worst = 0.0
    for c in (-1.0, -0.3, 0.7, 2.0):
        base, shifted = shifted_action_difference(
            tw, MeasureSpec("boundary_upper", n_iter=10_000),
            MeasureSpec("boundary_lower", n_iter=10_000), c)
        worst = max(worst, abs(shifted - base - c * 1.0))
        rot = RigidRotation(0.37)
        base, shifted = shifted_action_difference(
            rot, MeasureSpec("boundary_upper", n_iter=10_000),
            MeasureSpec("boundary_lower", n_iter=10_000), c)
        worst = max(worst, abs(shifted - base))
    line, ok = _audit_line("primitive-shift law (boundary pairs)", worst, 1e-6)
    lines.append(line)
    ok_all &= ok

    for text in lines:
        print(text)
    print(f"audit: {'PASS' if ok_all else 'FAIL'}")
    return EXIT_OK if ok_all else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annact",
        description="Actions, rotation numbers and periodic orbits of exact "
                    "area-preserving annulus maps.",
    )
    parser.add_argument("--version", action="version", version=f"annact {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_map_args(sp, config_ok=True):
        sp.add_argument("--map", help="map shorthand, e.g. rigid:a=0.618 or "
                                      "rigid:a=0.618*disk:cx=0.5,cy=0.5,R=0.35,c=50.85")
        if config_ok:
            sp.add_argument("--config", help="JSON experiment configuration")

    sp = sub.add_parser("action", help="action function, mean action, measure actions")
    add_map_args(sp)
    sp.add_argument("--point", action="append", help="x,y (repeatable)")
    sp.add_argument("--beta-shift", type=float, default=None, help="use beta + c dx")
    sp.add_argument("--n-iter", type=int, default=100_000)
    sp.set_defaults(func=cmd_action)

    sp = sub.add_parser("rotation", help="rotation numbers and the boundary identity")
    add_map_args(sp)
    sp.add_argument("--n-iter", type=int, default=100_000)
    sp.set_defaults(func=cmd_rotation)

    sp = sub.add_parser("orbits", help="periodic orbit census")
    add_map_args(sp)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--p", type=int, default=None, help="single winding (default: windowed)")
    sp.add_argument("--grid", type=int, default=None)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--out", help="write orbit CSV here")
    sp.set_defaults(func=cmd_orbits)

    sp = sub.add_parser("verify", help="full theorem verification from a config file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out-dir", default=None)
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("example41", help="local-perturbation pipeline")
    sp.add_argument("--a", type=float, required=True, help="rotation number (turns)")
    sp.add_argument("--center", default="0.5,0.5", help="bump center x,y")
    sp.add_argument("--radius", type=float, required=True)
    sp.add_argument("--c", type=float, required=True, help="chart rotation at the center (radians)")
    sp.add_argument("--q-max", type=int, default=None)
    sp.add_argument("--out-dir", default=None)
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_example41)

    sp = sub.add_parser("audit", help="property suites")
    sp.add_argument("--seed", type=int, default=2024)
    sp.add_argument("--trials", type=int, default=20)
    sp.set_defaults(func=cmd_audit)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse uses code 2 for usage errors; remap to the documented code
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateGapError as e:
        print(f"DegenerateGap: {e}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except NonConvergentError as e:
        print(f"NonConvergent: {e}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except AnnactError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
