"""Command-line front end.

Every run can write a manifest (tool version, resolved config, config hash,
seed, Green-table digest, verdicts, wall clock) next to its reports; the
manifest's config replayed through the same code version consumes the same
random numbers and reproduces every per-trial row byte for byte. Exit code
0 means all hard-gate verdicts passed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import experiments as ex
from . import interlacements as il
from .fixtures import FIXTURE_PARAMS, FixtureError, random_fixture
from .latepoints import SurgeryParams
from .potential import equilibrium_measure, green_table, lattice_constants
from .streams import RngStream
from .surgery import SurgeryError, roundtrip
from .torus import TorusGeometry, bulk_edge_split

SHARP_GAMMA_LO = {3: (3 + 2) / (2 * 3)}  # (d+2)/(2d)


class ConfigError(ValueError):
    pass


_CONFIG_SCHEMA: dict[str, type] = {
    "d": int,
    "N": int,
    "gamma": float,
    "delta": float,
    "eps": float,
    "K": float,
    "M": float,
    "alpha": str,
    "u": str,
    "trials": int,
    "seed": int,
    "budget_steps": int,
    "lN_policy": str,
    "fixtures": int,
}


def load_config(path: str | Path) -> dict:
    """Validated flat JSON config; errors carry the offending field path."""
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    out = {}
    for key, value in raw.items():
        if key not in _CONFIG_SCHEMA:
            raise ConfigError(f"config.{key}: unknown field")
        want = _CONFIG_SCHEMA[key]
        if want is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if want is str and isinstance(value, (int, float)) and key in ("alpha", "u"):
            value = str(value)
        if not isinstance(value, want) or isinstance(value, bool):
            raise ConfigError(
                f"config.{key}: expected {want.__name__}, got {type(value).__name__}"
            )
        out[key] = value
    _check_cross_constraints(out)
    return out


def _check_cross_constraints(cfg: dict) -> None:
    if "gamma" in cfg and any(k in cfg for k in ("eps", "K", "M")):
        g = cfg["gamma"]
        if not 0 < g < 1:
            raise ConfigError(f"config.gamma: must lie in (0, 1), got {g}")
    if "eps" in cfg and cfg["eps"] <= 0:
        raise ConfigError(f"config.eps: must be > 0, got {cfg['eps']}")
    if "K" in cfg and "eps" in cfg and cfg["K"] <= 6 * cfg["eps"]:
        raise ConfigError(
            f"config.K: must exceed 6*eps = {6 * cfg['eps']}, got {cfg['K']}"
        )
    if "delta" in cfg and not 0 < cfg["delta"] <= 1:
        raise ConfigError(f"config.delta: must lie in (0, 1], got {cfg['delta']}")
    if "M" in cfg and cfg["M"] <= 0:
        raise ConfigError(f"config.M: must be > 0, got {cfg['M']}")
    if "lN_policy" in cfg:
        _parse_ln_policy(cfg["lN_policy"])


def _parse_ln_policy(text: str) -> tuple[str, int | None]:
    if text == "paper":
        return "paper", None
    if text == "clamped":
        return "clamped", None
    if text.startswith("clamped:"):
        try:
            return "clamped", int(text.split(":", 1)[1])
        except ValueError:
            raise ConfigError(
                f"config.lN_policy: clamped:<int> expected, got {text!r}"
            ) from None
    raise ConfigError(
        f"config.lN_policy: expected paper | clamped | clamped:<int>, got {text!r}"
    )


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x != ""]
    except ValueError:
        raise ConfigError(f"expected comma-separated floats, got {text!r}") from None


@dataclass
class RunManifest:
    command: str
    config: dict
    verdicts: list[dict] = field(default_factory=list)
    wall_clock_s: float = 0.0
    tool_version: str = __version__

    def to_dict(self) -> dict:
        blob = json.dumps(self.config, sort_keys=True).encode()
        return {
            "tool_version": self.tool_version,
            "command": self.command,
            "config": self.config,
            "config_sha256": hashlib.sha256(blob).hexdigest(),
            "master_seed": self.config.get("master_seed", self.config.get("seed")),
            "green_digest": self.config.get("green_digest"),
            "verdicts": self.verdicts,
            "wall_clock_s": self.wall_clock_s,
        }

    def save(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "manifest.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path


def _emit(report: ex.ExperimentReport, args, manifest: RunManifest) -> int:
    manifest.verdicts = [v.to_dict() for v in report.verdicts]
    for v in report.verdicts:
        gate = "hard" if v.hard else "info"
        status = "PASS" if v.passed else "FAIL"
        print(f"[{status}] ({gate}) {v.name}: {v.value:.6g} in [{v.lo:.6g}, {v.hi:.6g}] {v.note}")
    if args.out:
        jp, cp = report.save(args.out)
        mp = manifest.save(args.out)
        print(f"wrote {jp}, {cp}, {mp}")
    return 0 if report.hard_pass else 1


def _stream(args) -> RngStream:
    return RngStream(args.seed, ())


def _merged(args, parser_fields: list[str]) -> dict:
    """Start from --config (if given), overlay explicit CLI flags."""
    cfg = load_config(args.config) if getattr(args, "config", None) else {}
    for name in parser_fields:
        val = getattr(args, name, None)
        if val is not None:
            cfg[name] = val
    _check_cross_constraints({k: v for k, v in cfg.items() if k in _CONFIG_SCHEMA})
    return cfg


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_green(args) -> int:
    table = green_table(args.d)
    consts = lattice_constants(args.d)
    out = {
        "d": args.d,
        "g0": table.g0,
        "g_e1": table.g_e1,
        "g0_mc": table.g0_mc,
        "g0_mc_sigma": table.g0_mc_sigma,
        "c3": consts.c3,
        "c4": consts.c4,
        "escape": consts.escape,
        "tab_radius": table.tab_radius,
        "digest": table.digest,
    }
    print(json.dumps(out, indent=2))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "green.json").write_text(json.dumps(out, indent=2) + "\n")
    ok = abs((table.g0 - table.g_e1) - 1.0) <= 1e-9
    print(f"[{'PASS' if ok else 'FAIL'}] (hard) g0 - g_e1 = 1 within 1e-9")
    return 0 if ok else 1


def _cmd_capacity(args) -> int:
    table = green_table(args.d)
    R = args.N if args.N is not None else 5
    pts = il.cube_points(args.d, R)
    res = equilibrium_measure(pts, table)
    ratio = res.capacity / R ** (args.d - 2)
    out = {
        "d": args.d,
        "side": R,
        "capacity": res.capacity,
        "ratio_to_R^(d-2)": ratio,
        "residual": res.residual,
        "cap_point": 1.0 / table.g0,
        "cap_pair": 2.0 / (table.g0 + table.g_e1),
    }
    print(json.dumps(out, indent=2))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "capacity.json").write_text(json.dumps(out, indent=2) + "\n")
    return 0


def _cmd_cover(args) -> int:
    cfg = _merged(args, ["d", "N", "trials", "seed", "budget_steps"])
    t0 = time.time()
    report = ex.cover_time_stats(
        cfg.get("d", 3), cfg.get("N", 12), cfg.get("trials", 200),
        RngStream(cfg.get("seed", 0), ()), max_steps=cfg.get("budget_steps"),
    )
    man = RunManifest("cover", report.config)
    man.wall_clock_s = time.time() - t0
    print(json.dumps(report.summary, indent=2))
    return _emit(report, args, man)


def _cmd_late_points(args) -> int:
    cfg = _merged(args, ["d", "N", "trials", "seed"])
    alphas = _float_list(args.alpha or cfg.get("alpha", "0.5"))
    t0 = time.time()
    report = ex.late_point_stats(
        cfg.get("d", 3), cfg.get("N", 16), alphas, cfg.get("trials", 100),
        RngStream(cfg.get("seed", 0), ()),
    )
    man = RunManifest("late-points", report.config)
    man.wall_clock_s = time.time() - t0
    print(json.dumps(report.summary, indent=2))
    return _emit(report, args, man)


def _cmd_interlace(args) -> int:
    cfg = _merged(args, ["d", "N", "trials", "seed"])
    mults = _float_list(args.u or cfg.get("u", "0.5,1,2"))
    t0 = time.time()
    report = ex.interlacement_law_check(
        cfg.get("trials", 2000), RngStream(cfg.get("seed", 0), ()),
        d=cfg.get("d", 3), window_side=cfg.get("N", 5), u_multipliers=mults,
    )
    man = RunManifest("interlace", report.config)
    man.wall_clock_s = time.time() - t0
    print(json.dumps(report.summary, indent=2))
    return _emit(report, args, man)


def _cmd_cover_level(args) -> int:
    cfg = _merged(args, ["d", "N", "trials", "seed"])
    gate = cfg.get("N", 12)
    Rs = sorted({6, 9, gate}) if gate == 12 else [gate]
    t0 = time.time()
    report = ex.cover_level_curve(
        cfg.get("trials", 2000), RngStream(cfg.get("seed", 0), ()),
        d=cfg.get("d", 3), Rs=Rs, gate_R=gate,
    )
    man = RunManifest("cover-level", report.config)
    man.wall_clock_s = time.time() - t0
    print(json.dumps(report.summary, indent=2))
    return _emit(report, args, man)


def _surgery_params(cfg: dict) -> SurgeryParams:
    d = cfg.get("d", 3)
    N = cfg.get("N", 16)
    table = green_table(d)
    geo = TorusGeometry(d, N)
    defaults = FIXTURE_PARAMS.get(N, FIXTURE_PARAMS[16])
    policy, override = _parse_ln_policy(cfg.get("lN_policy", "clamped"))
    return SurgeryParams(
        geo=geo,
        gamma=cfg.get("gamma", defaults["gamma"]),
        delta=cfg.get("delta", defaults["delta"]),
        eps=cfg.get("eps", defaults["eps"]),
        K=cfg.get("K", defaults["K"]),
        M=cfg.get("M", defaults["M"]),
        g0=table.g0,
        g_e1=table.g_e1,
        l_policy=policy,
        l_override=override,
    )


def _cmd_surgery(args) -> int:
    cfg = _merged(
        args, ["d", "N", "gamma", "delta", "eps", "K", "M", "trials", "seed", "lN_policy"]
    )
    seed = cfg.get("seed", 0)
    if args.action == "demo":
        params = _surgery_params(cfg)
        _, f_mask = bulk_edge_split(params.geo, params.delta)
        fix = random_fixture(params, RngStream(seed, (1,)))
        rt = roundtrip(params, fix.path, f_mask, RngStream(seed, (2,)))
        plan = [rec.to_json_dict() for rec in rt.surgery.records]
        print(json.dumps(
            {
                "layout": fix.layout_name,
                "N": params.geo.N,
                "l_n": params.l_n,
                "T": [params.T1, params.T2, params.T3, params.T4],
                "records": plan,
                "total_inserted": rt.surgery.total_inserted,
                "gap": rt.surgery.gap,
                "recovered_exactly": bool(rt.ok),
            },
            indent=2,
        ))
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "surgery_plan.json").write_text(
                json.dumps(plan, indent=2) + "\n"
            )
        print(f"[{'PASS' if rt.ok else 'FAIL'}] (hard) roundtrip recovered the path")
        return 0 if rt.ok else 1
    if args.action == "roundtrip":
        params = _surgery_params(cfg)
        _, f_mask = bulk_edge_split(params.geo, params.delta)
        n = args.fixtures if args.fixtures is not None else cfg.get("fixtures", 100)
        ok = 0
        t0 = time.time()
        for i in range(n):
            fix = random_fixture(params, RngStream(seed, (1, i)))
            rt = roundtrip(params, fix.path, f_mask, RngStream(seed, (2, i)))
            ok += bool(rt.ok)
        dt = time.time() - t0
        print(f"{ok}/{n} exact round trips on N={params.geo.N} in {dt:.1f}s")
        man = RunManifest("surgery-roundtrip", {"seed": seed, "N": params.geo.N, "fixtures": n})
        man.verdicts = [
            {"name": "roundtrip", "passed": ok == n, "hard": True, "value": ok}
        ]
        if args.out:
            man.save(args.out)
        print(f"[{'PASS' if ok == n else 'FAIL'}] (hard) all round trips exact")
        return 0 if ok == n else 1
    if args.action == "certify":
        d = cfg.get("d", 3)
        lo = SHARP_GAMMA_LO.get(d, (d + 2) / (2 * d))
        gamma = cfg.get("gamma", 0.9)
        if not lo < gamma < 1:
            print(
                f"error: certified runs need gamma in ({lo:.4g}, 1) "
                f"(= ((d+2)/(2d), 1) for d={d}); got {gamma}",
                file=sys.stderr,
            )
            return 2
        cfg.setdefault("gamma", gamma)
        params = _surgery_params({**cfg, "gamma": gamma})
        t0 = time.time()
        report = ex.certified_lower_bound(
            params, cfg.get("trials", 400), RngStream(seed, ())
        )
        man = RunManifest("surgery-certify", report.config)
        man.wall_clock_s = time.time() - t0
        print(json.dumps(report.summary, indent=2))
        return _emit(report, args, man)
    raise AssertionError(f"unknown surgery action {args.action}")


_EXPERIMENT_IDS = (
    "cover_time",
    "late_points",
    "upward_deviation",
    "certified_bound",
    "decoupling",
    "max_local_time",
    "interlacement_laws",
    "cover_level",
)


def _cmd_experiment(args) -> int:
    cfg = _merged(
        args,
        ["d", "N", "gamma", "delta", "eps", "K", "M", "trials", "seed", "lN_policy",
         "budget_steps"],
    )
    seed = cfg.get("seed", 0)
    d = cfg.get("d", 3)
    stream = RngStream(seed, ())
    t0 = time.time()
    eid = args.id
    if eid == "cover_time":
        report = ex.cover_time_stats(d, cfg.get("N", 16), cfg.get("trials", 200), stream)
    elif eid == "late_points":
        alphas = _float_list(args.alpha or cfg.get("alpha", "0.5"))
        report = ex.late_point_stats(d, cfg.get("N", 32), alphas, cfg.get("trials", 200), stream)
    elif eid == "upward_deviation":
        report = ex.upward_deviation(
            d, [8, 12, 16], cfg.get("gamma", 1.15), cfg.get("trials", 20000), stream
        )
    elif eid == "certified_bound":
        report = ex.certified_lower_bound(
            _surgery_params({**cfg, "N": cfg.get("N", 8), "gamma": cfg.get("gamma", 0.9),
                             "eps": cfg.get("eps", 0.3), "K": cfg.get("K", 2.0),
                             "M": cfg.get("M", 1.0)}),
            cfg.get("trials", 400), stream,
        )
    elif eid == "decoupling":
        report = ex.decoupling_diagnostic(
            d, cfg.get("N", 24), cfg.get("gamma", 0.5), cfg.get("trials", 50), stream
        )
    elif eid == "max_local_time":
        report = ex.max_local_time_stats(
            d, cfg.get("budget_steps", 10**6), cfg.get("trials", 50), stream
        )
    elif eid == "interlacement_laws":
        report = ex.interlacement_law_check(cfg.get("trials", 20000), stream, d=d)
    elif eid == "cover_level":
        report = ex.cover_level_curve(cfg.get("trials", 2000), stream, d=d)
    else:
        print(f"error: unknown experiment id {eid!r}; know {', '.join(_EXPERIMENT_IDS)}",
              file=sys.stderr)
        return 2
    man = RunManifest(f"experiment {eid}", report.config)
    man.wall_clock_s = time.time() - t0
    print(json.dumps(report.summary, indent=2))
    return _emit(report, args, man)


def _cmd_validate_all(args) -> int:
    """Reduced-scale pass over every hard gate; exit 0 iff all pass."""
    cfg = _merged(args, ["seed", "trials"])
    seed = cfg.get("seed", 0)
    scale = cfg.get("trials", 0)  # 0 = defaults below
    results: list[tuple[str, bool]] = []
    t_start = time.time()

    table = green_table(3)
    results.append(("green identity", abs((table.g0 - table.g_e1) - 1.0) <= 1e-9))
    consts = lattice_constants(3)
    results.append(
        (
            "capacity formulas",
            abs(equilibrium_measure(np.zeros((1, 3), dtype=np.int64), table).capacity
                - 1.0 / table.g0) <= 1e-6
            and consts.c4 > 1.0,
        )
    )

    params = _surgery_params({"N": 16, "seed": seed})
    _, f_mask = bulk_edge_split(params.geo, params.delta)
    n_rt = scale or 50
    ok = 0
    for i in range(n_rt):
        fix = random_fixture(params, RngStream(seed, (61, i)))
        ok += bool(roundtrip(params, fix.path, f_mask, RngStream(seed, (62, i))).ok)
    results.append((f"surgery roundtrips ({ok}/{n_rt})", ok == n_rt))

    rep = ex.cover_time_stats(3, 10, scale or 60, RngStream(seed, (63,)))
    results.append(("cover-time mean band", rep.verdicts[0].passed))

    rep = ex.interlacement_law_check(scale or 1500, RngStream(seed, (64,)))
    results.append(("interlacement laws", rep.hard_pass))

    all_ok = True
    for name, passed in results:
        print(f"[{'PASS' if passed else 'FAIL'}] (hard) {name}")
        all_ok &= passed
    man = RunManifest("validate-all", {"seed": seed, "trials": scale})
    man.verdicts = [
        {"name": n, "passed": bool(p), "hard": True} for n, p in results
    ]
    man.wall_clock_s = time.time() - t_start
    if args.out:
        man.save(args.out)
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, *names: str) -> None:
    spec = {
        "d": dict(type=int, default=None, help="lattice dimension (default 3)"),
        "N": dict(type=int, default=None, help="torus side / window side"),
        "gamma": dict(type=float, default=None),
        "delta": dict(type=float, default=None),
        "eps": dict(type=float, default=None),
        "K": dict(type=float, default=None),
        "M": dict(type=float, default=None),
        "alpha": dict(type=str, default=None, help="comma-separated alphas"),
        "u": dict(type=str, default=None, help="comma-separated multiples of g(0)"),
        "trials": dict(type=int, default=None),
        "seed": dict(type=int, default=None),
        "budget-steps": dict(type=int, default=None, dest="budget_steps"),
        "lN-policy": dict(type=str, default=None, dest="lN_policy",
                          help="paper | clamped | clamped:<v>"),
        "out": dict(type=str, default=None, help="directory for reports + manifest"),
        "config": dict(type=str, default=None, help="JSON config file"),
    }
    for name in names:
        kw = dict(spec[name])
        p.add_argument(f"--{name}", **kw)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coverlab", description=__doc__)
    p.add_argument("--version", action="version", version=f"coverlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("green", help="Green function constants and digest")
    _add_common(g, "d", "out")
    g.set_defaults(func=_cmd_green, d=3)

    c = sub.add_parser("capacity", help="capacity of Q(0,N) plus the exact point/pair values")
    _add_common(c, "d", "N", "out")
    c.set_defaults(func=_cmd_capacity, d=3)

    cov = sub.add_parser("cover", help="cover-time statistics")
    _add_common(cov, "d", "N", "trials", "seed", "budget-steps", "out", "config")
    cov.set_defaults(func=_cmd_cover)

    lp = sub.add_parser("late-points", help="late-point set statistics")
    _add_common(lp, "d", "N", "alpha", "trials", "seed", "out", "config")
    lp.set_defaults(func=_cmd_late_points)

    inter = sub.add_parser("interlace", help="interlacement one/two-point and FKG laws")
    _add_common(inter, "d", "N", "u", "trials", "seed", "out", "config")
    inter.set_defaults(func=_cmd_interlace)

    cl = sub.add_parser("cover-level", help="cover-level distribution for Q(0,R)")
    _add_common(cl, "d", "N", "trials", "seed", "out", "config")
    cl.set_defaults(func=_cmd_cover_level)

    s = sub.add_parser("surgery", help="loop surgery demo / roundtrip batch / certificate")
    s.add_argument("action", choices=["demo", "roundtrip", "certify"])
    s.add_argument("--fixtures", type=int, default=None, help="roundtrip batch size")
    _add_common(s, "d", "N", "gamma", "delta", "eps", "K", "M", "trials", "seed",
                "lN-policy", "out", "config")
    s.set_defaults(func=_cmd_surgery)

    e = sub.add_parser("experiment", help="run a named experiment")
    e.add_argument("id", choices=list(_EXPERIMENT_IDS))
    _add_common(e, "d", "N", "gamma", "delta", "eps", "K", "M", "alpha", "trials",
                "seed", "lN-policy", "budget-steps", "out", "config")
    e.set_defaults(func=_cmd_experiment)

    v = sub.add_parser("validate-all", help="reduced-scale pass over the hard gates")
    _add_common(v, "trials", "seed", "out", "config")
    v.set_defaults(func=_cmd_validate_all)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, FixtureError, SurgeryError, il.TruncationBudgetError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
