"""Command-line entry point.

Exit codes: 0 success, 1 configuration or usage error, 2 numerical blow-up.
Reports are JSON and carry the SHA-256 of their inputs (the scenario file for
``simulate``, the canonical argument list otherwise, or the scenario recorded
next to a snapshot directory).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import shutil
import sys
from pathlib import Path

import numpy as np

from . import ckn, gronwall, io, morrey
from .grid import GridSpec, VectorField
from .pressure import SCHEMES, local_pressure, near_field_ratio, split_pressure
from .scaling import scaling_check
from .scenario import ConfigError, build_initial, load_scenario, parse_balls
from .solver import integrate, recover_pressure

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for blow-up here
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _args_hash(args: argparse.Namespace) -> str:
    items = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    return hashlib.sha256(json.dumps(_jsonable(items), sort_keys=True).encode()).hexdigest()


def _provenance(args, snap_dir: Path | None = None) -> str:
    if snap_dir is not None:
        for cand in (snap_dir / "summary.json", snap_dir.parent / "summary.json"):
            if cand.is_file():
                return json.loads(cand.read_text()).get("scenario_hash", _args_hash(args))
    return _args_hash(args)


def _load_traj(path: str):
    d = Path(path)
    if not d.is_dir():
        raise ConfigError(f"snapshot directory not found: {d}")
    try:
        return io.read_trajectory(d)
    except io.SnapshotError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    sc = load_scenario(args.scenario)
    out = Path(args.out).resolve() if args.out else sc.output_dir
    out.mkdir(parents=True, exist_ok=True)
    traj = integrate(build_initial(sc), sc.solver)
    if sc.output["snapshots"]:
        snap_dir = out / "snapshots"
        if snap_dir.exists():
            shutil.rmtree(snap_dir)
        io.write_trajectory(snap_dir, traj)
    io.write_energy_csv(out / sc.output["csv"], traj)
    shutil.copyfile(args.scenario, out / "scenario.ini")
    reports = run_diagnostics(sc, traj, out / "reports")
    summary = {
        "scenario": sc.name,
        "scenario_hash": sc.digest,
        "t_final": float(traj.times[-1]),
        "recorded_slices": len(traj),
        "steps": len(traj.energy.t) - 1,
        "blew_up": traj.blew_up,
        "message": traj.message,
        "reports": [p.name for p in reports],
    }
    _emit(summary, str(out / "summary.json"))
    if traj.blew_up:
        print(traj.message, file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


def run_diagnostics(sc, traj, directory: Path) -> list[Path]:
    """Evaluate every diagnostic requested in the scenario; one JSON per request."""
    d = sc.diagnostics
    written = []

    def put(name, body):
        body = {"scenario_hash": sc.digest, **body}
        path = directory / name
        _emit(body, str(path))
        written.append(path)

    for i, ball in enumerate(sc.balls()):
        rep = ckn.ckn_quantities(traj, ball, d["kappa"], d["tau0"], d["eps"])
        put(f"ckn_{i:03d}.json", {"kind": "ckn", **rep.as_dict(), "lemma_b1_ratio": ckn.lemma_b1_ratio(rep)})
    if d["morrey_p"] is not None:
        params = morrey.MorreyParams(d["morrey_p"], d["morrey_q"] or d["morrey_p"], stride=d["morrey_stride"], flavor=d["morrey_flavor"])
        if params.flavor == morrey.SPATIAL:
            est = morrey.morrey_spatial(VectorField(traj.grid, traj.u[-1]), params)
        else:
            est = morrey.morrey_parabolic(traj, params)
        put("morrey.json", {"kind": "morrey", **est.as_dict()})
    if d["type_one_r0"] is not None:
        T = d["type_one_T"] if d["type_one_T"] is not None else float(traj.times[-1])
        rep = ckn.type_one_monitor(traj, d["type_one_r0"], T)
        bridge = morrey.type_one_to_morrey_bridge(rep)
        put("type_one.json", {"kind": "type_one", "M": rep.M, "argmax": rep.argmax, "T": T, "r0": d["type_one_r0"],
                              "m23": bridge.m23.value, "m25": bridge.m25.value, "bridge_holds": bridge.holds})
    if d["concentration_T"] is not None:
        cs = ckn.concentration_monitor(traj, d["concentration_T"], d["concentration_S"], d["concentration_eps"])
        put("concentration.json", {"kind": "concentration", "times": cs.times, "radii": cs.radii, "masses": cs.masses,
                                   "passed": cs.passed, "truncated": cs.truncated, "S": cs.S, "T": cs.T, "eps": cs.eps})
    return written


def cmd_diagnose(args) -> int:
    traj = _load_traj(args.snapshots)
    balls = []
    for spec in args.ball:
        balls += parse_balls(spec)
    if not balls:
        raise UsageError("diagnose needs at least one --ball")
    reports = []
    for ball in balls:
        rep = ckn.ckn_quantities(traj, ball, args.kappa, args.tau0, args.eps)
        reports.append({**rep.as_dict(), "lemma_b1_ratio": ckn.lemma_b1_ratio(rep)})
    _emit({"kind": "ckn", "scenario_hash": _provenance(args, Path(args.snapshots)), "reports": reports}, args.out)
    return EXIT_OK


def cmd_morrey(args) -> int:
    traj = _load_traj(args.snapshots)
    params = morrey.MorreyParams(args.p, args.q, tuple(args.radii) if args.radii else None, args.stride, args.flavor, args.window)
    if params.flavor == morrey.SPATIAL:
        data = traj.u if args.field == "u" else traj.w
        est = morrey.morrey_spatial(VectorField(traj.grid, data[args.time_index]), params)
    else:
        est = morrey.morrey_parabolic(traj, params, args.field)
    _emit({"kind": "morrey", "scenario_hash": _provenance(args, Path(args.snapshots)), **est.as_dict()}, args.out)
    return EXIT_OK


def cmd_gronwall(args) -> int:
    cert = gronwall.certify_gronwall(args.a, args.b, args.m, args.T1, args.c)
    body = {
        "kind": "gronwall",
        "scenario_hash": _args_hash(args),
        "a": cert.a, "b": cert.b, "m": cert.m, "T1": cert.T1, "c_univ": cert.c_univ,
        "horizon": cert.horizon, "passed": cert.passed, "c_max": cert.c_max, "t_hit": cert.t_hit,
        "blow_up_time": cert.blow_up_time, "witness_max": float(np.max(cert.witness_f)),
    }
    _emit(body, args.out)
    return EXIT_OK


def cmd_kappa(args) -> int:
    k = gronwall.solve_kappa(args.C, args.tau0)
    lhs = gronwall.kappa_lhs(k, args.C, args.tau0)
    _emit({"kind": "kappa", "scenario_hash": _args_hash(args), "C": args.C, "tau0": args.tau0,
           "kappa": k, "lhs": lhs, "residual": 0.25 - lhs}, args.out)
    return EXIT_OK


def cmd_scaling(args) -> int:
    body = scaling_check(GridSpec(args.n), args.seed, tuple(args.lam), args.t)
    _emit({"kind": "scaling-check", "scenario_hash": _args_hash(args), **body}, args.out)
    return EXIT_OK


def cmd_pressure(args) -> int:
    path = Path(args.snapshot)
    if not path.is_file():
        raise ConfigError(f"snapshot not found: {path}")
    snap = io.read_snapshot(path)
    u = VectorField(snap.grid, snap.u)
    p = local_pressure(u) if args.scheme == "local" else recover_pressure(u)
    sp = split_pressure(u, p, args.center, args.rho, scheme=args.scheme)
    body = {
        "kind": "pressure-split", "scenario_hash": _provenance(args, path.parent),
        "center": list(sp.cutoff_center), "rho": sp.cutoff_radius, "scheme": sp.scheme,
        "additivity_error": sp.additivity_error(p), "harmonicity_error": sp.harmonicity_error(p),
        "near_field_ratio": near_field_ratio(u, sp), "t": snap.t,
    }
    _emit(body, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="micropolar", description="Micropolar flow simulator and regularity diagnostics.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run a scenario file")
    s.add_argument("scenario")
    s.add_argument("--out", help="output directory (default: [output] directory of the scenario)")
    s.set_defaults(func=cmd_simulate)

    def out_flag(p):
        p.add_argument("--out", help="write the JSON report here (default: stdout)")

    s = sub.add_parser("diagnose", help="CKN quantities on parabolic balls")
    s.add_argument("--snapshots", required=True, help="directory of .mpf snapshots")
    s.add_argument("--ball", action="append", default=[], help="'t0 x1 x2 x3 r [Q|QQ]', repeatable or ';'-separated")
    s.add_argument("--tau0", type=float, default=ckn.DEFAULT_TAU0)
    s.add_argument("--kappa", type=float, default=None, help="default: solved from C = 1")
    s.add_argument("--eps", type=float, default=ckn.DEFAULT_EPS)
    out_flag(s)
    s.set_defaults(func=cmd_diagnose)

    s = sub.add_parser("morrey", help="sampled Morrey norms")
    s.add_argument("--snapshots", required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--q", type=float, required=True)
    s.add_argument("--flavor", choices=(morrey.SPATIAL, morrey.PARABOLIC), default=morrey.SPATIAL)
    s.add_argument("--window", choices=(morrey.CENTERED, morrey.BACKWARD), default=morrey.CENTERED)
    s.add_argument("--field", choices=("u", "w"), default="u")
    s.add_argument("--stride", type=int, default=2)
    s.add_argument("--radii", type=float, nargs="+")
    s.add_argument("--time-index", type=int, default=-1, help="slice for the spatial norm (default: last)")
    out_flag(s)
    s.set_defaults(func=cmd_morrey)

    s = sub.add_parser("gronwall", help="certify the Gronwall-type bound")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--b", type=float, required=True)
    s.add_argument("--m", type=float, default=1.0)
    s.add_argument("--T1", type=float, default=1.0)
    s.add_argument("--c", type=float, default=1.5, help="universal constant of the horizon")
    out_flag(s)
    s.set_defaults(func=cmd_gronwall)

    s = sub.add_parser("kappa", help="solve the kappa condition")
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--tau0", type=float, default=ckn.DEFAULT_TAU0)
    out_flag(s)
    s.set_defaults(func=cmd_kappa)

    s = sub.add_parser("scaling-check", help="residual (non-)equivariance under the natural scaling")
    s.add_argument("--n", type=int, default=32)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--lam", type=float, nargs="+", default=[2.0, 0.5])
    s.add_argument("--t", type=float, default=0.3)
    out_flag(s)
    s.set_defaults(func=cmd_scaling)

    s = sub.add_parser("pressure-split", help="near/far pressure split of one snapshot")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--center", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    s.add_argument("--rho", type=float, default=float(np.pi / 4))
    s.add_argument("--scheme", choices=SCHEMES, default="local")
    out_flag(s)
    s.set_defaults(func=cmd_pressure)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (UsageError, ConfigError, io.SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # domain checks on user-supplied numbers
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
