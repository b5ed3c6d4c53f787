"""Scenario files: INI text with fixed sections and keys.

Example::

    [scenario]
    name = tg64

    [grid]
    n = 64
    box_length = 6.283185307179586

    [initial]
    kind = taylor-green        ; zero | taylor-green | single-mode | random | snapshot
    amplitude = 1.0
    w_amplitude = 0.5

    [solver]
    t_end = 1.0
    dt = 0.005

    [output]
    directory = out

    [diagnostics]
    balls = 0.5 0 0 0 0.4 Q; 0.5 1 1 1 0.2 QQ

Every key has a default (see ``SCHEMA``); unknown sections or keys are an
error.  Paths are resolved relative to the scenario file.
"""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .balls import FLAVOR_Q, ParabolicBall
from .grid import GridSpec, VectorField, random_field
from .solver import SolverConfig, State


class ConfigError(ValueError):
    pass


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_float(s: str):
    return None if s.strip().lower() in ("", "none", "auto") else float(s)


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(v) for v in s.replace(",", " ").split())


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(v) for v in s.replace(",", " ").split())


# section -> key -> (parser, default)
SCHEMA: dict[str, dict[str, tuple]] = {
    "scenario": {"name": (str, "scenario")},
    "grid": {"n": (int, "32"), "box_length": (float, repr(2 * np.pi))},
    "initial": {
        "kind": (str, "random"),
        "amplitude": (float, "1.0"),
        "w_amplitude": (float, "0.5"),
        "seed": (int, "0"),
        "slope": (float, "4.0"),
        "k_peak": (float, "2.0"),
        "k_max": (_opt_float, "none"),
        "mode": (_ints, "0 0 1"),
        "direction": (_floats, "1 0 0"),
        "path": (str, ""),
    },
    "solver": {
        "t_end": (float, "1.0"),
        "dt": (_opt_float, "auto"),
        "cfl": (float, "0.5"),
        "dt_max": (float, "0.01"),
        "nu_scheme": (str, "integrating-factor"),
        "dealias": (_bool, "true"),
        "record_every": (int, "1"),
        "coupling": (_bool, "true"),
        "nonlinear": (_bool, "true"),
    },
    "output": {
        "directory": (str, "out"),
        "snapshots": (_bool, "true"),
        "csv": (str, "energy.csv"),
    },
    "diagnostics": {
        "balls": (str, ""),
        "tau0": (float, "6.0"),
        "kappa": (_opt_float, "auto"),
        "eps": (float, "0.01"),
        "morrey_p": (_opt_float, "none"),
        "morrey_q": (_opt_float, "none"),
        "morrey_flavor": (str, "spatial"),
        "morrey_stride": (int, "2"),
        "type_one_r0": (_opt_float, "none"),
        "type_one_T": (_opt_float, "none"),
        "concentration_T": (_opt_float, "none"),
        "concentration_S": (float, "0.5"),
        "concentration_eps": (float, "0.01"),
    },
}

INITIAL_KINDS = ("zero", "taylor-green", "single-mode", "random", "snapshot")


@dataclass
class Scenario:
    name: str
    grid: GridSpec
    initial: dict
    solver: SolverConfig
    output: dict
    diagnostics: dict
    base_dir: Path = field(default_factory=Path.cwd)
    digest: str = ""

    @property
    def output_dir(self) -> Path:
        return (self.base_dir / self.output["directory"]).resolve()

    def balls(self) -> list[ParabolicBall]:
        return parse_balls(self.diagnostics["balls"])


def parse_balls(text: str) -> list[ParabolicBall]:
    """``"t0 x1 x2 x3 r [flavor]; ..."`` -> list of balls."""
    out = []
    for chunk in text.split(";"):
        parts = chunk.replace(",", " ").split()
        if not parts:
            continue
        if len(parts) not in (5, 6):
            raise ConfigError(f"ball spec needs 't0 x1 x2 x3 r [flavor]', got {chunk.strip()!r}")
        t0, x1, x2, x3, r = (float(v) for v in parts[:5])
        flavor = parts[5] if len(parts) == 6 else FLAVOR_Q
        try:
            out.append(ParabolicBall(t0, (x1, x2, x3), r, flavor))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return out


def parse_scenario(text: str, base_dir=None) -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    cp.optionxform = str  # keys are case sensitive (type_one_T)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed scenario file: {exc}") from exc
    unknown = [f"[{s}]" for s in cp.sections() if s not in SCHEMA]
    for s in cp.sections():
        if s in SCHEMA:
            unknown += [f"{s}.{k}" for k in cp[s] if k not in SCHEMA[s]]
    if unknown:
        raise ConfigError("unknown scenario keys: " + ", ".join(unknown))
    values: dict[str, dict] = {}
    for sec, keys in SCHEMA.items():
        values[sec] = {}
        for key, (conv, default) in keys.items():
            raw = cp.get(sec, key, fallback=default) if cp.has_section(sec) else default
            try:
                values[sec][key] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"{sec}.{key}: {exc}") from exc
    try:
        grid = GridSpec(values["grid"]["n"], values["grid"]["box_length"])
        solver = SolverConfig(seed=values["initial"]["seed"], **values["solver"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    init = values["initial"]
    if init["kind"] not in INITIAL_KINDS:
        raise ConfigError(f"initial.kind must be one of {INITIAL_KINDS}, got {init['kind']!r}")
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    if init["kind"] == "snapshot":
        if not init["path"]:
            raise ConfigError("initial.path is required for kind = snapshot")
        if not (base / init["path"]).is_file():
            raise ConfigError(f"initial.path does not exist: {init['path']}")
    if len(init["mode"]) != 3 or len(init["direction"]) != 3:
        raise ConfigError("initial.mode and initial.direction need 3 components")
    sc = Scenario(
        values["scenario"]["name"], grid, init, solver, values["output"], values["diagnostics"], base,
        hashlib.sha256(text.encode()).hexdigest(),
    )
    sc.balls()  # validate early
    return sc


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"scenario file not found: {path}")
    return parse_scenario(path.read_text(), path.parent)


# ---------------------------------------------------------------------------
# initial conditions


def taylor_green(grid: GridSpec, amplitude: float = 1.0, w_amplitude: float = 0.5) -> State:
    """``u = A (cos x1 sin x2 cos x3, -sin x1 cos x2 cos x3, 0)``, ``w = B (sin x2, sin x3, sin x1)``.

    Coordinates are scaled so the box holds one period.
    """
    x1, x2, x3 = grid.mesh() * (2 * np.pi / grid.box_length)
    u = amplitude * np.array([np.cos(x1) * np.sin(x2) * np.cos(x3), -np.sin(x1) * np.cos(x2) * np.cos(x3), 0 * x1])
    w = w_amplitude * np.array([np.sin(x2), np.sin(x3), np.sin(x1)])
    return State(VectorField(grid, u), VectorField(grid, w))


def single_mode(grid: GridSpec, mode, direction, amplitude: float = 1.0) -> State:
    """``u = A d sin(k.x)`` with ``d . k = 0``; ``w = 0``."""
    k = np.asarray(mode, dtype=float)
    d = np.asarray(direction, dtype=float)
    if abs(k @ d) > 1e-12 * max(1.0, np.linalg.norm(k) * np.linalg.norm(d)):
        raise ConfigError("single-mode direction must be orthogonal to the mode")
    phase = np.tensordot(k * (2 * np.pi / grid.box_length), grid.mesh(), axes=1)
    u = amplitude * d[:, None, None, None] * np.sin(phase)[None]
    return State(VectorField(grid, u), VectorField.zeros(grid))


def build_initial(sc: Scenario) -> State:
    g, init = sc.grid, sc.initial
    kind = init["kind"]
    if kind == "zero":
        return State(VectorField.zeros(g), VectorField.zeros(g))
    if kind == "taylor-green":
        return taylor_green(g, init["amplitude"], init["w_amplitude"])
    if kind == "single-mode":
        return single_mode(g, init["mode"], init["direction"], init["amplitude"])
    if kind == "random":
        kw = dict(slope=init["slope"], k_peak=init["k_peak"], k_max=init["k_max"])
        u = random_field(g, init["seed"], amplitude=init["amplitude"], solenoidal=True, **kw)
        w = random_field(g, init["seed"] + 1, amplitude=init["w_amplitude"], **kw)
        return State(u, w)
    from .io import read_snapshot  # snapshot

    snap = read_snapshot(sc.base_dir / init["path"])
    if snap.grid != g:
        raise ConfigError(f"snapshot grid {snap.grid} differs from the scenario grid {g}")
    st = snap.state()
    return State(st.u, st.w, st.t)
