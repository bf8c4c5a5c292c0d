"""Declarative run configuration: TOML in, TOML out, validated.

The file format mirrors SimulationConfig section by section:

    [grid]            # required: shape, h
    shape = [8, 8, 8]
    h = 0.125
    origin = [0.0, 0.0, 0.0]

    [spin]            # all optional, defaults shown by emit_config
    d0 = 1.0
    beta = 0.9
    beta_prime = 0.8
    gamma1 = 1.0
    gamma2 = 1.0
    epsilon = 0.0
    j_e = [1.0, 0.0, 0.0]   # uniform applied current; omit for none

    [llg]
    c_ex = 1.0
    alpha = 1.0
    j0 = 1.0
    mu0 = 0.0
    kappa = 0.0
    e_an = [0.0, 0.0, 1.0]
    f = [0.0, 0.0, 0.0]     # uniform applied field; omit for none

    [run]             # required: mode, dt, t_end
    mode = "sllg"
    dt = 0.00390625
    t_end = 0.5
    cadence = 1
    seed = 0
    tol = 1e-10
    method = "gmres"
    precond = "block"
    c_stab = 0.25

    [initial]
    m = "smooth-twist"
    direction = [0.0, 0.0, 1.0]
    turns = 0.5
    s = "stationary"

Semantic errors (unknown keys, out-of-range values, missing required
fields) are reported with the file path and the line the offending key
sits on. The config layer enforces the physical parameter ranges strictly
(0 < beta, beta_prime < 1 and gamma1, gamma2 > 0); the library dataclasses
additionally accept the degenerate limit values used by reference tests.

Only spatially uniform j_e and f are expressible in a file; per-cell
fields remain available through the Python API.
"""

from __future__ import annotations

import math
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .drivers import PRESETS, S_INIT_CHOICES, SimulationConfig
from .grid import Grid, VectorField, constant_field
from .llg import LlgParams
from .spin import SpinParams

__all__ = ["ConfigError", "parse_config", "parse_config_text", "emit_config", "configs_equal"]

_SCHEMA: dict[str, tuple[str, ...]] = {
    "grid": ("shape", "h", "origin"),
    "spin": ("d0", "beta", "beta_prime", "gamma1", "gamma2", "epsilon", "j_e"),
    "llg": ("c_ex", "alpha", "j0", "mu0", "kappa", "e_an", "f"),
    "run": ("mode", "dt", "t_end", "cadence", "seed", "tol", "method", "precond", "c_stab"),
    "initial": ("m", "direction", "turns", "s"),
}
_METHODS = ("gmres", "bicgstab")
_PRECONDS = ("block", "spectral", "none")


class ConfigError(ValueError):
    """Invalid configuration, with file and line in the message."""


def _find_line(text: str, section: str, key: str | None = None) -> int:
    """Best-effort line number of a section header or of a key within it."""
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            if current == section and key is None:
                break
            current = line[1:-1].strip()
            if key is None and current == section:
                return lineno
            continue
        if key is not None and current == section:
            head = line.split("=", 1)[0].strip()
            if head == key:
                return lineno
    return 0


class _Reporter:
    def __init__(self, path: str, text: str):
        self.path = path
        self.text = text

    def fail(self, section: str, key: str | None, message: str) -> ConfigError:
        line = _find_line(self.text, section, key)
        where = f"{self.path}:{line}" if line else self.path
        target = f"[{section}] {key}" if key else f"[{section}]"
        return ConfigError(f"{where}: {target}: {message}")


def _num(rep: _Reporter, sec: str, key: str, value, default=None) -> float | None:
    if value is None:
        return default
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise rep.fail(sec, key, f"expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise rep.fail(sec, key, f"must be finite, got {value!r}")
    return v


def _integer(rep: _Reporter, sec: str, key: str, value, default=None) -> int | None:
    if value is None:
        return default
    if isinstance(value, bool) or not isinstance(value, int):
        raise rep.fail(sec, key, f"expected an integer, got {value!r}")
    return value


def _string(rep: _Reporter, sec: str, key: str, value, choices, default=None) -> str | None:
    if value is None:
        return default
    if not isinstance(value, str):
        raise rep.fail(sec, key, f"expected a string, got {value!r}")
    if choices is not None and value not in choices:
        raise rep.fail(sec, key, f"must be one of {list(choices)}, got {value!r}")
    return value


def _vec3(rep: _Reporter, sec: str, key: str, value, default=None):
    if value is None:
        return default
    if (
        not isinstance(value, list)
        or len(value) != 3
        or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in value)
    ):
        raise rep.fail(sec, key, f"expected a list of 3 numbers, got {value!r}")
    v = tuple(float(x) for x in value)
    if any(not math.isfinite(x) for x in v):
        raise rep.fail(sec, key, "entries must be finite")
    return v


def parse_config_text(text: str, path: str = "<config>") -> SimulationConfig:
    """Parse and validate a TOML config given as a string."""
    rep = _Reporter(path, text)
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{path}: TOML syntax error: {err}") from err

    for section in doc:
        if section not in _SCHEMA:
            raise rep.fail(section, None, f"unknown section; expected one of {list(_SCHEMA)}")
        if not isinstance(doc[section], dict):
            raise rep.fail(section, None, "expected a table ([section] header)")
        for key in doc[section]:
            if key not in _SCHEMA[section]:
                raise rep.fail(
                    section, key, f"unknown key; [{section}] accepts {list(_SCHEMA[section])}"
                )

    grid_tbl = doc.get("grid", {})
    spin_tbl = doc.get("spin", {})
    llg_tbl = doc.get("llg", {})
    run_tbl = doc.get("run", {})
    init_tbl = doc.get("initial", {})

    # [grid]
    shape_raw = grid_tbl.get("shape")
    if shape_raw is None:
        raise rep.fail("grid", None, "missing required key 'shape'")
    if (
        not isinstance(shape_raw, list)
        or len(shape_raw) != 3
        or any(isinstance(x, bool) or not isinstance(x, int) for x in shape_raw)
    ):
        raise rep.fail("grid", "shape", f"expected a list of 3 integers, got {shape_raw!r}")
    if any(n < 1 for n in shape_raw):
        raise rep.fail("grid", "shape", f"cell counts must be >= 1, got {shape_raw}")
    h = _num(rep, "grid", "h", grid_tbl.get("h"))
    if h is None:
        raise rep.fail("grid", None, "missing required key 'h'")
    if h <= 0:
        raise rep.fail("grid", "h", f"must be positive, got {h}")
    origin = _vec3(rep, "grid", "origin", grid_tbl.get("origin"), (0.0, 0.0, 0.0))
    grid = Grid(tuple(shape_raw), h, origin)

    # [spin]
    d0 = _num(rep, "spin", "d0", spin_tbl.get("d0"), 1.0)
    if d0 <= 0:
        raise rep.fail("spin", "d0", f"must be positive, got {d0}")
    beta = _num(rep, "spin", "beta", spin_tbl.get("beta"), 0.9)
    beta_prime = _num(rep, "spin", "beta_prime", spin_tbl.get("beta_prime"), 0.8)
    for name, val in (("beta", beta), ("beta_prime", beta_prime)):
        if not 0.0 < val < 1.0:
            raise rep.fail(
                "spin",
                name,
                f"{name} = {val} violates 0 < {name} < 1 "
                "(required so that 0 < beta*beta_prime < 1, the ellipticity condition)",
            )
    gamma1 = _num(rep, "spin", "gamma1", spin_tbl.get("gamma1"), 1.0)
    gamma2 = _num(rep, "spin", "gamma2", spin_tbl.get("gamma2"), 1.0)
    for name, val in (("gamma1", gamma1), ("gamma2", gamma2)):
        if val <= 0:
            raise rep.fail("spin", name, f"must be positive, got {val}")
    epsilon = _num(rep, "spin", "epsilon", spin_tbl.get("epsilon"), 0.0)
    if epsilon < 0:
        raise rep.fail("spin", "epsilon", f"must be nonnegative, got {epsilon}")
    j_e_vec = _vec3(rep, "spin", "j_e", spin_tbl.get("j_e"))
    j_e = None if j_e_vec is None else constant_field(grid, j_e_vec)
    spin = SpinParams(
        d0=d0, beta=beta, beta_prime=beta_prime,
        gamma1=gamma1, gamma2=gamma2, epsilon=epsilon, j_e=j_e,
    )

    # [llg]
    c_ex = _num(rep, "llg", "c_ex", llg_tbl.get("c_ex"), 1.0)
    if c_ex <= 0:
        raise rep.fail("llg", "c_ex", f"must be positive, got {c_ex}")
    alpha = _num(rep, "llg", "alpha", llg_tbl.get("alpha"), 1.0)
    if alpha <= 0:
        raise rep.fail("llg", "alpha", f"must be positive, got {alpha}")
    j0 = _num(rep, "llg", "j0", llg_tbl.get("j0"), 1.0)
    mu0 = _num(rep, "llg", "mu0", llg_tbl.get("mu0"), 0.0)
    if mu0 < 0:
        raise rep.fail("llg", "mu0", f"must be nonnegative, got {mu0}")
    kappa = _num(rep, "llg", "kappa", llg_tbl.get("kappa"), 0.0)
    if kappa < 0:
        raise rep.fail("llg", "kappa", f"must be nonnegative, got {kappa}")
    e_an = _vec3(rep, "llg", "e_an", llg_tbl.get("e_an"), (0.0, 0.0, 1.0))
    norm = math.sqrt(sum(x * x for x in e_an))
    if abs(norm - 1.0) > 1e-8:
        raise rep.fail("llg", "e_an", f"must be a unit vector, |e_an| = {norm:.6g}")
    e_an = tuple(x / norm for x in e_an)
    f_vec = _vec3(rep, "llg", "f", llg_tbl.get("f"))
    f = None if f_vec is None else constant_field(grid, f_vec)
    llg = LlgParams(c_ex=c_ex, alpha=alpha, j0=j0, mu0=mu0, kappa=kappa, e_an=e_an, f=f)

    # [run]
    mode = _string(rep, "run", "mode", run_tbl.get("mode"), ("sdllg", "sllg"))
    if mode is None:
        raise rep.fail("run", None, "missing required key 'mode'")
    dt = _num(rep, "run", "dt", run_tbl.get("dt"))
    if dt is None:
        raise rep.fail("run", None, "missing required key 'dt'")
    if dt <= 0:
        raise rep.fail("run", "dt", f"must be positive, got {dt}")
    t_end = _num(rep, "run", "t_end", run_tbl.get("t_end"))
    if t_end is None:
        raise rep.fail("run", None, "missing required key 't_end'")
    if t_end <= 0:
        raise rep.fail("run", "t_end", f"must be positive, got {t_end}")
    if mode == "sdllg" and epsilon <= 0:
        raise rep.fail(
            "run", "mode", "mode 'sdllg' requires [spin] epsilon > 0 "
            "(epsilon = 0 selects the reduced model; use mode 'sllg')"
        )
    cadence = _integer(rep, "run", "cadence", run_tbl.get("cadence"), 1)
    if cadence < 1:
        raise rep.fail("run", "cadence", f"must be >= 1, got {cadence}")
    seed = _integer(rep, "run", "seed", run_tbl.get("seed"), 0)
    tol = _num(rep, "run", "tol", run_tbl.get("tol"), 1e-10)
    if tol <= 0:
        raise rep.fail("run", "tol", f"must be positive, got {tol}")
    method = _string(rep, "run", "method", run_tbl.get("method"), _METHODS, "gmres")
    precond = _string(rep, "run", "precond", run_tbl.get("precond"), _PRECONDS, "block")
    c_stab = _num(rep, "run", "c_stab", run_tbl.get("c_stab"), 0.25)
    if c_stab <= 0:
        raise rep.fail("run", "c_stab", f"must be positive, got {c_stab}")

    # [initial]
    m_preset = _string(rep, "initial", "m", init_tbl.get("m"), PRESETS, "smooth-twist")
    direction = _vec3(rep, "initial", "direction", init_tbl.get("direction"), (0.0, 0.0, 1.0))
    if all(x == 0.0 for x in direction):
        raise rep.fail("initial", "direction", "must be nonzero")
    turns = _num(rep, "initial", "turns", init_tbl.get("turns"), 0.5)
    s_init = _string(rep, "initial", "s", init_tbl.get("s"), S_INIT_CHOICES, "stationary")

    try:
        return SimulationConfig(
            grid=grid, spin=spin, llg=llg, mode=mode, dt=dt, t_end=t_end,
            m_preset=m_preset, m_direction=direction, m_turns=turns, s_init=s_init,
            seed=seed, cadence=cadence, tol=tol, method=method,
            precond=precond, c_stab=c_stab,
        )
    except ValueError as err:
        raise ConfigError(f"{path}: {err}") from err


def parse_config(path: str | Path) -> SimulationConfig:
    """Read, parse and validate a TOML config file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(encoding="utf-8"), str(p))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise TypeError(f"cannot format {v!r}")


def _uniform_vector(field: VectorField | None):
    """The single value of a spatially uniform field, or raise."""
    if field is None:
        return None
    first = field.data.reshape(-1, 3)[0]
    if not np.all(field.data == first):
        raise ValueError(
            "only spatially uniform vector fields can be written to a config file"
        )
    return tuple(float(x) for x in first)


def emit_config(config: SimulationConfig) -> str:
    """Render a SimulationConfig as TOML text, all defaults explicit.

    Floats carry 17 significant digits, so parse(emit(c)) reproduces c
    exactly. Raises ValueError if j_e or f is not uniform (such fields
    have no file representation).
    """
    sp, lp = config.spin, config.llg
    if np.ndim(sp.d0) != 0:
        raise ValueError("per-cell d0 has no config-file representation")
    lines = [
        "[grid]",
        f"shape = {_fmt(list(config.grid.shape))}",
        f"h = {_fmt(config.grid.h)}",
        f"origin = {_fmt(list(config.grid.origin))}",
        "",
        "[spin]",
        f"d0 = {_fmt(float(sp.d0))}",
        f"beta = {_fmt(sp.beta)}",
        f"beta_prime = {_fmt(sp.beta_prime)}",
        f"gamma1 = {_fmt(sp.gamma1)}",
        f"gamma2 = {_fmt(sp.gamma2)}",
        f"epsilon = {_fmt(sp.epsilon)}",
    ]
    je = _uniform_vector(sp.j_e)
    if je is not None:
        lines.append(f"j_e = {_fmt(list(je))}")
    lines += [
        "",
        "[llg]",
        f"c_ex = {_fmt(lp.c_ex)}",
        f"alpha = {_fmt(lp.alpha)}",
        f"j0 = {_fmt(lp.j0)}",
        f"mu0 = {_fmt(lp.mu0)}",
        f"kappa = {_fmt(lp.kappa)}",
        f"e_an = {_fmt(list(lp.e_an))}",
    ]
    fv = _uniform_vector(lp.f)
    if fv is not None:
        lines.append(f"f = {_fmt(list(fv))}")
    lines += [
        "",
        "[run]",
        f"mode = {_fmt(config.mode)}",
        f"dt = {_fmt(config.dt)}",
        f"t_end = {_fmt(config.t_end)}",
        f"cadence = {_fmt(config.cadence)}",
        f"seed = {_fmt(config.seed)}",
        f"tol = {_fmt(config.tol)}",
        f"method = {_fmt(config.method)}",
        f"precond = {_fmt(config.precond)}",
        f"c_stab = {_fmt(config.c_stab)}",
        "",
        "[initial]",
        f"m = {_fmt(config.m_preset)}",
        f"direction = {_fmt(list(config.m_direction))}",
        f"turns = {_fmt(config.m_turns)}",
        f"s = {_fmt(config.s_init)}",
        "",
    ]
    return "\n".join(lines)


def configs_equal(a: SimulationConfig, b: SimulationConfig) -> bool:
    """Semantic equality, comparing field data by value."""

    def field_eq(x: VectorField | None, y: VectorField | None) -> bool:
        if (x is None) != (y is None):
            return False
        return x is None or (x.grid == y.grid and np.array_equal(x.data, y.data))

    return (
        a.grid == b.grid
        and np.array_equal(np.asarray(a.spin.d0), np.asarray(b.spin.d0))
        and (a.spin.beta, a.spin.beta_prime, a.spin.gamma1, a.spin.gamma2, a.spin.epsilon)
        == (b.spin.beta, b.spin.beta_prime, b.spin.gamma1, b.spin.gamma2, b.spin.epsilon)
        and field_eq(a.spin.j_e, b.spin.j_e)
        and (a.llg.c_ex, a.llg.alpha, a.llg.j0, a.llg.mu0, a.llg.kappa, a.llg.e_an)
        == (b.llg.c_ex, b.llg.alpha, b.llg.j0, b.llg.mu0, b.llg.kappa, b.llg.e_an)
        and field_eq(a.llg.f, b.llg.f)
        and (a.mode, a.dt, a.t_end, a.m_preset, a.m_direction, a.m_turns, a.s_init)
        == (b.mode, b.dt, b.t_end, b.m_preset, b.m_direction, b.m_turns, b.s_init)
        and (a.seed, a.cadence, a.tol, a.method, a.precond, a.c_stab)
        == (b.seed, b.cadence, b.tol, b.method, b.precond, b.c_stab)
    )
