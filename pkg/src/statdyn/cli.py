"""Command-line front end: deterministic scenario runs, sweeps, and checks.

Subcommands
-----------
run             integrate one configured scenario, write CSV + metadata
sweep           Cartesian grid of scenario variants, one summary row per cell
lyapunov        Lyapunov-exponent estimation (kind must be lyapunov)
qcompare        quantum versus classical radial series (kind quantum_compare)
validate-config parse and validate a config file, no computation

Configs are flat INI-style key = value files with sections; the shipped
config_schema.txt documents every section, key, and type. Unknown keys are
rejected. CSV outputs are deterministic: floats use 17 significant digits,
lines end with LF, and a comment line carries a hash of the resolved
parameters, so reruns are byte-identical. The STATDYN_LOG environment
variable (DEBUG/INFO/WARNING/ERROR) controls log verbosity. --seed is
accepted and recorded for forward compatibility; current scenarios are
deterministic and ignore it.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import itertools
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .chaos import LyapunovRun, lyapunov_estimate, symmetric_three_particle_state
from .dynamics import (
    ScenarioIHO,
    ScenarioLLL,
    classify_iho,
    cm_energy,
    find_closed_orbit,
    geometric_phase,
    iho_energy,
    relative_energy,
    rtheta_levelset,
    run_iho,
    run_lll_nbody,
    run_lll_two_body,
)
from .integrator import IntegrationError
from .qoracle import quantum_vs_classical_rho
from .statcore import (
    NBodyState,
    QuadraticPotential,
    StatDynError,
    Statistics,
    TwoBodyState,
)

__all__ = [
    "ConfigParseError",
    "ConfigSchemaError",
    "ScenarioConfig",
    "parse_config",
    "main",
]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_SCHEMA = 2
EXIT_PARSE = 3
EXIT_NUMERICAL = 4

KINDS = ("iho", "lll2", "llln", "lyapunov", "quantum_compare", "phase", "levelset")
SWEEPABLE = ("statistics", "u", "v", "x0", "xdot0", "t_end")
DEFAULT_T_END = {
    "iho": 12.0,
    "lll2": 100.0,
    "llln": 100.0,
    "lyapunov": 2000.0,
    "quantum_compare": 10.0,
    "phase": 200.0,
    "levelset": 0.0,
}


class ConfigParseError(Exception):
    """Config file unreadable or not valid INI."""


class ConfigSchemaError(Exception):
    """Config contents violate the schema."""


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------


def _parse_float(raw: str, where: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigSchemaError(f"{where}: expected a float, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigSchemaError(f"{where}: must be finite")
    return value


def _parse_int(raw: str, where: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigSchemaError(f"{where}: expected an integer, got {raw!r}") from None


def _parse_bool(raw: str, where: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ConfigSchemaError(f"{where}: expected true/false, got {raw!r}")


def _parse_complex(raw: str, where: str) -> complex:
    try:
        value = complex(raw.strip().replace(" ", ""))
    except ValueError:
        raise ConfigSchemaError(f"{where}: expected a complex number, got {raw!r}") from None
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ConfigSchemaError(f"{where}: must be finite")
    return value


def _parse_complex_list(raw: str, where: str) -> tuple[complex, ...]:
    items = [piece for piece in raw.split(",") if piece.strip()]
    if not items:
        raise ConfigSchemaError(f"{where}: expected a comma-separated list")
    return tuple(_parse_complex(piece, where) for piece in items)


def _parse_statistics(raw: str, where: str) -> Statistics:
    try:
        return Statistics.from_string(raw)
    except ValueError as exc:
        raise ConfigSchemaError(f"{where}: {exc}") from None


_SCHEMA: dict[str, set[str]] = {
    "scenario": {"kind", "statistics", "t_end", "dt"},
    "potential": {"u", "v"},
    "initial": {"x0", "xdot0", "Z0", "z0", "zs", "energy"},
    "integrator": {"rel_tol", "abs_tol", "max_step", "max_steps"},
    "lyapunov": {"perturbation", "renorm_interval", "mode"},
    "quantum": {"cutoff", "rel_tol"},
    "levelset": {"n_angles"},
    "output": {"prefix", "plot"},
    "sweep": set(SWEEPABLE),
}

_INITIAL_KEYS = {
    "iho": ({"x0", "xdot0"}, set()),
    "lll2": ({"Z0", "z0"}, set()),
    "llln": ({"zs"}, set()),
    "lyapunov": (set(), {"zs"}),
    "quantum_compare": ({"z0"}, set()),
    "phase": ({"z0"}, set()),
    "levelset": (set(), {"z0", "energy"}),
}


@dataclass
class ScenarioConfig:
    """Validated, fully resolved scenario parameters."""

    kind: str
    statistics: Statistics
    t_end: float
    dt: float
    pot: QuadraticPotential | None
    initial: dict
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = math.inf
    max_steps: int = 10_000_000
    perturbation: float = 0.012
    renorm_interval: float = 1.0
    lyapunov_mode: str = "benettin"
    cutoff: int = 64
    quantum_rel_tol: float = 1e-10
    n_angles: int = 360
    prefix: str = ""
    plot: bool = False
    sweep: dict[str, list] = field(default_factory=dict)

    def resolved(self) -> dict:
        """JSON-serializable dictionary of every resolved parameter."""
        initial = {}
        for key, value in sorted(self.initial.items()):
            if isinstance(value, complex):
                initial[key] = [value.real, value.imag]
            elif isinstance(value, tuple):
                initial[key] = [[w.real, w.imag] for w in value]
            else:
                initial[key] = value
        out = {
            "kind": self.kind,
            "statistics": self.statistics.value,
            "t_end": self.t_end,
            "dt": self.dt,
            "initial": initial,
            "integrator": {
                "rel_tol": self.rel_tol,
                "abs_tol": self.abs_tol,
                "max_step": None if math.isinf(self.max_step) else self.max_step,
                "max_steps": self.max_steps,
            },
        }
        if self.pot is not None:
            out["potential"] = {"u": self.pot.u, "v": self.pot.v}
        if self.kind == "lyapunov":
            out["lyapunov"] = {
                "perturbation": self.perturbation,
                "renorm_interval": self.renorm_interval,
                "mode": self.lyapunov_mode,
            }
        if self.kind == "quantum_compare":
            out["quantum"] = {"cutoff": self.cutoff, "rel_tol": self.quantum_rel_tol}
        if self.kind == "levelset":
            out["levelset"] = {"n_angles": self.n_angles}
        return out

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.resolved(), sort_keys=True).encode()
        ).hexdigest()


def _read_ini(path: str | Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case sensitive (Z0 versus z0)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigParseError(f"cannot read config file {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigParseError(f"invalid config syntax in {path}: {exc}") from None
    return parser


def parse_config(path: str | Path) -> ScenarioConfig:
    """Parse and validate a config file against the shipped schema.

    Raises
    ------
    ConfigParseError
        Unreadable file or invalid INI syntax.
    ConfigSchemaError
        Unknown section or key, missing required key, or bad value.
    """
    parser = _read_ini(path)

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigSchemaError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigSchemaError(f"unknown key {key!r} in section [{section}]")

    if not parser.has_section("scenario"):
        raise ConfigSchemaError("missing required section [scenario]")
    scen = parser["scenario"]
    if "kind" not in scen:
        raise ConfigSchemaError("[scenario] needs a kind")
    kind = scen["kind"].strip().lower()
    if kind not in KINDS:
        raise ConfigSchemaError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    if "statistics" not in scen:
        raise ConfigSchemaError("[scenario] needs a statistics entry")
    statistics = _parse_statistics(scen["statistics"], "[scenario] statistics")
    t_end = (
        _parse_float(scen["t_end"], "[scenario] t_end")
        if "t_end" in scen
        else DEFAULT_T_END[kind]
    )
    if "t_end" in scen and t_end <= 0.0:
        raise ConfigSchemaError("[scenario] t_end must be positive")
    dt = _parse_float(scen["dt"], "[scenario] dt") if "dt" in scen else 0.01
    if dt <= 0.0:
        raise ConfigSchemaError("[scenario] dt must be positive")

    pot: QuadraticPotential | None = None
    if kind == "iho":
        if parser.has_section("potential"):
            raise ConfigSchemaError("[potential] does not apply to the iho kind")
    else:
        if not parser.has_section("potential"):
            raise ConfigSchemaError(f"[potential] is required for kind {kind}")
        sec = parser["potential"]
        for need in ("u", "v"):
            if need not in sec:
                raise ConfigSchemaError(f"[potential] needs {need}")
        pot = QuadraticPotential(
            u=_parse_float(sec["u"], "[potential] u"),
            v=_parse_float(sec["v"], "[potential] v"),
        )

    required, optional = _INITIAL_KEYS[kind]
    have = set(parser["initial"]) if parser.has_section("initial") else set()
    missing = required - have
    if missing:
        raise ConfigSchemaError(f"[initial] for kind {kind} needs: {', '.join(sorted(missing))}")
    extra = have - required - optional
    if extra:
        raise ConfigSchemaError(
            f"[initial] keys not used by kind {kind}: {', '.join(sorted(extra))}"
        )
    initial: dict = {}
    if have:
        sec = parser["initial"]
        for key in sorted(have):
            where = f"[initial] {key}"
            if key in ("x0", "xdot0", "energy"):
                initial[key] = _parse_float(sec[key], where)
            elif key in ("Z0", "z0"):
                initial[key] = _parse_complex(sec[key], where)
            else:
                initial[key] = _parse_complex_list(sec[key], where)
    if kind == "levelset" and not ({"z0", "energy"} & have):
        raise ConfigSchemaError("[initial] for kind levelset needs z0 or energy")

    cfg = ScenarioConfig(
        kind=kind, statistics=statistics, t_end=t_end, dt=dt, pot=pot, initial=initial
    )

    if parser.has_section("integrator"):
        sec = parser["integrator"]
        if "rel_tol" in sec:
            cfg.rel_tol = _parse_float(sec["rel_tol"], "[integrator] rel_tol")
        if "abs_tol" in sec:
            cfg.abs_tol = _parse_float(sec["abs_tol"], "[integrator] abs_tol")
        if "max_step" in sec:
            cfg.max_step = _parse_float(sec["max_step"], "[integrator] max_step")
        if "max_steps" in sec:
            cfg.max_steps = _parse_int(sec["max_steps"], "[integrator] max_steps")
        if cfg.rel_tol <= 0 or cfg.abs_tol <= 0 or cfg.max_step <= 0 or cfg.max_steps < 1:
            raise ConfigSchemaError("[integrator] values must be positive")

    if parser.has_section("lyapunov"):
        if kind != "lyapunov":
            raise ConfigSchemaError("[lyapunov] only applies to the lyapunov kind")
        sec = parser["lyapunov"]
        if "perturbation" in sec:
            cfg.perturbation = _parse_float(sec["perturbation"], "[lyapunov] perturbation")
        if "renorm_interval" in sec:
            cfg.renorm_interval = _parse_float(
                sec["renorm_interval"], "[lyapunov] renorm_interval"
            )
            if cfg.renorm_interval <= 0:
                raise ConfigSchemaError("[lyapunov] renorm_interval must be positive")
        if "mode" in sec:
            mode = sec["mode"].strip().lower()
            if mode not in ("benettin", "naive"):
                raise ConfigSchemaError("[lyapunov] mode must be benettin or naive")
            cfg.lyapunov_mode = mode

    if parser.has_section("quantum"):
        if kind != "quantum_compare":
            raise ConfigSchemaError("[quantum] only applies to the quantum_compare kind")
        sec = parser["quantum"]
        if "cutoff" in sec:
            cfg.cutoff = _parse_int(sec["cutoff"], "[quantum] cutoff")
            if not 2 <= cfg.cutoff <= 512:
                raise ConfigSchemaError("[quantum] cutoff must be in [2, 512]")
        if "rel_tol" in sec:
            cfg.quantum_rel_tol = _parse_float(sec["rel_tol"], "[quantum] rel_tol")
            if cfg.quantum_rel_tol <= 0:
                raise ConfigSchemaError("[quantum] rel_tol must be positive")

    if parser.has_section("levelset"):
        if kind != "levelset":
            raise ConfigSchemaError("[levelset] only applies to the levelset kind")
        sec = parser["levelset"]
        if "n_angles" in sec:
            cfg.n_angles = _parse_int(sec["n_angles"], "[levelset] n_angles")
            if cfg.n_angles < 4:
                raise ConfigSchemaError("[levelset] n_angles must be at least 4")

    if parser.has_section("output"):
        sec = parser["output"]
        if "prefix" in sec:
            cfg.prefix = sec["prefix"].strip()
        if "plot" in sec:
            cfg.plot = _parse_bool(sec["plot"], "[output] plot")
    if not cfg.prefix:
        cfg.prefix = kind

    if parser.has_section("sweep"):
        sec = parser["sweep"]
        for key in sec:
            cfg.sweep[key] = _parse_sweep_values(key, sec[key])

    return cfg


def _parse_sweep_values(key: str, raw: str) -> list:
    where = f"[sweep] {key}"
    if key == "statistics":
        return [_parse_statistics(piece, where) for piece in raw.split(",") if piece.strip()]
    raw = raw.strip()
    if ":" in raw:
        pieces = raw.split(":")
        if len(pieces) != 3:
            raise ConfigSchemaError(f"{where}: range syntax is start:stop:count")
        start = _parse_float(pieces[0], where)
        stop = _parse_float(pieces[1], where)
        count = _parse_int(pieces[2], where)
        if count < 2:
            raise ConfigSchemaError(f"{where}: range count must be >= 2")
        return [float(x) for x in np.linspace(start, stop, count)]
    return [_parse_float(piece, where) for piece in raw.split(",") if piece.strip()]


# ---------------------------------------------------------------------------
# CSV and metadata output
# ---------------------------------------------------------------------------


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def write_csv(path: Path, columns: list[str], rows: list[list], config_hash: str) -> None:
    """Deterministic CSV: hash comment line, header, then %.17g floats, LF."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"# config_sha256={config_hash}\n")
        handle.write(",".join(columns) + "\n")
        for row in rows:
            handle.write(",".join(_format_cell(cell) for cell in row) + "\n")


def _write_metadata(path: Path, cfg: ScenarioConfig, results: dict, wall: float, seed) -> None:
    payload = {
        "version": __version__,
        "config_sha256": cfg.config_hash(),
        "parameters": cfg.resolved(),
        "results": results,
        "seed": seed,
        "wall_time_s": wall,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _maybe_plot(cfg: ScenarioConfig, columns: list[str], rows: list[list], base: Path) -> None:
    if not cfg.plot:
        return
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = np.array([[float(c) for c in row] for row in rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for j in range(1, min(data.shape[1], 4)):
        ax.plot(data[:, 0], data[:, j], label=columns[j])
    ax.set_xlabel(columns[0])
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(base.with_suffix(".svg"))
    plt.close(fig)


# ---------------------------------------------------------------------------
# Scenario execution
# ---------------------------------------------------------------------------


def _sample_grid(t_end: float, dt: float) -> np.ndarray:
    ts = np.arange(0.0, t_end, dt)
    return np.append(ts, t_end)


def _drift(log: np.ndarray) -> float:
    if log.size == 0:
        return 0.0
    base = log[0]
    return float(np.max(np.abs(log - base)) / max(1.0, abs(base)))


def run_scenario(cfg: ScenarioConfig) -> tuple[list[str], list[list], dict]:
    """Execute one scenario; returns (columns, rows, result summary)."""
    kind = cfg.kind
    if kind == "iho":
        scenario = ScenarioIHO(cfg.statistics, cfg.initial["x0"], cfg.initial["xdot0"])
        traj = run_iho(scenario, t_end=cfg.t_end, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)
        outcome = classify_iho(traj)
        ts = _sample_grid(cfg.t_end, cfg.dt)
        zs = traj.sample(ts)[:, 0]
        zdots = traj.sample_derivative(ts)[:, 0]
        energies = 0.5 * (zs.imag**2 - zs.real**2)
        rows = [
            [t, z.real, zd.real, e]
            for t, z, zd, e in zip(ts, zs, zdots, energies)
        ]
        results = {
            "classification": outcome.kind.value,
            "closest_approach": outcome.closest_approach,
            "turning_time": outcome.turning_time,
            "energy": iho_energy(cfg.statistics, cfg.initial["x0"], cfg.initial["xdot0"]),
            "energy_drift": _drift(traj.conserved_log[:, 0]),
        }
        return ["t", "x", "xdot", "E"], rows, results

    if kind == "lll2":
        initial = TwoBodyState(Z=cfg.initial["Z0"], z=cfg.initial["z0"])
        traj = run_lll_two_body(
            cfg.statistics, cfg.pot, initial, t_end=cfg.t_end,
            rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
        )
        ts = _sample_grid(cfg.t_end, cfg.dt)
        states = traj.sample(ts)
        Z, z = states[:, 0], states[:, 1]
        sqrt2 = math.sqrt(2.0)
        z1, z2 = (Z + z) / sqrt2, (Z - z) / sqrt2
        rows = []
        for i, t in enumerate(ts):
            e_cm = cm_energy(cfg.pot, complex(Z[i]))
            e_tot = e_cm + relative_energy(cfg.statistics, cfg.pot, complex(z[i]))
            rows.append(
                [t, Z[i].real, Z[i].imag, z[i].real, z[i].imag,
                 z1[i].real, z1[i].imag, z2[i].real, z2[i].imag, e_tot, e_cm]
            )
        results = {
            "energy": cm_energy(cfg.pot, cfg.initial["Z0"])
            + relative_energy(cfg.statistics, cfg.pot, cfg.initial["z0"]),
            "energy_drift": _drift(traj.conserved_log[:, 0]),
            "cm_energy_drift": _drift(traj.conserved_log[:, 1]),
        }
        columns = ["t", "Z_re", "Z_im", "z_re", "z_im",
                   "z1_re", "z1_im", "z2_re", "z2_im", "E", "E_cm"]
        return columns, rows, results

    if kind == "llln":
        state = NBodyState(cfg.initial["zs"])
        scenario = ScenarioLLL(cfg.statistics, cfg.pot, state)
        traj = run_lll_nbody(
            scenario, t_end=cfg.t_end, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol
        )
        ts = _sample_grid(cfg.t_end, cfg.dt)
        states = traj.sample(ts)
        energies = np.interp(ts, traj.times, traj.conserved_log[:, 0])
        columns = ["t"]
        for i in range(state.n):
            columns += [f"z{i + 1}_re", f"z{i + 1}_im"]
        columns.append("E")
        rows = []
        for i, t in enumerate(ts):
            row = [t]
            for j in range(state.n):
                row += [states[i, j].real, states[i, j].imag]
            row.append(energies[i])
            rows.append(row)
        results = {
            "energy": float(traj.conserved_log[0, 0]),
            "energy_drift": _drift(traj.conserved_log[:, 0]),
        }
        return columns, rows, results

    if kind == "lyapunov":
        base = (
            NBodyState(cfg.initial["zs"])
            if "zs" in cfg.initial
            else symmetric_three_particle_state()
        )
        run = LyapunovRun(
            base_ics=base,
            perturbation=cfg.perturbation,
            renorm_interval=cfg.renorm_interval,
            t_end=cfg.t_end,
        )
        lam, series = lyapunov_estimate(
            cfg.statistics, cfg.pot, run, mode=cfg.lyapunov_mode,
            rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
        )
        rows = [[t, value] for t, value in series]
        results = {"lyapunov": lam, "mode": cfg.lyapunov_mode}
        return ["t", "lambda"], rows, results

    if kind == "quantum_compare":
        ts, rho_qm, rho_cl = quantum_vs_classical_rho(
            cfg.statistics, cfg.pot, cfg.initial["z0"], cfg.t_end,
            dt=cfg.dt, cutoff=cfg.cutoff, rel_tol=cfg.quantum_rel_tol,
        )
        rows = [[t, q, c] for t, q, c in zip(ts, rho_qm, rho_cl)]
        results = {"max_abs_mismatch": float(np.max(np.abs(rho_qm - rho_cl)))}
        return ["t", "rho_qm", "rho_cl"], rows, results

    if kind == "phase":
        orbit = find_closed_orbit(
            cfg.statistics, cfg.pot, cfg.initial["z0"], t_max=cfg.t_end
        )
        aa, dynamic = geometric_phase(orbit, cfg.statistics)
        ts = _sample_grid(orbit.t_end, cfg.dt)
        zs = orbit.sample(ts)[:, 0]
        rows = [[t, z.real, z.imag] for t, z in zip(ts, zs)]
        results = {"period": orbit.t_end, "aa_phase": aa, "dynamic_phase": dynamic}
        return ["t", "z_re", "z_im"], rows, results

    if kind == "levelset":
        if "energy" in cfg.initial:
            energy = cfg.initial["energy"]
        else:
            energy = relative_energy(cfg.statistics, cfg.pot, cfg.initial["z0"])
        phis, rhos = rtheta_levelset(
            cfg.statistics, cfg.pot, energy, n_angles=cfg.n_angles
        )
        rows = [[p, r] for p, r in zip(phis, rhos)]
        results = {"energy": energy}
        return ["phi", "rho"], rows, results

    raise ConfigSchemaError(f"kind {kind!r} is not runnable")


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

_SUMMARY_COLUMNS = {
    "iho": ["classification", "closest_approach", "energy", "energy_drift"],
    "lll2": ["energy", "energy_drift", "cm_energy_drift"],
    "llln": ["energy", "energy_drift"],
}


def _apply_override(cfg: ScenarioConfig, key: str, value) -> None:
    if key == "statistics":
        cfg.statistics = value
    elif key in ("u", "v"):
        pot = cfg.pot if cfg.pot is not None else QuadraticPotential(0.0, 0.0)
        cfg.pot = QuadraticPotential(
            u=value if key == "u" else pot.u,
            v=value if key == "v" else pot.v,
        )
    elif key in ("x0", "xdot0"):
        cfg.initial[key] = value
    elif key == "t_end":
        cfg.t_end = value
    else:
        raise ConfigSchemaError(f"parameter {key!r} is not sweepable")


def _sweep_cell(args: tuple[str, dict]) -> tuple[dict, str]:
    """Worker: run one sweep cell; returns (summary values, error message)."""
    config_path, overrides = args
    cfg = parse_config(config_path)
    for key, value in overrides.items():
        if key == "statistics":
            value = Statistics.from_string(value)
        _apply_override(cfg, key, value)
    try:
        _, _, results = run_scenario(cfg)
        return results, ""
    except (StatDynError, IntegrationError) as exc:
        return {}, f"{type(exc).__name__}: {exc}"


def run_sweep(cfg: ScenarioConfig, config_path: str, jobs: int) -> tuple[list[str], list[list]]:
    """Expand the sweep grid and run every cell; deterministic row order."""
    if not cfg.sweep:
        raise ConfigSchemaError("sweep requires a [sweep] section")
    if cfg.kind not in _SUMMARY_COLUMNS:
        raise ConfigSchemaError(
            f"sweep supports kinds {', '.join(sorted(_SUMMARY_COLUMNS))}, not {cfg.kind}"
        )
    keys = sorted(cfg.sweep)
    grids = [cfg.sweep[key] for key in keys]
    cells = list(itertools.product(*grids))
    summary_cols = _SUMMARY_COLUMNS[cfg.kind]
    columns = keys + summary_cols + ["error"]

    tasks = []
    for cell in cells:
        overrides = {
            key: (value.value if isinstance(value, Statistics) else value)
            for key, value in zip(keys, cell)
        }
        tasks.append((config_path, overrides))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_sweep_cell, tasks))
    else:
        outcomes = [_sweep_cell(task) for task in tasks]

    rows = []
    for cell, (results, error) in zip(cells, outcomes):
        row = [value.value if isinstance(value, Statistics) else value for value in cell]
        for col in summary_cols:
            value = results.get(col, "")
            row.append("" if value is None else value)
        row.append(error)
        rows.append(row)
    return columns, rows


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statdyn",
        description="Statistics-dependent classical dynamics in the lowest Landau level",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "integrate one scenario and write CSV + metadata"),
        ("sweep", "run a parameter grid and write one summary row per cell"),
        ("lyapunov", "estimate the largest Lyapunov exponent"),
        ("qcompare", "compare quantum and classical radial dynamics"),
        ("validate-config", "check a config file against the schema"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the INI config file")
        cmd.add_argument("--out", default=".", help="output directory (default: .)")
        cmd.add_argument("--seed", type=int, default=None,
                         help="recorded in metadata; reserved for future stochastic features")
        if name == "sweep":
            cmd.add_argument("--jobs", type=int, default=1,
                             help="parallel worker processes (default 1)")
    return parser


def _require_kind(cfg: ScenarioConfig, command: str, kinds: tuple[str, ...]) -> None:
    if cfg.kind not in kinds:
        raise ConfigSchemaError(
            f"the {command} subcommand needs kind in {{{', '.join(kinds)}}}, got {cfg.kind}"
        )


def main(argv: list[str] | None = None) -> int:
    """CLI entry point; returns the process exit code."""
    logging.basicConfig(
        level=os.environ.get("STATDYN_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigParseError as exc:
        _emit_error("parse", exc)
        return EXIT_PARSE
    except ConfigSchemaError as exc:
        _emit_error("schema", exc)
        return EXIT_SCHEMA
    except (StatDynError, IntegrationError) as exc:
        _emit_error("numerical", exc)
        return EXIT_NUMERICAL
    except Exception as exc:  # pragma: no cover - last-resort guard
        _emit_error("internal", exc)
        return EXIT_INTERNAL


def _emit_error(category: str, exc: Exception) -> None:
    print(
        json.dumps({"error": {"category": category, "message": str(exc)}}),
        file=sys.stderr,
    )


def _dispatch(args: argparse.Namespace) -> int:
    cfg = parse_config(args.config)
    if args.command == "validate-config":
        print(f"ok: {args.config} is a valid {cfg.kind} configuration")
        return EXIT_OK

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    if args.command == "sweep":
        columns, rows = run_sweep(cfg, args.config, max(1, args.jobs))
        csv_path = out_dir / f"{cfg.prefix}_sweep.csv"
        write_csv(csv_path, columns, rows, cfg.config_hash())
        _write_metadata(
            out_dir / f"{cfg.prefix}_sweep_meta.json",
            cfg,
            {"cells": len(rows), "csv": csv_path.name},
            time.perf_counter() - started,
            args.seed,
        )
        print(f"wrote {csv_path} ({len(rows)} cells)")
        return EXIT_OK

    if args.command == "lyapunov":
        _require_kind(cfg, "lyapunov", ("lyapunov",))
    elif args.command == "qcompare":
        _require_kind(cfg, "qcompare", ("quantum_compare",))

    columns, rows, results = run_scenario(cfg)
    csv_path = out_dir / f"{cfg.prefix}.csv"
    write_csv(csv_path, columns, rows, cfg.config_hash())
    _maybe_plot(cfg, columns, rows, csv_path)
    _write_metadata(
        out_dir / f"{cfg.prefix}_meta.json",
        cfg,
        results,
        time.perf_counter() - started,
        args.seed,
    )
    summary = ", ".join(f"{k}={v}" for k, v in results.items())
    print(f"wrote {csv_path}" + (f" ({summary})" if summary else ""))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
