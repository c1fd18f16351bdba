"""Config-driven experiment runner and CLI.

Experiments mirror the study layout: manufactured-solution accuracy sweeps
in time and space (1D and 3D), CPU-time-versus-error efficiency sweeps,
thin-film relaxation with energy monitoring, and field-driven domain-wall
motion in a nanostrip.  Each experiment reads an INI config (all keys
optional; defaults reproduce the published setups), runs its sweep, and
writes machine-readable CSV/field outputs plus a JSON report.

Solver paths contain no randomness, so identical configs produce identical
numeric outputs; wall-clock columns in efficiency outputs are the one
exception by nature.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import io
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diagnostics import energy, error_norms, fit_order, wall_position
from .fields import (
    GAMMA,
    MU0,
    ManufacturedSolution,
    ModelParams,
    build_demag_kernel,
    nondimensionalize,
)
from .mesh import ScalarField, VectorField, dump_field, fill_value, make_mesh
from .steppers import BlowUpError, Scheme, init_state, run, step

__all__ = [
    "ConfigError",
    "RunConfig",
    "default_config",
    "config_from_ini",
    "config_to_ini",
    "run_accuracy",
    "run_efficiency",
    "run_relax_film",
    "run_energy_curves",
    "run_neel_wall",
    "emit_csv",
    "emit_field",
    "main",
]

EXPERIMENTS = (
    "accuracy_time",
    "accuracy_space",
    "efficiency",
    "relax_film",
    "energy_curves",
    "neel_wall",
)

ACCURACY_HEADER = "scheme,k,h,linf,l2,h1"
ORDERS_HEADER = "scheme,norm,order"
EFFICIENCY_HEADER = "scheme,sweep,k,h,wall_seconds,linf"
ENERGY_HEADER = "step,time,exchange,anisotropy,zeeman,stray,total"
WALL_HEADER = "step,time,wall_x"


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """Typed experiment configuration; all fields round-trip through INI."""

    experiment: str
    schemes: tuple[str, ...] = ("bdf1", "bdf2", "bdf3")
    extrapolate_tilde: str = "unprojected"
    dim: int = 1
    h: float = 1e-4                     # fixed spacing for k-sweeps (1D)
    h_list: tuple[float, ...] = ()      # spacing sweep (1D spatial)
    n_list: tuple[int, ...] = ()        # mesh-size sweep (3D spatial)
    T: float = 0.1
    k: float = 1e-5                     # fixed step for h-sweeps
    k_divisors: tuple[int, ...] = (8, 12, 16, 24, 32)
    alpha: float = 10.0
    alpha_list: tuple[float, ...] = ()
    reps: int = 1                       # timing repetitions (efficiency)
    size_nm: tuple[float, float, float] = (480.0, 480.0, 20.0)
    grid: tuple[int, int, int] = (100, 100, 4)
    k_ps: tuple[float, ...] = (1.0,)
    T_ns: float = 2.0
    relax_ns: float = 0.1
    field_mT: float = 0.0
    Ms: float = 8.0e5
    Cex: float = 1.3e-11
    Ku: float = 100.0
    gamma: float = GAMMA
    stray: bool = True
    precision: str = "double"
    snapshot_cadence: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if not self.schemes:
            raise ConfigError("schemes sweep must be non-empty")
        for name in self.schemes:
            if name not in ("bdf1", "bdf2", "bdf3"):
                raise ConfigError(f"unknown scheme {name!r}")
        if self.extrapolate_tilde not in ("unprojected", "projected"):
            raise ConfigError(f"extrapolate_tilde must be unprojected or projected")
        if self.dim not in (1, 3):
            raise ConfigError(f"dim must be 1 or 3, got {self.dim}")
        if self.experiment in ("accuracy_time", "efficiency") and not self.k_divisors:
            raise ConfigError("k_divisors sweep must be non-empty")
        if self.experiment == "accuracy_space":
            if self.dim == 1 and not self.h_list:
                raise ConfigError("accuracy_space in 1D needs h_list")
            if self.dim == 3 and not self.n_list:
                raise ConfigError("accuracy_space in 3D needs n_list")
        if self.experiment in ("relax_film", "energy_curves", "neel_wall"):
            if not self.alpha_list:
                raise ConfigError(f"{self.experiment} needs a non-empty alpha_list")
            if not self.k_ps:
                raise ConfigError(f"{self.experiment} needs a non-empty k_ps list")
        if self.precision not in ("double", "single"):
            raise ConfigError(f"precision must be double or single, got {self.precision!r}")


_DEFAULT_OVERRIDES: dict[str, dict] = {
    "accuracy_time": {},
    "accuracy_space": {
        "h_list": (1 / 16, 1 / 32, 1 / 64, 1 / 128, 1 / 256),
        "n_list": (16, 20, 24, 28, 32),
        "k": 1e-5,
    },
    "efficiency": {
        # finer k tail than the accuracy sweep so the matched-error
        # comparison probes a regime where step counts dominate
        "h": 2e-4,
        "k": 1e-4,
        "k_divisors": (16, 32, 64, 128, 256),
        "h_list": (1 / 512, 1 / 1024, 1 / 2048, 1 / 4096, 1 / 8192),
        "n_list": (16, 24, 32, 40, 48),
        "reps": 3,
    },
    "relax_film": {
        "alpha_list": (1.0, 5.0, 10.0, 40.0, 100.0),
        "k_ps": (1.0,),
        "field_mT": 0.0,
        "precision": "single",
    },
    "energy_curves": {
        "alpha_list": (5.0, 8.0, 10.0, 12.0),
        "k_ps": (1.0,),
        "field_mT": 0.0,
        "precision": "single",
    },
    "neel_wall": {
        "alpha_list": (5.0, 8.0, 10.0),
        "k_ps": (1.0, 0.1),
        "size_nm": (800.0, 100.0, 4.0),
        "grid": (128, 64, 4),
        "field_mT": 5.0,
        "schemes": ("bdf1", "bdf2", "bdf3"),
        "precision": "single",
    },
}


def default_config(experiment: str) -> RunConfig:
    """Defaults reproducing the published setup of one experiment."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    return RunConfig(experiment=experiment, **_DEFAULT_OVERRIDES[experiment])


# field name -> (section, parser kind)
_CONFIG_LAYOUT: dict[str, tuple[str, str]] = {
    "experiment": ("experiment", "str"),
    "schemes": ("schemes", "strs"),
    "extrapolate_tilde": ("schemes", "str"),
    "dim": ("grid", "int"),
    "h": ("grid", "float"),
    "h_list": ("grid", "floats"),
    "n_list": ("grid", "ints"),
    "T": ("time", "float"),
    "k": ("time", "float"),
    "k_divisors": ("time", "ints"),
    "alpha": ("model", "float"),
    "alpha_list": ("model", "floats"),
    "reps": ("time", "int"),
    "size_nm": ("physical", "floats"),
    "grid": ("physical", "ints"),
    "k_ps": ("physical", "floats"),
    "T_ns": ("physical", "float"),
    "relax_ns": ("physical", "float"),
    "field_mT": ("physical", "float"),
    "Ms": ("physical", "float"),
    "Cex": ("physical", "float"),
    "Ku": ("physical", "float"),
    "gamma": ("physical", "float"),
    "stray": ("model", "bool"),
    "precision": ("model", "str"),
    "snapshot_cadence": ("output", "int"),
    "seed": ("output", "int"),
}

_SECTION_ORDER = ("experiment", "schemes", "grid", "time", "model", "physical", "output")
_BOOL_TRUE = {"1", "yes", "true", "on"}
_BOOL_FALSE = {"0", "no", "false", "off"}


def _parse_value(kind: str, raw: str):
    raw = raw.strip()
    try:
        if kind == "str":
            return raw
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in _BOOL_TRUE:
                return True
            if low in _BOOL_FALSE:
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "ints":
            return tuple(int(tok) for tok in raw.split())
        if kind == "floats":
            return tuple(float(tok) for tok in raw.split())
        if kind == "strs":
            return tuple(tok.lower() for tok in raw.split())
    except ValueError as err:
        raise ConfigError(f"cannot parse {raw!r} as {kind}: {err}") from err
    raise ConfigError(f"unknown value kind {kind}")


def _format_value(kind: str, value) -> str:
    if kind in ("ints", "strs"):
        return " ".join(str(v) for v in value)
    if kind == "floats":
        return " ".join(f"{v!r}" for v in value)
    if kind == "float":
        return f"{value!r}"
    if kind == "bool":
        return "true" if value else "false"
    return str(value)


def config_from_ini(text: str) -> RunConfig:
    """Parse `key = value` sections into a RunConfig; unknown keys reject."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"bad config syntax: {err}") from err
    if not parser.has_option("experiment", "experiment"):
        raise ConfigError("config must set experiment.experiment")
    experiment = parser.get("experiment", "experiment").strip()
    fields = {"experiment": experiment}
    known = {(section, name.lower()): (name, kind) for name, (section, kind) in _CONFIG_LAYOUT.items()}
    defaults = dataclasses.asdict(default_config(experiment))
    for section in parser.sections():
        for key, raw in parser.items(section):
            if (section, key) == ("experiment", "experiment"):
                continue
            if (section, key) not in known:
                raise ConfigError(f"unknown config key [{section}] {key}")
            name, kind = known[(section, key)]
            fields[name] = _parse_value(kind, raw)
    merged = {**defaults, **fields}
    # tuples survive asdict as tuples only for frozen dataclass fields; coerce lists
    for name, value in merged.items():
        if isinstance(value, list):
            merged[name] = tuple(value)
    return RunConfig(**merged)


def config_to_ini(config: RunConfig) -> str:
    """Serialize every field; config_from_ini inverts this exactly."""
    by_section: dict[str, list[tuple[str, str]]] = {s: [] for s in _SECTION_ORDER}
    for name, (section, kind) in _CONFIG_LAYOUT.items():
        value = getattr(config, name)
        by_section[section].append((name, _format_value(kind, value)))
    out = io.StringIO()
    for section in _SECTION_ORDER:
        items = by_section[section]
        if not items:
            continue
        out.write(f"[{section}]\n")
        for name, value in items:
            out.write(f"{name} = {value}\n")
        out.write("\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    return f"{value:.12e}"


def emit_csv(rows: list[list], header: str, path: str | Path) -> None:
    """Write a CSV with a documented header; floats in fixed %.12e form."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [header]
    for row in rows:
        cells = [_fmt(v) if isinstance(v, float) else str(v) for v in row]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def emit_field(field, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    dump_field(field, path)


def _write_json(payload: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="ascii")


_SCHEMES = {"bdf1": Scheme.BDF1, "bdf2": Scheme.BDF2, "bdf3": Scheme.BDF3}


# ---------------------------------------------------------------------------
# Manufactured accuracy and efficiency sweeps
# ---------------------------------------------------------------------------


def _manufactured_entry(
    scheme: Scheme,
    n: int,
    dim: int,
    k: float,
    n_steps: int,
    alpha: float,
    extrapolate_tilde: str,
) -> tuple[tuple[float, float, float] | None, int | None, float]:
    """One manufactured run; returns ((linf, l2, h1) | None, blow_step, seconds)."""
    dims = (n, 1, 1) if dim == 1 else (n, n, n)
    ghost = scheme.stencil_order.ghost_required
    mesh = make_mesh(dims, (1.0, 1.0, 1.0), ghost)
    problem = ManufacturedSolution(mesh)
    params = ModelParams(epsilon=1.0, alpha=alpha)
    m0 = VectorField.from_interior(mesh, problem.exact(0.0))
    state = init_state(
        mesh, m0, params, scheme, k,
        forcing=lambda t: problem.forcing(t, alpha),
        extrapolate_tilde=extrapolate_tilde,
    )
    start = time.perf_counter()
    try:
        run(state, n_steps)
    except BlowUpError as err:
        return None, err.step_index, time.perf_counter() - start
    seconds = time.perf_counter() - start
    norms = error_norms(state.m, problem.exact(state.time), scheme.stencil_order)
    return norms, None, seconds


def _temporal_points(scheme: Scheme, config: RunConfig) -> list[tuple[int, float, int]]:
    """(mesh n, k, n_steps) triples for the temporal sweep."""
    points = []
    if config.dim == 1:
        n = round(1.0 / config.h)
        for div in config.k_divisors:
            points.append((n, config.T / div, div))
    else:
        divisors = {
            Scheme.BDF1: (40, 57, 78, 102, 129),
            Scheme.BDF2: (3, 4, 5, 6, 7),
            Scheme.BDF3: (4, 5, 6, 8, 9),
        }[scheme]
        for div in divisors:
            k = config.T / div
            # coupled refinements: k = h^2 (BDF1), k = h (BDF2), k = h^(4/3) (BDF3)
            if scheme is Scheme.BDF1:
                n = round(k ** -0.5)
            elif scheme is Scheme.BDF2:
                n = round(1.0 / k)
            else:
                n = round(k ** -0.75)
            points.append((n, k, div))
    return points


def run_accuracy(config: RunConfig, out_dir: str | Path) -> dict:
    """Temporal or spatial convergence table plus fitted orders."""
    out = Path(out_dir)
    temporal = config.experiment == "accuracy_time"
    rows: list[list] = []
    orders: list[list] = []
    report: dict = {"experiment": config.experiment, "dim": config.dim, "schemes": {}}
    for name in config.schemes:
        scheme = _SCHEMES[name]
        entries = []
        if temporal:
            for n, k, div in _temporal_points(scheme, config):
                norms, blow_step, _ = _manufactured_entry(
                    scheme, n, config.dim, k, div, config.alpha, config.extrapolate_tilde
                )
                h = 1.0 / n
                if norms is None:
                    rows.append([name, k, h, "failed", "failed", "failed"])
                else:
                    rows.append([name, k, h, *norms])
                    entries.append((k, norms))
        else:
            ns = [round(1.0 / h) for h in config.h_list] if config.dim == 1 else list(config.n_list)
            n_steps = round(config.T / config.k)
            for n in ns:
                norms, blow_step, _ = _manufactured_entry(
                    scheme, n, config.dim, config.k, n_steps, config.alpha, config.extrapolate_tilde
                )
                h = 1.0 / n
                if norms is None:
                    rows.append([name, config.k, h, "failed", "failed", "failed"])
                else:
                    rows.append([name, config.k, h, *norms])
                    entries.append((h, norms))
        fitted = {}
        if len(entries) >= 2:
            for idx, norm_name in enumerate(("linf", "l2", "h1")):
                slope = fit_order([(x, norms[idx]) for x, norms in entries])
                orders.append([name, norm_name, slope])
                fitted[norm_name] = slope
        report["schemes"][name] = {
            "points": [
                {"x": x, "linf": n_[0], "l2": n_[1], "h1": n_[2]} for x, n_ in entries
            ],
            "orders": fitted,
        }
    suffix = "time" if temporal else "space"
    emit_csv(rows, ACCURACY_HEADER, out / f"accuracy_{suffix}_{config.dim}d.csv")
    emit_csv(orders, ORDERS_HEADER, out / f"orders_{suffix}_{config.dim}d.csv")
    _write_json(report, out / f"accuracy_{suffix}_{config.dim}d.json")
    return report


def run_efficiency(config: RunConfig, out_dir: str | Path) -> dict:
    """Wall-seconds versus final error, varying k at fixed h and vice versa."""
    out = Path(out_dir)
    rows: list[list] = []
    report: dict = {"experiment": "efficiency", "dim": config.dim, "k_sweep": {}, "h_sweep": {}}

    def timed(scheme: Scheme, n: int, k: float, n_steps: int):
        best = None
        norms = None
        for _ in range(max(1, config.reps)):
            norms, blow_step, seconds = _manufactured_entry(
                scheme, n, config.dim, k, n_steps, config.alpha, config.extrapolate_tilde
            )
            if norms is None:
                return None, None
            best = seconds if best is None else min(best, seconds)
        return norms, best

    for name in config.schemes:
        scheme = _SCHEMES[name]
        sweep = []
        if config.dim == 1:
            # fixed spacing, varying step
            n_fixed = round(1.0 / config.h)
            k_points = [(n_fixed, config.T / div, div) for div in config.k_divisors]
        else:
            # 3D probes the coupled k-h refinement of the temporal study;
            # a fixed affordable 3D mesh floors the second-order error
            # spatially and makes matched-error timing meaningless
            k_points = _temporal_points(scheme, dataclasses.replace(config, dim=3))
        for n, k, div in k_points:
            norms, seconds = timed(scheme, n, k, div)
            if norms is None:
                continue
            rows.append([name, "k", k, 1.0 / n, seconds, norms[0]])
            sweep.append({"k": k, "h": 1.0 / n, "seconds": seconds, "linf": norms[0]})
        report["k_sweep"][name] = sweep

        sweep = []
        ns = [round(1.0 / h) for h in config.h_list] if config.dim == 1 else list(config.n_list)
        n_steps = round(config.T / config.k)
        for n in ns:
            norms, seconds = timed(scheme, n, config.k, n_steps)
            if norms is None:
                continue
            rows.append([name, "h", config.k, 1.0 / n, seconds, norms[0]])
            sweep.append({"k": config.k, "h": 1.0 / n, "seconds": seconds, "linf": norms[0]})
        report["h_sweep"][name] = sweep

    emit_csv(rows, EFFICIENCY_HEADER, out / f"efficiency_{config.dim}d.csv")
    _write_json(report, out / f"efficiency_{config.dim}d.json")
    return report


def seconds_to_reach(sweep: list[dict], target: float) -> float:
    """Wall seconds of the first (coarsest) sweep point achieving the target."""
    for point in sweep:
        if point["linf"] <= target:
            return point["seconds"]
    return float("inf")


# ---------------------------------------------------------------------------
# Physical experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhysicalSetup:
    """Dimensionless view of a physical geometry and material."""

    mesh_dims: tuple[int, int, int]
    extent: tuple[float, float, float]
    epsilon: float
    q: float
    h_ext: tuple[float, float, float]
    t_unit_ps: float
    L_nm: float

    @classmethod
    def from_config(cls, config: RunConfig) -> "PhysicalSetup":
        L_nm = max(config.size_nm)
        L = L_nm * 1e-9
        epsilon, q = nondimensionalize(config.Cex, config.Ku, config.Ms, L)
        extent = tuple(s / L_nm for s in config.size_nm)
        t_unit_s = 1.0 / (MU0 * config.gamma * config.Ms)
        h_mag = config.field_mT * 1e-3 / (MU0 * config.Ms)
        return cls(
            mesh_dims=config.grid,
            extent=extent,
            epsilon=epsilon,
            q=q,
            h_ext=(h_mag, 0.0, 0.0),
            t_unit_ps=t_unit_s * 1e12,
            L_nm=L_nm,
        )

    def k_dimless(self, k_ps: float) -> float:
        return k_ps / self.t_unit_ps

    def meta(self, config: RunConfig) -> dict:
        return {
            "size_nm": list(config.size_nm),
            "grid": list(config.grid),
            "L_nm": self.L_nm,
            "epsilon": self.epsilon,
            "q": self.q,
            "Ms": config.Ms,
            "Cex": config.Cex,
            "Ku": config.Ku,
            "gamma": config.gamma,
            "mu0": MU0,
            "t_unit_ps": self.t_unit_ps,
            "field_mT": config.field_mT,
            "h_ext_dimensionless": list(self.h_ext),
        }


def _entry_name(scheme: str, alpha: float, k_ps: float) -> str:
    return f"{scheme}_alpha{alpha:g}_k{k_ps:g}ps"


def _film_entry(
    config: RunConfig,
    setup: PhysicalSetup,
    scheme: Scheme,
    alpha: float,
    k_ps: float,
    out: Path,
    kernel_cache: dict,
    m0_interior: np.ndarray | None = None,
    track_wall: bool = False,
) -> dict:
    """One physical run: energy series, optional wall trajectory, snapshots."""
    ghost = scheme.stencil_order.ghost_required
    key = (setup.mesh_dims, ghost)
    if key not in kernel_cache:
        mesh = make_mesh(setup.mesh_dims, setup.extent, ghost)
        dtype = np.float32 if config.precision == "single" else np.float64
        kernel_cache[key] = (mesh, build_demag_kernel(mesh, dtype=dtype) if config.stray else None)
    mesh, kernel = kernel_cache[key]
    params = ModelParams(
        epsilon=setup.epsilon,
        alpha=alpha,
        aniso_q=setup.q,
        h_ext=setup.h_ext,
        stray_enabled=config.stray,
    )
    if m0_interior is None:
        m0 = fill_value(mesh, (1.0, 0.0, 0.0))
    else:
        m0 = VectorField.from_interior(mesh, m0_interior)
    k = setup.k_dimless(k_ps)
    n_steps = round(config.T_ns * 1000.0 / k_ps)
    state = init_state(
        mesh, m0, params, scheme, k,
        kernel=kernel,
        extrapolate_tilde=config.extrapolate_tilde,
    )
    name = _entry_name(scheme.name.lower(), alpha, k_ps)
    entry_dir = out / name
    order = scheme.stencil_order

    energy_rows: list[list] = []
    wall_rows: list[list] = []
    # wall runs track the crossing every step; the energy series (one extra
    # stencil pass) is thinned there to keep long 0.1 ps runs affordable
    energy_cadence = 50 if track_wall else 1

    def record(step_index: int) -> None:
        if step_index % energy_cadence == 0 or step_index == n_steps:
            e = energy(state.m, params, state.h_s, order)
            energy_rows.append([step_index, state.time, e.exchange, e.anisotropy, e.zeeman, e.stray, e.total])
        if track_wall:
            pos = wall_position(state.m)
            wall_rows.append([step_index, state.time, pos if pos is not None else "no_wall"])
        if config.snapshot_cadence and step_index % config.snapshot_cadence == 0:
            m_field = state.m
            emit_field(m_field, entry_dir / f"m_{step_index:06d}.field")
            angle = ScalarField.from_interior(mesh, np.arctan2(m_field.interior[1], m_field.interior[0]))
            emit_field(angle, entry_dir / f"angle_{step_index:06d}.field")

    status = "completed"
    blow_step = None
    record(0)
    for j in range(1, n_steps + 1):
        try:
            step(state)
        except BlowUpError as err:
            status = "blew_up"
            blow_step = err.step_index
            break
        record(j)

    emit_csv(energy_rows, ENERGY_HEADER, entry_dir / "energy.csv")
    if track_wall:
        emit_csv(wall_rows, WALL_HEADER, entry_dir / "wall.csv")
    if status == "completed":
        emit_field(state.m, entry_dir / "m_final.field")

    totals = np.array([row[6] for row in energy_rows], dtype=float)
    recorded_steps = np.array([row[0] for row in energy_rows], dtype=int)
    result = {
        "scheme": scheme.name.lower(),
        "alpha": alpha,
        "k_ps": k_ps,
        "status": status,
        "blow_up_step": blow_step,
        "n_steps": n_steps,
        "energy_initial": float(totals[0]),
        "energy_final": float(totals[-1]),
    }
    if len(totals) > 1:
        running_min = np.minimum.accumulate(totals)
        scale = abs(totals[0]) if totals[0] != 0 else 1.0
        result["energy_rise_frac"] = float(np.max(totals - running_min) / scale)
        tail = totals[recorded_steps >= 0.1 * n_steps]
        max_increase = float(np.max(np.diff(tail))) if tail.size > 1 else 0.0
        result["monotone_after_transient"] = bool(max_increase <= 0.01 * scale)
        result["max_tail_increase_frac"] = max_increase / scale
    if track_wall:
        numeric = [row[2] for row in wall_rows if not isinstance(row[2], str)]
        result["wall_start"] = numeric[0] if numeric else None
        result["wall_end"] = numeric[-1] if numeric else None
        result["wall_displacement"] = (
            numeric[-1] - numeric[0] if len(numeric) >= 2 else None
        )
        result["wall_displacement_nm"] = (
            (numeric[-1] - numeric[0]) * setup.L_nm if len(numeric) >= 2 else None
        )
    return result


def _film_like(config: RunConfig, out_dir: str | Path, track_wall: bool, relax_first: bool) -> dict:
    out = Path(out_dir)
    setup = PhysicalSetup.from_config(config)
    kernel_cache: dict = {}
    entries = []

    m0_by_ghost: dict[int, np.ndarray] = {}
    if relax_first:
        # build the wall profile once per ghost depth, relax it with the
        # field off, and reuse the relaxed state for every production run
        for ghost in sorted({_SCHEMES[s].stencil_order.ghost_required for s in config.schemes}):
            m0_by_ghost[ghost] = _relaxed_wall_state(config, setup, ghost, kernel_cache)

    for name in config.schemes:
        scheme = _SCHEMES[name]
        ghost = scheme.stencil_order.ghost_required
        for alpha in config.alpha_list:
            for k_ps in config.k_ps:
                entry = _film_entry(
                    config,
                    setup,
                    scheme,
                    alpha,
                    k_ps,
                    out,
                    kernel_cache,
                    m0_interior=m0_by_ghost.get(ghost),
                    track_wall=track_wall,
                )
                entries.append(entry)

    report = {
        "experiment": config.experiment,
        "setup": setup.meta(config),
        "entries": entries,
    }
    notes = []
    if config.experiment in ("relax_film", "energy_curves"):
        high_order = [e for e in entries if e["scheme"] in ("bdf2", "bdf3") and e["alpha"] >= 5]
        unstable = [
            e for e in high_order
            if e["status"] == "blew_up" or e.get("energy_rise_frac", 0.0) > 0.10
        ]
        if high_order and not unstable:
            notes.append(
                "discrepancy: no BDF2/BDF3 entry at alpha >= 5 showed an energy rise "
                "above 10% of the initial energy or a blow-up; the published rising/"
                "unstable energy trend did not manifest in this implementation run."
            )
        report["high_order_unstable"] = [
            {"scheme": e["scheme"], "alpha": e["alpha"], "k_ps": e["k_ps"], "status": e["status"],
             "energy_rise_frac": e.get("energy_rise_frac")}
            for e in unstable
        ]
    report["notes"] = notes
    _write_json(report, out / "report.json")

    summary_rows = [
        [e["scheme"], e["alpha"], e["k_ps"], e["status"],
         e["blow_up_step"] if e["blow_up_step"] is not None else "",
         e.get("energy_rise_frac", "")]
        for e in entries
    ]
    emit_csv(summary_rows, "scheme,alpha,k_ps,status,blow_up_step,energy_rise_frac", out / "summary.csv")
    return report


def run_relax_film(config: RunConfig, out_dir: str | Path) -> dict:
    """Thin-film relaxation from a uniform in-plane state; energy monitored."""
    return _film_like(config, out_dir, track_wall=False, relax_first=False)


def run_energy_curves(config: RunConfig, out_dir: str | Path) -> dict:
    """Energy-evolution sweep over damping values (same film geometry)."""
    return _film_like(config, out_dir, track_wall=False, relax_first=False)


def _relaxed_wall_state(
    config: RunConfig,
    setup: PhysicalSetup,
    ghost: int,
    kernel_cache: dict,
) -> np.ndarray:
    """Tanh-profile wall ansatz plus a short field-free BDF1 relaxation."""
    key = (setup.mesh_dims, ghost)
    if key not in kernel_cache:
        mesh = make_mesh(setup.mesh_dims, setup.extent, ghost)
        dtype = np.float32 if config.precision == "single" else np.float64
        kernel_cache[key] = (mesh, build_demag_kernel(mesh, dtype=dtype) if config.stray else None)
    mesh, kernel = kernel_cache[key]
    x = mesh.centers(0)
    delta = float(np.sqrt(setup.epsilon / setup.q))
    theta = 2.0 * np.arctan(np.exp((x - 0.5 * setup.extent[0]) / delta))
    profile = np.zeros((3, *mesh.dims))
    profile[0] = np.cos(theta)[:, None, None]
    profile[1] = np.sin(theta)[:, None, None]
    m0 = VectorField.from_interior(mesh, profile)
    params = ModelParams(
        epsilon=setup.epsilon,
        alpha=config.alpha,
        aniso_q=setup.q,
        h_ext=(0.0, 0.0, 0.0),
        stray_enabled=config.stray,
    )
    relax_k_ps = 1.0
    n_relax = round(config.relax_ns * 1000.0 / relax_k_ps)
    state = init_state(mesh, m0, params, Scheme.BDF1, setup.k_dimless(relax_k_ps), kernel=kernel)
    run(state, n_relax)
    return state.m_hist[-1].copy()


def run_neel_wall(config: RunConfig, out_dir: str | Path) -> dict:
    """Field-driven wall motion in the nanostrip; trajectory per entry."""
    return _film_like(config, out_dir, track_wall=True, relax_first=True)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def _load_config(experiment: str, path: str | None) -> RunConfig:
    if path is None:
        return default_config(experiment)
    text = Path(path).read_text(encoding="utf-8")
    config = config_from_ini(text)
    if config.experiment != experiment:
        raise ConfigError(
            f"config is for experiment {config.experiment!r} but the "
            f"{experiment.replace('_', '-')} command was invoked"
        )
    return config


_RUNNERS = {
    "accuracy_time": run_accuracy,
    "accuracy_space": run_accuracy,
    "efficiency": run_efficiency,
    "relax_film": run_relax_film,
    "energy_curves": run_energy_curves,
    "neel_wall": run_neel_wall,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="llgbdf",
        description="Run the BDF magnetization-dynamics experiments and emit CSV/field outputs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for experiment in EXPERIMENTS:
        cmd = sub.add_parser(experiment.replace("_", "-"), help=f"run the {experiment} experiment")
        cmd.add_argument("--config", help="INI config path (defaults reproduce the published setup)")
        cmd.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    experiment = args.command.replace("-", "_")
    try:
        config = _load_config(experiment, args.config)
    except (ConfigError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.ini").write_text(config_to_ini(config), encoding="ascii")
    _RUNNERS[experiment](config, out_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
