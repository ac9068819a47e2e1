"""Run configuration: INI files with section headers, overridden by flags."""

import configparser
import logging
from dataclasses import dataclass, field

from dualflow.config import (
    CHECK_EVERY,
    ENVELOPE_SAMPLES_PER_PERIOD,
    FEAS_ABS_TOLERANCE,
    GAP_REL_TOLERANCE,
    MAX_ITERATIONS,
    OUTPUT_ROOT,
    POWER_ITERATIONS,
    SOLVER_STENCIL_ORDER,
)
from dualflow.errors import ConfigError
from dualflow.models import MODELS, SCENARIOS

logger = logging.getLogger(__name__)

COMMANDS = ("solve", "consistency", "burgers-substitute", "dafermos", "verify-model", "gap-study")
SUBSOLUTIONS = ("strong", "inflated", "solver")


def _boolean(text) -> bool:
    if isinstance(text, bool):
        return text
    states = configparser.ConfigParser.BOOLEAN_STATES
    if str(text).lower() not in states:
        raise ValueError(f"not a boolean: {text!r}")
    return states[str(text).lower()]


# section -> key -> (parser, default)
SCHEMA = {
    "run": {
        "command": (str, None),
        "seed": (int, 0),
        "threads": (int, 0),
        "deterministic": (_boolean, False),
    },
    "model": {
        "name": (str, "burgers"),
        "pressure": (str, None),
        "s": (float, -0.5),
        "rho_min": (float, None),
        "gamma_ad": (float, None),
        "c": (float, None),
        "m": (float, None),
        "a": (float, None),
        "b": (float, None),
    },
    "grid": {
        "Nx": (int, 64),
        "Nt": (int, 64),
        "T": (float, 0.1),
    },
    "weight": {
        "gamma": (str, "adapt"),
    },
    "solver": {
        "max_iterations": (int, MAX_ITERATIONS),
        "gap_rel": (float, GAP_REL_TOLERANCE),
        "feas_abs": (float, FEAS_ABS_TOLERANCE),
        "check_every": (int, CHECK_EVERY),
        "power_iterations": (int, POWER_ITERATIONS),
        "order": (int, SOLVER_STENCIL_ORDER),
        "tau": (float, None),
        "sigma": (float, None),
        "progress": (_boolean, False),
    },
    "scenario": {
        "kind": (str, None),
        "v0": (str, "sin:1"),
        "amplitude": (float, 1e-2),
        "rho_bar": (float, 1.0),
        "q_bar": (float, 0.0),
        "samples": (int, ENVELOPE_SAMPLES_PER_PERIOD),
        "trials": (int, 1000),
        "t0": (float, 0.0),
        "t1": (float, None),
        "T1": (float, None),
        "margin": (float, None),
        "subsolution": (str, "inflated"),
        "inflate": (float, 0.1),
        "levels": (int, 3),
    },
    "output": {
        "dir": (str, None),
        "times": (str, "0,0.5,1"),
    },
}

# flag dest -> (section, key)
FLAGS = {
    "model": ("model", "name"),
    "pressure": ("model", "pressure"),
    "s": ("model", "s"),
    "rho_min": ("model", "rho_min"),
    "gamma_ad": ("model", "gamma_ad"),
    "Nx": ("grid", "Nx"),
    "Nt": ("grid", "Nt"),
    "T": ("grid", "T"),
    "weight": ("weight", "gamma"),
    "max_iterations": ("solver", "max_iterations"),
    "gap_rel": ("solver", "gap_rel"),
    "feas_abs": ("solver", "feas_abs"),
    "order": ("solver", "order"),
    "progress": ("solver", "progress"),
    "scenario": ("scenario", "kind"),
    "v0": ("scenario", "v0"),
    "amplitude": ("scenario", "amplitude"),
    "samples": ("scenario", "samples"),
    "trials": ("scenario", "trials"),
    "t0": ("scenario", "t0"),
    "t1": ("scenario", "t1"),
    "T1": ("scenario", "T1"),
    "subsolution": ("scenario", "subsolution"),
    "inflate": ("scenario", "inflate"),
    "levels": ("scenario", "levels"),
    "out": ("output", "dir"),
    "seed": ("run", "seed"),
    "threads": ("run", "threads"),
    "deterministic": ("run", "deterministic"),
}


@dataclass
class RunConfig:
    """
    Validated settings of one CLI run.

    Attributes:
        sections: section -> key -> parsed value, every key of SCHEMA present.
        source: Path of the INI file, if any.
    """

    sections: dict = field(default_factory=dict)
    source: str = None

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    @property
    def command(self) -> str:
        return self.sections["run"]["command"]

    @property
    def seed(self) -> int:
        return self.sections["run"]["seed"]

    @property
    def output_dir(self) -> str:
        return self.sections["output"]["dir"]

    @property
    def adapt(self) -> bool:
        return self.sections["weight"]["gamma"] == "adapt"

    @property
    def gamma(self) -> float:
        return None if self.adapt else float(self.sections["weight"]["gamma"])

    @property
    def times(self) -> list:
        """Profile times as fractions of T."""
        return [float(part) for part in self.sections["output"]["times"].split(",") if part.strip()]

    def pressure_params(self) -> dict:
        model = self.sections["model"]
        return {key: model[key] for key in ("gamma_ad", "c", "m", "a", "b") if model[key] is not None}

    def to_dict(self) -> dict:
        return {section: dict(values) for section, values in self.sections.items()}


def _parse(section: str, key: str, raw):
    if section not in SCHEMA:
        raise ConfigError(f"unknown section [{section}]", section=section)
    if key not in SCHEMA[section]:
        raise ConfigError(f"unknown key {key!r} in [{section}]", section=section, key=key)
    parser, _ = SCHEMA[section][key]
    if raw is None or isinstance(raw, str) and raw.strip().lower() in ("", "none"):
        return None
    try:
        return parser(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}", section=section, key=key) from exc


def read_ini(path: str) -> dict:
    """
    Raw values of an INI file, checked against SCHEMA.

    Raises:
        ConfigError: If the file is unreadable or names unknown sections/keys.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding="ascii") as handle:
            parser.read_file(handle)
    except (OSError, UnicodeDecodeError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            values.setdefault(section, {})[key] = _parse(section, key, raw)
    return values


def _validate(sections: dict) -> None:
    run, grid, model = sections["run"], sections["grid"], sections["model"]
    solver, scenario = sections["solver"], sections["scenario"]

    def need(ok, section, key, message):
        if not ok:
            raise ConfigError(f"[{section}] {key}: {message}", section=section, key=key)

    need(run["command"] in COMMANDS, "run", "command", f"expected one of {COMMANDS}, got {run['command']!r}")
    need(run["seed"] >= 0, "run", "seed", "must be >= 0")
    need(run["threads"] >= 0, "run", "threads", "must be >= 0 (0 = available parallelism)")
    need(model["name"] in MODELS, "model", "name", f"expected one of {MODELS}, got {model['name']!r}")
    need(grid["Nx"] >= 4, "grid", "Nx", "must be >= 4")
    need(grid["Nt"] >= 1, "grid", "Nt", "must be >= 1")
    need(grid["T"] > 0, "grid", "T", "must be positive")
    gamma = sections["weight"]["gamma"]
    if gamma != "adapt":
        try:
            ok = float(gamma) >= 0
        except (TypeError, ValueError):
            ok = False
        need(ok, "weight", "gamma", f"expected 'adapt' or a number >= 0, got {gamma!r}")
    for key in ("max_iterations", "check_every", "power_iterations"):
        need(solver[key] >= 1, "solver", key, "must be >= 1")
    for key in ("gap_rel", "feas_abs"):
        need(solver[key] > 0, "solver", key, "must be positive")
    need(solver["order"] in (2, 4), "solver", "order", "must be 2 or 4")
    need(scenario["kind"] is None or scenario["kind"] in SCENARIOS, "scenario", "kind", f"expected one of {SCENARIOS}")
    need(scenario["amplitude"] > 0, "scenario", "amplitude", "must be positive")
    need(scenario["rho_bar"] > 0, "scenario", "rho_bar", "must be positive")
    need(scenario["samples"] >= 64, "scenario", "samples", "must be >= 64")
    need(scenario["trials"] >= 1, "scenario", "trials", "must be >= 1")
    need(scenario["levels"] >= 1, "scenario", "levels", "must be >= 1")
    need(scenario["t0"] >= 0, "scenario", "t0", "must be >= 0")
    need(scenario["inflate"] >= 0, "scenario", "inflate", "must be >= 0")
    need(scenario["subsolution"] in SUBSOLUTIONS, "scenario", "subsolution", f"expected one of {SUBSOLUTIONS}")
    try:
        times = [float(part) for part in sections["output"]["times"].split(",") if part.strip()]
    except ValueError:
        times = [-1.0]
    need(all(0 <= value <= 1 for value in times), "output", "times", "expected comma-separated fractions in [0, 1]")


def load_config(path: str = None, overrides: dict = None) -> RunConfig:
    """
    Build a RunConfig from defaults, an optional INI file, and flag overrides.

    Args:
        path: INI file, or None.
        overrides: Flag values keyed by FLAGS destinations; None entries are ignored.

    Returns:
        The validated RunConfig.

    Raises:
        ConfigError: On unknown keys or invalid values, naming section and key.
    """
    sections = {section: {key: default for key, (_, default) in keys.items()} for section, keys in SCHEMA.items()}
    if path:
        for section, values in read_ini(path).items():
            sections[section].update(values)
    for dest, raw in (overrides or {}).items():
        if raw is None:
            continue
        if dest == "command":
            section, key = "run", "command"
        elif dest in FLAGS:
            section, key = FLAGS[dest]
        else:
            raise ConfigError(f"unknown option {dest!r}")
        sections[section][key] = _parse(section, key, raw if isinstance(raw, (str, bool)) else str(raw))
    if sections["output"]["dir"] is None:
        sections["output"]["dir"] = f"{OUTPUT_ROOT}/{sections['run']['command']}"
    _validate(sections)
    logger.debug("run configuration: %s", sections)
    return RunConfig(sections, path)
