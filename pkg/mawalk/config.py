"""Experiment configuration loading and validation.

Usage:
    config = load("mawalk-config.yaml")        # raises ConfigError on bad config
    config.kernel, config.memory, config.innovation
    generate_template("mawalk-config.yaml")    # writes example file to disk

The file is YAML with four sections (kernel, memory, innovation,
experiment). Unknown keys are errors, and every error message carries the
line number of the offending key. A ``manifest.json`` from an earlier run is
accepted too: its ``resolved_config`` section is loaded instead.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from mawalk.core import MemoryFunction, SlowlyVarying
from mawalk.fbm import SamplingMethod
from mawalk.kernels import (
    DEFAULT_MAX_K,
    DEFAULT_TAIL_TOLERANCE,
    Kernel,
    KernelError,
    make_explicit_kernel,
    make_fractional_kernel,
    make_iid_kernel,
)
from mawalk.limit import DEFAULT_QUADRATURE_GRID, DEFAULT_VARIANCE_GRID
from mawalk.linproc import InnovationModel

MIN_TRIALS = 100


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------

class ConfigError(Exception):
    """Raised when the configuration is missing or invalid."""


# ---------------------------------------------------------------------------
# Config dataclass
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    kernel: Kernel
    memory: MemoryFunction
    innovation: InnovationModel
    n_values: tuple[int, ...]
    trials: int = 2000
    eval_times: tuple[float, ...] = (0.25, 0.5, 1.0)
    cramer_wold_coeffs: tuple[tuple[float, ...], ...] = ((1.0,), (1.0, -1.0), (1.0, 1.0, 1.0))
    master_seed: int = 0
    significance: float = 0.01
    replicates: int = 5
    quadrature_grid: int = DEFAULT_QUADRATURE_GRID
    variance_grid: int = DEFAULT_VARIANCE_GRID
    fbm_method: SamplingMethod = SamplingMethod.CHOLESKY
    cov_tolerance: float = 0.02
    ratio_tolerance: float = 0.10
    delta_values: tuple[float, ...] = (1 / 4, 1 / 16, 1 / 64)
    moment_alpha: float = 4.0
    workers: int = 1
    keep_innovations: bool = False
    cache_path: str | None = None
    path_trials: int | None = None

    @property
    def hurst(self) -> float:
        return self.kernel.target_hurst

    @property
    def nu(self) -> float:
        return self.memory.nu

    @property
    def n_max(self) -> int:
        return max(self.n_values)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        """The resolved config, in the same schema the loader reads."""
        experiment = {
            "n_values": list(self.n_values),
            "trials": self.trials,
            "eval_times": list(self.eval_times),
            "cramer_wold": [list(c) for c in self.cramer_wold_coeffs],
            "master_seed": self.master_seed,
            "significance": self.significance,
            "replicates": self.replicates,
            "quadrature_grid": self.quadrature_grid,
            "variance_grid": self.variance_grid,
            "fbm_method": self.fbm_method.value,
            "cov_tolerance": self.cov_tolerance,
            "ratio_tolerance": self.ratio_tolerance,
            "delta_values": list(self.delta_values),
            "moment_alpha": self.moment_alpha,
            "keep_innovations": self.keep_innovations,
        }
        if self.cache_path is not None:
            experiment["cache_path"] = self.cache_path
        if self.path_trials is not None:
            experiment["path_trials"] = self.path_trials
        return {
            "kernel": self.kernel.to_dict(),
            "memory": self.memory.to_dict(),
            "innovation": self.innovation.to_dict(),
            "experiment": experiment,
        }


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

_SECTIONS = ("kernel", "memory", "innovation", "experiment")

_KERNEL_KEYS = {"type", "hurst", "K", "coeffs", "k_min", "two_sided",
                "allow_truncation", "tail_tolerance", "max_K"}
_MEMORY_KEYS = {"nu", "form", "params"}
_INNOVATION_KEYS = {"law", "df"}

_FORM_PARAMS = {
    "constant": {"c"},
    "log_shift": set(),
    "bounded_rational": {"c_inf", "b"},
    "tabulated": {"nodes", "values", "tail"},
}

# experiment key -> (kind, default); kind drives coercion
_EXPERIMENT_FIELDS: dict[str, tuple[str, Any]] = {
    "n_values": ("int_list", None),
    "trials": ("int", 2000),
    "eval_times": ("float_list", [0.25, 0.5, 1.0]),
    "cramer_wold": ("vector_list", [[1.0], [1.0, -1.0], [1.0, 1.0, 1.0]]),
    "master_seed": ("int", 0),
    "significance": ("float", 0.01),
    "replicates": ("int", 5),
    "quadrature_grid": ("int", DEFAULT_QUADRATURE_GRID),
    "variance_grid": ("int", DEFAULT_VARIANCE_GRID),
    "fbm_method": ("str", "cholesky"),
    "cov_tolerance": ("float", 0.02),
    "ratio_tolerance": ("float", 0.10),
    "delta_values": ("float_list", [1 / 4, 1 / 16, 1 / 64]),
    "moment_alpha": ("float", 4.0),
    "keep_innovations": ("bool", False),
    "cache_path": ("str", None),
    "path_trials": ("int", None),
}


class _Errors:
    """Collects ``line N: message`` entries."""

    def __init__(self, lines: dict[tuple, int]) -> None:
        self._lines = lines
        self.items: list[str] = []

    def line_of(self, path: tuple) -> int | None:
        while path:
            if path in self._lines:
                return self._lines[path]
            path = path[:-1]
        return None

    def add(self, path: tuple, message: str) -> None:
        line = self.line_of(path)
        where = f"line {line}: " if line is not None else ""
        self.items.append(f"  - {where}{'.'.join(map(str, path))}: {message}")


def _line_map(node, prefix: tuple = ()) -> dict[tuple, int]:
    """Map key paths to 1-based line numbers from a composed YAML node."""
    lines: dict[tuple, int] = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = prefix + (key_node.value,)
            lines[path] = key_node.start_mark.line + 1
            lines.update(_line_map(value_node, path))
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            path = prefix + (i,)
            lines[path] = item.start_mark.line + 1
            lines.update(_line_map(item, path))
    return lines


def _coerce(kind: str, value: Any):
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"expected an integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"expected a number, got {value!r}")
        return float(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ValueError(f"expected true/false, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ValueError(f"expected a string, got {value!r}")
        return value
    if kind == "int_list":
        if not isinstance(value, list) or not value:
            raise ValueError("expected a non-empty list of integers")
        return tuple(_coerce("int", v) for v in value)
    if kind == "float_list":
        if not isinstance(value, list) or not value:
            raise ValueError("expected a non-empty list of numbers")
        return tuple(_coerce("float", v) for v in value)
    if kind == "vector_list":
        if not isinstance(value, list) or not value:
            raise ValueError("expected a non-empty list of coefficient vectors")
        return tuple(_coerce("float_list", v) for v in value)
    raise AssertionError(kind)


def _check_keys(section: dict, allowed: set, path: tuple, errors: _Errors) -> None:
    for key in section:
        if key not in allowed:
            errors.add(path + (key,), f"unknown key (allowed: {', '.join(sorted(allowed))})")


# ---------------------------------------------------------------------------
# Section builders
# ---------------------------------------------------------------------------

def _build_kernel(raw: dict, errors: _Errors) -> Kernel | None:
    path = ("kernel",)
    _check_keys(raw, _KERNEL_KEYS, path, errors)
    kind = raw.get("type")
    try:
        if kind == "iid":
            return make_iid_kernel(_coerce("float", raw.get("hurst", 0.5)))
        if "hurst" not in raw:
            errors.add(path, "'hurst' is required")
            return None
        hurst = _coerce("float", raw["hurst"])
        if kind == "fractional":
            K = raw.get("K")
            return make_fractional_kernel(
                hurst,
                None if K is None else _coerce("int", K),
                tail_tolerance=_coerce("float", raw.get("tail_tolerance", DEFAULT_TAIL_TOLERANCE)),
                allow_truncation=_coerce("bool", raw.get("allow_truncation", False)),
                max_K=_coerce("int", raw.get("max_K", DEFAULT_MAX_K)),
                two_sided=_coerce("bool", raw.get("two_sided", False)),
            )
        if kind == "explicit":
            if "coeffs" not in raw:
                errors.add(path, "'coeffs' is required for an explicit kernel")
                return None
            return make_explicit_kernel(_coerce("float_list", raw["coeffs"]), hurst,
                                        _coerce("int", raw.get("k_min", 0)))
        errors.add(path + ("type",), f"must be one of fractional, iid, explicit; got {kind!r}")
    except (ValueError, KernelError) as exc:
        errors.add(path, str(exc))
    return None


def _build_memory(raw: dict, errors: _Errors) -> MemoryFunction | None:
    path = ("memory",)
    _check_keys(raw, _MEMORY_KEYS, path, errors)
    form = raw.get("form", "constant")
    params = raw.get("params") or {}
    if form not in _FORM_PARAMS:
        errors.add(path + ("form",), f"must be one of {', '.join(_FORM_PARAMS)}; got {form!r}")
        return None
    if not isinstance(params, dict):
        errors.add(path + ("params",), "must be a mapping")
        return None
    _check_keys(params, _FORM_PARAMS[form], path + ("params",), errors)
    try:
        nu = _coerce("float", raw.get("nu", 0.0))
        if form == "constant":
            l = SlowlyVarying.constant(_coerce("float", params.get("c", 1.0)))
        elif form == "log_shift":
            l = SlowlyVarying.log_shift()
        elif form == "bounded_rational":
            l = SlowlyVarying.bounded_rational(_coerce("float", params.get("c_inf", 2.0)),
                                               _coerce("float", params.get("b", 1.0)))
        else:
            l = SlowlyVarying.tabulated(_coerce("float_list", params.get("nodes", [])),
                                        _coerce("float_list", params.get("values", [])),
                                        _coerce("float", params.get("tail", 0.0)))
        return MemoryFunction(nu, l)
    except ValueError as exc:
        errors.add(path, str(exc))
    return None


def _build_innovation(raw: dict, errors: _Errors) -> InnovationModel | None:
    path = ("innovation",)
    _check_keys(raw, _INNOVATION_KEYS, path, errors)
    try:
        df = raw.get("df")
        return InnovationModel(raw.get("law", "gaussian"),
                               None if df is None else _coerce("float", df))
    except ValueError as exc:
        errors.add(path, str(exc))
    return None


def _build_experiment(raw: dict, errors: _Errors) -> dict[str, Any]:
    path = ("experiment",)
    _check_keys(raw, set(_EXPERIMENT_FIELDS), path, errors)
    values: dict[str, Any] = {}
    for key, (kind, default) in _EXPERIMENT_FIELDS.items():
        if key not in raw:
            if default is None and key == "n_values":
                errors.add(path, "'n_values' is required")
            continue
        try:
            values[key] = _coerce(kind, raw[key])
        except ValueError as exc:
            errors.add(path + (key,), str(exc))
    return values


# ---------------------------------------------------------------------------
# Loader
# ---------------------------------------------------------------------------

def from_mapping(raw: Any, lines: dict[tuple, int] | None = None) -> ExperimentConfig:
    """Build and validate an ExperimentConfig from a parsed mapping."""
    errors = _Errors(lines or {})
    if not isinstance(raw, dict):
        raise ConfigError("Configuration must be a mapping at the top level.")
    _check_keys(raw, set(_SECTIONS), (), errors)
    sections = {}
    for name in _SECTIONS:
        section = raw.get(name)
        if section is None:
            section = {}
        if not isinstance(section, dict):
            errors.add((name,), "must be a mapping")
            section = {}
        sections[name] = section

    kernel = _build_kernel(sections["kernel"], errors) if sections["kernel"] else None
    if not sections["kernel"]:
        errors.add(("kernel",), "section is missing")
    memory = _build_memory(sections["memory"], errors)
    innovation = _build_innovation(sections["innovation"], errors)
    exp = _build_experiment(sections["experiment"], errors)

    config = None
    if kernel is not None and memory is not None and innovation is not None and not errors.items:
        fbm_method = exp.pop("fbm_method", "cholesky")
        try:
            method = SamplingMethod(fbm_method)
        except ValueError:
            errors.add(("experiment", "fbm_method"), f"must be cholesky or circulant, got {fbm_method!r}")
            method = SamplingMethod.CHOLESKY
        cramer_wold = exp.pop("cramer_wold", None)
        if cramer_wold is not None:
            exp["cramer_wold_coeffs"] = cramer_wold
        config = ExperimentConfig(kernel=kernel, memory=memory, innovation=innovation,
                                  fbm_method=method, **exp)
        _validate(config, errors)

    if errors.items:
        raise ConfigError("Invalid configuration:\n" + "\n".join(errors.items))
    return config


def load(config_path: str = "mawalk-config.yaml") -> ExperimentConfig:
    """Load and validate configuration from a YAML file (or a run manifest).

    Raises:
        ConfigError: if the file is missing, malformed, or fails validation.
    """
    path = Path(config_path)

    if not path.exists():
        raise ConfigError(
            f"Config file not found: '{config_path}'\n"
            "Run `python -m mawalk init` to generate a template."
        )

    try:
        text = path.read_text(encoding="utf-8")
        raw = yaml.safe_load(text)
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"Failed to parse '{config_path}': {exc}") from exc

    lines = _line_map(node)
    if isinstance(raw, dict) and "resolved_config" in raw:
        raw = raw["resolved_config"]
        lines = {key[1:]: line for key, line in lines.items()
                 if key and key[0] == "resolved_config"}
    try:
        return from_mapping(raw, lines)
    except ConfigError as exc:
        raise ConfigError(f"{config_path}: {exc}") from None


def _validate(config: ExperimentConfig, errors: _Errors) -> None:
    """Add an error for every semantic rule the config breaks."""
    H = config.hurst
    if not config.innovation.admits_hurst(H):
        errors.add(
            ("innovation",),
            f"moment condition alpha*H>1 violated "
            f"(alpha={config.innovation.moment_order_alpha:.6g}, H={H})",
        )
    if config.trials < MIN_TRIALS:
        errors.add(("experiment", "trials"), f"must be >= {MIN_TRIALS}, got {config.trials}")
    if any(n < 1 for n in config.n_values):
        errors.add(("experiment", "n_values"), "all n must be >= 1")
    if any(not 0.0 <= t <= 1.0 for t in config.eval_times):
        errors.add(("experiment", "eval_times"), "times must lie in [0, 1]")
    for i, vec in enumerate(config.cramer_wold_coeffs):
        if len(vec) > len(config.eval_times):
            errors.add(("experiment", "cramer_wold", i),
                       f"vector of length {len(vec)} exceeds {len(config.eval_times)} eval_times")
    if not 0.0 < config.significance < 1.0:
        errors.add(("experiment", "significance"), "must lie in (0, 1)")
    if config.replicates < 1:
        errors.add(("experiment", "replicates"), "must be >= 1")
    if config.quadrature_grid < 256:
        errors.add(("experiment", "quadrature_grid"), "must be >= 256")
    if config.variance_grid < 64:
        errors.add(("experiment", "variance_grid"), "must be >= 64")
    if any(not d > 0 for d in config.delta_values):
        errors.add(("experiment", "delta_values"), "deltas must be > 0")
    if not config.moment_alpha >= 2 or math.isinf(config.moment_alpha):
        errors.add(("experiment", "moment_alpha"), "must be a finite number >= 2")
    if config.path_trials is not None and config.path_trials < 1:
        errors.add(("experiment", "path_trials"), "must be >= 1")


# ---------------------------------------------------------------------------
# Template generator (used by `init` command)
# ---------------------------------------------------------------------------

TEMPLATE = """\
kernel:
  type: fractional        # fractional | iid | explicit
  hurst: 0.7
  # K: 1048576            # window size; default from the truncation rule

memory:
  nu: 1                   # M(t) = l(t) t^nu
  form: constant          # constant | log_shift | bounded_rational | tabulated
  params: {c: 1.0}

innovation:
  law: gaussian           # gaussian | rademacher | student_t (with df)

experiment:
  n_values: [256, 1024, 4096]
  trials: 2000
  replicates: 5
  eval_times: [0.25, 0.5, 1.0]
  cramer_wold: [[1], [1, -1], [1, 1, 1]]
  master_seed: 20240611
  significance: 0.01
"""


def generate_template(output_path: str = "mawalk-config.yaml") -> None:
    """Write a template config to *output_path*.

    Raises:
        ConfigError: if the file already exists.
    """
    path = Path(output_path)
    if path.exists():
        raise ConfigError(
            f"'{output_path}' already exists. Remove it first or choose a different path."
        )
    path.write_text(TEMPLATE, encoding="utf-8")
