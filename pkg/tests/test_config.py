"""Tests for mawalk/config.py"""

import json
import textwrap
from pathlib import Path

import pytest

from mawalk.config import (
    ConfigError,
    ExperimentConfig,
    from_mapping,
    generate_template,
    load,
)
from mawalk.fbm import SamplingMethod
from mawalk.kernels import TruncationWarning


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def write_config(tmp_path: Path, content: str) -> Path:
    p = tmp_path / "mawalk-config.yaml"
    p.write_text(textwrap.dedent(content), encoding="utf-8")
    return p


VALID_YAML = """\
    kernel:
      type: fractional
      hurst: 0.7
      K: 256
      allow_truncation: true
    memory:
      nu: 1
      form: constant
      params: {c: 1.0}
    innovation:
      law: gaussian
    experiment:
      n_values: [64, 256]
      trials: 500
      master_seed: 11
"""


# ---------------------------------------------------------------------------
# load(): happy path
# ---------------------------------------------------------------------------

def test_load_valid_config(tmp_path):
    config = load(str(write_config(tmp_path, VALID_YAML)))
    assert isinstance(config, ExperimentConfig)
    assert config.hurst == 0.7
    assert config.nu == 1.0
    assert config.kernel.k_max == 256
    assert config.n_values == (64, 256)
    assert config.n_max == 256
    assert config.trials == 500
    assert config.master_seed == 11
    assert config.fbm_method is SamplingMethod.CHOLESKY


def test_defaults_fill_experiment_section(tmp_path):
    config = load(str(write_config(tmp_path, VALID_YAML)))
    assert config.eval_times == (0.25, 0.5, 1.0)
    assert config.significance == 0.01
    assert config.replicates == 5
    assert config.ratio_tolerance == 0.10


def test_nu_zero_memory(tmp_path):
    p = write_config(tmp_path, """\
        kernel: {type: iid}
        memory:
          nu: 0
          form: bounded_rational
          params: {c_inf: 2.0, b: 1.0}
        experiment:
          n_values: [16]
        """)
    config = load(str(p))
    assert config.nu == 0.0
    assert config.innovation.law.value == "gaussian"


# ---------------------------------------------------------------------------
# load(): missing or malformed file
# ---------------------------------------------------------------------------

def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load(str(tmp_path / "no-such-file.yaml"))


def test_load_malformed_yaml(tmp_path):
    p = write_config(tmp_path, "kernel: [unclosed\n")
    with pytest.raises(ConfigError, match="Failed to parse"):
        load(str(p))


def test_top_level_must_be_mapping():
    with pytest.raises(ConfigError, match="mapping"):
        from_mapping(["kernel"])


# ---------------------------------------------------------------------------
# load(): schema errors
# ---------------------------------------------------------------------------

def test_unknown_key_reports_line_number(tmp_path):
    p = write_config(tmp_path, VALID_YAML + "      samples: 10\n")
    with pytest.raises(ConfigError, match=r"line 16: experiment\.samples: unknown key"):
        load(str(p))


def test_missing_n_values(tmp_path):
    p = write_config(tmp_path, """\
        kernel: {type: iid}
        experiment:
          trials: 500
        """)
    with pytest.raises(ConfigError, match="'n_values' is required"):
        load(str(p))


def test_wrong_type_is_reported(tmp_path):
    p = write_config(tmp_path, VALID_YAML.replace("trials: 500", "trials: many"))
    with pytest.raises(ConfigError, match="expected an integer"):
        load(str(p))


def test_unknown_kernel_type(tmp_path):
    p = write_config(tmp_path, VALID_YAML.replace("type: fractional", "type: arfima"))
    with pytest.raises(ConfigError, match="fractional, iid, explicit"):
        load(str(p))


def test_short_window_without_override(tmp_path):
    p = write_config(tmp_path, VALID_YAML.replace("allow_truncation: true", "allow_truncation: false"))
    with pytest.raises(ConfigError, match="allow_truncation"):
        load(str(p))


# ---------------------------------------------------------------------------
# load(): semantic validation
# ---------------------------------------------------------------------------

def test_moment_condition_violated(tmp_path):
    p = write_config(tmp_path, """\
        kernel: {type: iid, hurst: 0.3}
        innovation: {law: student_t, df: 3}
        experiment:
          n_values: [16]
        """)
    with pytest.raises(ConfigError, match=r"moment condition alpha\*H>1 violated"):
        load(str(p))


def test_too_few_trials(tmp_path):
    p = write_config(tmp_path, VALID_YAML.replace("trials: 500", "trials: 10"))
    with pytest.raises(ConfigError, match="must be >= 100"):
        load(str(p))


def test_eval_times_outside_unit_interval(tmp_path):
    p = write_config(tmp_path, VALID_YAML + "      eval_times: [0.5, 1.5]\n")
    with pytest.raises(ConfigError, match=r"\[0, 1\]"):
        load(str(p))


def test_cramer_wold_vector_too_long(tmp_path):
    p = write_config(tmp_path, VALID_YAML + "      eval_times: [1.0]\n      cramer_wold: [[1, 1]]\n")
    with pytest.raises(ConfigError, match="exceeds 1 eval_times"):
        load(str(p))


def test_all_errors_are_collected(tmp_path):
    p = write_config(tmp_path, VALID_YAML.replace("trials: 500", "trials: 10")
                     + "      significance: 2.0\n")
    with pytest.raises(ConfigError) as exc_info:
        load(str(p))
    message = str(exc_info.value)
    assert "trials" in message and "significance" in message


# ---------------------------------------------------------------------------
# Reload from a run manifest
# ---------------------------------------------------------------------------

def test_manifest_round_trip(tmp_path):
    config = load(str(write_config(tmp_path, VALID_YAML)))
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({"command": "simulate", "resolved_config": config.to_dict()}),
                        encoding="utf-8")
    again = load(str(manifest))
    assert again.to_dict() == config.to_dict()


def test_workers_not_part_of_resolved_config(tmp_path):
    config = load(str(write_config(tmp_path, VALID_YAML))).replace(workers=8)
    assert "workers" not in config.to_dict()["experiment"]


# ---------------------------------------------------------------------------
# generate_template()
# ---------------------------------------------------------------------------

def test_generate_template_creates_file(tmp_path):
    out = tmp_path / "mawalk-config.yaml"
    generate_template(str(out))
    assert out.exists()
    content = out.read_text(encoding="utf-8")
    assert "kernel:" in content
    assert "experiment:" in content


def test_generate_template_refuses_overwrite(tmp_path):
    out = tmp_path / "mawalk-config.yaml"
    out.write_text("existing", encoding="utf-8")
    with pytest.raises(ConfigError, match="already exists"):
        generate_template(str(out))


def test_template_loads(tmp_path):
    out = tmp_path / "mawalk-config.yaml"
    generate_template(str(out))
    with pytest.warns(TruncationWarning):
        config = load(str(out))
    assert config.n_values == (256, 1024, 4096)
