"""CLI entry point: command definitions using Click.

Commands:
    init          Generate a template config file
    simulate      Sample s_n and r_n paths, write paths.csv
    verify        Run a verification suite, write report.json / report.txt
    var-ratio     Exact variance-ratio sweep, write var_ratio.csv
    fbm           Standalone fBm sampler, write fbm.csv

Exit codes: 0 pass, 1 runtime or test failure, 2 configuration error,
3 inconclusive.
"""

import csv
import functools
import json
import sys
from pathlib import Path

import click

from mawalk import __version__

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3


# ---------------------------------------------------------------------------
# Helpers shared by all commands
# ---------------------------------------------------------------------------

def _load_config(ctx: click.Context, **overrides):
    """Load the config named by --config and apply flag overrides."""
    from mawalk.config import load

    obj = ctx.obj
    config = load(obj["config_path"])
    if obj["seed"] is not None:
        overrides["master_seed"] = obj["seed"]
    overrides["workers"] = obj["workers"]
    if obj["method"] is not None:
        from mawalk.fbm import SamplingMethod
        overrides["fbm_method"] = SamplingMethod(obj["method"])
    config = config.replace(**overrides)

    if obj["verbose"]:
        click.echo(
            f"[verbose] kernel={config.kernel.kind} H={config.hurst} K={config.kernel.width} "
            f"nu={config.nu} innovation={config.innovation.law.value} n={list(config.n_values)}",
            err=True,
        )
    return config


def _start_manifest(ctx: click.Context, command: str, resolved: dict, options: dict,
                    uses_config: bool = True):
    """Write manifest.json into --out before any computation starts."""
    from mawalk.models import RunManifest

    manifest = RunManifest(
        command=command,
        config_path=ctx.obj["config_path"] if uses_config else None,
        resolved_config=resolved,
        output_dir=str(ctx.obj["out_dir"]),
        tool_version=__version__,
        options=options,
    )
    path = manifest.write()
    if ctx.obj["verbose"]:
        click.echo(f"[verbose] Manifest written to '{path}'", err=True)
    return manifest


def _write_csv(path: Path, header: list[str], rows) -> None:
    """CSV with '.' decimals and 17 significant digits for floats."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])


def _stage(message: str) -> None:
    click.echo(f"{message} ...", err=True)


def _handle_errors(func):
    """Decorator that maps package exceptions onto the exit-code contract."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        from mawalk.config import ConfigError
        from mawalk.core import DegenerateInputError, DomainError
        from mawalk.fbm import EmbeddingError, FbmError
        from mawalk.kernels import KernelError
        from mawalk.limit import LimitError, WrongBranchError
        from mawalk.linproc import LinprocError
        from mawalk.verify import HypothesisError, VerificationError

        try:
            return func(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"Configuration error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except (WrongBranchError, HypothesisError) as exc:
            click.echo(f"Configuration error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except EmbeddingError as exc:
            click.echo(f"Sampling error: {exc}", err=True)
            click.echo("Hint: rerun with the global option --method cholesky.", err=True)
            sys.exit(EXIT_FAIL)
        except (FbmError, KernelError, LinprocError, LimitError, VerificationError) as exc:
            click.echo(f"Runtime error: {exc}", err=True)
            sys.exit(EXIT_FAIL)
        except (DomainError, DegenerateInputError) as exc:
            click.echo(f"Invalid input: {exc}", err=True)
            sys.exit(EXIT_FAIL)

    return wrapper


# ---------------------------------------------------------------------------
# CLI group
# ---------------------------------------------------------------------------

@click.group()
@click.option("--config", "config_path", default="mawalk-config.yaml", show_default=True,
              help="Path to the configuration file (or a manifest.json from an earlier run).")
@click.option("--out", "out_dir", default="out", show_default=True,
              type=click.Path(file_okay=False),
              help="Directory for manifest.json and the output files.")
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None,
              help="Master seed (overrides experiment.master_seed).")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True,
              help="Worker threads for Monte Carlo trials. Never changes the results.")
@click.option("--method", type=click.Choice(["cholesky", "circulant"]), default=None,
              help="fBm sampling method (overrides experiment.fbm_method; fbm defaults to cholesky).")
@click.option("--verbose", is_flag=True, default=False,
              help="Enable verbose logging.")
@click.version_option(__version__, prog_name="mawalk")
@click.pass_context
def cli(ctx: click.Context, config_path: str, out_dir: str, seed: int | None,
        workers: int, method: str | None, verbose: bool) -> None:
    """Moving-average walks: simulate, sample limits and verify invariance principles."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["out_dir"] = Path(out_dir)
    ctx.obj["seed"] = seed
    ctx.obj["workers"] = workers
    ctx.obj["method"] = method
    ctx.obj["verbose"] = verbose


# ---------------------------------------------------------------------------
# init
# ---------------------------------------------------------------------------

@cli.command("init")
@click.option("--output", "output_path", default="mawalk-config.yaml", show_default=True,
              help="Path where the template config file will be written.")
def init_command(output_path: str) -> None:
    """Generate a template mawalk-config.yaml file."""
    from mawalk.config import ConfigError, generate_template
    try:
        generate_template(output_path)
        click.echo(f"Template written to '{output_path}'.")
        click.echo("Edit the kernel, memory and experiment sections before running.")
    except ConfigError as exc:
        click.echo(f"Error: {exc}", err=True)
        sys.exit(EXIT_FAIL)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

@cli.command("simulate")
@click.option("--trials", "path_trials", type=click.IntRange(min=1), default=None,
              help="Number of paths per n (default: experiment.path_trials, else trials).")
@click.pass_context
@_handle_errors
def simulate_command(ctx: click.Context, path_trials: int | None) -> None:
    """Sample s_n and r_n paths for every n and write paths.csv."""
    from mawalk.linproc import simulate_walks

    overrides = {} if path_trials is None else {"path_trials": path_trials}
    config = _load_config(ctx, **overrides)
    trials = config.path_trials or config.trials
    out_dir = ctx.obj["out_dir"]
    manifest = _start_manifest(ctx, "simulate", config.to_dict(),
                               {"workers": config.workers, "trials": trials})

    rows = []
    innovation_rows = []
    for n in sorted(config.n_values):
        _stage(f"Simulating {trials} walks at n={n}")
        with manifest.stage(f"simulate/{n}"):
            samples = simulate_walks(
                config.kernel, config.memory, config.innovation, n, trials,
                config.master_seed, f"simulate/{n}", config.workers,
                keep_innovations=config.keep_innovations,
            )
        t = samples[0].s_path.grid.points
        for trial, sample in enumerate(samples):
            s_vals, r_vals = sample.s_path.values, sample.r_path.values
            rows += [(n, trial, float(t[i]), float(s_vals[i]), float(r_vals[i]))
                     for i in range(n + 1)]
            if sample.innovations is not None:
                xi = sample.innovations
                innovation_rows += [(n, trial, xi.start + j, float(v))
                                    for j, v in enumerate(xi.values)]

    with manifest.stage("write"):
        _write_csv(out_dir / "paths.csv", ["n", "trial", "t", "s_n", "r_n"], rows)
        if innovation_rows:
            _write_csv(out_dir / "innovations.csv", ["n", "trial", "k", "xi"], innovation_rows)
    click.echo(f"Paths written to '{out_dir / 'paths.csv'}'", err=True)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _cache_for(config):
    from mawalk.limit import VarZCache
    return VarZCache(config.cache_path) if config.cache_path else None


def _exit_code(reports) -> int:
    from mawalk.models import Verdict

    if all(r.passed for r in reports):
        return EXIT_OK
    overall = Verdict.combine(r.verdict for r in reports)
    return EXIT_FAIL if overall is Verdict.FAIL else EXIT_INCONCLUSIVE


def _write_var_ratio(path: Path, rows: list[dict]) -> None:
    columns = ["n", "var_R_exact", "normalizer", "sigma2", "ratio"]
    _write_csv(path, columns, [[row[c] for c in columns] for row in rows])


@cli.command("verify")
@click.option("--suite", type=click.Choice(["proposition", "theorem_nu_pos", "theorem_nu_zero",
                                            "corollary", "all"]),
              default="all", show_default=True, help="Group of tests to run.")
@click.option("--dump-raw", is_flag=True, default=False,
              help="Also write per-trial statistics to raw_stats.csv.")
@click.pass_context
@_handle_errors
def verify_command(ctx: click.Context, suite: str, dump_raw: bool) -> None:
    """Run a verification suite and write report.json and report.txt."""
    from mawalk.models import raw_rows, render_reports_json, render_reports_text
    from mawalk.verify.suites import REPORT_HEADER_NOTES, suite_tests

    config = _load_config(ctx)
    out_dir = ctx.obj["out_dir"]
    tests = suite_tests(config, suite, _cache_for(config))
    manifest = _start_manifest(ctx, "verify", config.to_dict(),
                               {"suite": suite, "workers": config.workers})

    reports = []
    for name, run in tests:
        _stage(f"Running {name}")
        with manifest.stage(name):
            report = run()
        reports.append(report)
        click.echo(f"  {report.name}: {report.verdict.value}", err=True)

    header = {"tool_version": __version__, "suite": suite, "notes": list(REPORT_HEADER_NOTES)}
    with manifest.stage("write"):
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(render_reports_json(reports, header), encoding="utf-8")
        text_header = [f"mawalk {__version__} suite={suite}"]
        text_header += [f"note: {note}" for note in REPORT_HEADER_NOTES]
        (out_dir / "report.txt").write_text(render_reports_text(reports, text_header),
                                            encoding="utf-8")
        for report in reports:
            if report.name == "test_var_ratio":
                _write_var_ratio(out_dir / "var_ratio.csv", report.rows)
        if dump_raw:
            _write_csv(out_dir / "raw_stats.csv", ["test", "n", "trial", "stat"], raw_rows(reports))

    click.echo(f"Report written to '{out_dir / 'report.txt'}'", err=True)
    sys.exit(_exit_code(reports))


# ---------------------------------------------------------------------------
# var-ratio
# ---------------------------------------------------------------------------

@cli.command("var-ratio")
@click.pass_context
@_handle_errors
def var_ratio_command(ctx: click.Context) -> None:
    """Exact variance-ratio sweep over n_values; writes var_ratio.csv."""
    from mawalk.verify.deterministic import test_var_ratio

    config = _load_config(ctx)
    out_dir = ctx.obj["out_dir"]
    manifest = _start_manifest(ctx, "var-ratio", config.to_dict(), {})

    _stage("Computing exact variance ratios")
    with manifest.stage("var_ratio"):
        report = test_var_ratio(config, _cache_for(config))
    with manifest.stage("write"):
        _write_var_ratio(out_dir / "var_ratio.csv", report.rows)
    click.echo(report.to_text())
    sys.exit(_exit_code([report]))


# ---------------------------------------------------------------------------
# fbm
# ---------------------------------------------------------------------------

def _fbm_options_from_manifest(path: str) -> dict:
    """The options recorded by an earlier ``fbm`` run in its manifest.json."""
    from mawalk.config import ConfigError

    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"--n and --hurst are required unless --config names an fbm manifest "
                          f"('{path}' not found)")
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Failed to read fbm manifest '{path}': {exc}")
    if not isinstance(data, dict) or data.get("command") != "fbm":
        raise ConfigError(f"'{path}' is not a manifest written by the fbm command")
    return data["resolved_config"]["fbm"]


@cli.command("fbm")
@click.option("--n", "n", type=click.IntRange(min=1), default=None,
              help="Grid steps (default: from an fbm manifest passed as --config).")
@click.option("--hurst", type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True),
              default=None, help="Hurst index H in (0, 1).")
@click.option("--trials", type=click.IntRange(min=1), default=None,
              help="Number of paths (default 1, or the manifest value).")
@click.option("--cov", "write_cov", is_flag=True, default=False,
              help="Also write the exact covariance matrix to fbm_cov.csv.")
@click.pass_context
@_handle_errors
def fbm_command(ctx: click.Context, n: int | None, hurst: float | None, trials: int | None,
                write_cov: bool) -> None:
    """Sample fractional Brownian motion paths on i/n and write fbm.csv.

    The sampling method is the global --method (cholesky when not given).
    Passing a manifest.json written by fbm as --config reruns it.
    """
    from mawalk.fbm import TimeGrid, covariance_matrix, sample_fbm_paths
    from mawalk.streams import trial_rng

    recorded = {}
    if n is None or hurst is None:
        recorded = _fbm_options_from_manifest(ctx.obj["config_path"])
    n = n if n is not None else int(recorded["n"])
    hurst = hurst if hurst is not None else float(recorded["hurst"])
    trials = trials or int(recorded.get("trials", 1))
    method = ctx.obj["method"] or recorded.get("method", "cholesky")
    seed = ctx.obj["seed"] if ctx.obj["seed"] is not None else int(recorded.get("seed", 0))

    out_dir = ctx.obj["out_dir"]
    options = {"n": n, "hurst": hurst, "trials": trials, "method": method, "seed": seed}
    manifest = _start_manifest(ctx, "fbm", {"fbm": options}, options, uses_config=bool(recorded))

    grid = TimeGrid(n)
    _stage(f"Sampling {trials} fBm paths (n={n}, H={hurst}, {method})")
    with manifest.stage("sample"):
        paths = sample_fbm_paths(grid, hurst, trials, trial_rng(seed, "fbm", 0), method)
    t = grid.points
    with manifest.stage("write"):
        _write_csv(
            out_dir / "fbm.csv",
            ["trial", "t", "value"],
            ((trial, float(t[i]), float(paths[trial, i]))
             for trial in range(trials) for i in range(n + 1)),
        )
        if write_cov:
            cov = covariance_matrix(grid, hurst)
            _write_csv(
                out_dir / "fbm_cov.csv",
                ["t", "s", "cov"],
                ((float(t[i + 1]), float(t[j + 1]), float(cov[i, j]))
                 for i in range(n) for j in range(n)),
            )
    click.echo(f"Paths written to '{out_dir / 'fbm.csv'}'", err=True)
