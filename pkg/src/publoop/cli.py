"""Command-line entry points.

Exit codes: 0 success, 2 configuration problem (bad key, bad value, missing
file), 3 runtime abort with the audit chain left intact up to the failure.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import os
import sys
from datetime import datetime
from pathlib import Path
from statistics import median_low
from typing import Optional

import click

from .audit import verify_chain
from .config import ScenarioConfig, load_scenario, valid_keys
from .engine import run_scenario
from .errors import ConfigError, ConsistencyError

RUNS_ENV = "PUBLOOP_RUNS"


def _runs_root(out: Optional[str]) -> Path:
    if out:
        return Path(out)
    return Path(os.environ.get(RUNS_ENV, "runs"))


def _new_run_dir(root: Path, scenario: ScenarioConfig) -> Path:
    stamp = datetime.now().strftime("%Y%m%d%H%M%S%f")
    return root / f"{scenario.name}-{scenario.seed}-{stamp}"


def _parse_overrides(pairs: tuple[str, ...]) -> list[tuple[str, str]]:
    out = []
    for item in pairs:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, _, value = item.partition("=")
        out.append((key.strip(), value.strip()))
    return out


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    code = 2 if isinstance(exc, ConfigError) else 3
    sys.exit(code)


@click.group()
def main() -> None:
    """Closed-loop publishing governance simulator."""


@main.command("run")
@click.argument("scenario", required=False)
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--override", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Dotted config override; repeatable.")
@click.option("--out", default=None, help=f"Output root (default ${RUNS_ENV} or ./runs).")
@click.option("--quiet", is_flag=True, help="Print only the run directory.")
def cmd_run(scenario, seed, overrides, out, quiet):
    """Run one scenario to horizon and write its artifact directory."""
    try:
        pairs = _parse_overrides(overrides)
        if seed is not None:
            pairs.append(("seed", str(seed)))
        cfg = load_scenario(scenario, pairs)
        run_dir = _new_run_dir(_runs_root(out), cfg)
        summary = run_scenario(cfg, run_dir)
    except (ConfigError, ConsistencyError) as exc:
        _fail(exc)
    click.echo(str(run_dir))
    if not quiet:
        for key in ("final_backlog", "final_tau", "final_rho_ai",
                    "total_escalations", "accepted_total", "config_hash"):
            click.echo(f"  {key}: {summary[key]}")


def _sweep_cell(args: tuple) -> dict:
    scenario, param, value, seed, root = args
    pairs = [(param, value), ("seed", str(seed))]
    cfg = load_scenario(scenario, pairs)
    run_dir = _new_run_dir(Path(root), cfg)
    summary = run_scenario(cfg, run_dir)
    return {
        "param": param, "value": value, "seed": seed,
        "run_dir": str(run_dir),
        "final_backlog": summary["final_backlog"],
        "final_tau": summary["final_tau"],
        "total_escalations": summary["total_escalations"],
    }


@main.command("sweep")
@click.argument("scenario", required=False)
@click.option("--param", required=True, help="Dotted config key to sweep.")
@click.option("--values", required=True, help="Comma-separated values.")
@click.option("--seeds", default="42", show_default=True, help="Comma-separated seeds.")
@click.option("--out", default=None, help=f"Output root (default ${RUNS_ENV} or ./runs).")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Parallel worker runs.")
def cmd_sweep(scenario, param, values, seeds, out, workers):
    """Run the values x seeds grid and tabulate backlog, tau, escalations."""
    try:
        value_list = [v.strip() for v in values.split(",") if v.strip()]
        seed_list = [int(s) for s in seeds.split(",") if s.strip()]
        if not value_list:
            raise ConfigError("sweep needs at least one value")
        if not seed_list:
            raise ConfigError("sweep needs at least one seed")
        root = _runs_root(out)
        cells = [(scenario, param, v, s, str(root))
                 for v in value_list for s in seed_list]
        if workers > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
                rows = list(ex.map(_sweep_cell, cells))
        else:
            rows = [_sweep_cell(c) for c in cells]
    except (ConfigError, ConsistencyError) as exc:
        _fail(exc)

    root.mkdir(parents=True, exist_ok=True)
    (root / "sweep_summary.json").write_text(
        json.dumps({"param": param, "rows": rows}, indent=2, sort_keys=True) + "\n")
    with open(root / "sweep_summary.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)

    header = f"{param:>24}  {'seed':>6}  {'final_backlog':>13}  {'final_tau':>9}  {'escalations':>11}"
    click.echo(header)
    for r in rows:
        click.echo(f"{r['value']:>24}  {r['seed']:>6}  {r['final_backlog']:>13}  "
                   f"{r['final_tau']:>9.4g}  {r['total_escalations']:>11}")


def _load_summary(run_dir: Path) -> dict:
    path = Path(run_dir) / "summary.json"
    if not path.exists():
        raise ConfigError(f"no summary.json under {run_dir}")
    return json.loads(path.read_text())


@main.command("report")
@click.argument("run_dirs", nargs=-1, required=True)
@click.option("--plots", is_flag=True, help="Also write line plots per run.")
def cmd_report(run_dirs, plots):
    """Aggregate median/min/max statistics across runs of one scenario."""
    try:
        summaries = [_load_summary(Path(d)) for d in run_dirs]
        hashes = {s["config_hash"] for s in summaries}
        names = {s["name"] for s in summaries}
        if len(names) > 1:
            raise ConfigError(
                f"report needs runs of a single scenario, got: {sorted(names)}")
    except (ConfigError, ConsistencyError) as exc:
        _fail(exc)

    click.echo(f"scenario: {summaries[0]['name']}  runs: {len(summaries)}  "
               f"config variants: {len(hashes)}")
    stats = [
        ("final_backlog", None), ("final_tau", None), ("final_rho_ai", None),
        ("total_escalations", None), ("max_concentration", None),
        ("final_concentration", None), ("first_intervention_t", "n/a"),
        ("cumulative_impact", None),
    ]
    for key, absent in stats:
        vals = [s[key] for s in summaries if key in s]
        if not vals:
            if absent is not None:
                click.echo(f"  {key}: {absent}")
            continue
        med = median_low(sorted(vals))
        click.echo(f"  {key}: median {med:g}  range [{min(vals):g}, {max(vals):g}]"
                   f"  n={len(vals)}")
    if plots:
        _write_plots([Path(d) for d in run_dirs])


def _write_plots(run_dirs: list[Path]) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    for run_dir in run_dirs:
        rows = list(csv.DictReader(open(run_dir / "metrics.csv")))
        if not rows:
            continue
        t = [int(r["t"]) for r in rows]
        fig, axes = plt.subplots(4, 1, figsize=(8, 10), sharex=True)
        for ax, col in zip(axes, ("backlog", "tau", "rho_ai", "concentration")):
            ax.plot(t, [float(r[col]) for r in rows])
            ax.set_ylabel(col)
        axes[-1].set_xlabel("t")
        fig.tight_layout()
        fig.savefig(run_dir / "metrics.png", dpi=110)
        plt.close(fig)
        click.echo(f"wrote {run_dir / 'metrics.png'}")


@main.command("verify")
@click.argument("run_dir")
def cmd_verify(run_dir):
    """Recompute a run's audit chain; exit 0 only if it is intact."""
    path = Path(run_dir) / "events.jsonl"
    if not path.exists():
        click.echo(f"error: no events.jsonl under {run_dir}", err=True)
        sys.exit(2)
    result = verify_chain(path)
    if result["ok"]:
        click.echo(f"ok: {result['length']} events, head {result['head'][:16]}...")
        return
    click.echo(f"broken at seq {result['broken_at']}: {result['reason']}", err=True)
    sys.exit(3)


@main.command("keys")
def cmd_keys():
    """List every valid dotted config key."""
    for key in valid_keys():
        click.echo(key)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--scenario-dir", default=None,
              help="Directory searched for scenario names (default ./configs/scenarios).")
@click.option("--sessions-root", default=None,
              help="Where session artifact dirs are created (default: temp dir).")
def cmd_serve(host, port, scenario_dir, sessions_root):
    """Start the HTTP control service for the web UI."""
    import uvicorn

    from .service import create_app
    app = create_app(scenario_dir=scenario_dir, sessions_root=sessions_root)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
