"""Command-line entry point for batch scholarly use.

Exit codes: 0 success, 1 domain error (parse/validate/compile/config),
2 usage error, 3 internal error.  Every randomized command takes --seed
(default 0) and prints the seed used; for a fixed seed the stdout of every
command is byte-identical across runs and thread counts.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .agents import AgentConfig, matchup
from .catalog import CATALOG_VERSION, v1_catalog, validate
from .classify import classify_line
from .engine import ENGINE_VERSION, CompileError, compile_game
from .grammar import ParseError, parse
from .metrics import (
    METRICS_VERSION,
    AnalysisJob,
    MissingFieldError,
    quality_score,
    report_to_json,
    run_analysis,
    trials_to_csv,
)
from .phylo import (
    DuplicateNameError,
    distance_matrix,
    matrix_from_csv,
    matrix_to_csv,
    neighbor_joining,
    to_newick,
)
from .reconstruct import (
    CombinatorialOverflowError,
    EmptyOptionSetError,
    PlausibilityPrior,
    PlayabilityThresholds,
    reconstruct_rank,
)

_DOMAIN_ERRORS = (
    ParseError,
    CompileError,
    DuplicateNameError,
    EmptyOptionSetError,
    CombinatorialOverflowError,
    MissingFieldError,
    ValueError,
    KeyError,
    FileNotFoundError,
    IsADirectoryError,
    json.JSONDecodeError,
)



def _guard(fn):
    """Map domain failures to exit 1 and unexpected ones to exit 3."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except _DOMAIN_ERRORS as err:
            _print_domain_error(err)
            sys.exit(1)
        except Exception as err:  # pragma: no cover - internal failures
            click.echo(f"internal error: {type(err).__name__}: {err}", err=True)
            sys.exit(3)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _print_domain_error(err: Exception) -> None:
    if isinstance(err, ParseError):
        click.echo("parse failed:", err=True)
        for issue in err.issues:
            click.echo(f"  {issue.line}:{issue.col} {issue.code}: {issue.message}", err=True)
    elif isinstance(err, CompileError):
        click.echo("compile failed:", err=True)
        for code, msg in err.issues:
            click.echo(f"  {code}: {msg}", err=True)
    else:
        click.echo(f"error: {err}", err=True)


def _load_tree(path: str):
    text = Path(path).read_text(encoding="utf-8")
    return text, parse(text)


def parse_agent_spec(spec: str) -> AgentConfig:
    """Mini-syntax kind[:budget[:c]], e.g. uct:2000:1.414 or random."""
    parts = spec.split(":")
    kind = parts[0].lower()
    budget = int(parts[1]) if len(parts) > 1 else (1000 if kind != "random" else 1)
    c = float(parts[2]) if len(parts) > 2 else 1.414
    return AgentConfig(kind, budget, c)


def _default_threads() -> int:
    return os.cpu_count() or 1


@click.group()
@click.version_option(
    __version__,
    message=f"ludekit {__version__} (engine {ENGINE_VERSION}, catalog {CATALOG_VERSION}, "
    f"metrics {METRICS_VERSION})",
)
def main() -> None:
    """Parse, play, analyze, reconstruct, and relate ludeme games."""


@main.command()
@click.argument("lud_file", type=click.Path())
@_guard
def check(lud_file: str) -> None:
    """Parse and validate a .lud file, printing a completeness report."""
    _text, tree = _load_tree(lud_file)
    report = validate(tree, v1_catalog())
    if report.issues:
        click.echo(f"{lud_file}: {len(report.issues)} issue(s), {report.hole_count} holes")
        for issue in report.issues:
            click.echo(f"  {issue.code} @ bytes {issue.span[0]}..{issue.span[1]}: {issue.message}")
        sys.exit(1)
    if report.hole_count:
        click.echo(f"{lud_file}: partial, {report.hole_count} holes")
    else:
        click.echo(f"{lud_file}: complete, 0 holes")


@main.command()
@click.argument("lud_file", type=click.Path())
@click.option("--p1", default="random", help="agent spec kind[:budget[:c]]")
@click.option("--p2", default="random", help="agent spec kind[:budget[:c]]")
@click.option("--games", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--cap", "move_cap", default=300, show_default=True, help="move cap per game")
@click.option("--threads", default=None, type=int, help="worker count (default: cores)")
@click.option("--format", "fmt", type=click.Choice(["table", "json", "csv"]), default="table")
@click.option("--out", type=click.Path(), default=None)
@_guard
def play(lud_file, p1, p2, games, seed, move_cap, threads, fmt, out) -> None:
    """Self-play a matchup and print the outcome table."""
    _text, tree = _load_tree(lud_file)
    report = validate(tree, v1_catalog())
    if not report.is_complete:
        raise ValueError("game is not complete/valid: " + "; ".join(report.messages()))
    model = compile_game(tree)
    config_a, config_b = parse_agent_spec(p1), parse_agent_spec(p2)
    trials = matchup(
        model,
        config_a,
        config_b,
        games,
        seed,
        swap_seats=True,
        move_cap=move_cap,
        threads=threads or _default_threads(),
    )
    a_pts = b_pts = draws = timeouts = 0
    a_losses = 0
    total_moves = 0
    for t in trials:
        total_moves += t.move_count
        if t.outcome.kind == "timeout":
            timeouts += 1
        elif t.outcome.kind == "draw":
            draws += 1
        else:
            a_won = (t.outcome.winner == 1) == (t.config_p1 == config_a)
            if a_won:
                a_pts += 1
            else:
                b_pts += 1
                a_losses += 1
    lines = [
        f"seed: {seed}",
        f"game: {model.name}",
        f"games: {games}  moveCap: {move_cap}  seats swap each game",
        f"A ({p1}) wins      {a_pts:6d}  {a_pts / games:.4f}",
        f"B ({p2}) wins      {b_pts:6d}  {b_pts / games:.4f}",
        f"draws              {draws:6d}  {draws / games:.4f}",
        f"timeouts           {timeouts:6d}  {timeouts / games:.4f}",
        f"mean moves         {total_moves / games:10.3f}",
    ]
    payload = {
        "seed": seed,
        "game": model.name,
        "games": games,
        "aWins": a_pts,
        "bWins": b_pts,
        "draws": draws,
        "timeouts": timeouts,
        "meanMoves": total_moves / games,
    }
    if fmt == "table":
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        text = trials_to_csv(trials)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"seed: {seed}")
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@main.command()
@click.argument("job_file", type=click.Path())
@click.option("--threads", default=None, type=int)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.option("--out", type=click.Path(), default=None)
@_guard
def analyze(job_file, threads, fmt, out) -> None:
    """Run an analysis job config (JSON) and print the metrics report."""
    data = json.loads(Path(job_file).read_text(encoding="utf-8"))
    lud_text = None
    if "lud" in data and "ludText" not in data:
        lud_path = Path(job_file).parent / data["lud"]
        lud_text = lud_path.read_text(encoding="utf-8")
    job = AnalysisJob.from_dict(data, lud_text=lud_text)
    report = run_analysis(job, threads=threads or _default_threads())
    click.echo(f"seed: {job.master_seed}")
    try:
        quality = quality_score(report, job.weights)
    except MissingFieldError:
        quality = None
    if fmt == "json":
        payload = report.to_dict()
        payload["qualityScore"] = quality
        text = json.dumps(payload, indent=2, sort_keys=True)
    else:
        text = report.to_table()
        if quality is not None:
            text += f"\nqualityScore       {quality:.4f}"
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


@main.command("reconstruct")
@click.argument("config_file", type=click.Path())
@click.option("--out-dir", type=click.Path(), default=None, help="where to write candidate .lud files")
@click.option("--threads", default=None, type=int)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@_guard
def reconstruct_cmd(config_file, out_dir, threads, fmt) -> None:
    """Complete a partial game per a reconstruction config and rank candidates."""
    config_path = Path(config_file)
    data = json.loads(config_path.read_text(encoding="utf-8"))
    partial_path = config_path.parent / data["partial"]
    partial = parse(partial_path.read_text(encoding="utf-8"))
    prior = PlausibilityPrior(
        weights=data.get("priorWeights", {}), notes=data.get("priorNotes", {})
    )
    thresholds = PlayabilityThresholds(
        **{
            {"probeTrials": "probe_trials", "moveCap": "move_cap",
             "minCompletion": "min_completion", "minBranching": "min_branching",
             "minDecidedForWinCheck": "min_decided_for_win_check"}[k]: v
            for k, v in data.get("thresholds", {}).items()
        }
    )
    seed = int(data.get("masterSeed", 0))
    ranked = reconstruct_rank(
        partial,
        prior=prior,
        job_template=data.get("jobTemplate"),
        alpha=float(data.get("alpha", 0.5)),
        max_candidates=int(data.get("maxCandidates", 256)),
        master_seed=seed,
        thresholds=thresholds,
        threads=threads or _default_threads(),
    )
    click.echo(f"seed: {seed}")
    for warning in ranked.warnings:
        click.echo(f"warning: {warning}", err=True)
    if fmt == "json":
        click.echo(json.dumps(ranked.to_dict(), indent=2, sort_keys=True))
    else:
        click.echo(ranked.to_table())
    target = Path(out_dir or data.get("outDir") or (config_path.parent / "candidates"))
    target.mkdir(parents=True, exist_ok=True)
    for i, cand in enumerate(ranked.candidates, 1):
        (target / f"candidate_{i:03d}.lud").write_text(cand.text + "\n", encoding="utf-8")
    (target / "ranked.json").write_text(
        json.dumps(ranked.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    click.echo(f"wrote {len(ranked.candidates)} candidates to {target}")


def _iter_lud_dir(directory: str):
    paths = sorted(Path(directory).glob("*.lud"))
    if not paths:
        raise ValueError(f"no .lud files in {directory}")
    for path in paths:
        text = path.read_text(encoding="utf-8")
        tree = parse(text)
        name = next((a for a in tree.root.args if isinstance(a, str)), path.stem)
        yield name, tree


@main.command()
@click.argument("directory", type=click.Path())
@click.option("--out", type=click.Path(), default=None, help="matrix CSV path")
@click.option("--raw-ints", is_flag=True, help="keep integers distinct instead of abstracting")
@_guard
def dist(directory, out, raw_ints) -> None:
    """Genotype distance matrix over a directory of .lud files."""
    corpus = list(_iter_lud_dir(directory))
    matrix = distance_matrix(corpus, raw_integers=raw_ints)
    csv_text = matrix_to_csv(matrix)
    if out:
        Path(out).write_text(csv_text, encoding="utf-8")
        click.echo(f"wrote {out} ({matrix.size} games)")
    else:
        click.echo(csv_text, nl=False)


@main.command()
@click.argument("matrix_csv", type=click.Path())
@click.option("--out", type=click.Path(), default=None, help="Newick output path")
@_guard
def phylo(matrix_csv, out) -> None:
    """Neighbor-joining tree from a distance matrix CSV."""
    matrix = matrix_from_csv(Path(matrix_csv).read_text(encoding="utf-8"))
    tree = neighbor_joining(matrix)
    for warning in tree.warnings:
        click.echo(f"warning: {warning}", err=True)
    newick = to_newick(tree)
    if out:
        Path(out).write_text(newick + "\n", encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(newick)


@main.command()
@click.argument("directory", type=click.Path())
@_guard
def classify(directory) -> None:
    """Classify every game in a directory: name<TAB>class<TAB>features."""
    for name, tree in _iter_lud_dir(directory):
        report = validate(tree, v1_catalog())
        if not report.is_complete:
            raise ValueError(f"{name}: not complete/valid")
        model = compile_game(tree)
        click.echo(classify_line(name, model, tree))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
@click.option("--ui-dir", type=click.Path(), default=None, help="serve a static UI bundle at /")
@_guard
def serve(host, port, ui_dir) -> None:
    """Run the HTTP/WebSocket session service."""
    import uvicorn

    from .service import create_app

    app = create_app(ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
