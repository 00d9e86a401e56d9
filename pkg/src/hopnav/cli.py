"""Batch pipeline front end: ingest -> fit -> rank, plus synthetic data and
report aggregation. Stages communicate through files so every step can be
re-run and inspected on its own.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import json
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .clickstream import (ALL, ClassificationRules, ClickstreamError,
                          DEFAULT_RULES, NavigationType, TransitionSet,
                          classify_sessions, extract_transitions, parse_log,
                          sessionize)
from .graph import (Graph, GraphError, exact_diameter,
                    largest_connected_component, load_edge_list,
                    write_edge_list)
from .khop import profile_sources
from .models import (ALPHA_NEAR_ONE, ALPHA_PAGERANK, FittedModel, ModelError,
                     ModelId, fit_model, load_models,
                     nparams as model_nparams, save_models)
from .selection import (MIN_TRANSITIONS, SelectionError, evaluate_all,
                        rank_models, winner_matrix)
from .simulate import (SimulationError, SynthSpec, simulate_baseline,
                       simulate_hoprank, synth_graph)


class DataError(Exception):
    pass


def _outdir(path: str, force: bool) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    if any(out.iterdir()) and not force:
        raise DataError(f"output directory {out} is not empty (use --force)")
    return out


def _set_threads(threads: int | None) -> None:
    n = threads or int(os.environ.get("HOPNAV_THREADS", 0))
    if n > 0:
        import numba
        numba.set_num_threads(n)


def _write_manifest(out: Path, command: str, config: dict, extra: dict | None = None) -> None:
    manifest = {"tool": "hopnav", "version": __version__, "command": command,
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                "config": config}
    if extra:
        manifest.update(extra)
    with open(out / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)


def _load_data(data_dir: str) -> tuple[Graph, TransitionSet]:
    data = Path(data_dir)
    gpath, tpath = data / "lcc.edges", data / "transitions.tsv"
    for p in (gpath, tpath):
        if not p.exists():
            raise DataError(f"missing pipeline input {p}")
    g = load_edge_list(gpath)
    return g, TransitionSet.read(tpath, g)


def _parse_models(spec: str) -> list[ModelId]:
    if spec == "all":
        return list(ModelId)
    out = []
    for name in spec.split(","):
        try:
            out.append(ModelId(name.strip()))
        except ValueError:
            raise click.UsageError(f"unknown model {name.strip()!r} "
                                   f"(choose from {[m.value for m in ModelId]})")
    if not out:
        raise click.UsageError("empty model list")
    return out


def _parse_navtypes(spec: str, ts: TransitionSet) -> list:
    if spec == "auto":
        return ts.navtypes() + [ALL]
    out = []
    for name in spec.split(","):
        name = name.strip()
        out.append(ALL if name == "ALL" else NavigationType(name))
    return out


@click.group()
@click.option("--threads", type=int, default=None,
              help="Worker threads for BFS batches (default: HOPNAV_THREADS or all cores).")
def cli(threads):
    """Model human navigation on networks with hop-biased random walks."""
    _set_threads(threads)


@cli.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--log-format", type=click.Choice(["tsv", "jsonl"]), default="tsv")
@click.option("--delimiter", default="\t")
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None,
              help="Classification rules JSON (required when the log carries referrers).")
@click.option("--gap-minutes", type=float, default=60.0, show_default=True,
              help="Inactivity gap that splits a session.")
@click.option("--min-session", type=int, default=2, show_default=True)
@click.option("--min-transitions", type=int, default=1, show_default=True,
              help="Reject the dataset when fewer transitions survive.")
@click.option("--drop-self-loops", is_flag=True)
@click.option("--strict", is_flag=True, help="Fail on the first malformed log line.")
@click.option("--out", required=True, type=click.Path())
@click.option("--force", is_flag=True)
def ingest(graph_path, log_path, log_format, delimiter, rules_path, gap_minutes,
           min_session, min_transitions, drop_self_loops, strict, out, force):
    """Build the LCC and per-type transition counts from a graph and a log."""
    outdir = _outdir(out, force)
    full = load_edge_list(graph_path)
    lcc, mapping = largest_connected_component(full)
    records, pstats = parse_log(log_path, fmt=log_format, delimiter=delimiter,
                                strict=strict)
    if rules_path:
        rules = ClassificationRules.from_file(rules_path)
    else:
        if any(r.referrer for r in records):
            raise DataError("log has referrers; supply --rules to classify them")
        rules = DEFAULT_RULES
    sessions = classify_sessions(
        sessionize(records, break_threshold=gap_minutes * 60.0,
                   min_length=min_session), rules)
    ts, xstats = extract_transitions(sessions, lcc, drop_self_loops=drop_self_loops)
    total = ts.nobs(ALL)
    if total < min_transitions:
        raise DataError(f"only {total} transitions survive "
                        f"(minimum {min_transitions})")
    write_edge_list(lcc, outdir / "lcc.edges")
    with open(outdir / "idmap.tsv", "w", encoding="utf-8") as f:
        for old, new in enumerate(mapping):
            if new >= 0:
                f.write(f"{full.labels[old]}\t{new}\n")
    ts.write(outdir / "transitions.tsv")
    summary = {
        "nodes_full": full.node_count, "edges_full": full.edge_count,
        "nodes_lcc": lcc.node_count, "edges_lcc": lcc.edge_count,
        "records_parsed": pstats.parsed, "records_skipped": pstats.skipped,
        "sessions": len(sessions),
        "transitions_kept": xstats.kept,
        "transitions_dropped_off_lcc": xstats.dropped_off_lcc,
        "transitions_dropped_self_loops": xstats.dropped_self_loops,
        "per_type": {t.value: ts.nobs(t) for t in ts.navtypes()},
    }
    with open(outdir / "summary.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=1, sort_keys=True)
    _write_manifest(outdir, "ingest",
                    {"graph": graph_path, "log": log_path,
                     "gap_minutes": gap_minutes, "min_session": min_session,
                     "drop_self_loops": drop_self_loops},
                    {"graph_hash": lcc.content_hash()})
    click.echo(f"ingested {total} transitions on an LCC of {lcc.node_count} nodes")


@cli.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True),
              help="Directory with lcc.edges and transitions.tsv.")
@click.option("--models", "models_spec", default="all", show_default=True)
@click.option("--navtypes", default="auto", show_default=True)
@click.option("--min-transitions", type=int, default=MIN_TRANSITIONS, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--force", is_flag=True)
def fit(data_dir, models_spec, navtypes, min_transitions, out, force):
    """Fit the requested models per navigation type; exports parameters and a
    hop-preference heatmap table."""
    outdir = _outdir(out, force)
    g, ts = _load_data(data_dir)
    model_ids = _parse_models(models_spec)
    requested = _parse_navtypes(navtypes, ts)
    diameter = exact_diameter(g)
    src, _, _ = ts.arrays(ALL)
    profiles = profile_sources(g, src, diameter)
    heatmap_rows = []
    fitted_count = 0
    for navtype in requested:
        name = navtype if isinstance(navtype, str) else navtype.value
        if ts.nobs(navtype) < min_transitions:
            click.echo(f"skipping {name}: fewer than {min_transitions} transitions")
            continue
        fitted = [fit_model(mid, ts, navtype, g, profiles, diameter)
                  for mid in model_ids]
        save_models(fitted, outdir / f"models_{name}.json")
        fitted_count += len(fitted)
        for fm in fitted:
            if fm.beta is not None:
                heatmap_rows += [f"{name}\t{k}\t{b:.10g}"
                                 for k, b in enumerate(fm.beta)]
    with open(outdir / "beta_heatmap.tsv", "w", encoding="utf-8") as f:
        f.write("navtype\tkhop\tbeta\n")
        for row in heatmap_rows:
            f.write(row + "\n")
    _write_manifest(outdir, "fit",
                    {"data": data_dir, "models": models_spec,
                     "navtypes": navtypes, "min_transitions": min_transitions},
                    {"graph_hash": g.content_hash(), "diameter": diameter})
    click.echo(f"fitted {fitted_count} models (diameter {diameter})")


@cli.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--fits", "fits_dir", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--force", is_flag=True)
def rank(data_dir, fits_dir, out, force):
    """Score fitted models with BIC and write the evaluation table and the
    per-type winner matrix."""
    outdir = _outdir(out, force)
    g, ts = _load_data(data_dir)
    fits = sorted(Path(fits_dir).glob("models_*.json"))
    if not fits:
        raise DataError(f"no fitted-model files in {fits_dir}")
    diameter = exact_diameter(g)
    src, _, _ = ts.arrays(ALL)
    profiles = profile_sources(g, src, diameter)
    rankings = []
    for path in fits:
        name = path.stem[len("models_"):]
        navtype = ALL if name == "ALL" else NavigationType(name)
        fitted = load_models(path)
        rankings.append(rank_models(fitted, ts, navtype, profiles))
    with open(outdir / "evaluations.tsv", "w", encoding="utf-8") as f:
        f.write("navtype\tmodel\tLL\tnparams\tnobs\tBIC\n")
        for r in rankings:
            for e in r.evaluations:
                f.write(f"{r.navtype}\t{e.model_id.value}\t{e.ll:.6f}\t"
                        f"{e.nparams}\t{e.nobs}\t{e.bic:.6f}\n")
    navtype_order = [t.value for t in NavigationType] + [ALL]
    present = [t for t in navtype_order if any(r.navtype == t for r in rankings)]
    grid = winner_matrix({"data": rankings}, present)
    with open(outdir / "winners.tsv", "w", encoding="utf-8") as f:
        for row in grid:
            f.write("\t".join(row) + "\n")
    _write_manifest(outdir, "rank", {"data": data_dir, "fits": fits_dir},
                    {"graph_hash": g.content_hash(), "diameter": diameter})
    for r in rankings:
        click.echo(f"{r.navtype}: winner {r.winner.value}")


@cli.command()
@click.option("--kind", type=click.Choice(["balanced-binary-tree", "random-tree",
                                           "er-connected"]), required=True)
@click.option("--nodes", type=int, required=True)
@click.option("--edges", type=int, default=None, help="er-connected only.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--transitions", type=int, default=0, show_default=True,
              help="Number of synthetic transitions to simulate.")
@click.option("--beta", "beta_spec", default=None,
              help="Comma-separated hop-preference vector for the hop-biased walker.")
@click.option("--model", "model_spec", default=None,
              help="Baseline generator instead of --beta (pa, rw-0.85, ...).")
@click.option("--session-length", type=int, default=10, show_default=True)
@click.option("--navtype", default="DC", show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--force", is_flag=True)
def synth(kind, nodes, edges, seed, transitions, beta_spec, model_spec,
          session_length, navtype, out, force):
    """Generate a synthetic graph, optionally with simulated transitions; the
    outputs feed straight into fit/rank."""
    outdir = _outdir(out, force)
    if nodes < 2:
        raise SimulationError("need at least 2 nodes")
    spec = SynthSpec(kind, nodes, seed, edges)
    g = synth_graph(spec)
    write_edge_list(g, outdir / "lcc.edges")
    config = {"kind": kind, "nodes": nodes, "edges": edges, "seed": seed,
              "transitions": transitions, "beta": beta_spec,
              "model": model_spec, "session_length": session_length}
    if transitions > 0:
        nav = NavigationType(navtype)
        diameter = exact_diameter(g)
        if beta_spec:
            beta = np.array([float(x) for x in beta_spec.split(",")])
            ts, _ = simulate_hoprank(g, beta, transitions, seed, diameter,
                                     session_length=session_length, navtype=nav)
        elif model_spec:
            mid = _parse_models(model_spec)[0]
            if mid in (ModelId.HOPRANK, ModelId.MARKOV_CHAIN, ModelId.RW_EMPIRICAL):
                raise click.UsageError(f"{mid.value} needs fitted parameters; "
                                       "use --beta or simulate from a fixed model")
            profiles = profile_sources(g, [], diameter)
            fm = FittedModel(mid, model_nparams(mid, g, diameter), nav.value, 0,
                             g.content_hash(), diameter)
            if mid is not ModelId.PA and mid is not ModelId.GRAVITATIONAL:
                fm.alpha = {ModelId.RW_JUMPS: 0.0,
                            ModelId.RW_LINKS: ALPHA_NEAR_ONE,
                            ModelId.RW_PAGERANK: ALPHA_PAGERANK}[mid]
            ts = simulate_baseline(g, fm, transitions, seed,
                                   session_length=session_length, navtype=nav,
                                   profiles=profiles)
        else:
            raise click.UsageError("--transitions needs --beta or --model")
        ts.write(outdir / "transitions.tsv")
    _write_manifest(outdir, "synth", config, {"graph_hash": g.content_hash()})
    click.echo(f"wrote {g.node_count}-node graph"
               + (f" and {transitions} transitions" if transitions else ""))


@cli.command()
@click.option("--run", "runs", multiple=True, required=True,
              metavar="NAME=RANK_DIR",
              help="Named rank-output directory; repeatable.")
@click.option("--out", required=True, type=click.Path())
@click.option("--force", is_flag=True)
def report(runs, out, force):
    """Combine several rank outputs into one dataset-by-navtype winner grid."""
    outdir = _outdir(out, force)
    navtype_order = [t.value for t in NavigationType] + [ALL]
    table: dict[str, dict[str, str]] = {}
    for spec in runs:
        if "=" not in spec:
            raise click.UsageError(f"--run expects NAME=DIR, got {spec!r}")
        name, rank_dir = spec.split("=", 1)
        path = Path(rank_dir) / "winners.tsv"
        if not path.exists():
            raise DataError(f"missing {path}")
        with open(path, encoding="utf-8") as f:
            header = f.readline().rstrip("\n").split("\t")[1:]
            row = f.readline().rstrip("\n").split("\t")[1:]
        table[name] = dict(zip(header, row))
    with open(outdir / "winners_grid.tsv", "w", encoding="utf-8") as f:
        f.write("dataset\t" + "\t".join(navtype_order) + "\n")
        for name in sorted(table):
            cells = [table[name].get(t, "-") for t in navtype_order]
            f.write(name + "\t" + "\t".join(cells) + "\n")
    _write_manifest(outdir, "report", {"runs": list(runs)})
    click.echo(f"combined {len(table)} runs")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.Abort:
        return 1
    except (DataError, GraphError, ClickstreamError, ModelError,
            SelectionError, SimulationError, FileNotFoundError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except Exception as exc:  # pragma: no cover
        click.echo(f"internal error: {exc!r}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
