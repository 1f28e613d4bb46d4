#!/usr/bin/env python3
"""
Command-line entry point of the crude oil correlation toolkit

Every stage of the analysis is a subcommand reading and writing files, and
`pipeline` runs them all in memory, writing the bundle only once every stage
has succeeded.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 consensus did
not converge (only with --strict).
"""

import argparse
import logging
import os
import sys
from contextlib import contextmanager

import numpy as np
import pandas as pd
from tabulate import tabulate

import correlation
import database
import ingest
import portfolio
import seriation
import spectra
import synth
from models import AnnealingConfig, InputError, PipelineError, RunConfig
from utils import (attach_log_file, configure_logging, ensure_dir, matrix_frame, print_error,
                   print_header, print_info, print_success, print_warning, read_json,
                   write_csv, write_json)


logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_NOT_CONVERGED = 4
STOCHASTIC_COMMANDS = ("cluster", "synth", "pipeline")
DEFAULT_SCHEDULE = AnnealingConfig()


# ----------------------------- Utilities --------------------------------

@contextmanager
def stage(name):
    """Tag PipelineErrors raised inside the block with the stage name."""
    try:
        yield
    except PipelineError as e:
        if e.stage is None:
            e.stage = name
        raise


def out_path(config, name):
    return os.path.join(config.output_dir, name)


def write_error_log(output_dir, error):
    """error.log is the only file a failed command leaves behind."""
    ensure_dir(output_dir)
    handler = attach_log_file(os.path.join(output_dir, "error.log"))
    try:
        logger.error("stage=%s exit_code=%d %s", error.stage, error.exit_code, error)
    finally:
        logging.getLogger().removeHandler(handler)
        handler.close()


def config_from_args(args):
    """Build and validate the RunConfig of a parsed command line."""
    annealing = AnnealingConfig(
        initial_acceptance=getattr(args, "initial_acceptance", DEFAULT_SCHEDULE.initial_acceptance),
        cooling=getattr(args, "cooling", DEFAULT_SCHEDULE.cooling),
        moves_per_series=getattr(args, "moves_per_series", DEFAULT_SCHEDULE.moves_per_series),
        max_idle_temperatures=getattr(args, "max_idle", DEFAULT_SCHEDULE.max_idle_temperatures),
        max_temperatures=getattr(args, "max_temperatures", DEFAULT_SCHEDULE.max_temperatures),
        min_temperature_ratio=getattr(args, "min_temperature_ratio", DEFAULT_SCHEDULE.min_temperature_ratio),
    )
    config = RunConfig(
        input_path=getattr(args, "input", None),
        layout=getattr(args, "layout", "wide"),
        delta_t=getattr(args, "delta_t", ingest.DEFAULT_DELTA_T),
        clip_threshold=getattr(args, "clip_threshold", ingest.DEFAULT_CLIP_THRESHOLD),
        n_runs=getattr(args, "n_runs", seriation.DEFAULT_N_RUNS),
        annealing=annealing,
        gamma=getattr(args, "gamma", seriation.DEFAULT_GAMMA),
        dominance=getattr(args, "dominance", spectra.DEFAULT_DOMINANCE),
        seed=getattr(args, "seed", None),
        output_dir=getattr(args, "output_dir", "results"),
        bins=getattr(args, "bins", correlation.DEFAULT_BINS),
        prominence=getattr(args, "prominence", correlation.DEFAULT_PROMINENCE),
        k_smallest=getattr(args, "k_smallest", spectra.DEFAULT_K_SMALLEST),
        index_base=getattr(args, "base", None),
        jobs=getattr(args, "jobs", 1),
        align=getattr(args, "align", "intersection"),
        strict=getattr(args, "strict", False),
        bulk_guard=not getattr(args, "no_bulk_guard", False),
    )
    is_valid, error = config.validate(stochastic=args.command in STOCHASTIC_COMMANDS)
    if not is_valid:
        raise InputError(error, stage="config")
    return config


def load_truth(path, labels):
    """Ground-truth clusters from a scenario sidecar, or None if absent or incomplete."""
    if not path or not os.path.exists(path):
        return None
    truth = read_json(path).get("ground_truth")
    if not truth:
        return None
    if any(label not in truth for label in labels):
        logger.warning("Ground truth in %s does not cover every series", path)
        return None
    return np.array([truth[label] for label in labels])


def manifest(command, config, headline, files):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config.to_dict(),
        "headline": headline,
        "files": sorted(files),
    }


# ------------------------------ Stages ----------------------------------

def run_ingest(config):
    with stage("ingest"):
        prices = ingest.load_panel(config.input_path, config.layout, config.align)
        returns = ingest.compute_returns(prices, config.delta_t, config.clip_threshold)
    return prices, returns


def run_correlate(returns, config):
    with stage("correlation"):
        g = ingest.standardize(returns)
        c = correlation.correlation_matrix(g, returns.labels)
        hist = correlation.coefficient_histogram(c, config.bins, config.prominence)
    return c, hist


def run_spectrum(c, config):
    with stage("spectra"):
        bounds = spectra.mp_bounds(c.t_effective, c.n)
        d = spectra.eigendecompose(c, bounds)
        pairs = spectra.localize_pairs(d, c, min(config.k_smallest, c.n), config.dominance)
    return d, pairs


def run_cluster(c, config):
    with stage("seriation"):
        return seriation.consensus_cluster(c, config.n_runs, config.annealing, config.seed,
                                           config.gamma, config.jobs, bulk_guard=config.bulk_guard)


def run_portfolio(d, returns, prices, config):
    with stage("portfolio"):
        table = portfolio.eigenportfolio_table(d, returns)
        leading = portfolio.eigenportfolio(d, returns, 1)
        average, _ = portfolio.aligned_average_price(prices, returns.delta_t)
        base = config.index_base or float(average[0])
        index = portfolio.build_index(leading, base)
        benchmark = portfolio.build_index(portfolio.uniform_portfolio(returns), base)
        frame, summary = portfolio.buy_and_hold_report(index, prices, benchmark, returns.delta_t)
    return table, leading, frame, summary


# ------------------------------ Writers ---------------------------------

def write_ingest_outputs(config, prices, returns):
    echo = {"config": config.to_dict()}
    ingest.write_returns(returns, out_path(config, "returns.csv"), echo)
    write_csv(ingest.summary_statistics(returns), out_path(config, "summary_statistics.csv"))
    write_csv(ingest.market_averages(prices, returns), out_path(config, "market.csv"))
    fills = pd.DataFrame(prices.fill_log, columns=["label", "date", "method"])
    fills["date"] = [d.isoformat() for d in fills["date"]]
    write_csv(fills, out_path(config, "fill_log.csv"))
    return ["returns.csv", "returns.json", "summary_statistics.csv", "market.csv", "fill_log.csv"]


def write_correlate_outputs(config, c, hist):
    correlation.write_correlation(c, out_path(config, "correlation.csv"), {"config": config.to_dict()})
    correlation.write_histogram(hist, out_path(config, "histogram.csv"))
    return ["correlation.csv", "correlation.json", "histogram.csv"]


def write_spectrum_outputs(config, d, pairs):
    report = spectra.spectrum_report(d, pairs)
    report["config"] = config.to_dict()
    write_json(report, out_path(config, "spectrum.json"))
    histogram, curve = spectra.spectrum_curves(d, config.bins)
    write_csv(histogram, out_path(config, "eigenvalue_histogram.csv"))
    write_csv(curve, out_path(config, "mp_density.csv"))
    return ["spectrum.json", "eigenvalue_histogram.csv", "mp_density.csv"]


def write_cluster_outputs(config, c, p, affinity, ari=None):
    extra = {"config": config.to_dict()}
    if ari is not None:
        extra["adjusted_rand_index"] = ari
    seriation.write_partition(p, c.labels, out_path(config, "partition.json"),
                              out_path(config, "partition.csv"), extra)
    write_csv(matrix_frame(affinity.a, c.labels), out_path(config, "affinity.csv"))
    correlation.write_correlation(c.permuted(p.ordering.perm), out_path(config, "ordered_correlation.csv"),
                                  {"config": config.to_dict()})
    ordered = [c.labels[i] for i in p.ordering.perm]
    view = seriation.back_diagonal_view(c, p)
    write_csv(matrix_frame(view, ordered[::-1], row_labels=ordered), out_path(config, "back_diagonal.csv"))
    summary = seriation.cluster_correlation_summary(c, p)
    write_csv(summary.reset_index().rename(columns={"index": "cluster"}), out_path(config, "cluster_summary.csv"))
    return ["partition.json", "partition.csv", "affinity.csv", "ordered_correlation.csv", "ordered_correlation.json",
            "back_diagonal.csv", "cluster_summary.csv"]


def write_components(config, d, p):
    view = seriation.reorder_eigenvectors(d, p)
    frame = pd.DataFrame({
        "position": np.arange(len(view["order"])),
        "label": [d.labels[i] for i in view["order"]],
        "cluster": view["clusters"],
    })
    for k, values in view["components"].items():
        frame[f"u_{k}"] = values
    write_csv(frame, out_path(config, "eigenvector_components.csv"))
    return ["eigenvector_components.csv"]


def write_portfolio_outputs(config, returns, table, leading, frame, summary):
    write_csv(table, out_path(config, "eigenportfolios.csv"))
    write_csv(portfolio.portfolio_frame([leading], returns.dates), out_path(config, "portfolio_returns.csv"))
    write_csv(frame, out_path(config, "index.csv"))
    report = dict(summary)
    report["config"] = config.to_dict()
    report["r_squared"] = {str(int(row.k)): row.r_squared for row in table.itertuples()}
    write_json(report, out_path(config, "index.json"))
    return ["eigenportfolios.csv", "portfolio_returns.csv", "index.csv", "index.json"]


def finish(args, config, headline, files):
    path = write_json(manifest(args.command, config, headline, files + ["manifest.json"]),
                      out_path(config, "manifest.json"))
    if not args.no_registry:
        database.record_run(args.command, config.to_dict(), config.output_dir, headline)
    print_success(f"{args.command} finished, manifest at {path}")


def convergence_status(p, config):
    if p.converged:
        return EXIT_OK
    print_warning("Consensus clustering did not converge")
    return EXIT_NOT_CONVERGED if config.strict else EXIT_OK


# ----------------------------- Handlers ---------------------------------

def cmd_ingest(args, config):
    prices, returns = run_ingest(config)
    files = write_ingest_outputs(config, prices, returns)
    headline = {"t": returns.shape[0], "n": returns.shape[1], "filled": len(prices.fill_log),
                "clipped": len(returns.clipped)}
    finish(args, config, headline, files)
    return EXIT_OK


def cmd_correlate(args, config):
    with stage("ingest"):
        returns = ingest.read_returns(args.returns)
    c, hist = run_correlate(returns, config)
    files = write_correlate_outputs(config, c, hist)
    headline = {"mean_correlation": correlation.mean_offdiagonal(c), "n_peaks": hist.n_peaks,
                "peak_centers": hist.peak_centers}
    finish(args, config, headline, files)
    return EXIT_OK


def cmd_spectrum(args, config):
    with stage("correlation"):
        c = correlation.read_correlation(args.correlation)
    d, pairs = run_spectrum(c, config)
    files = write_spectrum_outputs(config, d, pairs)
    headline = spectra.bulk_deviation_report(d)
    headline["lambda_1"] = float(d.eigenvalues[0])
    finish(args, config, headline, files)
    print(tabulate([[k + 1, f"{v:.4f}", d.classes[k]] for k, v in enumerate(d.eigenvalues[:10])],
                   headers=["k", "lambda", "class"], tablefmt="grid"))
    return EXIT_OK


def cmd_cluster(args, config):
    with stage("correlation"):
        c = correlation.read_correlation(args.correlation)
    p, affinity = run_cluster(c, config)
    truth = load_truth(args.truth, c.labels)
    ari = seriation.partition_agreement(p, truth) if truth is not None else None
    files = write_cluster_outputs(config, c, p, affinity, ari)
    headline = {"k": p.k, "converged": p.converged, "score": p.score}
    if ari is not None:
        headline["adjusted_rand_index"] = ari
    finish(args, config, headline, files)
    seriation.display_partition(p, c.labels)
    return convergence_status(p, config)


def cmd_portfolio(args, config):
    with stage("ingest"):
        returns = ingest.read_returns(args.returns)
        c = correlation.read_correlation(args.correlation)
    d, _ = run_spectrum(c, config)
    ks = [int(k) for k in args.ks.split(",")] if args.ks else None
    with stage("portfolio"):
        table = portfolio.eigenportfolio_table(d, returns, ks)
        defined = [int(row.k) for row in table.itertuples() if not row.ill_defined]
        series = [portfolio.eigenportfolio(d, returns, k) for k in defined]
    write_csv(table, out_path(config, "eigenportfolios.csv"))
    write_csv(portfolio.portfolio_frame(series, returns.dates), out_path(config, "portfolio_returns.csv"))
    report = {"config": config.to_dict(), "portfolios": [p.to_dict() for p in series],
              "ill_defined": [int(row.k) for row in table.itertuples() if row.ill_defined]}
    write_json(report, out_path(config, "portfolio.json"))
    headline = {"r_squared": {str(p.k): p.r_squared for p in series}}
    finish(args, config, headline, ["eigenportfolios.csv", "portfolio_returns.csv", "portfolio.json"])
    print(tabulate(table, headers="keys", tablefmt="grid", showindex=False))
    return EXIT_OK


def cmd_index(args, config):
    prices, returns = run_ingest(config)
    with stage("correlation"):
        c = correlation.read_correlation(args.correlation) if args.correlation else run_correlate(returns, config)[0]
    d, _ = run_spectrum(c, config)
    table, leading, frame, summary = run_portfolio(d, returns, prices, config)
    files = write_portfolio_outputs(config, returns, table, leading, frame, summary)
    finish(args, config, summary, files)
    return EXIT_OK


def cmd_synth(args, config):
    with stage("synth"):
        returns, truth, meta = synth.scenario(args.scenario, args.seed, args.t, args.n)
        panel = synth.returns_to_prices(returns)
    csv_path, json_path = synth.write_scenario(panel, args.output, truth, meta)
    if not args.no_registry:
        database.record_run("synth", {"seed": args.seed, "scenario": meta}, os.path.dirname(csv_path) or ".")
    print_success(f"Wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_pipeline(args, config):
    prices, returns = run_ingest(config)
    c, hist = run_correlate(returns, config)
    d, pairs = run_spectrum(c, config)
    p, affinity = run_cluster(c, config)
    table, leading, frame, summary = run_portfolio(d, returns, prices, config)
    truth = load_truth(ingest.sidecar_path(config.input_path), c.labels)
    ari = seriation.partition_agreement(p, truth) if truth is not None else None

    files = write_ingest_outputs(config, prices, returns)
    files += write_correlate_outputs(config, c, hist)
    files += write_spectrum_outputs(config, d, pairs)
    files += write_cluster_outputs(config, c, p, affinity, ari)
    files += write_components(config, d, p)
    files += write_portfolio_outputs(config, returns, table, leading, frame, summary)

    headline = {
        "t": returns.shape[0],
        "n": returns.shape[1],
        "mean_correlation": correlation.mean_offdiagonal(c),
        "n_peaks": hist.n_peaks,
        "lambda_1": float(d.eigenvalues[0]),
        "k": p.k,
        "converged": p.converged,
        "r_squared": float(table.loc[table.k == 1, "r_squared"].iloc[0]),
        "terminal_ratio": summary["terminal_ratio"],
        "dominance_fraction": summary["dominance_fraction"],
        "ln_correlation": summary["ln_correlation"],
    }
    headline.update(spectra.bulk_deviation_report(d))
    if ari is not None:
        headline["adjusted_rand_index"] = ari
    finish(args, config, headline, files)
    print(tabulate(sorted(headline.items()), headers=["quantity", "value"], tablefmt="grid"))
    return convergence_status(p, config)


def cmd_history(args, config):
    if args.run_id is not None:
        run = database.get_run(args.run_id)
        if run is None:
            raise InputError(f"No run with id {args.run_id}", stage="history")
        print_header(f"Run {run['run_id']}")
        print(tabulate(sorted(run.items()), headers=["field", "value"], tablefmt="grid"))
        return EXIT_OK
    runs = database.recent_runs(args.limit)
    if not runs:
        print_info("No runs recorded yet.")
        return EXIT_OK
    print_header("Recent runs")
    rows = [[r["run_id"], r["command"], r["seed"], r["output_dir"], r["run_date"]] for r in runs]
    print(tabulate(rows, headers=["Run", "Command", "Seed", "Output", "Date"], tablefmt="grid"))
    return EXIT_OK


HANDLERS = {
    "ingest": cmd_ingest,
    "correlate": cmd_correlate,
    "spectrum": cmd_spectrum,
    "cluster": cmd_cluster,
    "portfolio": cmd_portfolio,
    "index": cmd_index,
    "synth": cmd_synth,
    "pipeline": cmd_pipeline,
    "history": cmd_history,
}


# ------------------------------ Parser ----------------------------------
# Each help string ends with the outputs the flag shapes, in brackets.

def _add_input_args(parser):
    parser.add_argument("--input", required=True,
                        help="Price file, one column per series [fill_log.csv, returns.csv]")
    parser.add_argument("--layout", choices=("wide", "long"), default="wide",
                        help="wide: date + one column per series; long: date,label,price rows [fill_log.csv]")
    parser.add_argument("--align", choices=("intersection", "union"), default="intersection",
                        help="Keep the common date range or every date; missing days are forward filled "
                             "[fill_log.csv, market.csv]")
    parser.add_argument("--delta-t", type=int, default=ingest.DEFAULT_DELTA_T,
                        help="Return horizon in rows, 1 = daily and 7 = weekly log-returns "
                             "[returns.csv, correlation.csv]")
    parser.add_argument("--clip-threshold", type=float, default=ingest.DEFAULT_CLIP_THRESHOLD,
                        help="Log-returns above this magnitude are set to 0 [returns.json clipped, "
                             "summary_statistics.csv]")


def _add_output_arg(parser):
    parser.add_argument("--output-dir", default="results", help="Directory for every output file [manifest.json]")


def _add_histogram_args(parser):
    parser.add_argument("--bins", type=int, default=correlation.DEFAULT_BINS,
                        help="Bins of the coefficient and eigenvalue histograms "
                             "[histogram.csv, eigenvalue_histogram.csv]")
    parser.add_argument("--prominence", type=float, default=correlation.DEFAULT_PROMINENCE,
                        help="Relative prominence a histogram maximum needs to count as a peak [headline n_peaks]")


def _add_spectrum_args(parser):
    parser.add_argument("--k-smallest", type=int, default=spectra.DEFAULT_K_SMALLEST,
                        help="Smallest eigenvectors inspected for highly correlated pairs [spectrum.json pairs]")
    parser.add_argument("--dominance", type=float, default=spectra.DEFAULT_DOMINANCE,
                        help="Component magnitude that marks a series as dominant in an eigenvector "
                             "[spectrum.json pairs]")


def _add_cluster_args(parser):
    parser.add_argument("--seed", type=int, default=None,
                        help="Master seed of the annealing restarts, required [partition.json, affinity.csv]")
    parser.add_argument("--n-runs", type=int, default=seriation.DEFAULT_N_RUNS,
                        help="Annealing restarts per consensus level [affinity.csv]")
    parser.add_argument("--gamma", type=float, default=seriation.DEFAULT_GAMMA,
                        help="Segmentation resolution; larger values give smaller clusters [partition.json]")
    parser.add_argument("--no-bulk-guard", action="store_true",
                        help="Split even when at most one eigenvalue clears the random-matrix bulk [partition.json]")
    parser.add_argument("--cooling", type=float, default=DEFAULT_SCHEDULE.cooling,
                        help="Geometric cooling factor of the annealing [ordered_correlation.csv]")
    parser.add_argument("--initial-acceptance", type=float, default=DEFAULT_SCHEDULE.initial_acceptance,
                        help="Share of uphill moves accepted at the initial temperature [ordered_correlation.csv]")
    parser.add_argument("--moves-per-series", type=int, default=DEFAULT_SCHEDULE.moves_per_series,
                        help="Proposed moves per series at each temperature [ordered_correlation.csv]")
    parser.add_argument("--max-idle", type=int, default=DEFAULT_SCHEDULE.max_idle_temperatures,
                        help="Stop after this many temperatures without an accepted move [ordered_correlation.csv]")
    parser.add_argument("--max-temperatures", type=int, default=DEFAULT_SCHEDULE.max_temperatures,
                        help="Hard cap on temperature steps [ordered_correlation.csv]")
    parser.add_argument("--min-temperature-ratio", type=float, default=DEFAULT_SCHEDULE.min_temperature_ratio,
                        help="Stop once the temperature falls below this share of the initial one "
                             "[ordered_correlation.csv]")
    parser.add_argument("--jobs", type=int, default=1,
                        help="Parallel restarts, -1 = all cores; results do not change [none]")
    parser.add_argument("--strict", action="store_true",
                        help="Exit with code 4 when consensus does not converge [exit code]")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oilcorr",
        description="Correlation, random-matrix spectrum, seriation clustering and market index of price panels",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging")
    parser.add_argument("--no-registry", action="store_true", help="Do not record the run in the run registry")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="Clean prices and compute clipped log-returns")
    _add_input_args(p)
    _add_output_arg(p)

    p = sub.add_parser("correlate", help="Cross-correlation matrix and coefficient histogram")
    p.add_argument("--returns", required=True, help="returns.csv written by ingest [correlation.csv]")
    _add_histogram_args(p)
    _add_output_arg(p)

    p = sub.add_parser("spectrum", help="Eigenvalues against the random-matrix bulk and localized pairs")
    p.add_argument("--correlation", required=True, help="correlation.csv written by correlate [spectrum.json]")
    p.add_argument("--bins", type=int, default=correlation.DEFAULT_BINS,
                   help="Bins of the eigenvalue histogram [eigenvalue_histogram.csv]")
    _add_spectrum_args(p)
    _add_output_arg(p)

    p = sub.add_parser("cluster", help="Seriation by annealing, block segmentation and consensus")
    p.add_argument("--correlation", required=True, help="correlation.csv written by correlate [partition.json]")
    p.add_argument("--truth", default=None,
                   help="Scenario sidecar with ground-truth clusters [partition.json adjusted_rand_index]")
    _add_cluster_args(p)
    _add_output_arg(p)

    p = sub.add_parser("portfolio", help="Eigenportfolios and their R^2 against the mean return")
    p.add_argument("--returns", required=True, help="returns.csv written by ingest [portfolio_returns.csv]")
    p.add_argument("--correlation", required=True, help="correlation.csv written by correlate [eigenportfolios.csv]")
    p.add_argument("--ks", default=None, help="Comma-separated eigenvalue indices, default 1..5 [eigenportfolios.csv]")
    _add_output_arg(p)

    p = sub.add_parser("index", help="Market index from the leading eigenportfolio and buy-and-hold comparison")
    _add_input_args(p)
    p.add_argument("--correlation", default=None,
                   help="correlation.csv, recomputed from the input when absent [index.csv]")
    p.add_argument("--base", type=float, default=None,
                   help=f"Index starting level, default the first average price; {portfolio.DEFAULT_INDEX_BASE} "
                        f"for the crude panel [index.csv, index.json]")
    _add_output_arg(p)

    p = sub.add_parser("synth", help="Write a synthetic price panel with known structure")
    p.add_argument("--scenario", choices=synth.SCENARIOS + tuple(synth.SCENARIO_ALIASES), default="crude71",
                   help="noise, six planted clusters (crude71, alias paper71), duplicate pairs, one-factor market "
                        "or a market bubble [output CSV and .json ground truth]")
    p.add_argument("--seed", type=int, default=None, help="Generator seed, required [output CSV]")
    p.add_argument("--t", type=int, default=None, help="Number of return samples [output CSV]")
    p.add_argument("--n", type=int, default=None,
                   help="Number of series for the noise, pairs and factor scenarios [output CSV]")
    p.add_argument("--output", required=True, help="CSV path; the ground truth goes to a .json sidecar")

    p = sub.add_parser("pipeline", help="Every stage end to end with a single manifest")
    _add_input_args(p)
    _add_histogram_args(p)
    _add_spectrum_args(p)
    _add_cluster_args(p)
    p.add_argument("--base", type=float, default=None,
                   help="Index starting level, default the first average price [index.csv, index.json]")
    _add_output_arg(p)

    p = sub.add_parser("history", help="Recently recorded runs")
    p.add_argument("--limit", type=int, default=20, help="Number of runs shown")
    p.add_argument("--run-id", type=int, default=None, help="Show the full record of one run")
    return parser


def parse_args(argv=None):
    return build_parser().parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    configure_logging(args.verbose)
    output_dir = getattr(args, "output_dir", None)
    try:
        config = config_from_args(args)
        return HANDLERS[args.command](args, config)
    except PipelineError as e:
        print_error(f"[{e.stage or args.command}] {e}")
        if output_dir:
            write_error_log(output_dir, e)
        return e.exit_code
    except KeyboardInterrupt:
        print_info("Interrupted.")
        return EXIT_UNEXPECTED
    except Exception as e:
        logger.exception("Unexpected failure")
        print_error(f"An unexpected error occurred: {e}")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
