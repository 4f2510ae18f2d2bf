"""Command line front end.

Exit codes: 0 success, 2 usage / validation error, 3 data or I/O error,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import os
import sys
import time
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import baselines, io, simulation
from .exceptions import ConfigurationError, DataError, DegenerateDistributionError
from .model import ModelConfig
from .sampler import ChainConfig, InitStrategy, run_chain
from .summary import select_K, summarize

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

# illustrative skewed weights for K = 10 (three empty clusters)
SKEWED_PI = (0.35, 0.25, 0.15, 0.1, 0.08, 0.05, 0.02, 0.0, 0.0, 0.0)

# uniform, moderate, and one cell concentrated at 0.75
DEFAULT_PRIOR_GRID = [(1, 1), (2, 2), (5, 5), (10, 10), (15, 5), (30000, 10000)]


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from None
    return a, b


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _k_range(text: str) -> list[int]:
    try:
        lo, hi = (int(v) for v in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo..hi', got {text!r}") from None
    if lo < 2 or hi < lo:
        raise argparse.ArgumentTypeError("K range must satisfy 2 <= lo <= hi")
    return list(range(lo, hi + 1))


def _prior_grid(text: str) -> list[tuple[float, float]]:
    return [_pair(cell) for cell in text.split(";") if cell]


def _chain_args(p, iters, burnin):
    p.add_argument("--iters", type=int, default=iters, help="total iterations incl. burn-in")
    p.add_argument("--burnin", type=int, default=burnin)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--alpha-prior", type=_pair, default=(1.0, 1.0), metavar="A,B")
    p.add_argument("--beta0", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None, help="defaults to $BCC_SEED, then 0")
    p.add_argument("--out", required=True)


def _data_args(p):
    p.add_argument("--data", required=True, help="comma-separated CSV paths, one per source")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--transpose", action="store_true", help="files have features as rows")
    p.add_argument("--init", choices=["kmeans", "random"], default="kmeans")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcc", description="Bayesian consensus clustering")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit the consensus model")
    _data_args(fit)
    fit.add_argument("--k", type=int, required=True)
    fit.add_argument("--equal-alpha", action="store_true")
    fit.add_argument("--emit-coincidence", action="store_true")
    _chain_args(fit, 10000, 2000)

    sel = sub.add_parser("select-k", help="choose K by mean adjusted adherence")
    _data_args(sel)
    sel.add_argument("--k-range", type=_k_range, required=True, metavar="LO..HI")
    sel.add_argument("--equal-alpha", action="store_true")
    sel.add_argument("--jobs", type=int, default=1)
    _chain_args(sel, 10000, 2000)

    base = sub.add_parser("baseline", help="separate / joint / dependent clustering")
    _data_args(base)
    base.add_argument("--method", choices=["separate", "joint", "dependent"], required=True)
    base.add_argument("--k", type=int, required=True)
    _chain_args(base, 1200, 200)

    sim = sub.add_parser("simulate", help="run a simulation study")
    sim.add_argument("--study", required=True,
                     choices=["alpha-recovery", "error-comparison", "prior-sensitivity", "inclusion-table"])
    sim.add_argument("--reps", type=int, default=100)
    sim.add_argument("--sources", type=int, default=2, help="number of sources M")
    sim.add_argument("--n", type=int, default=200, help="objects per dataset")
    sim.add_argument("--mu-sep", type=float, default=None,
                     help="component mean offset (1.5 for alpha studies, 1.0 for error comparison)")
    sim.add_argument("--prior-grid", type=_prior_grid, default=None, metavar="A,B;A,B;...")
    sim.add_argument("--pi", type=_floats, default=None, help="overall weights for inclusion-table")
    sim.add_argument("--alphas", type=_floats, default=[1.0, 0.95, 0.75, 0.10])
    sim.add_argument("--jobs", type=int, default=1)
    _chain_args(sim, 1200, 200)

    rerun = sub.add_parser("rerun", help="repeat the run recorded in a manifest")
    rerun.add_argument("--manifest", required=True)
    rerun.add_argument("--out", required=True)
    return parser


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("BCC_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigurationError(f"BCC_SEED must be an integer, got {env!r}") from None
    return 0


def _chain_config(args, K=2, equal_alpha=False) -> ChainConfig:
    return ChainConfig(iterations=args.iters, burn_in=args.burnin, thin=args.thin,
                       seed=_seed(args), model=ModelConfig(K, equal_alpha),
                       alpha_prior=args.alpha_prior, beta0=args.beta0,
                       init_strategy=InitStrategy(getattr(args, "init", "kmeans")),
                       keep_theta=False)


def _sources(args) -> list[io.SourceFile]:
    paths = [p for p in args.data.split(",") if p]
    return [io.SourceFile(p, delimiter=args.delimiter, standardize=args.standardize,
                          transpose=args.transpose) for p in paths]


def _manifest(args, argv, config, sources) -> io.RunManifest:
    return io.RunManifest(subcommand=args.command, argv=list(argv),
                          config=io.config_dict(config) if config is not None else {},
                          sources=[{**asdict(s), "path": str(Path(s.path).resolve())} for s in sources],
                          output_dir=str(Path(args.out).resolve()))


def _annotate(out: Path, started: float) -> None:
    # timestamps live only in the manifest's annotations block
    m = io.read_manifest(out / "manifest.json")
    m.annotations = {"created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(),
                     "runtime_seconds": round(time.perf_counter() - started, 3)}
    io.write_json(out / "manifest.json", asdict(m))


def cmd_fit(args, argv):
    sources = _sources(args)
    data = io.ingest(sources)
    config = _chain_config(args, args.k, args.equal_alpha)
    draws = run_chain(data, config)
    result = summarize(draws)
    io.write_outputs(draws, result, _manifest(args, argv, config, sources), args.out,
                     data.ids, data.names, emit_coincidence=args.emit_coincidence)
    point, (lo, hi) = result.mean_adjusted
    print(f"mean adjusted adherence {point:.4f} [{lo:.4f}, {hi:.4f}]")


def cmd_select_k(args, argv):
    sources = _sources(args)
    data = io.ingest(sources)
    config = _chain_config(args, 2, args.equal_alpha)
    k_star, table = select_K(data, args.k_range, config, n_jobs=args.jobs)
    out = io.ensure_dir(args.out)
    rows = [{**row, "selected": "*" if row["K"] == k_star else ""} for row in table]
    io.write_records(out / "k_selection.csv", rows)
    io.write_json(out / "summary.json", {"schema_version": io.SCHEMA_VERSION, "K_star": k_star,
                                         "table": table})
    io.write_json(out / "manifest.json", asdict(_manifest(args, argv, config, sources)))
    print(f"{'K':>3}  {'mean adj. adherence':>20}  {'95% interval':>24}")
    for row in rows:
        print(f"{row['K']:>3}  {row['mean_adjusted_adherence']:>20.4f}  "
              f"[{row['ci_low']:.4f}, {row['ci_high']:.4f}] {row['selected']}")


def cmd_baseline(args, argv):
    sources = _sources(args)
    data = io.ingest(sources)
    config = _chain_config(args, args.k)
    names = data.names
    if args.method == "separate":
        draws = baselines.stack_draws(baselines.separate_clusterings(data, config))
    elif args.method == "joint":
        draws = baselines.joint_sampler(data, config)
        names = ["joint"]
    else:
        draws = baselines.dependent_sampler(data, config)
    result = summarize(draws)
    io.write_outputs(draws, result, _manifest(args, argv, config, sources), args.out,
                     data.ids, names)


def cmd_simulate(args, argv):
    out = io.ensure_dir(args.out)
    config = _chain_config(args)
    config = replace(config, alpha_prior=(1.0, 1.0))
    summary = {"schema_version": io.SCHEMA_VERSION, "study": args.study}
    if args.study == "alpha-recovery":
        recs = simulation.alpha_recovery_study(args.reps, config, M=args.sources, N=args.n,
                                               mu_sep=args.mu_sep or 1.5, n_jobs=args.jobs)
        io.write_records(out / "alpha_recovery.csv", recs)
        summary.update(covered=sum(r["covered"] for r in recs), reps=len(recs),
                       mean_abs_error=float(np.mean([abs(r["alpha_hat"] - r["true_alpha"]) for r in recs])))
    elif args.study == "error-comparison":
        recs = simulation.error_comparison_study(args.sources, args.reps, config, N=args.n,
                                                 mu_sep=args.mu_sep or 1.0, n_jobs=args.jobs)
        io.write_records(out / f"error_comparison_M{args.sources}.csv", recs)
        summary["mean_error"] = {k: float(np.mean([r[k] for r in recs]))
                                 for k in ("err_separate", "err_joint", "err_dependent", "err_bcc")}
    elif args.study == "prior-sensitivity":
        grid = args.prior_grid or DEFAULT_PRIOR_GRID
        recs = simulation.prior_sensitivity_study(grid, args.reps, config, M=args.sources, N=args.n,
                                                  mu_sep=args.mu_sep or 1.5, n_jobs=args.jobs)
        io.write_records(out / "prior_sensitivity.csv", recs)
    else:
        pi = np.asarray(args.pi if args.pi else SKEWED_PI, dtype=float)
        table = simulation.inclusion_probability_table(pi, args.alphas)
        recs = [{"k": k + 1, "pi": pi[k], **{f"alpha_{a:g}": table[k, j] for j, a in enumerate(args.alphas)}}
                for k in range(pi.shape[0])]
        io.write_records(out / "inclusion_table.csv", recs)
    io.write_json(out / "summary.json", summary)
    io.write_json(out / "manifest.json", asdict(_manifest(args, argv, config, [])))


def cmd_rerun(args, argv):
    manifest = io.read_manifest(args.manifest)
    argv = list(manifest.argv)
    argv[argv.index("--out") + 1] = args.out
    if "--data" in argv:
        # absolute paths make the manifest usable from any working directory
        argv[argv.index("--data") + 1] = ",".join(s["path"] for s in manifest.sources)
    return main(argv)


COMMANDS = {"fit": cmd_fit, "select-k": cmd_select_k, "baseline": cmd_baseline,
            "simulate": cmd_simulate, "rerun": cmd_rerun}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        code = COMMANDS[args.command](args, argv)
        if args.command != "rerun":
            _annotate(Path(args.out), started)
        return code or EXIT_OK
    except DegenerateDistributionError as exc:
        print(f"bcc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"bcc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConfigurationError, ValueError) as exc:
        print(f"bcc: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bcc: I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
