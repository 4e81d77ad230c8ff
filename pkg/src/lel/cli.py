"""Experiment harness: subcommands wrapping the solver and analysis ops.

Every CSV starts with a `#`-prefixed format line, then a fixed header row.
Rows carry the master seed and the derived per-point/per-trial seed so any
row can be replayed in isolation. Reruns with identical config and seed
produce byte-identical output.
"""

import argparse
import dataclasses
import sys
from concurrent.futures import ThreadPoolExecutor

from .analysis import distortion_experiment, expected_soft_cover_tv, proof_check
from .codec import AllZeroLikelihoodError, generate_codebook, save_codebook
from .config import ConfigError, load_config, resolve_test_pair
from .finite_prob import EnumerationCapError
from .rd_solver import blahut_arimoto, rd_point_at_distortion
from .seeds import derive_seed

CSV_VERSION = 1

DEFAULT_SOFT_COVER_TRIALS = 20
DEFAULT_DISTORTION_TRIALS = 200

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(stream, tag, columns, rows):
    stream.write(f"# lel-{tag} csv v{CSV_VERSION}\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(_fmt(v) for v in row) + "\n")


def _map_points(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _require(config, attr, command):
    value = getattr(config, attr)
    if value is None:
        raise ConfigError(f"`{command}` needs a [{attr}] section in the config")
    return value


def _run_rd_curve(config, args, out):
    d = _require(config, "distortion", "rd-curve")
    if not config.slope_list and not config.target_d_list:
        raise ConfigError("`rd-curve` needs slope_list or d_list under [experiment]")
    seed = config.master_seed

    points = [("slope", s) for s in config.slope_list]
    points += [("target", t) for t in config.target_d_list]

    def solve(item):
        kind, value = item
        if kind == "slope":
            return None, blahut_arimoto(config.source, d, value)
        return value, rd_point_at_distortion(config.source, d, value)

    solved = _map_points(solve, points, args.jobs)
    rows = [
        (
            pt.slope,
            pt.distortion,
            pt.rate,
            pt.iterations,
            pt.converged,
            target,
            seed,
            seed,
        )
        for target, pt in solved
    ]
    _write_csv(
        out,
        "rd-curve",
        ("slope", "D", "R", "iterations", "converged", "target_D", "master_seed", "seed"),
        rows,
    )


def _sweep_points(config):
    return [(n, rate) for n in config.n_list for rate in config.rate_list]


def _run_soft_cover(config, args, out):
    py, test_channel = resolve_test_pair(config)
    trials = args.trials or config.trials or DEFAULT_SOFT_COVER_TRIALS
    points = _sweep_points(config)

    def solve(item):
        index, (n, rate) = item
        point_seed = derive_seed(config.master_seed, index)
        return point_seed, expected_soft_cover_tv(
            py, test_channel, config.source, n, rate, trials, point_seed
        )

    solved = _map_points(solve, list(enumerate(points)), args.jobs)
    rows = [
        (
            rep.n,
            rep.rate,
            rep.num_words,
            rep.trials,
            rep.tv_mean,
            rep.tv_stderr,
            config.master_seed,
            point_seed,
        )
        for point_seed, rep in solved
    ]
    _write_csv(
        out,
        "soft-cover",
        ("n", "R", "M", "trials", "tv_mean", "tv_stderr", "master_seed", "seed"),
        rows,
    )


def _run_distortion(config, args, out):
    py, test_channel = resolve_test_pair(config)
    d = _require(config, "distortion", "distortion")
    trials = args.trials or config.trials or DEFAULT_DISTORTION_TRIALS
    points = _sweep_points(config)

    def solve(item):
        index, (n, rate) = item
        point_seed = derive_seed(config.master_seed, index)
        return point_seed, distortion_experiment(
            config.source, py, test_channel, d, n, rate, trials, point_seed
        )

    solved = _map_points(solve, list(enumerate(points)), args.jobs)
    rows = []
    for point_seed, summary in solved:
        for trial in summary.rows:
            rows.append(
                (
                    "trial",
                    summary.n,
                    summary.rate,
                    summary.num_words,
                    trial.trial,
                    trial.seed,
                    trial.index if not trial.failed else None,
                    trial.distortion,
                    trial.failed,
                    None,
                    None,
                    None,
                    config.master_seed,
                )
            )
        rows.append(
            (
                "summary",
                summary.n,
                summary.rate,
                summary.num_words,
                None,
                point_seed,
                None,
                None,
                None,
                summary.mean,
                summary.stderr,
                summary.failures,
                config.master_seed,
            )
        )
    _write_csv(
        out,
        "distortion",
        (
            "kind",
            "n",
            "R",
            "M",
            "trial",
            "seed",
            "index",
            "distortion",
            "failed",
            "mean",
            "stderr",
            "failures",
            "master_seed",
        ),
        rows,
    )


def _run_proof_check(config, args, out):
    py, test_channel = resolve_test_pair(config)
    d = _require(config, "distortion", "proof-check")
    n, rate = config.n_list[0], config.rate_list[0]
    seed = derive_seed(config.master_seed, 0)
    cb = generate_codebook(py, n, rate, seed)
    rep = proof_check(cb, test_channel, config.source, d)
    rows = [
        (
            n,
            rate,
            cb.num_words,
            rep.tv_joint,
            rep.tv_marginal,
            rep.conditional_max_gap,
            rep.empirical_distortion,
            rep.expected_distortion_q,
            rep.distortion_bound_rhs,
            rep.distortion_bound_rhs_one_dmax,
            rep.repeated_codewords,
            config.master_seed,
            seed,
        )
    ]
    _write_csv(
        out,
        "proof-check",
        (
            "n",
            "R",
            "M",
            "tv_joint",
            "tv_marginal",
            "conditional_max_gap",
            "empirical_distortion",
            "expected_distortion_q",
            "distortion_bound_rhs",
            "distortion_bound_rhs_one_dmax",
            "repeated_codewords",
            "master_seed",
            "seed",
        ),
        rows,
    )


def _run_codebook(config, args):
    if args.out is None and config.out is None:
        raise ConfigError("`codebook` needs --out (or out in [experiment])")
    py, _ = resolve_test_pair(config)
    n, rate = config.n_list[0], config.rate_list[0]
    cb = generate_codebook(py, n, rate, config.master_seed)
    save_codebook(cb, args.out or config.out)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lel",
        description="Likelihood-encoder experiments over random codebooks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = (
        ("rd-curve", "sweep the rate-distortion solver, emit (slope, D, R) rows"),
        ("soft-cover", "codebook-ensemble TV against the i.i.d. target"),
        ("distortion", "Monte Carlo end-to-end distortion trials"),
        ("proof-check", "exact P-vs-Q comparison for one configuration"),
        ("codebook", "generate and serialize one codebook"),
    )
    for name, help_text in specs:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="experiment config path")
        sp.add_argument("--out", help="output path (CSV, or binary for codebook)")
        sp.add_argument("--seed", type=int, help="override [experiment] master_seed")
        sp.add_argument("--trials", type=int, help="override [experiment] trials")
        sp.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
    return parser


def _dispatch(args):
    config = load_config(args.config)
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must fit in a u64")
        config = dataclasses.replace(config, master_seed=args.seed)
    if args.trials is not None and args.trials < 1:
        raise ConfigError("--trials must be >= 1")

    if args.command == "codebook":
        _run_codebook(config, args)
        return

    runner = {
        "rd-curve": _run_rd_curve,
        "soft-cover": _run_soft_cover,
        "distortion": _run_distortion,
        "proof-check": _run_proof_check,
    }[args.command]
    out_path = args.out or config.out
    if out_path is None:
        runner(config, args, sys.stdout)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            runner(config, args, fh)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        _dispatch(args)
    except ConfigError as exc:
        print(f"lel: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EnumerationCapError, AllZeroLikelihoodError) as exc:
        print(f"lel: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"lel: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
