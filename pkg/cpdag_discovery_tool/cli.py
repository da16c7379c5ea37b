"""Command-line front-end: simulate, train, discover, pc, evaluate, benchmark"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import pandas as pd
import torch

from cpdag_discovery_tool import __version__
from cpdag_discovery_tool.benchmark import BENCHMARK_COLUMNS, run_benchmark
from cpdag_discovery_tool.config import POSTPROCESSORS, BenchmarkConfig, load_benchmark_config
from cpdag_discovery_tool.DAOs.corpus_dao import CorpusDAO
from cpdag_discovery_tool.DAOs.matrix_dao import AdjacencyDAO, RealMatrixDAO, SepsetDAO
from cpdag_discovery_tool.DAOs.model_dao import ModelDAO
from cpdag_discovery_tool.errors import DiscoveryError, NumericError, ValidationError
from cpdag_discovery_tool.metrics import aggregate, evaluate, reports_frame, summary_table
from cpdag_discovery_tool.models.network import Hyperparameters
from cpdag_discovery_tool.models.pdag import PdagMatrix
from cpdag_discovery_tool.net import forward, parameter_count, train
from cpdag_discovery_tool.pc import FisherZTest, PcResult, pc
from cpdag_discovery_tool.postprocess import bpco, cutoff
from cpdag_discovery_tool.sim import generate_corpus

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

ADJ_SUFFIX = ".adj.csv"

BENCHMARK_EPILOG = f"""\
benchmark CSV columns: {", ".join(BENCHMARK_COLUMNS)}
  method     net-cutoff, net-bpco or pc
  setting    threshold tau for net-*, significance alpha for pc
  stratum    all, or q1..q4 by quartile of the true edge count
  count      instances in the stratum
  all_proper whether every estimate in the stratum is a proper CPDAG

exit codes: 0 success, 1 usage error, 2 data or validation error,
3 numeric failure
"""


def _sibling(path: PathLike, suffix: str) -> Path:
    """`out.adj.csv` -> `out<suffix>`"""
    path = Path(path)
    name = path.name[:-len(ADJ_SUFFIX)] if path.name.endswith(ADJ_SUFFIX) else path.stem
    return path.with_name(name + suffix)


def _write_csv(frame: pd.DataFrame, location: PathLike, **kwargs):
    location = Path(location)
    try:
        location.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(location, **kwargs)
    except OSError as err:
        raise OSError(f"cannot write {location}: {err.strerror or err}") from err


def cmd_simulate(p: int, n: int, count: int, seed: int, out_path: PathLike,
                 workers: int = 1, shard_size: Optional[int] = None,
                 progress: bool = False) -> CorpusDAO:
    return generate_corpus(p, n, count, seed, out_path, workers=workers,
                           shard_size=shard_size, progress=progress)


def cmd_train(corpus_path: PathLike, hyper_overrides: Dict[str, object], seed: int,
              model_out: PathLike, log_out: Optional[PathLike] = None,
              torch_threads: int = 1, progress: bool = False) -> pd.DataFrame:
    """Train on a stored corpus; write the model and its per-epoch log

    The model header records the corpus hash and sample size.

    Returns:
        pd.DataFrame: The training log
    """
    torch.set_num_threads(torch_threads)
    corpus = CorpusDAO(corpus_path)
    manifest = corpus.manifest()
    hyper = Hyperparameters(manifest["p"]).override(**hyper_overrides)
    net, log = train(corpus.arrays(), hyper, seed=seed, progress=progress)
    ModelDAO(model_out).add(net, seed, n=manifest["n"], corpus_hash=corpus.corpus_hash())
    log_out = log_out or Path(model_out).with_suffix(".log.csv")
    _write_csv(log, log_out, index=False)
    logger.info("model with %d parameters written to %s", parameter_count(net), model_out)
    return log


def cmd_discover(model_path: PathLike, input_path: PathLike, tau: float, method: str,
                 out_path: PathLike, n: Optional[int] = None,
                 expect_corpus: Optional[PathLike] = None,
                 torch_threads: int = 1) -> PdagMatrix:
    """Estimate a CPDAG from one correlation matrix with a trained model

    Writes the post-processed graph to `out_path` and the raw probabilities
    next to it as `.prob.csv`.
    """
    if method not in POSTPROCESSORS:
        raise ValidationError(f"method must be one of {POSTPROCESSORS}, got {method!r}")
    torch.set_num_threads(torch_threads)
    net, header = ModelDAO(model_path).get()
    if expect_corpus is not None:
        expected = CorpusDAO(expect_corpus).corpus_hash()
        if header["corpus_hash"] != expected:
            raise ValidationError(
                f"{model_path} was trained on corpus {header['corpus_hash'] or '<unknown>'}, "
                f"not on {expect_corpus} ({expected})")
    c = RealMatrixDAO(input_path).get_correlation()
    if c.shape[0] != net.hyper.p:
        raise ValidationError(f"{input_path} has p={c.shape[0]}, the model expects p={net.hyper.p}")
    if n is not None and header["n"] is not None and n != header["n"]:
        logger.warning("input sample size n=%d differs from the training corpus n=%d",
                       n, header["n"])

    o = forward(net, c)
    g = bpco(o, tau) if method == "bpco" else cutoff(o, tau)
    AdjacencyDAO(out_path).add(g)
    RealMatrixDAO(_sibling(out_path, ".prob.csv")).add(o)
    return g


def cmd_pc(input_path: PathLike, n: int, alpha: float, out_path: PathLike) -> PcResult:
    """Run PC with Fisher-z tests; write the graph and its separating sets"""
    c = RealMatrixDAO(input_path).get_correlation()
    result = pc(FisherZTest(c, n, alpha), c.shape[0])
    AdjacencyDAO(out_path).add(result.graph)
    SepsetDAO(_sibling(out_path, ".sepsets.txt")).add(result.sepsets)
    logger.info("PC found %d separating sets, %d collider conflicts",
                len(result.sepsets), result.collider_conflicts)
    return result


def cmd_evaluate(estimates: Sequence[PathLike], truths: Sequence[PathLike],
                 out_path: Optional[PathLike] = None,
                 exclude_degenerate: bool = False) -> pd.DataFrame:
    """Score estimate/truth pairs; one CSV row per instance plus aggregate rows

    Returns:
        pd.DataFrame: Aggregate rows indexed by stratum
    """
    if len(estimates) != len(truths) or not estimates:
        raise ValidationError(
            f"need matching estimate and truth files, got {len(estimates)} and {len(truths)}")
    reports = [evaluate(AdjacencyDAO(est).get(), AdjacencyDAO(truth).get())
               for est, truth in zip(estimates, truths)]
    table = aggregate(reports, exclude_degenerate=exclude_degenerate)

    if out_path is not None:
        instances = reports_frame(reports)
        instances.insert(0, "row", "instance")
        instances.insert(1, "estimate", [str(est) for est in estimates])
        instances.insert(2, "truth", [str(truth) for truth in truths])
        summary = table.reset_index()
        summary.insert(0, "row", "aggregate")
        _write_csv(pd.concat([instances, summary], ignore_index=True), out_path, index=False)
    print(summary_table(table))
    return table


def cmd_benchmark(config: BenchmarkConfig, out_path: PathLike,
                  progress: bool = False) -> pd.DataFrame:
    return run_benchmark(config, out_path, progress=progress)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _key_value(text: str):
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


def _run_simulate(args) -> None:
    cmd_simulate(args.p, args.n, args.count, args.seed, args.out, workers=args.workers,
                 shard_size=args.shard_size, progress=args.progress)


def _run_train(args) -> None:
    overrides = {"epochs": args.epochs, "batch_size": args.batch_size,
                 "learning_rate": args.learning_rate, "dense_units": args.dense_units,
                 "dropout_rate": args.dropout_rate}
    cmd_train(args.corpus, overrides, args.seed, args.out, log_out=args.log,
              torch_threads=args.torch_threads, progress=args.progress)


def _run_discover(args) -> None:
    cmd_discover(args.model, args.input, args.tau, args.method, args.out, n=args.n,
                 expect_corpus=args.expect_corpus, torch_threads=args.torch_threads)


def _run_pc(args) -> None:
    cmd_pc(args.input, args.n, args.alpha, args.out)


def _run_evaluate(args) -> None:
    cmd_evaluate(args.estimate, args.truth, args.out, exclude_degenerate=args.exclude_degenerate)


def _run_benchmark(args) -> None:
    overrides = dict(args.set or [])
    if args.workers is not None:
        overrides["workers"] = str(args.workers)
    config = load_benchmark_config(args.config, overrides)
    cmd_benchmark(config, args.out, progress=args.progress)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpdag-discovery",
                     description="Learn CPDAGs from correlation matrices and benchmark against PC",
                     epilog=BENCHMARK_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true",
                           help="warnings only, no progress bars")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    simulate = commands.add_parser("simulate", help="simulate a training or test corpus")
    simulate.add_argument("--p", type=int, required=True, help="number of variables")
    simulate.add_argument("--n", type=int, required=True, help="observations per data set")
    simulate.add_argument("--count", type=int, required=True, help="number of pairs")
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--out", type=Path, required=True, help="corpus directory")
    simulate.add_argument("--workers", type=int, default=1)
    simulate.add_argument("--shard-size", type=int, default=None)
    simulate.set_defaults(func=_run_simulate)

    train_ = commands.add_parser("train", help="train a network on a corpus")
    train_.add_argument("--corpus", type=Path, required=True, help="corpus directory")
    train_.add_argument("--out", type=Path, required=True, help="model file (.sld)")
    train_.add_argument("--log", type=Path, default=None,
                        help="training log CSV (default: next to the model)")
    train_.add_argument("--seed", type=int, default=0)
    train_.add_argument("--epochs", type=int, default=None)
    train_.add_argument("--batch-size", type=int, default=None)
    train_.add_argument("--learning-rate", type=float, default=None)
    train_.add_argument("--dense-units", type=int, default=None)
    train_.add_argument("--dropout-rate", type=float, default=None)
    train_.add_argument("--torch-threads", type=int, default=1)
    train_.set_defaults(func=_run_train)

    discover = commands.add_parser("discover", help="estimate a CPDAG with a trained model")
    discover.add_argument("--model", type=Path, required=True)
    discover.add_argument("--input", type=Path, required=True, help="correlation matrix (.cor.csv)")
    discover.add_argument("--n", type=int, default=None, help="sample size behind the input")
    discover.add_argument("--tau", type=float, required=True, help="threshold in (0, 1)")
    discover.add_argument("--method", choices=POSTPROCESSORS, default="bpco")
    discover.add_argument("--out", type=Path, required=True, help="output .adj.csv")
    discover.add_argument("--expect-corpus", type=Path, default=None,
                          help="fail unless the model was trained on this corpus")
    discover.add_argument("--torch-threads", type=int, default=1)
    discover.set_defaults(func=_run_discover)

    pc_ = commands.add_parser("pc", help="run the PC algorithm with Fisher-z tests")
    pc_.add_argument("--input", type=Path, required=True, help="correlation matrix (.cor.csv)")
    pc_.add_argument("--n", type=int, required=True, help="sample size behind the input")
    pc_.add_argument("--alpha", type=float, default=0.05)
    pc_.add_argument("--out", type=Path, required=True, help="output .adj.csv")
    pc_.set_defaults(func=_run_pc)

    evaluate_ = commands.add_parser("evaluate", help="score estimates against true graphs")
    evaluate_.add_argument("--estimate", type=Path, nargs="+", required=True)
    evaluate_.add_argument("--truth", type=Path, nargs="+", required=True)
    evaluate_.add_argument("--out", type=Path, default=None, help="metrics CSV")
    evaluate_.add_argument("--exclude-degenerate", action="store_true",
                           help="leave instances with a 0/0 ratio out of the means")
    evaluate_.set_defaults(func=_run_evaluate)

    benchmark = commands.add_parser("benchmark", help="run the (p, n) benchmark grid",
                                    epilog=BENCHMARK_EPILOG,
                                    formatter_class=argparse.RawDescriptionHelpFormatter)
    benchmark.add_argument("--config", type=Path, default=None, help="flat key=value file")
    benchmark.add_argument("--set", type=_key_value, action="append", metavar="KEY=VALUE",
                           help="override one config key, e.g. --set b_train=2000")
    benchmark.add_argument("--workers", type=int, default=None)
    benchmark.add_argument("--out", type=Path, required=True, help="results CSV")
    benchmark.set_defaults(func=_run_benchmark)
    return parser


def _configure_logging(args):
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    _configure_logging(args)
    args.progress = not args.quiet

    try:
        args.func(args)
    except (ValidationError, OSError) as err:
        logger.error("%s", err)
        return EXIT_DATA
    except NumericError as err:
        logger.error("%s", err)
        return EXIT_NUMERIC
    except DiscoveryError as err:
        logger.error("%s", err)
        return EXIT_DATA
    except Exception:
        logger.exception("internal failure")
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
