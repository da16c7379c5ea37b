"""The (p, n) benchmark grid: train, discover and score against PC"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Union

import numpy as np
import pandas as pd
import torch
from joblib import Parallel, delayed
from tqdm.auto import tqdm

from cpdag_discovery_tool.config import BenchmarkConfig
from cpdag_discovery_tool.graph import is_proper_cpdag
from cpdag_discovery_tool.metrics import (
    aggregate,
    closest_threshold,
    edge_count,
    evaluate,
    quartile_strata,
)
from cpdag_discovery_tool.models.network import Hyperparameters
from cpdag_discovery_tool.models.pdag import PdagMatrix
from cpdag_discovery_tool.net import forward, train
from cpdag_discovery_tool.pc import FisherZTest, pc
from cpdag_discovery_tool.postprocess import bpco, cutoff
from cpdag_discovery_tool.sim import generate_pairs
from cpdag_discovery_tool.utils.seeding import item_seed

logger = logging.getLogger(__name__)

BENCHMARK_COLUMNS = [
    "method", "p", "n", "setting", "stratum",
    "adj_f1", "adj_npv", "ori_g1", "ori_precision",
    "mean_est_edges", "mean_true_edges", "count", "all_proper",
]

POSTPROCESS: Dict[str, Callable[[np.ndarray, float], PdagMatrix]] = {
    "cutoff": cutoff,
    "bpco": bpco,
}

# Sub-seed slots inside one (p, n) cell
TRAIN_CORPUS, TEST_CORPUS, TRAINING = 0, 1, 2


def _rows(method: str, p: int, n: int, setting: float, estimates: Sequence[PdagMatrix],
          truths: Sequence[PdagMatrix], strata: np.ndarray) -> List[dict]:
    reports = [evaluate(est, truth) for est, truth in zip(estimates, truths)]
    table = aggregate(reports)
    proper = np.array([is_proper_cpdag(est) for est in estimates])
    rows = []
    for stratum, values in table.iterrows():
        if stratum == "all":
            mask = np.ones(len(proper), dtype=bool)
        else:
            mask = strata == int(stratum[1:]) - 1
        rows.append({"method": method, "p": p, "n": n, "setting": setting,
                     "stratum": stratum, **values.to_dict(),
                     "count": int(values["count"]), "all_proper": bool(proper[mask].all())})
    return rows


def run_cell(config: BenchmarkConfig, p: int, n: int) -> pd.DataFrame:
    """Every method and setting of one (p, n) cell

    The training corpus, test corpus and network all derive from sub-seeds
    of (config.seed, p, n), so a cell gives the same rows wherever it runs.
    """
    torch.set_num_threads(config.torch_threads)
    logger.info("cell p=%d n=%d: start", p, n)
    train_pairs = generate_pairs(p, n, config.b_train, item_seed(config.seed, p, n, TRAIN_CORPUS))
    test_pairs = generate_pairs(p, n, config.b_test, item_seed(config.seed, p, n, TEST_CORPUS))

    hyper = Hyperparameters(p, dense_units=config.dense_units, epochs=config.epochs,
                            batch_size=config.batch_size, learning_rate=config.learning_rate)
    net, log = train(train_pairs, hyper, seed=item_seed(config.seed, p, n, TRAINING))
    if len(log):
        logger.info("cell p=%d n=%d: final training loss %.5f", p, n, log["mean_loss"].iloc[-1])

    features = np.stack([pair.feature for pair in test_pairs])
    truths = [pair.label for pair in test_pairs]
    strata = quartile_strata([edge_count(truth) for truth in truths])
    probabilities = forward(net, features)

    rows = []
    for method in config.postprocess:
        for tau in config.thresholds:
            estimates = [POSTPROCESS[method](o, tau) for o in probabilities]
            rows.extend(_rows(f"net-{method}", p, n, tau, estimates, truths, strata))
    for alpha in config.alphas:
        estimates = [pc(FisherZTest(pair.feature, n, alpha), p).graph for pair in test_pairs]
        rows.extend(_rows("pc", p, n, alpha, estimates, truths, strata))

    frame = pd.DataFrame(rows, columns=BENCHMARK_COLUMNS)
    overall = frame[frame["stratum"] == "all"]
    for method, table in overall.groupby("method", sort=False):
        logger.info("cell p=%d n=%d: %s edge count closest at setting %g",
                    p, n, method, closest_threshold(table))
    logger.info("cell p=%d n=%d: done, %d rows", p, n, len(frame))
    return frame


def run_benchmark(config: BenchmarkConfig, location: Union[str, Path],
                  progress: bool = False) -> pd.DataFrame:
    """Run every (p, n) cell and write the rows to a CSV as cells finish

    Cells fan out over `config.workers` processes; rows are written in grid
    order, so the file does not depend on the worker count. Each
    (method, setting) block is flushed as soon as it is written.
    """
    location = Path(location)
    cells = [(p, n) for p in config.p for n in config.n]
    jobs = Parallel(n_jobs=config.workers, return_as="generator")(
        delayed(run_cell)(config, p, n) for p, n in cells)

    frames = []
    header = True
    try:
        location.parent.mkdir(parents=True, exist_ok=True)
        with open(location, "w", newline="") as handle:
            for frame in tqdm(jobs, total=len(cells), desc="benchmark", unit="cell",
                              disable=not progress):
                for _, block in frame.groupby(["method", "setting"], sort=False):
                    block.to_csv(handle, header=header, index=False)
                    handle.flush()
                    header = False
                frames.append(frame)
    except OSError as err:
        raise OSError(f"cannot write {location}: {err.strerror or err}") from err
    return pd.concat(frames, ignore_index=True)
