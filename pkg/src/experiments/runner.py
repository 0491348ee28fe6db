#!/usr/bin/env python3
"""
Configuration-driven experiments: single solves, rate studies and method comparisons
"""

import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import as_completed
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from analysis.measures import error_measure
from analysis.rates import RatePoint
from analysis.rates import fit_rate_study
from analysis.rates import median_points
from common.errors import ConfigError
from experiments.config import ExperimentConfig
from experiments.output import append_timings
from experiments.output import write_csv
from experiments.output import write_dat
from experiments.output import write_gnuplot_script
from penalty.functions import make_penalty
from problems.generator import add_noise
from problems.generator import make_problem
from solver.dual_gradient import DualGradientSolver
from solver.dual_gradient import entropic_landweber_solve
from solver.records import RunRecord
from solver.records import Termination
from solver.stopping import StoppingMode
from solver.stopping import StoppingRule
from solver.stopping import a_priori_iterations
from solver.stopping import lipschitz_constant

logger = logging.getLogger(__name__)

MIN_STUDY_DELTAS = 4
NOISE_SEED_STRIDE = 10_000
# rate studies only need the stopping iterate
STUDY_RECORD_EVERY = 2 ** 62


@dataclass
class CellResult:
    """One solve at a (delta, seed) grid cell"""
    delta: float
    seed: int
    record: RunRecord
    errors: dict
    wall_time: float

    @property
    def n_stop(self) -> int:
        return self.record.stop_index


@dataclass
class StudyResult:
    rows: pd.DataFrame
    points: list[RatePoint]
    fits: dict
    invocations: int
    output_dir: Path


class ExperimentRunner:
    """Runs the solves an ExperimentConfig describes and writes their outputs

    Args:
        config: Validated configuration
        output_dir: Overrides config.output_dir
        jobs: Number of grid cells solved concurrently
        record_every: Overrides config.record_every
        allow_unproven: Overrides config.allow_unproven when not None
    """

    def __init__(self, config: ExperimentConfig, output_dir: str | Path | None = None, jobs: int = 1,
                 record_every: int | None = None, allow_unproven: bool | None = None):
        if jobs < 1:
            raise ConfigError('jobs', f"must be at least 1, got {jobs}")
        self.config = config.with_overrides(record_every=record_every, allow_unproven=allow_unproven)
        self.output_dir = Path(output_dir or self.config.output_dir)
        self.jobs = jobs
        self.problem = make_problem(config.problem.name, config.problem.n, config.problem.seed)
        op = self.problem.op
        if self.config.penalty_is_default:
            self.penalty = self.problem.penalty
        else:
            logger.warning(f"Solving {config.problem.name} with penalty {config.penalty.kind.value}, "
                           f"not the one its exact solution was built for")
            self.penalty = make_penalty(config.penalty.kind, op.domain_weights, **config.penalty.params)
        self.lipschitz = lipschitz_constant(op, self.penalty)
        self._invocations = 0
        self._lock = threading.Lock()

    @property
    def invocations(self) -> int:
        return self._invocations

    def stopping_rule(self, delta: float) -> StoppingRule:
        stopping = self.config.stopping
        if stopping.mode is StoppingMode.DISCREPANCY:
            return StoppingRule.discrepancy(stopping.tau, delta, stopping.n_cap)
        if stopping.n_max is not None:
            n_max = stopping.n_max
        else:
            n_max = a_priori_iterations(delta, stopping.q, stopping.scale,
                                        accelerated=self.config.method == 'accelerated')
            if n_max > stopping.n_cap:
                logger.warning(f"A-priori count {n_max} at delta={delta:.3e} capped at {stopping.n_cap}")
                n_max = stopping.n_cap
        return StoppingRule(StoppingMode.A_PRIORI, n_max=n_max, delta=delta, q=stopping.q, scale=stopping.scale)

    def noise_seed(self, seed: int) -> int:
        return NOISE_SEED_STRIDE * self.config.problem.seed + seed

    def _solve(self, ydelta: np.ndarray, stop: StoppingRule, record_every: int) -> RunRecord:
        config = self.config
        op = self.problem.op
        if config.method == 'entropic_landweber':
            return entropic_landweber_solve(op, ydelta, config.gamma, stop, record_every,
                                            allow_unproven=config.allow_unproven, lipschitz=self.lipschitz)
        solver = DualGradientSolver(op, self.penalty, config.gamma, record_every,
                                    allow_unproven=config.allow_unproven, lipschitz=self.lipschitz)
        if config.method == 'accelerated':
            return solver.solve_accelerated(ydelta, stop, config.alpha)
        return solver.solve(ydelta, stop)

    def errors_at(self, x: np.ndarray) -> dict:
        xi_ref = self.problem.xi_dagger if self.config.penalty_is_default else None
        return {
            measure.value: error_measure(measure, self.penalty, x, self.problem.x_true, xi_ref)
            for measure in self.config.measures
        }

    def solve_cell(self, delta: float, seed: int, record_every: int | None = None) -> CellResult:
        """Add seeded noise of level delta to the exact data and solve once"""
        noisy = add_noise(self.problem.y_exact, delta, self.noise_seed(seed))
        started = time.perf_counter()
        record = self._solve(noisy.ydelta, self.stopping_rule(delta), record_every or self.config.record_every)
        wall_time = time.perf_counter() - started
        with self._lock:
            self._invocations += 1
        logger.debug(f"delta={delta:.3e} seed={seed}: n_stop={record.stop_index} ({record.termination.value})")
        return CellResult(delta=delta, seed=seed, record=record, errors=self.errors_at(record.x_stop),
                          wall_time=wall_time)

    def _summary_row(self, cell: CellResult) -> dict:
        row = {
            'problem': self.config.problem.name,
            'method': self.config.method,
            'delta': cell.delta,
            'seed': cell.seed,
            'n_stop': cell.n_stop,
            'termination': cell.record.termination.value,
            'gamma': cell.record.gamma,
            'residual': cell.record.residual_at_stop,
            'experimental': cell.record.experimental,
        }
        row.update(cell.errors)
        return row

    def _log_timings(self, cells: list[CellResult]) -> None:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        append_timings(self.output_dir / 'timings.log', [
            f"config={self.config.config_hash} method={self.config.method} delta={c.delta:.6e} seed={c.seed} "
            f"n_stop={c.n_stop} wall_time_s={c.wall_time:.6f}"
            for c in cells
        ])

    def run_single(self) -> tuple[RunRecord, dict]:
        """Solve once at deltas[0] with seed 0 and write trace.csv and summary.csv"""
        cell = self.solve_cell(self.config.deltas[0], 0)
        record = cell.record
        trace = pd.DataFrame({
            'n': np.arange(record.stop_index + 1),
            'residual': record.residuals,
            'dual_value': record.dual_values,
        })
        summary = self._summary_row(cell)
        config_hash = self.config.config_hash
        write_csv(trace, self.output_dir / 'trace.csv', 'n: iteration index; residual: ||A x_n - y_delta||; '
                  'dual_value: R*(A* lambda_n) - <lambda_n, y_delta>', config_hash)
        write_csv(pd.DataFrame([summary]), self.output_dir / 'summary.csv',
                  'delta: noise level; errors in the named measures at the stopping index', config_hash)
        self._log_timings([cell])
        return record, summary

    def run_grid(self, record_every: int | None = None) -> list[CellResult]:
        """Solve every (delta, seed) cell, concurrently when jobs > 1, merged in (delta, seed) order"""
        cells = [(delta, seed) for delta in self.config.deltas for seed in range(self.config.seeds_per_delta)]
        results = {}
        if self.jobs == 1:
            for delta, seed in cells:
                results[(delta, seed)] = self.solve_cell(delta, seed, record_every)
        else:
            with ThreadPoolExecutor(max_workers=self.jobs) as executor:
                futures = {
                    executor.submit(self.solve_cell, delta, seed, record_every): (delta, seed)
                    for delta, seed in cells
                }
                for future in as_completed(futures):
                    results[futures[future]] = future.result()
        return [results[key] for key in sorted(results, key=lambda k: (-k[0], k[1]))]

    def run_rate_study(self) -> StudyResult:
        """Solve the whole grid, fit log-log slopes per measure and write the study files"""
        deltas = self.config.deltas
        if len(deltas) < MIN_STUDY_DELTAS:
            raise ConfigError('deltas', f"a rate study needs at least {MIN_STUDY_DELTAS} noise levels, "
                                        f"got {len(deltas)}")
        if min(deltas) <= 0:
            raise ConfigError('deltas', "a rate study needs positive noise levels")

        cells = self.run_grid(record_every=STUDY_RECORD_EVERY)
        rows = []
        points = []
        for cell in cells:
            capped = cell.record.termination is Termination.CAP_HIT
            if capped:
                logger.warning(f"delta={cell.delta:.3e} seed={cell.seed} hit the iteration cap; "
                               f"excluded from the fit")
            for measure in self.config.measures:
                error = cell.errors[measure.value]
                rows.append({
                    'delta': cell.delta,
                    'seed': cell.seed,
                    'measure': measure.value,
                    'error': error,
                    'n_stop': cell.n_stop,
                    'termination': cell.record.termination.value,
                    'gamma': cell.record.gamma,
                    'experimental': cell.record.experimental,
                })
                if not capped:
                    points.append(RatePoint(cell.delta, error, cell.n_stop, measure))

        fits = self._fit(points)
        frame = pd.DataFrame(rows)
        self._write_study(frame, points, fits)
        self._log_timings(cells)
        logger.info(f"Rate study finished: {self.invocations} solver invocations")
        return StudyResult(rows=frame, points=points, fits=fits, invocations=self.invocations,
                           output_dir=self.output_dir)

    def _fit(self, points: list[RatePoint]) -> dict:
        fits = {}
        for measure in self.config.measures:
            medians = median_points(p for p in points if p.measure is measure)
            try:
                fits[measure] = fit_rate_study(medians)
            except ValueError as e:
                logger.warning(f"No rate fit for {measure.value}: {e}")
        return fits

    def _write_study(self, frame: pd.DataFrame, points: list[RatePoint], fits: dict) -> None:
        config_hash = self.config.config_hash
        write_csv(frame, self.output_dir / 'points.csv',
                  'delta: noise level; error: measure at the stopping index; n_stop: iterations', config_hash)
        fit_rows = []
        for measure, fit in fits.items():
            fit_rows.append({
                'measure': measure.value,
                'slope': fit.slope,
                'intercept': fit.intercept,
                'r_squared': fit.r_squared,
                'n_points': fit.n_points,
                'dropped_largest': fit.dropped_largest,
                'full_slope': fit.full_fit.slope if fit.full_fit else fit.slope,
                'full_r_squared': fit.full_fit.r_squared if fit.full_fit else fit.r_squared,
            })
        write_csv(pd.DataFrame(fit_rows), self.output_dir / 'fits.csv',
                  'log(error) = slope * log(delta) + intercept', config_hash)

        for measure in self.config.measures:
            medians = median_points(p for p in points if p.measure is measure)
            write_dat(self.output_dir / f"{measure.value}.dat", [p.delta for p in medians],
                      [p.error for p in medians], measure.value, config_hash)
        write_gnuplot_script(
            self.output_dir / 'plot_rates.gp',
            {m.value: (f.slope, f.intercept) for m, f in fits.items()},
            f"{self.config.problem.name} ({self.config.method})",
        )


def _comparable(config: ExperimentConfig) -> dict:
    tree = config.to_dict()
    for key in ('method', 'alpha', 'output_dir'):
        tree.pop(key)
    return tree


def run_comparison(config_a: ExperimentConfig, config_b: ExperimentConfig, output_dir: str | Path | None = None,
                   jobs: int = 1, allow_unproven: bool | None = None) -> pd.DataFrame:
    """Iterations-to-stop of two methods on identical problems, one row per delta

    Raises:
        ConfigError: if the configurations differ in anything but the method
    """
    if _comparable(config_a) != _comparable(config_b):
        differing = sorted(k for k in _comparable(config_a)
                           if _comparable(config_a)[k] != _comparable(config_b).get(k))
        raise ConfigError(differing[0] if differing else 'method',
                          "compared configurations must be identical except for the method")

    output_dir = Path(output_dir or config_a.output_dir)
    runner_a = ExperimentRunner(config_a, output_dir, jobs, allow_unproven=allow_unproven)
    runner_b = ExperimentRunner(config_b, output_dir, jobs, allow_unproven=allow_unproven)
    cells_a = runner_a.run_grid(record_every=STUDY_RECORD_EVERY)
    cells_b = runner_b.run_grid(record_every=STUDY_RECORD_EVERY)

    rows = []
    for a, b in zip(cells_a, cells_b):
        row = {
            'delta': a.delta,
            'seed': a.seed,
            'method_a': config_a.method,
            'n_a': a.n_stop,
            'termination_a': a.record.termination.value,
            'method_b': config_b.method,
            'n_b': b.n_stop,
            'termination_b': b.record.termination.value,
            'ratio': a.n_stop / b.n_stop if b.n_stop else math.inf,
        }
        for measure in config_a.measures:
            row[f"{measure.value}_a"] = a.errors[measure.value]
            row[f"{measure.value}_b"] = b.errors[measure.value]
        rows.append(row)

    frame = pd.DataFrame(rows)
    write_csv(frame, output_dir / 'comparison.csv',
              'n_a, n_b: iterations to stop; ratio: n_a / n_b; errors at the stopping index',
              config_a.config_hash)
    runner_a._log_timings(cells_a)
    runner_b._log_timings(cells_b)
    logger.info(f"Compared {config_a.method} and {config_b.method} over {len(rows)} cells")
    return frame
