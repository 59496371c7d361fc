"""Experiment orchestration: runs both engines and reduces them to learning curves."""

from __future__ import annotations

import asyncio
import dataclasses
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .const import (
    COLUMNS,
    ENGINE_BOTH,
    ENGINE_MC,
    ERROR_MODE_EMPIRICAL,
    GRID_TOL,
    LOGGER,
    SOURCE_MC_MEAN,
    SOURCE_ODE,
    STREAM_INIT,
    STREAM_TEST,
    STREAM_TRAIN,
)
from .exceptions import (
    DisjointGridError,
    InvalidValueError,
    LvqDriftError,
    ScenarioRunError,
)
from .lvq_trainer import init_prototypes, measure_order_params, train
from .metrics import class_error_empirical, error_report, is_degenerate, report
from .models import (
    ColumnDeviation,
    DeviationReport,
    ErrorReport,
    LearningCurve,
    OrderParams,
    PrototypeState,
    Scenario,
    ScenarioResult,
)
from .stream_gen import FloatArray, ModelParams, spawn_generator
from .theory_ode import integrate, output_grid


@dataclass(frozen=True, kw_only=True)
class CurveColumnDescription:
    """Describes one learning-curve column."""

    key: str
    value_fn: Callable[[OrderParams, ErrorReport], float]


CURVE_COLUMNS: tuple[CurveColumnDescription, ...] = (
    CurveColumnDescription(key="eps_plus", value_fn=lambda op, err: err.eps_plus),
    CurveColumnDescription(key="eps_minus", value_fn=lambda op, err: err.eps_minus),
    CurveColumnDescription(key="eps_ref", value_fn=lambda op, err: err.eps_ref),
    CurveColumnDescription(key="eps_track", value_fn=lambda op, err: err.eps_track),
    CurveColumnDescription(key="r_pp", value_fn=lambda op, err: op.r_pp),
    CurveColumnDescription(key="r_pm", value_fn=lambda op, err: op.r_pm),
    CurveColumnDescription(key="r_mp", value_fn=lambda op, err: op.r_mp),
    CurveColumnDescription(key="r_mm", value_fn=lambda op, err: op.r_mm),
    CurveColumnDescription(key="q_pp", value_fn=lambda op, err: op.q_pp),
    CurveColumnDescription(key="q_mm", value_fn=lambda op, err: op.q_mm),
    CurveColumnDescription(key="q_pm", value_fn=lambda op, err: op.q_pm),
)


def _row(op: OrderParams, errors: ErrorReport) -> list[float]:
    return [description.value_fn(op, errors) for description in CURVE_COLUMNS]


def _curve(
    alpha: FloatArray,
    rows: FloatArray,
    source: str,
    std: FloatArray | None = None,
    runs: int = 1,
) -> LearningCurve:
    keys = [d.key for d in CURVE_COLUMNS]
    return LearningCurve(
        alpha=alpha,
        values={k: rows[:, i].copy() for i, k in enumerate(keys)},
        source=source,
        std=None if std is None else {k: std[:, i].copy() for i, k in enumerate(keys)},
        runs=runs,
    )


def with_dim(scenario: Scenario, dim: int) -> Scenario:
    """Return the scenario with input dimension dim (cluster basis rebuilt)."""
    model = scenario.model
    return dataclasses.replace(
        scenario,
        model=ModelParams.create(
            lam=model.lam,
            v_plus=model.v_plus,
            v_minus=model.v_minus,
            dim=dim,
            basis=model.basis,
            basis_seed=model.basis_seed,
        ),
    )


def run_ode(scenario: Scenario) -> tuple[LearningCurve, dict[str, int]]:
    """Integrate the ODEs and map the trajectory to a learning curve."""
    result = integrate(
        OrderParams.initial(scenario.q_hat),
        scenario.model,
        scenario.schedule,
        scenario.gamma,
        scenario.eta,
        scenario.alpha_max,
        scenario.d_alpha,
        output_stride=scenario.output_stride,
    )
    rows = np.array(
        [
            _row(op, error_report(op, scenario.model, float(p)))
            for op, p in zip(result.trajectory, result.p_plus, strict=True)
        ]
    )
    diagnostics = {
        "ode_steps": result.steps,
        "ode_degenerate_evaluations": result.degenerate_evaluations,
    }
    return _curve(result.alpha, rows, SOURCE_ODE), diagnostics


def mc_run(scenario: Scenario, run: int) -> FloatArray:
    """Train one Monte Carlo run and return its (grid points, columns) table.

    Run k draws from the streams split off ``scenario.seed`` by (k, purpose).
    """
    params = scenario.model
    state = init_prototypes(
        params.dim,
        scenario.q_hat,
        spawn_generator(scenario.seed, run, STREAM_INIT),
        eta=scenario.eta,
        gamma=scenario.gamma,
    )
    test_rng = spawn_generator(scenario.seed, run, STREAM_TEST)
    empirical = scenario.error_mode == ERROR_MODE_EMPIRICAL
    rows: list[list[float]] = []

    def observe(current: PrototypeState) -> None:
        op = measure_order_params(current, params)
        p_plus = scenario.schedule.evaluate(op.alpha)
        if empirical:
            errors = report(
                class_error_empirical(current, params, 1, scenario.n_test, test_rng),
                class_error_empirical(current, params, -1, scenario.n_test, test_rng),
                p_plus,
            )
        else:
            errors = error_report(op, params, p_plus)
        rows.append(_row(op, errors))

    train(
        state,
        params,
        scenario.schedule,
        alpha_max=scenario.alpha_max,
        stride=scenario.output_stride,
        rng=spawn_generator(scenario.seed, run, STREAM_TRAIN),
        observer=observe,
    )
    LOGGER.debug("Monte Carlo run %d finished at alpha=%s", run, state.alpha)
    return np.array(rows)


async def async_run_mc_stack(scenario: Scenario) -> tuple[FloatArray, FloatArray]:
    """Run all Monte Carlo runs; return the grid and a (runs, points, columns) stack.

    The stack is ordered by run index whatever the number of workers.
    """
    grid = output_grid(0.0, scenario.alpha_max, scenario.output_stride)
    if scenario.workers == 1:
        tables = [mc_run(scenario, k) for k in range(scenario.mc_runs)]
    else:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=scenario.workers) as executor:
            tables = await asyncio.gather(
                *(
                    loop.run_in_executor(executor, partial(mc_run, scenario, k))
                    for k in range(scenario.mc_runs)
                )
            )
    stack = np.stack(tables)
    if stack.shape[1] != len(grid):
        raise InvalidValueError(
            f"Monte Carlo recorded {stack.shape[1]} points, grid has {len(grid)}"
        )
    return grid, stack


def reduce_runs(grid: FloatArray, stack: FloatArray) -> LearningCurve:
    """Reduce per-run tables to the mean curve with across-run std."""
    runs = stack.shape[0]
    mean = stack.mean(axis=0)
    std = stack.std(axis=0, ddof=1) if runs > 1 else np.zeros_like(mean)
    return _curve(grid, mean, SOURCE_MC_MEAN, std=std, runs=runs)


def count_degenerate(stack: FloatArray, params: ModelParams) -> int:
    """Return how many recorded (run, point) states have coinciding prototypes."""
    first = COLUMNS.index("r_pp") - 1
    order = stack[..., first : first + 7].reshape(-1, 7)
    return sum(
        is_degenerate(OrderParams.from_array(row, 0.0), params) for row in order
    )


async def async_run_mc(scenario: Scenario) -> tuple[LearningCurve, dict[str, int]]:
    """Run the Monte Carlo engine; return the mean learning curve and diagnostics."""
    grid, stack = await async_run_mc_stack(scenario)
    diagnostics = {
        "mc_runs": scenario.mc_runs,
        "mc_degenerate_points": count_degenerate(stack, scenario.model),
    }
    return reduce_runs(grid, stack), diagnostics


async def async_run_scenario(scenario: Scenario) -> ScenarioResult:
    """Run the engines the scenario asks for."""
    LOGGER.info(
        "Running scenario '%s' (engine=%s, N=%d, alpha_max=%s)",
        scenario.name,
        scenario.engine,
        scenario.dim,
        scenario.alpha_max,
    )
    result = ScenarioResult(scenario=scenario)
    if scenario.runs_ode:
        try:
            result.ode, diagnostics = run_ode(scenario)
        except (LvqDriftError, ValueError, FloatingPointError) as err:
            raise ScenarioRunError(
                translation_placeholders={
                    "scenario": scenario.name,
                    "engine": "ode",
                    "reason": str(err),
                }
            ) from err
        result.diagnostics.update(diagnostics)
    if scenario.runs_mc:
        try:
            result.mc, diagnostics = await async_run_mc(scenario)
        except (LvqDriftError, ValueError, FloatingPointError) as err:
            raise ScenarioRunError(
                translation_placeholders={
                    "scenario": scenario.name,
                    "engine": "mc",
                    "reason": str(err),
                }
            ) from err
        result.diagnostics.update(diagnostics)
    if result.ode is not None and result.mc is not None:
        result.comparison = compare_curves(result.ode, result.mc)
        LOGGER.info(
            "ODE vs Monte Carlo: max |d eps_track| = %.4f",
            result.comparison.max_abs("eps_track"),
        )
    return result


def run_scenario(scenario: Scenario) -> ScenarioResult:
    """Run a scenario to completion."""
    return asyncio.run(async_run_scenario(scenario))


def compare_curves(a: LearningCurve, b: LearningCurve) -> DeviationReport:
    """Return per-column deviations of b from a on a's grid within the overlap.

    b is linearly interpolated onto a's points. z-scores divide the deviation
    by the standard error of whichever curves carry a std.
    """
    lo = max(float(a.alpha[0]), float(b.alpha[0]))
    hi = min(float(a.alpha[-1]), float(b.alpha[-1]))
    if lo > hi + GRID_TOL:
        raise DisjointGridError(
            translation_placeholders={
                "a_min": float(a.alpha[0]),
                "a_max": float(a.alpha[-1]),
                "b_min": float(b.alpha[0]),
                "b_max": float(b.alpha[-1]),
            }
        )
    mask = (a.alpha >= lo - GRID_TOL) & (a.alpha <= hi + GRID_TOL)
    x = a.alpha[mask]
    columns: dict[str, ColumnDeviation] = {}
    for key in COLUMNS[1:]:
        dev = np.abs(a.values[key][mask] - np.interp(x, b.alpha, b.values[key]))
        variance = np.zeros_like(x)
        has_std = False
        for curve, on_grid in ((a, True), (b, False)):
            if curve.std is None:
                continue
            has_std = True
            std = (
                curve.std[key][mask]
                if on_grid
                else np.interp(x, curve.alpha, curve.std[key])
            )
            variance += std**2 / curve.runs
        max_z: float | None = None
        if has_std:
            valid = variance > 0
            if np.any(valid):
                max_z = float(np.max(dev[valid] / np.sqrt(variance[valid])))
        columns[key] = ColumnDeviation(
            max_abs=float(dev.max()), mean_abs=float(dev.mean()), max_abs_z=max_z
        )
    return DeviationReport(
        alpha_min=float(x[0]), alpha_max=float(x[-1]), points=len(x), columns=columns
    )


def self_averaging_study(
    scenario: Scenario, dims: Iterable[int], alpha: float, runs: int
) -> dict[int, dict[str, float]]:
    """Return the across-seed std of every column at alpha for each input dimension."""
    study: dict[int, dict[str, float]] = {}
    for dim in dims:
        probe = dataclasses.replace(
            with_dim(scenario, dim), engine=ENGINE_MC, mc_runs=runs, alpha_max=alpha
        )
        grid, stack = asyncio.run(async_run_mc_stack(probe))
        index = int(np.argmin(np.abs(grid - alpha)))
        std = stack[:, index, :].std(axis=0, ddof=1)
        study[dim] = {d.key: float(std[i]) for i, d in enumerate(CURVE_COLUMNS)}
        LOGGER.info("Self-averaging N=%d: std r_pp=%.5f", dim, study[dim]["r_pp"])
    return study


def finite_size_sweep(scenario: Scenario, dims: Iterable[int]) -> dict[int, DeviationReport]:
    """Return the ODE vs Monte Carlo deviation report for each input dimension."""
    sweep: dict[int, DeviationReport] = {}
    for dim in dims:
        result = run_scenario(
            dataclasses.replace(with_dim(scenario, dim), engine=ENGINE_BOTH)
        )
        assert result.comparison is not None
        sweep[dim] = result.comparison
    return sweep
