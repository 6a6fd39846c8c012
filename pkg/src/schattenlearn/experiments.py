"""Risk curves over the sample size, oracle risk, slope fits and bound tables."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import datagen
from .complexity import power_law_fit, theorem_bounds
from .datagen import ScenarioSpec, make_ground_truth, sample_pairs
from .erm import TrainingSet, fit
from .errors import InvalidInputError
from .operators import LinearOperator, SchattenBall


@dataclass(frozen=True)
class RiskCurveConfig:
    scenario: ScenarioSpec
    ball: SchattenBall
    N_grid: tuple[int, ...]
    seeds: tuple[int, ...]
    test_size: int
    delta: float = 0.05
    oracle_budget: int | None = None
    solver: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        grid = tuple(int(n) for n in self.N_grid)
        if not grid or any(n < 1 for n in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidInputError("N_grid must be strictly increasing positive integers")
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds or len(set(seeds)) != len(seeds):
            raise InvalidInputError("seeds must be a nonempty list of distinct integers")
        if self.test_size < 10 * max(grid):
            raise InvalidInputError("test_size must be at least 10 * max(N_grid)")
        if not 0 < self.delta < 1:
            raise InvalidInputError("delta must lie in (0, 1)")
        budget = self.oracle_budget if self.oracle_budget is not None else self.test_size
        if budget < 10 * max(grid):
            raise InvalidInputError("oracle_budget must be at least 10 * max(N_grid)")
        object.__setattr__(self, "N_grid", grid)
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "oracle_budget", int(budget))


@dataclass(frozen=True)
class RiskCurveRow:
    p: float
    B: float
    N: int
    seed: int
    train_risk: float
    test_risk: float
    oracle_risk: float
    excess: float
    bound: float
    converged: bool

    FIELDS = ("p", "B", "N", "seed", "train_risk", "test_risk", "oracle_risk",
              "excess", "bound", "converged")


def risk_of(T: LinearOperator, xs: np.ndarray, ys: np.ndarray) -> float:
    """Sample mean of ``||y - T x||^2`` over the rows of ``xs`` / ``ys``."""
    return float(np.mean(np.sum((ys - xs @ np.asarray(T.matrix).T) ** 2, axis=1)))


def _fit_oracle(scenario, ball, budget, truth, solver):
    xs, ys = sample_pairs(truth, scenario, budget, stream=(datagen.ORACLE_TRAIN,))
    op, _ = fit(TrainingSet(xs, ys), ball, **solver)
    return op


def oracle_risk(scenario: ScenarioSpec, ball: SchattenBall, budget: int, **solver) -> float:
    """Best-in-class risk estimate: ERM on ``budget`` draws, scored on ``budget`` fresh draws."""
    truth = make_ground_truth(scenario)
    op = _fit_oracle(scenario, ball, budget, truth, solver)
    xs, ys = sample_pairs(truth, scenario, budget, stream=(datagen.ORACLE_TEST,))
    return risk_of(op, xs, ys)


def risk_curve(config: RiskCurveConfig, threads: int = 1) -> list[RiskCurveRow]:
    """Train/test/oracle risks for every ``(N, seed)`` cell, sorted by ``(N, seed)``.

    All cells, and the oracle operator, are scored on one shared held-out
    sample drawn independently of every training set, so that the excess
    ``test - oracle`` is a paired difference.
    """
    sc, ball = config.scenario, config.ball
    truth = make_ground_truth(sc)
    oracle_op = _fit_oracle(sc, ball, config.oracle_budget, truth, config.solver)
    test_xs, test_ys = sample_pairs(truth, sc, config.test_size, stream=(datagen.TEST,))
    oracle = risk_of(oracle_op, test_xs, test_ys)

    def cell(N, seed):
        xs, ys = sample_pairs(truth, sc, N, stream=(datagen.TRAIN, seed))
        data = TrainingSet(xs, ys)
        op, report = fit(data, ball, **config.solver)
        test = risk_of(op, test_xs, test_ys)
        _, bound = theorem_bounds(N, ball, sc.C_x, sc.C_y, config.delta)
        return RiskCurveRow(ball.p, ball.radius, N, seed, report.final_risk, test, oracle,
                            test - oracle, bound, report.converged)

    cells = [(N, s) for N in config.N_grid for s in config.seeds]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda c: cell(*c), cells))
    else:
        rows = [cell(*c) for c in cells]
    return sorted(rows, key=lambda r: (r.N, r.seed))


@dataclass
class SlopeFit:
    p: float
    slope: float
    r2: float
    Ns: list[int]
    mean_excess: list[float]
    dropped: list[int]


def slope_fit(rows, min_points: int = 5) -> dict[float, SlopeFit]:
    """Log-log slope of mean excess against ``N``, one fit per order ``p``.

    Sizes whose mean excess is not positive are dropped and listed in the result.
    """
    by_p: dict[float, dict[int, list[float]]] = {}
    for r in rows:
        by_p.setdefault(r.p, {}).setdefault(r.N, []).append(r.excess)
    fits = {}
    for p, cells in sorted(by_p.items()):
        Ns, means, dropped = [], [], []
        for N in sorted(cells):
            m = float(np.mean(cells[N]))
            if m > 0:
                Ns.append(N)
                means.append(m)
            else:
                dropped.append(N)
        if len(Ns) < min_points:
            raise InvalidInputError(
                f"p={p}: only {len(Ns)} sample sizes with positive mean excess, need {min_points}")
        slope, r2 = power_law_fit(Ns, means)
        fits[p] = SlopeFit(p, slope, r2, Ns, means, dropped)
    return fits


def bound_table(p_list, N_grid, B: float, C_x: float, C_y: float,
                delta: float = 1e-3) -> list[tuple[float, int, float]]:
    """``(p, N, excess bound)`` triples for each order and sample size."""
    rows = []
    for p in p_list:
        ball = SchattenBall(p, B)
        for N in N_grid:
            rows.append((ball.p, int(N), theorem_bounds(int(N), ball, C_x, C_y, delta)[1]))
    return rows


def write_bounds_svg(rows, path, title: str | None = None) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for p in sorted({r[0] for r in rows}):
        pts = [(N, b) for q, N, b in rows if q == p]
        label = "p = inf" if math.isinf(p) else f"p = {p:g}"
        ax.plot([a for a, _ in pts], [b for _, b in pts], marker="o", ms=3, label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("number of samples N")
    ax.set_ylabel("excess risk bound")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": "schattenlearn", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
