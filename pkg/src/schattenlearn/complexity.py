"""Generalization and Rademacher bound formulas plus Monte-Carlo checks of
the growth of random sign-weighted operator sums."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .datagen import ScenarioSpec, make_ground_truth, stream_rng, _draw
from .errors import InvalidInputError, ShapeError
from .operators import LinearOperator, SchattenBall, as_vector, spectrum_norm

DESIGNS = ("fixed-vector", "orthonormal", "iid")
# r^2 below this marks a log-log fit as unreliable
MIN_R2 = 0.95


def _span_factor(M: np.ndarray) -> np.ndarray:
    """Matrix F with ``F^T F == M M^T`` and at most ``min(N, d)`` rows."""
    N, d = M.shape
    if N < d:
        return np.linalg.qr(M.T, mode="r")
    return M.T


def random_op_spectra(xs, ys, signs) -> tuple[np.ndarray, np.ndarray]:
    """Singular values of ``sum_n s_n x_n x_n^T`` and ``sum_n s_n y_n x_n^T``.

    The sums are reduced to cores of size at most ``min(N, d)`` before the
    SVD, which keeps high-dimensional, few-sample cases cheap.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    signs = np.asarray(signs, dtype=float).reshape(-1)
    if not (xs.shape[0] == ys.shape[0] == signs.size):
        raise ShapeError("xs, ys and signs must have the same length")
    if not np.all(np.abs(signs) == 1):
        raise InvalidInputError("signs must be +1 or -1")
    Fx = _span_factor(xs)
    Fy = _span_factor(ys)
    core_xx = (Fx * signs) @ Fx.T
    core_yx = (Fy * signs) @ Fx.T
    sv_xx = np.abs(np.linalg.eigvalsh(core_xx))
    sv_yx = np.linalg.svd(core_yx, compute_uv=False)
    return np.sort(sv_xx)[::-1], sv_yx


def random_op_norms(xs, ys, signs, q: float) -> tuple[float, float]:
    sv_xx, sv_yx = random_op_spectra(xs, ys, signs)
    return spectrum_norm(sv_xx, q), spectrum_norm(sv_yx, q)


@dataclass(frozen=True)
class RademacherConfig:
    N_grid: tuple[int, ...]
    trials: int
    q: float
    design: str = "iid"
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    seed: int = 0

    def __post_init__(self):
        grid = tuple(int(n) for n in self.N_grid)
        if not grid or any(n < 1 for n in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidInputError("N_grid must be strictly increasing positive integers")
        if self.trials < 1:
            raise InvalidInputError("trials must be at least 1")
        if self.design not in DESIGNS:
            raise InvalidInputError(f"design must be one of {DESIGNS}")
        if not self.q >= 1:
            raise InvalidInputError("q must be >= 1")
        object.__setattr__(self, "N_grid", grid)


@dataclass
class GrowthFit:
    design: str
    q: float
    Ns: list[int]
    trials: int
    mean_xx: list[float]
    mean_yx: list[float]
    bound_xx: list[float]
    bound_yx: list[float]
    violated: list[bool]
    exponent: float
    r2: float
    exponent_yx: float
    r2_yx: float

    @property
    def reliable(self) -> bool:
        return self.r2 >= MIN_R2

    @property
    def any_violation(self) -> bool:
        return any(self.violated)


def power_law_fit(Ns, values) -> tuple[float, float]:
    """OLS slope and r^2 of ``log(values)`` against ``log(Ns)``."""
    x = np.log(np.asarray(Ns, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if x.size < 2:
        raise InvalidInputError("need at least two points for a slope")
    if np.ptp(y) == 0:
        return 0.0, 1.0
    res = stats.linregress(x, y)
    return float(res.slope), float(res.rvalue ** 2)


def _design_samples(config: RademacherConfig, truth, N: int, rng):
    sc = config.scenario
    if config.design == "orthonormal":
        # ambient dimension max(N_grid); samples are the first N basis vectors
        xs = np.eye(N, max(config.N_grid))
        return xs, xs
    if config.design == "fixed-vector":
        v = np.zeros((1, sc.d_x))
        v[0, 0] = sc.C_x
        xs = np.repeat(v, N, axis=0)
        return xs, xs
    return _draw(rng, truth, sc, N)


def mc_growth(config: RademacherConfig) -> GrowthFit:
    """Monte-Carlo means of ``||T_xx||_{S_q}`` and ``||T_yx||_{S_q}`` per ``N``.

    Each cell is compared against ``N^max(1/2, 1/q) * sqrt(E ||x||^4)`` (and the
    ``||x||^2 ||y||^2`` analogue). The fourth moment is analytic for the
    unit-sphere, orthonormal and fixed-vector designs and a pooled sample
    estimate otherwise. Per-trial randomness comes from ``(seed, N, trial)``.
    """
    sc = config.scenario
    truth = make_ground_truth(sc) if config.design == "iid" else None
    expo = max(0.5, 1.0 / config.q)
    mean_xx, mean_yx, bound_xx, bound_yx, violated = [], [], [], [], []
    for N in config.N_grid:
        nx, ny, m4, m22 = [], [], [], []
        for trial in range(config.trials):
            rng = stream_rng(config.seed, N, trial)
            signs = rng.choice((-1.0, 1.0), size=N)
            xs, ys = _design_samples(config, truth, N, rng)
            a, b = random_op_norms(xs, ys, signs, config.q)
            nx.append(a)
            ny.append(b)
            sq_x = np.sum(xs * xs, axis=1)
            m4.append(np.mean(sq_x ** 2))
            m22.append(np.mean(sq_x * np.sum(ys * ys, axis=1)))
        if config.design == "orthonormal":
            ex4 = ex22 = 1.0
        elif config.design == "fixed-vector":
            ex4 = ex22 = sc.C_x ** 4
        else:
            ex4 = sc.C_x ** 4 if sc.sample_dist == "unit-sphere" else float(np.mean(m4))
            ex22 = float(np.mean(m22))
        mx, my = float(np.mean(nx)), float(np.mean(ny))
        bx = N ** expo * math.sqrt(ex4)
        by = N ** expo * math.sqrt(ex22)
        mean_xx.append(mx)
        mean_yx.append(my)
        bound_xx.append(bx)
        bound_yx.append(by)
        violated.append(bool(mx > bx * (1 + 1e-9) or my > by * (1 + 1e-9)))
    Ns = list(config.N_grid)
    if len(Ns) >= 2:
        e, r2 = power_law_fit(Ns, mean_xx)
        e_yx, r2_yx = power_law_fit(Ns, mean_yx)
    else:
        e = r2 = e_yx = r2_yx = float("nan")
    return GrowthFit(config.design, config.q, Ns, config.trials, mean_xx, mean_yx,
                     bound_xx, bound_yx, violated, e, r2, e_yx, r2_yx)


def rademacher_bound(N: int, ball: SchattenBall, C_x: float, C_y: float) -> float:
    B = ball.radius
    rate = min(0.5, 1.0 / ball.p)
    return C_y / math.sqrt(N) + N ** (-rate) * (B * B * C_x + 2 * B * C_x * C_y)


def theorem_bounds(N: int, ball: SchattenBall, C_x: float, C_y: float,
                   delta: float) -> tuple[float, float]:
    """Rademacher-complexity bound and excess-risk bound for ERM at sample size ``N``.

    ``R = C_y/sqrt(N) + N^-min(1/2, 1/p) (B^2 C_x + 2 B C_x C_y)`` and
    ``excess = 4 R + 2 (C_y + B C_x)^2 sqrt(log(1/delta) / N)``.
    """
    if N < 1:
        raise InvalidInputError("N must be at least 1")
    if not 0 < delta < 1:
        raise InvalidInputError("delta must lie in (0, 1)")
    R = rademacher_bound(N, ball, C_x, C_y)
    B = ball.radius
    excess = 4 * R + 2 * (C_y + B * C_x) ** 2 * math.sqrt(math.log(1 / delta) / N)
    return R, excess


def sup_loss(x, y, ball: SchattenBall) -> tuple[float, LinearOperator]:
    """Largest loss ``||y - T x||^2`` over the ball, with an operator achieving it.

    The maximizer points ``T x`` opposite to ``y``: ``-(B / (|y||x|)) y x^T``,
    which has Schatten norm ``B`` for every order. For ``y = 0`` any unit
    direction works and the first coordinate axis is used; for ``x = 0``
    (or ``B = 0``) the loss is ``||y||^2`` for every ``T`` and 0 is returned.
    """
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    B = ball.radius
    nx, ny = float(np.linalg.norm(x)), float(np.linalg.norm(y))
    if nx == 0 or B == 0:
        return ny * ny, LinearOperator.from_matrix(np.zeros((y.size, x.size)))
    if ny == 0:
        w = np.zeros(y.size)
        w[0] = 1.0
        return (B * nx) ** 2, LinearOperator.from_factors(w[:, None], [B], (x / nx)[:, None])
    U = (-y / ny)[:, None]
    V = (x / nx)[:, None]
    return (ny + B * nx) ** 2, LinearOperator.from_factors(U, [B], V, check=False)
