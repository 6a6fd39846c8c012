"""Empirical risk minimization over a Schatten ball.

The pipeline reduces the problem to coordinates in orthonormal bases of the
spans of the inputs and outputs, solves the small constrained least-squares
problem by projected gradient descent and lifts the solution back::

    bx, by = build_basis(xs), build_basis(ys)
    problem = CoordinateProblem(coordinates(bx, xs).T, coordinates(by, ys).T, ball)
    T_hat, report = solve_erm(problem)
    op = lift(T_hat, BasisPair(bx, by))
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, ShapeError
from .operators import LinearOperator, SchattenBall, as_operator, schatten_norm
from .projection import project_lp, LpBall

RANK_TOL = 1e-10
ACTIVE_RTOL = 1e-6
STATIONARITY_TOL = 1e-7


@dataclass(frozen=True)
class TrainingSet:
    """``N`` sample pairs stored row-wise: ``xs`` is (N, d_x), ``ys`` is (N, d_y)."""

    xs: np.ndarray
    ys: np.ndarray
    C_x: float = np.inf
    C_y: float = np.inf

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        ys = np.atleast_2d(np.asarray(self.ys, dtype=float))
        if xs.shape[0] != ys.shape[0]:
            raise ShapeError(f"{xs.shape[0]} inputs but {ys.shape[0]} outputs")
        if xs.shape[0] == 0:
            raise InvalidInputError("training set is empty")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise InvalidInputError("training set has non-finite entries")
        slack = 1 + 1e-12
        if np.max(np.linalg.norm(xs, axis=1)) > self.C_x * slack:
            raise InvalidInputError("an input exceeds the norm bound C_x")
        if np.max(np.linalg.norm(ys, axis=1)) > self.C_y * slack:
            raise InvalidInputError("an output exceeds the norm bound C_y")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self) -> int:
        return self.xs.shape[0]

    @property
    def d_x(self) -> int:
        return self.xs.shape[1]

    @property
    def d_y(self) -> int:
        return self.ys.shape[1]


@dataclass(frozen=True)
class BasisPair:
    """Orthonormal bases (as matrix columns) of the input and output spans."""

    U_x: np.ndarray
    U_y: np.ndarray

    @property
    def N_x(self) -> int:
        return self.U_x.shape[1]

    @property
    def N_y(self) -> int:
        return self.U_y.shape[1]


@dataclass(frozen=True)
class CoordinateProblem:
    """Coordinates of the samples as columns: ``X`` is (N_x, N), ``Y`` is (N_y, N)."""

    X: np.ndarray
    Y: np.ndarray
    ball: SchattenBall

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float).reshape(-1, np.shape(self.X)[-1])
        Y = np.asarray(self.Y, dtype=float).reshape(-1, np.shape(self.Y)[-1])
        if X.shape[1] != Y.shape[1]:
            raise ShapeError(f"X has {X.shape[1]} samples, Y has {Y.shape[1]}")
        if X.shape[1] == 0:
            raise InvalidInputError("coordinate problem has no samples")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def N(self) -> int:
        return self.X.shape[1]


@dataclass
class FitReport:
    iterations: int
    objective_trace: list[float] = field(repr=False)
    final_risk: float
    converged: bool
    active_constraint: bool
    schatten_norm: float = float("nan")
    stationarity: float = float("nan")


def build_basis(vectors, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of ``span(vectors)`` as the columns of a (dim, k) matrix.

    Gram-Schmidt with a second orthogonalization pass. A residual is kept
    when its norm exceeds ``rank_tol`` times the largest input norm. An
    all-zero input gives a (dim, 0) basis.
    """
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    if V.size == 0:
        raise InvalidInputError("need at least one vector")
    dim = V.shape[1]
    scale = float(np.max(np.linalg.norm(V, axis=1)))
    Q = np.zeros((dim, 0))
    if scale == 0:
        return Q
    cols = []
    for v in V:
        w = v.copy()
        for _ in range(2):
            if cols:
                w -= Q @ (Q.T @ w)
        nw = np.linalg.norm(w)
        if nw > rank_tol * scale:
            cols.append(w / nw)
            Q = np.column_stack(cols)
            if len(cols) == dim:
                break
    return Q


def coordinates(basis: np.ndarray, v) -> np.ndarray:
    """Inner products of ``v`` (one vector or rows of vectors) with the basis columns."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != basis.shape[0]:
        raise ShapeError(f"vector dim {v.shape[-1]} does not match basis dim {basis.shape[0]}")
    return v @ basis


def reduce_problem(data: TrainingSet, ball: SchattenBall,
                   rank_tol: float = RANK_TOL) -> tuple[CoordinateProblem, BasisPair]:
    bases = BasisPair(build_basis(data.xs, rank_tol), build_basis(data.ys, rank_tol))
    X = coordinates(bases.U_x, data.xs).T
    Y = coordinates(bases.U_y, data.ys).T
    return CoordinateProblem(X, Y, ball), bases


def _project_matrix(T: np.ndarray, ball: SchattenBall) -> np.ndarray:
    if T.size == 0:
        return T
    U, s, Vt = np.linalg.svd(T, full_matrices=False)
    s_new = project_lp(s, LpBall(ball.p, ball.radius))
    if s_new is s:
        return T
    return (U * s_new) @ Vt


def _spectral_norm_p(T: np.ndarray, p: float) -> float:
    if T.size == 0:
        return 0.0
    return schatten_norm(T, p)


def solve_erm(problem: CoordinateProblem, max_iter: int = 10_000, rel_tol: float = 1e-9,
              window: int = 10, init=None, method: str = "pgd") -> tuple[np.ndarray, FitReport]:
    """Minimize ``(1/N) ||Y - T X||_F^2`` subject to ``||T||_{S_p} <= B``.

    Projected gradient with the constant step ``1/L``, ``L = (2/N) lambda_max(X X^T)``,
    starting from ``T = 0`` unless ``init`` is given (it is projected first).
    ``method="fista"`` switches to the monotone accelerated variant; the
    objective trace is nonincreasing either way.

    Iteration stops once the objective has decreased by less than ``rel_tol``
    (relative) over ``window`` iterations and the gradient mapping is
    below ``1e-7 * L * B``; ``converged`` is False if ``max_iter`` is hit first.
    """
    if method not in ("pgd", "fista"):
        raise InvalidInputError(f"unknown method {method!r}")
    X, Y, ball = problem.X, problem.Y, problem.ball
    N = problem.N
    n_y, n_x = Y.shape[0], X.shape[0]
    G = X @ X.T / N
    C = Y @ X.T / N
    yy = float(np.sum(Y * Y)) / N

    def objective(T):
        # expanded form, cost independent of N
        return yy - 2.0 * float(np.sum(T * C)) + float(np.sum((T @ G) * T))

    T = np.zeros((n_y, n_x))
    if init is not None:
        T = _project_matrix(np.array(init, dtype=float).reshape(n_y, n_x), ball)
    L = 2.0 * float(np.linalg.eigvalsh(G)[-1]) if n_x else 0.0

    def finish(T, trace, iters, converged, stationarity):
        risk = float(np.sum((Y - T @ X) ** 2)) / N
        norm = _spectral_norm_p(T, ball.p)
        active = ball.radius > 0 and norm >= ball.radius * (1 - ACTIVE_RTOL)
        return T, FitReport(iters, trace, risk, converged, active, norm, stationarity)

    if L <= 0 or n_y == 0 or ball.radius == 0:
        T = np.zeros((n_y, n_x))
        return finish(T, [objective(T)], 0, True, 0.0)

    J = objective(T)
    trace = [J]
    stat_tol = STATIONARITY_TOL * L * ball.radius
    Z, t_mom = T, 1.0
    stationarity = np.inf
    for k in range(1, max_iter + 1):
        base = Z if method == "fista" else T
        grad = 2.0 * (base @ G - C)
        step_pt = _project_matrix(base - grad / L, ball)
        if method == "fista":
            J_new = objective(step_pt)
            T_new = step_pt if J_new <= J else T
            J_new = min(J_new, J)
            t_next = 0.5 * (1 + np.sqrt(1 + 4 * t_mom * t_mom))
            Z = T_new + (t_mom / t_next) * (step_pt - T_new) + ((t_mom - 1) / t_next) * (T_new - T)
            t_mom = t_next
            # gradient mapping at the current iterate
            g_cur = 2.0 * (T_new @ G - C)
            stationarity = L * np.linalg.norm(T_new - _project_matrix(T_new - g_cur / L, ball))
        else:
            T_new = step_pt
            J_new = objective(T_new)
            stationarity = L * np.linalg.norm(T - T_new)
        T, J = T_new, J_new
        trace.append(J)
        if k >= window:
            ref = trace[-1 - window]
            flat = ref - J <= rel_tol * max(abs(ref), np.finfo(float).tiny)
            if flat and stationarity <= stat_tol:
                return finish(T, trace, k, True, float(stationarity))
    return finish(T, trace, max_iter, False, float(stationarity))


def lift(T_hat, bases: BasisPair) -> LinearOperator:
    """Ambient operator ``sum_ij T_hat[i, j] v_i u_j^T`` in factored form."""
    T_hat = np.atleast_2d(np.asarray(T_hat, dtype=float))
    if T_hat.shape != (bases.N_y, bases.N_x):
        raise ShapeError(f"coefficient matrix {T_hat.shape} does not match bases "
                         f"({bases.N_y}, {bases.N_x})")
    d_y, d_x = bases.U_y.shape[0], bases.U_x.shape[0]
    if T_hat.size == 0:
        return LinearOperator.from_matrix(np.zeros((d_y, d_x)))
    P, s, Qt = np.linalg.svd(T_hat, full_matrices=False)
    return LinearOperator.from_factors(bases.U_y @ P, s, bases.U_x @ Qt.T, check=False)


def empirical_risk(T, data: TrainingSet) -> float:
    """Mean squared residual ``(1/N) sum ||y_n - T x_n||^2``."""
    T = as_operator(T)
    if len(data) == 0:
        raise InvalidInputError("training set is empty")
    if T.shape != (data.d_y, data.d_x):
        raise ShapeError(f"operator {T.shape} does not match data ({data.d_y}, {data.d_x})")
    if T.is_factored:
        pred = ((data.xs @ T.V) * T.s) @ T.U.T
    else:
        pred = data.xs @ T.matrix.T
    return float(np.mean(np.sum((data.ys - pred) ** 2, axis=1)))


def fit(data: TrainingSet, ball: SchattenBall, **solver_opts) -> tuple[LinearOperator, FitReport]:
    """Full reduction pipeline: bases, coordinates, constrained solve, lift."""
    problem, bases = reduce_problem(data, ball)
    T_hat, report = solve_erm(problem, **solver_opts)
    return lift(T_hat, bases), report
