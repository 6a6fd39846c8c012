"""Euclidean projection onto l_p balls and Frobenius projection onto Schatten balls."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, InvalidInputError
from .operators import (
    LinearOperator,
    SchattenBall,
    _check_order,
    as_operator,
    as_vector,
    schatten_norm,
    spectrum_norm,
    svd_spectrum,
)

DEFAULT_TOL = 1e-10
MAX_OUTER = 200
MAX_INNER = 200
_LOG_TINY = math.log(np.finfo(float).tiny)


@dataclass(frozen=True)
class LpBall:
    p: float
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "p", _check_order(self.p))
        r = float(self.radius)
        if not (r >= 0) or math.isinf(r):
            raise InvalidInputError(f"radius must be finite and nonnegative, got {self.radius}")
        object.__setattr__(self, "radius", r)


def project_lp(v, ball: LpBall, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Nearest point (in Euclidean distance) to ``v`` inside ``ball``.

    Feasible inputs are returned unchanged. Signs are preserved, the work is
    done on magnitudes.
    """
    v = as_vector(v, "v")
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    p, r = ball.p, ball.radius
    if spectrum_norm(v, p) <= r:
        return v
    if r == 0:
        return np.zeros_like(v)
    sign = np.sign(v)
    a = np.abs(v)
    if p == 1:
        u = _project_l1_magnitudes(a, r)
    elif p == 2:
        u = a * (r / np.linalg.norm(a))
    elif math.isinf(p):
        u = np.minimum(a, r)
    else:
        u = _project_lp_magnitudes(a, p, r, tol)
    return sign * u


def _project_l1_magnitudes(a: np.ndarray, r: float) -> np.ndarray:
    # sort-based soft threshold, O(n log n)
    desc = np.sort(a)[::-1]
    thetas = (np.cumsum(desc) - r) / np.arange(1, a.size + 1)
    rho = np.nonzero(desc - thetas > 0)[0][-1]
    return np.maximum(a - thetas[rho], 0.0)


def shrink_magnitudes(a: np.ndarray, lam: float, p: float) -> np.ndarray:
    """Solve ``u + lam * p * u**(p-1) = a`` coordinatewise for ``u`` in ``[0, a]``.

    ``a`` must be nonnegative and ``1 < p < inf``. Newton runs on ``t = log u``,
    where the residual ``e^t + lam*p*e^((p-1)t) - a`` is convex and increasing,
    so iterating from an upper bound decreases monotonically onto the root even
    when the root is far below 1 (p close to 1).
    """
    a = np.asarray(a, dtype=float)
    u = np.zeros_like(a)
    if lam == 0:
        return a.copy()
    pos = a > 0
    if not np.any(pos):
        return u
    ap = a[pos]
    log_c = math.log(lam * p)
    log_a = np.log(ap)
    # each single-term root is an upper bound; the smaller one is within log 2
    t = np.minimum(log_a, (log_a - log_c) / (p - 1))
    active = t > _LOG_TINY
    # rounding floor of the step grows like eps / (p - 1)
    step_tol = 64 * np.finfo(float).eps / min(1.0, p - 1)
    for _ in range(MAX_INNER):
        tt = t[active]
        k = log_c + (p - 1) * tt
        m = np.maximum(tt, k)
        # both terms rescaled by exp(-m) to stay finite for large p or lam
        e1 = np.exp(tt - m)
        ep = np.exp(k - m)
        step = (e1 + ep - np.exp(log_a[active] - m)) / (e1 + (p - 1) * ep)
        t[active] = tt - step
        still = np.abs(step) > step_tol * np.maximum(1.0, np.abs(tt))
        still &= t[active] > _LOG_TINY
        active[np.flatnonzero(active)[~still]] = False
        if not np.any(active):
            break
    u[pos] = np.where(t > _LOG_TINY, np.exp(t), 0.0)
    return u


def _project_lp_magnitudes(a: np.ndarray, p: float, r: float, tol: float) -> np.ndarray:
    # The l_p norm of the inner solution decreases monotonically in the
    # multiplier. Bracket log(lam) by exponential search, then refine with a
    # bisection-safeguarded Brent iteration.
    evals = 0
    target = min(tol, DEFAULT_TOL) * r
    found = {}

    def excess(log_lam):
        nonlocal evals
        evals += 1
        if evals > MAX_OUTER:
            raise ConvergenceError(f"l_p projection did not converge within {MAX_OUTER} steps (p={p})")
        u = shrink_magnitudes(a, math.exp(log_lam), p)
        f = spectrum_norm(u, p) - r
        if abs(f) <= target:
            found["u"] = u
            raise _Converged
        return f

    try:
        lo, hi = 0.0, 0.0
        f = excess(0.0)
        width = 1.0
        if f > 0:
            while f > 0:
                lo, hi = hi, hi + width
                width *= 2
                f = excess(hi)
        else:
            while f < 0:
                hi, lo = lo, lo - width
                width *= 2
                f = excess(lo)
        brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=MAX_OUTER)
    except _Converged:
        return found["u"]
    # bracket collapsed to float resolution; take the feasible end
    u = shrink_magnitudes(a, math.exp(hi), p)
    if spectrum_norm(u, p) <= r * (1 + tol):
        return u
    raise ConvergenceError(f"l_p projection did not reach the radius (p={p})")


class _Converged(Exception):
    pass


def lp_multiplier(u, v, p: float) -> float:
    """Multiplier ``lam`` matching the stationarity condition of a projection.

    Averages ``(|v_i| - |u_i|) / (p |u_i|^(p-1))`` over coordinates with
    ``u_i != 0``; returns 0 when ``u`` equals ``v``.
    """
    u = np.abs(np.asarray(u, dtype=float))
    a = np.abs(np.asarray(v, dtype=float))
    nz = u > 0
    if not np.any(nz) or np.allclose(u, a, rtol=0, atol=0):
        return 0.0
    return float(np.mean((a[nz] - u[nz]) / (p * u[nz] ** (p - 1))))


def project_schatten(T, ball: SchattenBall, tol: float = DEFAULT_TOL) -> LinearOperator:
    """Frobenius-nearest point of the Schatten ball, by projecting the spectrum."""
    T = as_operator(T)
    if schatten_norm(T, ball.p) <= ball.radius:
        return T
    if T.is_factored:
        U, s, Vt = T.U, np.asarray(T.s), T.V.T
    else:
        U, s, Vt = np.linalg.svd(T.matrix, full_matrices=False)
    s_new = project_lp(s, LpBall(ball.p, ball.radius), tol)
    return LinearOperator.from_factors(U, s_new, Vt.T, check=False)


def is_member(T, ball: SchattenBall, tol: float = DEFAULT_TOL) -> bool:
    return spectrum_norm(svd_spectrum(T), ball.p) <= ball.radius * (1.0 + tol)
