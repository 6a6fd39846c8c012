"""Finite-dimensional operators, singular spectra and Schatten norms.

Vectors are plain 1-D float arrays holding coordinates against a fixed
orthonormal basis. Operators map R^d_x -> R^d_y and are stored either as a
dense (d_y, d_x) matrix or in factored form ``U @ diag(s) @ V.T``.
Scalars are real, so the adjoint is the transpose.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np

from .errors import InvalidInputError, ShapeError, UnsupportedOrderError

ORTH_TOL = 1e-10
# singular values below RANK_RTOL * s_1 count as zero for rank decisions
RANK_RTOL = 1e-12


def as_vector(v, name="vector") -> np.ndarray:
    """Validate and return ``v`` as a finite 1-D float array."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ShapeError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def _check_order(p: float) -> float:
    p = float(p)
    if math.isnan(p) or p < 1:
        raise UnsupportedOrderError(f"order p={p} is not supported; need p >= 1")
    return p


def conjugate_exponent(p: float) -> float:
    p = _check_order(p)
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Dense or factored real operator.

    Build instances with :meth:`from_matrix` or :meth:`from_factors`.
    """

    matrix_: np.ndarray | None = None
    U: np.ndarray | None = None
    s: np.ndarray | None = None
    V: np.ndarray | None = None

    @classmethod
    def from_matrix(cls, m) -> "LinearOperator":
        arr = np.array(m, dtype=float)
        if arr.ndim != 2 or 0 in arr.shape:
            raise ShapeError(f"operator matrix must be 2-D and nonempty, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("operator has non-finite entries")
        arr.setflags(write=False)
        return cls(matrix_=arr)

    @classmethod
    def from_factors(cls, U, s, V, check=True) -> "LinearOperator":
        U = np.array(U, dtype=float)
        s = np.array(s, dtype=float).reshape(-1)
        V = np.array(V, dtype=float)
        if U.ndim != 2 or V.ndim != 2:
            raise ShapeError("factors U and V must be 2-D")
        r = s.size
        if r == 0 or U.shape[1] != r or V.shape[1] != r:
            raise ShapeError(f"factor shapes disagree: U{U.shape}, s({r},), V{V.shape}")
        for name, a in (("U", U), ("s", s), ("V", V)):
            if not np.all(np.isfinite(a)):
                raise InvalidInputError(f"factor {name} has non-finite entries")
        if check:
            if np.any(s < 0) or np.any(np.diff(s) > 0):
                raise InvalidInputError("singular values must be nonnegative and nonincreasing")
            for name, a in (("U", U), ("V", V)):
                if np.max(np.abs(a.T @ a - np.eye(r))) > ORTH_TOL:
                    raise InvalidInputError(f"columns of {name} are not orthonormal")
        for a in (U, s, V):
            a.setflags(write=False)
        return cls(U=U, s=s, V=V)

    @property
    def is_factored(self) -> bool:
        return self.matrix_ is None

    @property
    def shape(self) -> tuple[int, int]:
        if self.matrix_ is not None:
            return self.matrix_.shape
        return (self.U.shape[0], self.V.shape[0])

    @property
    def d_y(self) -> int:
        return self.shape[0]

    @property
    def d_x(self) -> int:
        return self.shape[1]

    @cached_property
    def matrix(self) -> np.ndarray:
        """Materialized dense matrix."""
        if self.matrix_ is not None:
            return self.matrix_
        m = (self.U * self.s) @ self.V.T
        m.setflags(write=False)
        return m

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self) -> str:
        kind = f"factored r={self.s.size}" if self.is_factored else "dense"
        return f"LinearOperator({self.d_y}x{self.d_x}, {kind})"


def as_operator(T) -> LinearOperator:
    if isinstance(T, LinearOperator):
        return T
    return LinearOperator.from_matrix(T)


def zero_operator(d_y: int, d_x: int) -> LinearOperator:
    return LinearOperator.from_matrix(np.zeros((d_y, d_x)))


def identity(d: int) -> LinearOperator:
    return LinearOperator.from_matrix(np.eye(d))


def svd_spectrum(T) -> np.ndarray:
    """Singular values of ``T``, nonincreasing, length ``min(d_x, d_y)``."""
    T = as_operator(T)
    n = min(T.shape)
    if T.is_factored:
        vals = np.zeros(n)
        k = min(n, T.s.size)
        vals[:k] = np.sort(T.s)[::-1][:k]
        return vals
    return np.linalg.svd(T.matrix, compute_uv=False)


def spectrum_norm(s, p: float) -> float:
    """l_p norm of a nonnegative sequence (p may be ``inf``)."""
    p = _check_order(p)
    s = np.abs(np.asarray(s, dtype=float))
    if s.size == 0:
        return 0.0
    top = float(np.max(s))
    if top == 0.0:
        return 0.0
    if math.isinf(p):
        return top
    if p == 1:
        return float(np.sum(s))
    # scale by the largest value to avoid overflow for large p
    return top * float(np.sum((s / top) ** p)) ** (1.0 / p)


def schatten_norm(T, p: float) -> float:
    """Schatten p-norm, ``(sum_k s_k^p)^(1/p)``; ``p=inf`` is the operator norm."""
    p = _check_order(p)
    return spectrum_norm(svd_spectrum(T), p)


def trace(T) -> float:
    T = as_operator(T)
    if T.d_x != T.d_y:
        raise ShapeError(f"trace needs a square operator, got {T.shape}")
    if T.is_factored:
        # Tr(U S V^T) = sum_k s_k <v_k, u_k>
        return float(np.sum(T.s * np.sum(T.U * T.V, axis=0)))
    return float(np.trace(T.matrix))


def rank1(a, b) -> LinearOperator:
    """The operator ``x -> <b, x> a`` of shape ``(dim a, dim b)``."""
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return zero_operator(a.size, b.size)
    return LinearOperator.from_factors(
        (a / na)[:, None], [na * nb], (b / nb)[:, None], check=False
    )


def apply(T, x) -> np.ndarray:
    T = as_operator(T)
    x = as_vector(x, "x")
    if x.size != T.d_x:
        raise ShapeError(f"operator expects dim {T.d_x}, got {x.size}")
    if T.is_factored:
        return T.U @ (T.s * (T.V.T @ x))
    return T.matrix @ x


def adjoint(T) -> LinearOperator:
    T = as_operator(T)
    if T.is_factored:
        return LinearOperator(U=T.V, s=T.s, V=T.U)
    return LinearOperator.from_matrix(T.matrix.T)


def compose(*ops) -> LinearOperator:
    """Product ``ops[0] @ ops[1] @ ...`` as a dense operator."""
    mats = [as_operator(T).matrix for T in ops]
    for left, right in zip(mats, mats[1:]):
        if left.shape[1] != right.shape[0]:
            raise ShapeError(f"cannot compose {left.shape} with {right.shape}")
    return LinearOperator.from_matrix(reduce(np.matmul, mats))


def factorize(T) -> LinearOperator:
    """Factored form of ``T`` keeping numerically nonzero singular values (at least one)."""
    T = as_operator(T)
    if T.is_factored:
        return T
    U, s, Vt = np.linalg.svd(T.matrix, full_matrices=False)
    r = max(1, int(np.sum(s > RANK_RTOL * s[0]))) if s[0] > 0 else 1
    return LinearOperator.from_factors(U[:, :r], s[:r], Vt[:r].T, check=False)


def numerical_rank(T) -> int:
    s = svd_spectrum(T)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


@dataclass(frozen=True)
class SchattenBall:
    """The set ``{T : ||T||_{S_p} <= radius}``.

    A zero radius is accepted as the degenerate ball ``{0}``.
    """

    p: float
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "p", _check_order(self.p))
        r = float(self.radius)
        if not (r >= 0) or math.isinf(r):
            raise InvalidInputError(f"radius must be finite and nonnegative, got {self.radius}")
        object.__setattr__(self, "radius", r)

    @property
    def q(self) -> float:
        return conjugate_exponent(self.p)
