"""Synthetic scenarios: ground-truth operators, bounded samples, Tikhonov inverses."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .operators import LinearOperator, as_operator

SAMPLE_DISTS = ("unit-sphere", "scaled-cube")

# stream ids mixed into the seed sequence
TRUTH = 0
TRAIN = 1
TEST = 2
ORACLE_TRAIN = 3
ORACLE_TEST = 4

BLOCK = 256


@dataclass(frozen=True)
class ScenarioSpec:
    d_x: int = 16
    d_y: int = 16
    alpha: float = 2.0
    scale: float = 1.0
    sample_dist: str = "unit-sphere"
    C_x: float = 1.0
    noise_sigma: float = 0.0
    C_y: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.d_x < 1 or self.d_y < 1:
            raise InvalidInputError("dimensions must be positive")
        if self.sample_dist not in SAMPLE_DISTS:
            raise InvalidInputError(f"sample_dist must be one of {SAMPLE_DISTS}")
        if not (self.C_x > 0 and self.C_y > 0):
            raise InvalidInputError("C_x and C_y must be positive")
        if self.noise_sigma < 0 or self.scale < 0 or self.alpha < 0:
            raise InvalidInputError("alpha, scale and noise_sigma must be nonnegative")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")

    def spectrum(self) -> np.ndarray:
        k = np.arange(1, min(self.d_x, self.d_y) + 1, dtype=float)
        return self.scale * k ** (-self.alpha)


def stream_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the stream identified by ``(seed, *key)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def _random_orthonormal(rng, n: int, k: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, k)))
    # fix column signs so the draw is unique given the Gaussian matrix
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def make_ground_truth(spec: ScenarioSpec) -> LinearOperator:
    """Factored operator with random singular vectors and spectrum ``scale * k^-alpha``."""
    rng = stream_rng(spec.seed, TRUTH)
    k = min(spec.d_x, spec.d_y)
    U = _random_orthonormal(rng, spec.d_y, k)
    V = _random_orthonormal(rng, spec.d_x, k)
    return LinearOperator.from_factors(U, spec.spectrum(), V)


def _draw(rng, truth: LinearOperator, spec: ScenarioSpec, n: int):
    if spec.sample_dist == "unit-sphere":
        xs = rng.standard_normal((n, spec.d_x))
        xs *= spec.C_x / np.linalg.norm(xs, axis=1, keepdims=True)
    else:
        xs = rng.uniform(-1.0, 1.0, (n, spec.d_x)) * (spec.C_x / math.sqrt(spec.d_x))
    noise = rng.standard_normal((n, spec.d_y))
    ys = xs @ np.asarray(truth.matrix).T
    if spec.noise_sigma > 0:
        ys = ys + spec.noise_sigma * noise
    norms = np.linalg.norm(ys, axis=1, keepdims=True)
    over = norms > spec.C_y
    ys = np.where(over, ys * (spec.C_y / np.where(over, norms, 1.0)), ys)
    slack = 1 + 1e-12
    if np.any(np.linalg.norm(xs, axis=1) > spec.C_x * slack) or \
            np.any(np.linalg.norm(ys, axis=1) > spec.C_y * slack):
        raise AssertionError("sample violates its norm bound")
    return xs, ys


def sample_pair(rng: np.random.Generator, truth, spec: ScenarioSpec):
    """One draw ``(x, y)``: ``y = truth(x) + noise``, radially clipped to ``C_y``."""
    xs, ys = _draw(rng, as_operator(truth), spec, 1)
    return xs[0], ys[0]


def sample_pairs(truth, spec: ScenarioSpec, count: int, start: int = 0, stream=(TRAIN,)):
    """Samples ``start .. start+count-1`` of a stream as ``(xs, ys)`` row arrays.

    Samples are generated in fixed blocks keyed by ``(seed, *stream, block)``,
    so sample ``i`` is the same regardless of how the range is requested.
    """
    truth = as_operator(truth)
    if count <= 0:
        return np.zeros((0, spec.d_x)), np.zeros((0, spec.d_y))
    first, last = start // BLOCK, (start + count - 1) // BLOCK
    xs_parts, ys_parts = [], []
    for b in range(first, last + 1):
        xb, yb = _draw(stream_rng(spec.seed, *stream, b), truth, spec, BLOCK)
        lo = max(start - b * BLOCK, 0)
        hi = min(start + count - b * BLOCK, BLOCK)
        xs_parts.append(xb[lo:hi])
        ys_parts.append(yb[lo:hi])
    return np.concatenate(xs_parts), np.concatenate(ys_parts)


def tikhonov_truth(A, lam: float) -> LinearOperator:
    """Regularized inverse ``(A^T A + lam I)^-1 A^T``, built spectrally."""
    if not lam > 0:
        raise InvalidInputError(f"lam must be positive, got {lam}")
    A = as_operator(A)
    if A.is_factored:
        U, s, V = A.U, np.asarray(A.s), A.V
    else:
        U, s, Vt = np.linalg.svd(A.matrix, full_matrices=False)
        V = Vt.T
    filt = s / (s * s + lam)
    # the filter is not monotone in s, so reorder
    order = np.argsort(-filt, kind="stable")
    return LinearOperator.from_factors(V[:, order], filt[order], U[:, order], check=False)
