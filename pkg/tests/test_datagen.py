import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schattenlearn.datagen import (
    TRAIN,
    ScenarioSpec,
    make_ground_truth,
    sample_pair,
    sample_pairs,
    stream_rng,
    tikhonov_truth,
)
from schattenlearn.errors import InvalidInputError
from schattenlearn.operators import apply, schatten_norm, svd_spectrum


def test_truth_spectrum_and_trace_norm():
    truth = make_ground_truth(ScenarioSpec(d_x=4, d_y=4, alpha=2, scale=1))
    np.testing.assert_allclose(svd_spectrum(truth), [1, 1 / 4, 1 / 9, 1 / 16], atol=1e-14)
    assert schatten_norm(truth, 1) == pytest.approx(1.4236111111111112, abs=1e-12)


def test_flat_spectrum():
    truth = make_ground_truth(ScenarioSpec(d_x=5, d_y=5, alpha=0))
    for p in (1, 2, 3):
        assert schatten_norm(truth, p) == pytest.approx(5 ** (1 / p), rel=1e-12)


@given(st.integers(1, 12), st.integers(1, 12), st.floats(0.5, 3), st.sampled_from([1, 1.5, 2, 4]))
def test_truth_norm_formula(d_x, d_y, alpha, p):
    spec = ScenarioSpec(d_x=d_x, d_y=d_y, alpha=alpha, scale=0.7)
    k = np.arange(1, min(d_x, d_y) + 1)
    expected = np.sum((0.7 * k ** -alpha) ** p) ** (1 / p)
    assert schatten_norm(make_ground_truth(spec), p) == pytest.approx(expected, rel=1e-10)


def test_truth_is_deterministic():
    spec = ScenarioSpec(d_x=6, d_y=3, seed=42)
    a, b = make_ground_truth(spec), make_ground_truth(spec)
    assert np.array_equal(a.matrix, b.matrix)
    assert not np.array_equal(a.matrix, make_ground_truth(ScenarioSpec(d_x=6, d_y=3, seed=43)).matrix)


def test_noiseless_pair_is_exact():
    spec = ScenarioSpec(d_x=5, d_y=4, C_y=10)
    truth = make_ground_truth(spec)
    x, y = sample_pair(stream_rng(1, 2), truth, spec)
    np.testing.assert_allclose(y, apply(truth, x), atol=1e-15)
    assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-14)


def test_clipping_halves_the_output():
    spec = ScenarioSpec(d_x=5, d_y=4, alpha=0, scale=1.0, C_y=10)
    truth = make_ground_truth(spec)
    x, y = sample_pair(stream_rng(7), truth, spec)
    clipped_spec = ScenarioSpec(d_x=5, d_y=4, alpha=0, scale=1.0, C_y=0.5 * np.linalg.norm(y))
    x2, y2 = sample_pair(stream_rng(7), truth, clipped_spec)
    np.testing.assert_array_equal(x, x2)
    np.testing.assert_allclose(y2, 0.5 * y, rtol=1e-14)


@pytest.mark.parametrize("dist", ["unit-sphere", "scaled-cube"])
def test_bounds_and_fourth_moment(dist):
    spec = ScenarioSpec(d_x=8, d_y=6, C_x=1.5, C_y=0.8, noise_sigma=0.3, sample_dist=dist)
    xs, ys = sample_pairs(make_ground_truth(spec), spec, 100_000)
    nx = np.linalg.norm(xs, axis=1)
    assert nx.max() <= 1.5 * (1 + 1e-12)
    assert np.linalg.norm(ys, axis=1).max() <= 0.8 * (1 + 1e-12)
    m4 = np.mean(nx ** 4)
    assert np.isfinite(m4)
    if dist == "unit-sphere":
        assert m4 == pytest.approx(1.5 ** 4, rel=0.01)


def test_cube_fourth_moment_matches_formula():
    # x_i uniform on [-a, a], a = C_x/sqrt(d): E||x||^4 = d E x^4 + d(d-1) (E x^2)^2
    d, C = 6, 2.0
    a = C / math.sqrt(d)
    expected = d * a ** 4 / 5 + d * (d - 1) * (a * a / 3) ** 2
    spec = ScenarioSpec(d_x=d, d_y=2, C_x=C, sample_dist="scaled-cube", C_y=10)
    xs, _ = sample_pairs(make_ground_truth(spec), spec, 100_000)
    assert np.mean(np.sum(xs ** 2, axis=1) ** 2) == pytest.approx(expected, rel=0.01)


def test_noise_variance():
    spec = ScenarioSpec(d_x=3, d_y=3, scale=0.0, noise_sigma=0.1, C_y=100)
    _, ys = sample_pairs(make_ground_truth(spec), spec, 50_000)
    assert np.mean(np.sum(ys ** 2, axis=1)) == pytest.approx(3 * 0.01, rel=0.02)


def test_samples_independent_of_request_order():
    spec = ScenarioSpec(d_x=4, d_y=3, noise_sigma=0.2, seed=9)
    truth = make_ground_truth(spec)
    xs, ys = sample_pairs(truth, spec, 1000)
    for start, count in [(0, 1), (255, 2), (300, 400), (999, 1)]:
        xp, yp = sample_pairs(truth, spec, count, start=start)
        np.testing.assert_array_equal(xp, xs[start:start + count])
        np.testing.assert_array_equal(yp, ys[start:start + count])
    other, _ = sample_pairs(truth, spec, 10, stream=(TRAIN, 1))
    assert not np.array_equal(other, xs[:10])


def test_spec_validation():
    with pytest.raises(InvalidInputError):
        ScenarioSpec(C_x=0)
    with pytest.raises(InvalidInputError):
        ScenarioSpec(sample_dist="gaussian")


def test_tikhonov_diagonal():
    R = tikhonov_truth(np.diag([1.0, 0.5]), 1.0)
    np.testing.assert_allclose(R.matrix, np.diag([0.5, 0.4]), atol=1e-15)


def test_tikhonov_shrinks_with_lambda(rng):
    A = rng.standard_normal((5, 4))
    norms = [schatten_norm(tikhonov_truth(A, lam), math.inf) for lam in (1, 10, 100)]
    assert norms[0] > norms[1] > norms[2] > 0


def test_tikhonov_inverts_on_row_space(rng):
    Q1, _ = np.linalg.qr(rng.standard_normal((6, 4)))
    Q2, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    A = Q1 @ np.diag([2.0, 1.5, 1.0, 0.8]) @ Q2.T
    R = tikhonov_truth(A, 1e-10)
    assert R.shape == (4, 6)
    assert np.max(np.abs(R.matrix @ A - np.eye(4))) <= 1e-6
    np.testing.assert_allclose(R.matrix, np.linalg.solve(A.T @ A + 1e-10 * np.eye(4), A.T),
                               atol=1e-8)


def test_tikhonov_rejects_nonpositive_lambda():
    with pytest.raises(InvalidInputError):
        tikhonov_truth(np.eye(2), 0)
