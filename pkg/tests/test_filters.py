import numpy as np
import pytest

from digh.errors import InvalidArgumentError
from digh.filters import (PolynomialFilter, SamplingModel, accuracy, apply_polynomial,
                          bernoulli_moments, build_frequency_filter, learn_signal_model,
                          model_matrices, reconstruct_labels, signs,
                          stationary_bernoulli_probabilities)
from digh.graph_core import gen_directed_watts_strogatz
from digh.random_walk import from_graph, similar_operator_T
from digh.spectral import decompose

from conftest import random_strong_digraph


def test_polynomial_matches_dense_powers(rng):
    for _ in range(5):
        w = from_graph(random_strong_digraph(20, rng))
        c = rng.standard_normal(5)
        pf = PolynomialFilter(c, w.P)
        s = rng.standard_normal(20)
        dense = sum(ck * np.linalg.matrix_power(w.P, k) for k, ck in enumerate(c))
        assert np.abs(apply_polynomial(pf, s) - dense @ s).max() < 1e-10
        H = pf.matrix()
        assert np.abs(H - dense).max() < 1e-10
        comm = np.abs(H @ w.P - w.P @ H).max()
        assert comm <= 1e-8 * np.linalg.norm(H, np.inf) * np.linalg.norm(w.P, np.inf)
    s = rng.standard_normal(20)
    assert np.allclose(apply_polynomial(PolynomialFilter(np.array([1.0]), w.P), s), s)
    assert np.allclose(apply_polynomial(PolynomialFilter(np.array([0.0, 1.0]), w.P), s), w.P @ s)


def test_frequency_filters(strong_graphs):
    for g in strong_graphs:
        w = from_graph(g)
        dec = decompose(w.P)
        I = build_frequency_filter(dec, lambda x: np.ones_like(x) if np.ndim(x) else 1.0)
        assert np.abs(I.matrix - np.eye(w.n)).max() < 1e-8
        perron = build_frequency_filter(dec, lambda x: float(abs(x) < 1e-9)).matrix
        assert np.abs(perron - np.outer(np.ones(w.n), w.pi)).max() < 1e-8
        F = build_frequency_filter(dec, lambda x: np.exp(-x), 16).matrix
        assert np.abs(F @ w.P - w.P @ F).max() <= 1e-8 * np.abs(F).max() * np.abs(w.P).max() * w.n


def test_stationary_probabilities(rng):
    pi = rng.dirichlet(np.full(30, 0.3))
    for p in (0.05, 0.3, 0.9):
        d = stationary_bernoulli_probabilities(pi, p)
        assert abs(d.sum() - 30 * p) < 1e-9 and d.max() <= 1
        unclipped = d < 1
        ratio = d[unclipped] / pi[unclipped]
        assert np.allclose(ratio, ratio[0])
    with pytest.raises(InvalidArgumentError):
        SamplingModel("uniform", 1.5)


def test_moments_match_monte_carlo(rng):
    f0 = rng.choice([-1.0, 1.0], 6)
    delta = rng.uniform(0.1, 0.9, 6)
    mean, second = bernoulli_moments(f0, delta)
    Y = (rng.random((200000, 6)) < delta) * f0
    assert np.abs(Y.mean(0) - mean).max() < 0.01
    assert np.abs(Y.T @ Y / len(Y) - second).max() < 0.01


def test_z_matches_monte_carlo(rng):
    w = from_graph(random_strong_digraph(10, rng))
    f0 = rng.choice([-1.0, 1.0], 10)
    sampling = SamplingModel("uniform", 0.4)
    mean, second = bernoulli_moments(f0, sampling.probabilities(10))
    K = 3
    Z, _ = model_matrices(w.P, mean, second, w.pi, K)
    Y = sampling.draw(f0, rng=rng, size=20000)
    pw = [np.linalg.matrix_power(w.P, k) for k in range(K + 1)]
    for k in range(K + 1):
        for l in range(K + 1):
            samples = np.einsum("ij,ij->i", (Y @ pw[k].T) * w.pi, Y @ pw[l].T)
            se = samples.std() / np.sqrt(len(samples))
            assert abs(samples.mean() - Z[k, l]) <= 3 * se + 1e-12


def test_scalar_normal_equation(rng):
    f0 = rng.choice([-1.0, 1.0], 12)
    R = from_graph(random_strong_digraph(12, rng)).P
    th = learn_signal_model(R, f0, SamplingModel("uniform", 0.3), K=0)
    assert np.allclose(th, [1.0])
    th = learn_signal_model(R, f0, SamplingModel("uniform", 1.0), K=0, mu=rng.random(12))
    assert np.allclose(th, [1.0])


def test_full_observation_recovers_labels(rng):
    g = gen_directed_watts_strogatz(30, 2, 0.1, seed=2)
    w = from_graph(g)
    f0 = np.where(np.arange(30) < 15, 1.0, -1.0)
    th = learn_signal_model(w.P, f0, SamplingModel("uniform", 1.0), K=4, mu=w.pi)
    H = PolynomialFilter(th, w.P).matrix()
    assert accuracy(reconstruct_labels(H, f0), f0) == 1.0


def _mc_loss(theta, R, f0, Y, mu):
    pw = [np.linalg.matrix_power(R, k) for k in range(len(theta))]
    H = sum(t * p for t, p in zip(theta, pw))
    E = f0[None, :] - Y @ H.T
    return float(np.mean(np.sum(mu * E * E, axis=1)))


def test_nested_model_monotonicity(rng):
    w = from_graph(random_strong_digraph(10, rng))
    f0 = rng.choice([-1.0, 1.0], 10)
    sampling = SamplingModel("stationary", 0.3)
    Y = sampling.draw(f0, pi=w.pi, rng=rng, size=2000)
    T = similar_operator_T(w)
    mu = np.ones(10)
    th3 = learn_signal_model(T, f0, sampling, K=3, mu=mu, pi=w.pi)
    th2 = learn_signal_model(T, f0, sampling, K=2, mu=mu, pi=w.pi)
    l3 = _mc_loss(th3, T, f0, Y, mu)
    assert l3 <= _mc_loss(np.zeros(4), T, f0, Y, mu)
    assert l3 <= _mc_loss(th2, T, f0, Y, mu) * 1.02


def test_signs_and_labels():
    assert signs(np.zeros(3)).tolist() == [1, 1, 1]
    f0 = np.array([1.0, -1.0, 1.0])
    assert np.array_equal(reconstruct_labels(np.eye(3), f0), f0)
    assert accuracy([1, -1, -1], f0) == pytest.approx(2 / 3)
