"""Polynomial and frequency-response graph filters, and the learned
polynomial-filter signal model."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidArgumentError, SingularModelError
from .spectral import PROJECTOR_IMAG_TOL


@dataclass(frozen=True, eq=False)
class PolynomialFilter:
    """H = sum_t coeffs[t] R^t."""

    coeffs: np.ndarray
    reference: np.ndarray = field(repr=False)

    def matrix(self):
        R = np.asarray(self.reference)
        H = np.zeros_like(R, dtype=float)
        for c in self.coeffs[::-1]:
            H = H @ R
            H[np.diag_indices_from(H)] += c
        return H


def apply_polynomial(pf, s):
    """Evaluate sum_t h_t R^t s by Horner's rule (T matrix-vector products)."""
    coeffs = np.asarray(pf.coeffs)
    s = np.asarray(s)
    out = coeffs[-1] * s
    for c in coeffs[-2::-1]:
        out = pf.reference @ out + c * s
    return out


@dataclass(frozen=True, eq=False)
class FrequencyResponseFilter:
    """matrix = sum over frequency groups of h(t * omega) S_omega."""

    response: Callable
    dilation: float
    groups: list = field(repr=False)
    matrix: np.ndarray = field(repr=False)

    def __call__(self, s):
        return self.matrix @ s


def group_responses(dec, h, t=1.0):
    """Per-eigenvalue response h(t * omega_group) (shared inside each group)."""
    r = np.empty(dec.n)
    for g in dec.groups:
        r[g.eigen_indices] = h(t * g.frequency)
    return r


def frequency_matrix(dec, responses):
    """Xi diag(responses) Xi^-1, asserted real."""
    M = dec.eigvecs @ (np.asarray(responses)[:, None] * dec.inv_eigvecs)
    scale = max(1.0, np.abs(M.real).max())
    if np.abs(M.imag).max() > PROJECTOR_IMAG_TOL * scale:
        raise InvalidArgumentError(
            f"frequency filter has imaginary residual {np.abs(M.imag).max():.2e}")
    return M.real


def build_frequency_filter(dec, h, t=1.0):
    """Random-walk graph filter sum_l h(t omega_l) S_l over ``dec``'s groups."""
    M = frequency_matrix(dec, group_responses(dec, h, t))
    return FrequencyResponseFilter(h, t, dec.groups, M)


@dataclass(frozen=True)
class SamplingModel:
    """Bernoulli sampling y_j = eps_j f0_j.

    ``kind`` is ``"uniform"`` (eps_j ~ Ber(p)) or ``"stationary"``
    (eps_j ~ Ber(min(a pi_j, 1)) with a chosen so the expected number of
    samples is p N).
    """

    kind: str
    p: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("uniform", "stationary"):
            raise InvalidArgumentError(f"unknown sampling kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise InvalidArgumentError(f"sampling proportion must lie in [0, 1], got {self.p}")

    def probabilities(self, n, pi=None):
        if self.kind == "uniform":
            return np.full(n, float(self.p))
        if pi is None:
            raise InvalidArgumentError("stationary sampling needs pi")
        return stationary_bernoulli_probabilities(pi, self.p)

    def draw(self, f0, pi=None, rng=None, size=None):
        rng = np.random.default_rng(self.seed if rng is None else rng)
        f0 = np.asarray(f0, dtype=float)
        delta = self.probabilities(f0.size, pi)
        shape = (f0.size,) if size is None else (size, f0.size)
        return (rng.random(shape) < delta) * f0


def stationary_bernoulli_probabilities(pi, p):
    """delta_j = min(a pi_j, 1) with sum_j delta_j = p N."""
    pi = np.asarray(pi, dtype=float)
    n = pi.size
    target = p * n
    if target <= 0:
        return np.zeros(n)
    if target >= n:
        return np.ones(n)

    def excess(a):
        return np.minimum(a * pi, 1.0).sum() - target

    hi = 1.0 / pi.min()
    a = brentq(excess, 0.0, hi, xtol=1e-14, rtol=1e-15)
    return np.minimum(a * pi, 1.0)


def bernoulli_moments(f0, delta):
    """Closed-form E(y) and E(y y^T) for y_j = eps_j f0_j, eps_j ~ Ber(delta_j)."""
    f0 = np.asarray(f0, dtype=float)
    delta = np.asarray(delta, dtype=float)
    mean = delta * f0
    second = np.outer(mean, mean)
    second[np.diag_indices_from(second)] = delta * f0 ** 2
    return mean, second


def model_matrices(R, mean, second, mu, K):
    """Z[k, l] = Tr((R^k)^T M R^l E(yy^T)) and Q = [R^0 E(y), ..., R^K E(y)]."""
    R = np.asarray(R, dtype=float)
    n = R.shape[0]
    M = np.asarray(mu, dtype=float)
    powers = [np.eye(n)]
    for _ in range(K):
        powers.append(powers[-1] @ R)
    Z = np.empty((K + 1, K + 1))
    for k in range(K + 1):
        A = powers[k].T * M[None, :]
        for l in range(k, K + 1):
            Z[k, l] = Z[l, k] = np.trace(A @ powers[l] @ second)
    Q = np.column_stack([Rk @ mean for Rk in powers])
    return Z, Q


def learn_signal_model(R, f0, sampling, K=10, mu=None, n_mc=None, pi=None, rng=None):
    """Coefficients of the polynomial filter minimizing E||f0 - sum theta_k R^k y||_mu^2.

    Moments of ``y`` are exact for the Bernoulli models unless ``n_mc`` is
    given, in which case they are estimated from that many draws. Solves
    Z theta = Q^T M f0, adding ridge jitter when Z is singular.
    """
    if K < 0:
        raise InvalidArgumentError("filter degree K must be >= 0")
    f0 = np.asarray(f0, dtype=float)
    n = f0.size
    mu = np.ones(n) if mu is None else np.asarray(mu, dtype=float)
    if n_mc:
        Y = sampling.draw(f0, pi=pi, rng=rng, size=int(n_mc))
        mean = Y.mean(axis=0)
        second = Y.T @ Y / Y.shape[0]
    else:
        mean, second = bernoulli_moments(f0, sampling.probabilities(n, pi))
    Z, Q = model_matrices(R, mean, second, mu, K)
    rhs = Q.T @ (mu * f0)
    return _solve_normal(Z, rhs)


def _solve_normal(Z, rhs):
    size = Z.shape[0]
    tr = np.trace(Z)
    if not np.isfinite(tr) or tr <= 0:
        raise SingularModelError("normal matrix Z is zero or not finite")
    if np.linalg.cond(Z) < 1e12:
        return np.linalg.solve(Z, rhs)
    Zj = Z + 1e-10 * tr / size * np.eye(size)
    if np.linalg.cond(Zj) > 1e15:
        raise SingularModelError(f"Z singular even after jitter (cond {np.linalg.cond(Zj):.2e})")
    return np.linalg.solve(Zj, rhs)


def signs(x):
    """Entrywise sign with sign(0) = +1."""
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def reconstruct_labels(H, y):
    return signs(np.asarray(H) @ np.asarray(y))


def accuracy(pred, truth):
    return float(np.mean(np.asarray(pred) == np.asarray(truth)))
