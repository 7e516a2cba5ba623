"""Random walks on directed graphs and the operator families built from them.

Every walk carries its transition matrix ``P`` (dense, row-stochastic) and
its stationary distribution ``pi``. Lazy and reversibilized variants share
the parent's ``pi``, so it is propagated instead of being re-solved.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConnectivityError,
    ConvergenceError,
    DanglingNodeError,
    DegenerateStationaryError,
    InvalidArgumentError,
)
from .graph_core import DirectedGraph, period, strongly_connected_components

logger = logging.getLogger(__name__)

PI_FLOOR = 1e-14
DIRECT_SOLVE_MAX_N = 2000


@dataclass(frozen=True, eq=False)
class RandomWalk:
    """Transition matrix ``transition`` with stationary row vector ``stationary``."""

    transition: np.ndarray
    stationary: np.ndarray
    source_graph: DirectedGraph | None = field(default=None, repr=False)
    ergodic_flag: bool = True

    def __post_init__(self):
        for a in (self.transition, self.stationary):
            a.setflags(write=False)

    @property
    def P(self):
        return self.transition

    @property
    def pi(self):
        return self.stationary

    @property
    def n(self):
        return self.transition.shape[0]


def _positive_pi(pi):
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= PI_FLOOR):
        raise DegenerateStationaryError(
            f"stationary distribution has entries <= {PI_FLOOR:g} "
            f"(min {pi.min():.3e}); Pi^(+-1/2) is undefined"
        )
    return pi


def _is_ergodic(P):
    """Irreducible chains are ergodic iff aperiodic; decide via cycle-length gcd."""
    if np.any(np.diag(P) > 0):
        return True
    return period(DirectedGraph.from_adjacency(P)) == 1


def _stationary_direct(P):
    n = P.shape[0]
    A = (P - np.eye(n)).T
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    return pi / pi.sum()


def _stationary_power(P, tol, max_iter):
    n = P.shape[0]
    pi = np.full(n, 1.0 / n)
    prev_res = np.inf
    stalled = 0
    for it in range(1, max_iter + 1):
        nxt = pi @ P
        nxt /= nxt.sum()
        res = np.abs(nxt - pi).sum()
        pi = nxt
        if res <= tol:
            return pi, it
        # periodic chains oscillate: the residual stops shrinking
        stalled = stalled + 1 if res >= prev_res * (1 - 1e-12) else 0
        if stalled >= 50:
            return None, it
        prev_res = res
    raise ConvergenceError("power iteration for the stationary distribution did not converge",
                           max_iter)


def compute_stationary(P, tol=1e-12, max_iter=1_000_000, method="auto"):
    """Stationary distribution of an irreducible row-stochastic ``P``.

    ``method`` is ``"power"``, ``"direct"`` (left null vector of P - I) or
    ``"auto"``, which solves directly up to 2000 states. When power
    iteration oscillates (periodic chain) it switches to the lazy chain
    (P + I) / 2, which has the same stationary distribution.
    """
    P = np.asarray(P, dtype=float)
    if method == "auto":
        method = "direct" if P.shape[0] <= DIRECT_SOLVE_MAX_N else "power"
    if method == "direct":
        pi = _stationary_direct(P)
    elif method == "power":
        pi, it = _stationary_power(P, tol, max_iter)
        if pi is None:
            logger.debug("power iteration oscillating after %d steps; using lazy chain", it)
            pi, _ = _stationary_power(0.5 * (P + np.eye(P.shape[0])), tol, max_iter)
            if pi is None:
                raise ConvergenceError("lazy power iteration stalled", max_iter)
    else:
        raise InvalidArgumentError(f"unknown stationary solver {method!r}")
    res = np.abs(pi @ P - pi).sum()
    if res > max(tol, 1e-10):
        raise ConvergenceError(f"stationary residual {res:.3e} above tolerance", max_iter)
    return pi


def _row_normalize(W):
    d = W.sum(axis=1)
    return W / d[:, None]


def from_graph(g, stationary_method="auto"):
    """Simple random walk P = D^-1 W on a strongly connected graph."""
    dangling = np.flatnonzero(g.out_degrees <= 0)
    if dangling.size:
        raise DanglingNodeError(dangling.tolist())
    n_comp = len(strongly_connected_components(g))
    if n_comp != 1:
        raise ConnectivityError(n_comp)
    P = _row_normalize(g.adjacency())
    pi = compute_stationary(P, method=stationary_method)
    return RandomWalk(P, pi, g, _is_ergodic(P))


def from_transition(P, pi=None, source_graph=None):
    """Wrap an existing row-stochastic matrix."""
    P = np.array(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise InvalidArgumentError("transition matrix must be square")
    if np.any(P < 0) or np.abs(P.sum(axis=1) - 1).max() > 1e-12:
        raise InvalidArgumentError("transition matrix must be row-stochastic")
    if pi is None:
        pi = compute_stationary(P)
    return RandomWalk(P, np.array(pi, dtype=float), source_graph, _is_ergodic(P))


def lazy(w, gamma=0.5):
    """Lazy walk (1 - gamma) P + gamma I, same stationary distribution."""
    if not 0.0 <= gamma < 1.0:
        raise InvalidArgumentError(f"laziness gamma must lie in [0, 1), got {gamma}")
    P = (1.0 - gamma) * w.P + gamma * np.eye(w.n)
    return RandomWalk(P, np.array(w.pi), w.source_graph, w.ergodic_flag or gamma > 0)


def time_reversal(w):
    """Time-reversed walk P* = Pi^-1 P^T Pi (adjoint of P in l2(V, pi))."""
    pi = _positive_pi(w.pi)
    P = (w.P.T * pi[None, :]) / pi[:, None]
    # renormalize away rounding from the stationary solve
    P /= P.sum(axis=1, keepdims=True)
    return RandomWalk(P, np.array(w.pi), w.source_graph, w.ergodic_flag)


def reversibilized(w, alpha=0.5):
    """Convex combination (1 - alpha) P + alpha P*; alpha = 1/2 is reversible."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidArgumentError(f"alpha must lie in [0, 1], got {alpha}")
    P = (1.0 - alpha) * w.P + alpha * time_reversal(w).P
    return RandomWalk(P, np.array(w.pi), w.source_graph, w.ergodic_flag)


def google_matrix(g, gamma=0.85):
    """Google matrix P_G = (1 - gamma) S + gamma 11^T / N.

    S is the walk on W after every dangling vertex gets a unit edge to all
    vertices. ``gamma`` multiplies the teleportation term.
    """
    if not 0.0 < gamma < 1.0:
        raise InvalidArgumentError(f"gamma must lie in (0, 1), got {gamma}")
    W = g.adjacency()
    n = g.n_vertices
    W[W.sum(axis=1) <= 0] = 1.0
    P = (1.0 - gamma) * _row_normalize(W) + gamma / n
    return RandomWalk(P, compute_stationary(P), g, True)


def rank_one_walk(g, epsilon=1e-4):
    """Walk on the perturbed adjacency W + epsilon 11^T / N."""
    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    W = g.adjacency() + epsilon / g.n_vertices
    P = _row_normalize(W)
    return RandomWalk(P, compute_stationary(P), g, True)


def similar_operator_T(w):
    """T = Pi^1/2 P Pi^-1/2, similar to P and symmetric when P is reversible."""
    s = np.sqrt(_positive_pi(w.pi))
    return w.P * s[:, None] / s[None, :]


def isometry_to_pi(f, pi):
    """phi(f) = Pi^-1/2 f, an isometry from l2(V) onto l2(V, pi)."""
    return np.asarray(f) / np.sqrt(_positive_pi(pi))


def isometry_from_pi(f, pi):
    """Inverse isometry Pi^1/2 f."""
    return np.asarray(f) * np.sqrt(_positive_pi(pi))


def inner_pi(f, g, pi):
    """<f, g>_pi = sum_x pi(x) conj(f(x)) g(x)."""
    return np.sum(np.asarray(pi) * np.conj(f) * g)


def norm_pi(f, pi):
    return float(np.sqrt(np.real(inner_pi(f, f, pi))))
