"""Semi-supervised label recovery on directed graphs.

l2 methods solve the quadratic problems in closed form; the l1 method
finds sparse synthesis coefficients over a wavelet frame with a monotone
accelerated proximal gradient.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, SolverError
from .filters import accuracy, signs
from .graph_core import symmetrize
from .laplacians import normalized_laplacian
from .random_walk import _positive_pi, from_graph
from .wavelet_frame import FrameOperators

COUNTING = "counting"
STATIONARY = "stationary"


@dataclass(frozen=True, eq=False)
class LabelProblem:
    """Labels in {-1, 0, +1} (0 = unknown) and the regularization weight gamma."""

    labels: np.ndarray
    gamma: float = 1.0

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=float)
        if not np.all(np.isin(lab, (-1.0, 0.0, 1.0))):
            raise InvalidArgumentError("labels must be -1, 0 (unknown) or +1")
        object.__setattr__(self, "labels", lab)

    @classmethod
    def from_truth(cls, truth, known, gamma=1.0):
        lab = np.zeros(len(truth))
        lab[known] = np.asarray(truth, dtype=float)[known]
        return cls(lab, gamma)

    @property
    def known(self):
        return self.labels != 0

    @property
    def mask_l(self):
        return np.diag(self.known.astype(float))

    @property
    def mask_u(self):
        return np.eye(self.labels.size) - self.mask_l


def _check_gamma(gamma):
    if not gamma >= 0:
        raise SolverError(f"regularization gamma must be >= 0, got {gamma}")


def ssl_l2_scores(problem, X, space=COUNTING, pi=None):
    """Continuous solution (I + gamma X)^-1 M_l y before taking signs.

    ``space="counting"`` needs X symmetric PSD; ``space="stationary"``
    needs Pi X symmetric PSD (X self-adjoint in l2(V, pi)).
    """
    _check_gamma(problem.gamma)
    X = np.asarray(X, dtype=float)
    if space == COUNTING:
        G = X
    elif space == STATIONARY:
        if pi is None:
            raise InvalidArgumentError("stationary space needs pi")
        G = _positive_pi(pi)[:, None] * X
    else:
        raise InvalidArgumentError(f"unknown space {space!r}")
    if np.abs(G - G.T).max() > 1e-10 * max(1.0, np.abs(G).max()):
        raise SolverError("regularizer is not self-adjoint in the working inner product")
    if np.linalg.eigvalsh(0.5 * (G + G.T)).min() < -1e-10:
        raise SolverError("regularizer is not positive semidefinite")
    n = X.shape[0]
    rhs = problem.known * problem.labels
    try:
        return np.linalg.solve(np.eye(n) + problem.gamma * X, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError(str(exc)) from None


def ssl_l2(problem, X, space=COUNTING, pi=None):
    """sign[(I + gamma X)^-1 M_l y] with sign(0) = +1."""
    return signs(ssl_l2_scores(problem, X, space, pi))


def normalized_adjacency(W):
    """W / sigma_max(W)."""
    W = np.asarray(W, dtype=float)
    s = np.linalg.norm(W, 2)
    if s == 0:
        raise InvalidArgumentError("adjacency matrix is zero")
    return W / s


def moura_regularizer(W_norm):
    """R_M = (I - W_norm)^T (I - W_norm)."""
    E = np.eye(W_norm.shape[0]) - W_norm
    return E.T @ E


def ssl_l2_moura_scores(problem, W_norm):
    """(M_l + gamma R_M)^-1 M_l y, with 1e-12 jitter if the system is singular."""
    _check_gamma(problem.gamma)
    A = problem.mask_l + problem.gamma * moura_regularizer(np.asarray(W_norm, dtype=float))
    rhs = problem.known * problem.labels
    if np.linalg.cond(A) > 1e14:
        A = A + 1e-12 * np.eye(A.shape[0])
        if np.linalg.cond(A) > 1e15:
            raise SolverError("M_l + gamma R_M is singular even after jitter")
    return np.linalg.solve(A, rhs)


def ssl_l2_moura(problem, W_norm):
    return signs(ssl_l2_moura_scores(problem, W_norm))


def _soft(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


@dataclass
class L1Result:
    labels: np.ndarray
    coefficients: np.ndarray
    objective: list = field(repr=False)
    converged: bool = True
    iterations: int = 0


def lasso_objective(w, X, y, lam):
    r = y - X @ w
    return float(r @ r + lam * np.abs(w).sum())


def solve_lasso(X, y, lam, max_iter=20000, tol=1e-12, w0=None):
    """Minimize ||y - Xw||^2 + lam ||w||_1 with monotone FISTA.

    Step size is 1 / (2 sigma_max(X)^2), the inverse Lipschitz constant of
    the smooth part's gradient. Momentum restarts whenever a candidate
    step would increase the objective, so recorded objectives never rise.
    Returns ``(w, history, converged, iterations)``.
    """
    if lam < 0:
        raise InvalidArgumentError("lambda must be >= 0")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    L = 2.0 * np.linalg.norm(X, 2) ** 2
    if L == 0:
        return np.zeros(X.shape[1]), [lasso_objective(np.zeros(X.shape[1]), X, y, lam)], True, 0
    Xty = X.T @ y
    XtX = X.T @ X
    x = np.zeros(X.shape[1]) if w0 is None else np.array(w0, dtype=float)
    x_prev = x.copy()
    v = x.copy()
    t = 1.0
    F = lasso_objective(x, X, y, lam)
    hist = [F]
    for it in range(1, max_iter + 1):
        grad = 2.0 * (XtX @ v - Xty)
        z = _soft(v - grad / L, lam / L)
        Fz = lasso_objective(z, X, y, lam)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if Fz <= F:
            x_prev, x = x, z
            change = F - Fz
            F = Fz
            v = x + ((t - 1.0) / t_next) * (x - x_prev)
            t = t_next
        else:
            # restart momentum from the current iterate
            change = np.inf
            v = x.copy()
            t = 1.0
        hist.append(F)
        if change <= tol * max(1.0, abs(F)):
            return x, hist, True, it
    return x, hist, False, max_iter


def ssl_l1(problem, bank, lam, max_iter=20000, tol=1e-12):
    """w* = argmin ||M y - M K w||^2 + lam ||w||_1, labels sign(K w*)."""
    K = bank.stacked_synthesis() if isinstance(bank, FrameOperators) else np.asarray(bank)
    m = problem.known.astype(float)
    X = m[:, None] * K
    y = m * problem.labels
    w, hist, ok, it = solve_lasso(X, y, lam, max_iter, tol)
    if not ok:
        warnings.warn(f"l1 solver stopped at max_iter={max_iter} without converging",
                      RuntimeWarning, stacklevel=2)
    return L1Result(signs(K @ w), w, hist, ok, it)


def heat_kernel_bank(L, scales=(2.0, 4.0)):
    """Heat-kernel bank H_j = exp(-t_j L), G_1 = I - H_1, G_j = H_{j-1} - H_j.

    Synthesis is (H_J, G_1, ..., G_J), which telescopes to the identity, so
    the analysis operators are all identities.
    """
    L = np.asarray(L, dtype=float)
    if np.abs(L - L.T).max() > 1e-10 * max(1.0, np.abs(L).max()):
        raise InvalidArgumentError("heat kernel bank needs a symmetric Laplacian")
    lam, U = np.linalg.eigh(0.5 * (L + L.T))
    H = [(U * np.exp(-t * lam)[None, :]) @ U.T for t in scales]
    n = L.shape[0]
    G = [np.eye(n) - H[0]] + [H[j - 1] - H[j] for j in range(1, len(H))]
    synthesis = [H[-1]] + G
    analysis = [np.eye(n) for _ in synthesis]
    K = np.hstack(synthesis)
    nK = np.linalg.norm(K, 2)
    return FrameOperators(synthesis, analysis, 1.0 / nK ** 2, float(len(synthesis)))


# ---------------------------------------------------------------- experiments

METHODS = ("L_norm", "L_rw", "R_M", "L_norm_sym", "L_rw_sym", "l1")


def default_gamma_grid():
    return np.concatenate([[0.0], np.logspace(-3, 1, 21)])


class _SymmetricSolver:
    """(I + gamma L_s)^-1 b for symmetric L_s, optionally conjugated by Pi^-+1/2."""

    def __init__(self, L_sym, pi=None):
        self.lam, self.U = np.linalg.eigh(L_sym)
        self.s = None if pi is None else np.sqrt(pi)

    def __call__(self, rhs, gamma):
        b = rhs if self.s is None else rhs * self.s
        out = self.U @ ((self.U.T @ b) / (1.0 + gamma * self.lam))
        return out if self.s is None else out / self.s


@dataclass(eq=False)
class SSLContext:
    """Operators shared by all realizations of an experiment on one graph."""

    graph: object
    truth: np.ndarray
    solvers: dict = field(default_factory=dict, repr=False)
    W_norm: np.ndarray | None = field(default=None, repr=False)
    l1_bank: FrameOperators | None = field(default=None, repr=False)

    @classmethod
    def build(cls, graph, truth, methods=METHODS, l1_scales=(2.0, 4.0)):
        truth = np.asarray(truth, dtype=float)
        if not np.all(np.isin(truth, (-1.0, 1.0))):
            raise InvalidArgumentError("ground-truth labels must all be -1 or +1")
        ctx = cls(graph, truth)
        need_dir = any(m in methods for m in ("L_norm", "L_rw", "l1"))
        need_sym = any(m in methods for m in ("L_norm_sym", "L_rw_sym"))
        if need_dir:
            w = from_graph(graph)
            Ln = normalized_laplacian(w)
            if "L_norm" in methods:
                ctx.solvers["L_norm"] = _SymmetricSolver(Ln)
            if "L_rw" in methods:
                # L_RW = Pi^-1/2 L_norm Pi^1/2
                ctx.solvers["L_rw"] = _SymmetricSolver(Ln, w.pi)
            if "l1" in methods:
                ctx.l1_bank = heat_kernel_bank(Ln, l1_scales)
        if need_sym:
            ws = from_graph(symmetrize(graph))
            Ls = normalized_laplacian(ws)
            if "L_norm_sym" in methods:
                ctx.solvers["L_norm_sym"] = _SymmetricSolver(Ls)
            if "L_rw_sym" in methods:
                ctx.solvers["L_rw_sym"] = _SymmetricSolver(Ls, ws.pi)
        if "R_M" in methods:
            ctx.W_norm = normalized_adjacency(graph.adjacency())
        return ctx

    def predict(self, method, known, param):
        problem = LabelProblem.from_truth(self.truth, known, param)
        if method in self.solvers:
            _check_gamma(param)
            return signs(self.solvers[method](problem.known * problem.labels, param))
        if method == "R_M":
            return ssl_l2_moura(problem, self.W_norm)
        if method == "l1":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                return ssl_l1(problem, self.l1_bank, param, max_iter=2000, tol=1e-9).labels
        raise InvalidArgumentError(f"unknown SSL method {method!r}")


def _cv_score(ctx, method, known_idx, param, folds):
    """Mean accuracy on held-out folds of the known set."""
    n = ctx.truth.size
    hits = 0
    for fold in folds:
        train = np.zeros(n, dtype=bool)
        train[known_idx] = True
        train[fold] = False
        pred = ctx.predict(method, train, param)
        hits += np.sum(pred[fold] == ctx.truth[fold])
    return hits / known_idx.size


def _realization(ctx, methods, n_known, grids, seq, n_folds):
    rng = np.random.default_rng(seq)
    n = ctx.truth.size
    known_idx = rng.choice(n, size=n_known, replace=False)
    known = np.zeros(n, dtype=bool)
    known[known_idx] = True
    degenerate = np.unique(ctx.truth[known]).size < 2
    folds = np.array_split(known_idx, min(n_folds, n_known)) if n_known > 1 else []
    out = {}
    for m in methods:
        best = None
        for param in grids[m]:
            score = _cv_score(ctx, m, known_idx, param, folds) if folds else 0.0
            # ties keep the earlier grid value
            if best is None or score > best[0]:
                best = (score, param)
        param = best[1]
        pred = ctx.predict(m, known, param)
        test = accuracy(pred[~known], ctx.truth[~known]) if (~known).any() else 1.0
        out[m] = (test, param)
    return out, degenerate


def _n_threads(threads):
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("DIGH_THREADS")
    return max(1, int(env)) if env else 1


@dataclass
class SSLRow:
    method: str
    p: float
    mean_accuracy: float
    std: float
    best_param: float


def evaluate_ssl(graph, truth, methods=("L_norm", "L_rw", "R_M"), p=0.1, n_realizations=100,
                 gamma_grid=None, lambda_grid=None, seed=0, threads=None, context=None,
                 n_folds=5):
    """Average unlabeled-vertex accuracy over random known sets.

    Each realization draws ceil(p N) known vertices uniformly, picks the
    parameter with the best ``n_folds``-fold cross-validated accuracy inside
    the known set, refits on the whole known set and scores the unknown
    vertices. Realization r is seeded by spawn(seed)[r], so results do
    not depend on the number of threads.
    """
    if not 0.0 < p < 1.0:
        raise InvalidArgumentError(f"known fraction p must lie in (0, 1), got {p}")
    methods = tuple(methods)
    ctx = context or SSLContext.build(graph, truth, methods)
    n = ctx.truth.size
    n_known = min(n - 1, max(1, math.ceil(p * n - 1e-12)))
    gg = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    lg = (np.logspace(-3, 1, 5) if lambda_grid is None
          else np.asarray(lambda_grid, dtype=float))
    grids = {m: (lg if m == "l1" else gg) for m in methods}
    seqs = np.random.SeedSequence(seed).spawn(n_realizations)

    def job(s):
        return _realization(ctx, methods, n_known, grids, s, n_folds)

    nt = _n_threads(threads)
    if nt > 1:
        with ThreadPoolExecutor(nt) as ex:
            results = list(ex.map(job, seqs))
    else:
        results = [job(s) for s in seqs]
    n_degenerate = sum(d for _, d in results)
    if n_degenerate:
        warnings.warn(f"{n_degenerate} of {n_realizations} realizations have known labels "
                      "from a single class", RuntimeWarning, stacklevel=2)
    rows = []
    for m in methods:
        acc = np.array([r[m][0] for r, _ in results])
        par = np.array([r[m][1] for r, _ in results])
        rows.append(SSLRow(m, float(p), float(acc.mean()), float(acc.std()),
                           float(np.median(par))))
    return rows
