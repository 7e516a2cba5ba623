"""The three directed-graph Laplacians and their quadratic forms."""
from __future__ import annotations

import enum

import numpy as np

from .random_walk import _positive_pi, time_reversal


class LaplacianKind(enum.Enum):
    NORMALIZED = "normalized"
    RANDOM_WALK = "random_walk"
    COMBINATORIAL = "combinatorial"


def normalized_laplacian(w):
    """I - (Pi^1/2 P Pi^-1/2 + Pi^-1/2 P^T Pi^1/2) / 2, symmetric PSD."""
    s = np.sqrt(_positive_pi(w.pi))
    T = w.P * s[:, None] / s[None, :]
    return np.eye(w.n) - 0.5 * (T + T.T)


def random_walk_laplacian(w):
    """I - (P + P*) / 2. Unchanged when P is replaced by any P_bar_alpha."""
    return np.eye(w.n) - 0.5 * (w.P + time_reversal(w).P)


def combinatorial_laplacian(w):
    """Pi - (Pi P + P^T Pi) / 2, equal to Pi L_RW."""
    pi = _positive_pi(w.pi)
    PiP = pi[:, None] * w.P
    return np.diag(pi) - 0.5 * (PiP + PiP.T)


def laplacian(w, kind):
    kind = LaplacianKind(kind)
    return {
        LaplacianKind.NORMALIZED: normalized_laplacian,
        LaplacianKind.RANDOM_WALK: random_walk_laplacian,
        LaplacianKind.COMBINATORIAL: combinatorial_laplacian,
    }[kind](w)


def quadratic_form(f, L, weights=None):
    """<f, L f> with conjugate-linear first slot, optionally pi-weighted."""
    f = np.asarray(f)
    Lf = L @ f
    if weights is None:
        return np.vdot(f, Lf)
    return np.sum(np.asarray(weights) * np.conj(f) * Lf)
