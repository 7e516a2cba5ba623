"""Directed graph Fourier transform built on the eigenbasis of a walk operator.

The frequency of an eigenvector with eigenvalue ``v`` is ``1 - Re(v)``.
Eigenvalues sharing a real part form one mono-frequency group whose
spectral projector is real.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError, NoConjugatePairError, NonDiagonalizableError
from .random_walk import _positive_pi, inner_pi, norm_pi, similar_operator_T

MAX_COND = 1e12
MAX_RESIDUAL = 1e-6
PROJECTOR_IMAG_TOL = 1e-8


@dataclass(eq=False)
class FrequencyGroup:
    """Eigen-indices sharing one frequency, with a lazily built projector."""

    frequency: float
    eigen_indices: np.ndarray
    _eigvecs: np.ndarray = field(repr=False)
    _inv_eigvecs: np.ndarray = field(repr=False)

    @property
    def dimension(self):
        return int(self.eigen_indices.size)

    @cached_property
    def projector(self):
        idx = self.eigen_indices
        S = self._eigvecs[:, idx] @ self._inv_eigvecs[idx, :]
        imag = np.abs(S.imag).max() if S.size else 0.0
        if imag > PROJECTOR_IMAG_TOL:
            raise NonDiagonalizableError(imag, np.nan)
        return S.real


@dataclass(eq=False)
class SpectralDecomposition:
    """A = eigvecs @ diag(eigvals) @ inv_eigvecs, plus the frequency table."""

    eigvecs: np.ndarray
    eigvals: np.ndarray
    inv_eigvecs: np.ndarray
    cond_number: float
    frequencies: np.ndarray
    groups: list
    operator: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.eigvals.size

    def group_of(self, index):
        for g in self.groups:
            if index in g.eigen_indices:
                return g
        raise IndexError(index)

    def to_csv(self, path_or_file):
        """Write ``index, re, im, omega`` rows, floats with 17 significant digits."""
        rows = [("index", "re", "im", "omega")]
        for i, (v, w) in enumerate(zip(self.eigvals, self.frequencies)):
            rows.append((str(i), f"{v.real:.17g}", f"{v.imag:.17g}", f"{w:.17g}"))
        if hasattr(path_or_file, "write"):
            csv.writer(path_or_file, lineterminator="\n").writerows(rows)
        else:
            with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)


def _normalize_columns(V):
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    for j in range(V.shape[1]):
        col = V[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            c = col[nz[0]]
            V[:, j] = col * (abs(c) / c)
    return V


def _default_tol(frequencies):
    spread = float(np.ptp(frequencies)) if frequencies.size else 0.0
    return max(1e-8 * spread, 1e-12)


def frequency_groups(dec, tol_freq=None):
    """Cluster eigen-indices whose frequencies differ by at most ``tol_freq``.

    Groups come out in increasing frequency; the group frequency is the
    mean of its members.
    """
    return _group(dec.frequencies, dec.eigvecs, dec.inv_eigvecs, tol_freq)


def _group(freqs, V, Vinv, tol_freq):
    if tol_freq is None:
        tol_freq = _default_tol(freqs)
    order = np.argsort(freqs, kind="stable")
    groups = []
    current = [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if freqs[b] - freqs[a] <= tol_freq:
            current.append(b)
        else:
            groups.append(current)
            current = [b]
    groups.append(current)
    return [FrequencyGroup(float(np.mean(freqs[idx])), np.sort(np.asarray(idx)), V, Vinv)
            for idx in groups]


def _finish(A, vals, V, Vinv, tol_freq, check=True):
    cond = float(np.linalg.cond(V))
    if check:
        scale = max(np.abs(A).max(), 1e-300)
        residual = np.abs(A @ V - V * vals[None, :]).max() / scale
        recon = np.abs(V @ (vals[:, None] * Vinv) - A).max() / scale
        residual = max(residual, recon)
        if not np.isfinite(cond) or cond > MAX_COND or residual > MAX_RESIDUAL:
            raise NonDiagonalizableError(residual, cond)
    freqs = 1.0 - vals.real
    groups = _group(freqs, V, Vinv, tol_freq)
    return SpectralDecomposition(V, vals, Vinv, cond, freqs, groups, np.asarray(A))


def decompose(A, tol_freq=None):
    """Full complex eigendecomposition of a real square matrix.

    Eigenvalues are sorted by decreasing real part, then increasing
    imaginary part. Each eigenvector has unit l2 norm and its first
    nonzero coefficient real positive.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"need a square matrix, got shape {A.shape}")
    vals, V = np.linalg.eig(A)
    vals = vals.astype(complex)
    # conjugate pairs from LAPACK are exact; round tiny imaginary parts of
    # real eigenvalues so the sort is stable
    vals.imag[np.abs(vals.imag) < 1e-14 * max(1.0, np.abs(vals).max())] = 0.0
    order = np.lexsort((vals.imag, -vals.real))
    vals = vals[order]
    V = _normalize_columns(V[:, order].astype(complex))
    try:
        Vinv = np.linalg.inv(V)
    except np.linalg.LinAlgError:
        raise NonDiagonalizableError(np.inf, np.inf) from None
    return _finish(A, vals, V, Vinv, tol_freq)


def pi_orthonormal_decomposition(w, tol_freq=None):
    """Eigenbasis of a reversible walk that is orthonormal in l2(V, pi).

    Diagonalizes the symmetric T = Pi^1/2 P Pi^-1/2 with ``eigh`` and maps
    the orthonormal eigenvectors back through Pi^-1/2.
    """
    T = similar_operator_T(w)
    asym = np.abs(T - T.T).max()
    if asym > 1e-10:
        raise InvalidArgumentError(f"walk is not reversible (asymmetry {asym:.2e}); "
                                   "use reversibilized(w, 0.5)")
    vals, U = np.linalg.eigh(0.5 * (T + T.T))
    order = np.argsort(-vals, kind="stable")
    vals, U = vals[order], U[:, order]
    s = np.sqrt(_positive_pi(w.pi))
    V = (U / s[:, None]).astype(complex)
    Vinv = (U.T * s[None, :]).astype(complex)
    dec = _finish(w.P, vals.astype(complex), V, Vinv, tol_freq, check=False)
    return dec


def gft(dec, s):
    """Fourier coefficients Xi^-1 s."""
    return dec.inv_eigvecs @ np.asarray(s)


def igft(dec, shat):
    """Signal Xi shat; real input operators give real signals up to rounding."""
    return dec.eigvecs @ np.asarray(shat)


def dirichlet_energy(f, w):
    """1/2 sum_{x,y} pi(x) p(x, y) |f(x) - f(y)|^2."""
    f = np.asarray(f)
    rows, cols = np.nonzero(w.P)
    diff = np.abs(f[rows] - f[cols]) ** 2
    return 0.5 * float(np.sum(w.pi[rows] * w.P[rows, cols] * diff))


def rayleigh_quotient(f, w):
    """Dirichlet energy over ||f||_pi^2; equals 1 - Re(v) on eigenvectors of P."""
    den = norm_pi(f, w.pi) ** 2
    if den == 0:
        raise InvalidArgumentError("Rayleigh quotient of the zero signal")
    return dirichlet_energy(f, w) / den


def real_modes(group, dec):
    """Cosine/sine pairs ((xi + conj xi)/2, (xi - conj xi)/2i) for each conjugate pair.

    Returns a list of ``(cos, sin)`` real vectors, one per eigenvalue with
    positive imaginary part whose conjugate is in the same group.
    """
    vals = dec.eigvals[group.eigen_indices]
    pairs = []
    for i, v in zip(group.eigen_indices, vals):
        if v.imag <= 0:
            continue
        match = np.abs(vals - np.conj(v)) <= 1e-8 * max(1.0, abs(v))
        if not match.any():
            continue
        xi = dec.eigvecs[:, i]
        pairs.append((((xi + np.conj(xi)) / 2).real, ((xi - np.conj(xi)) / 2j).real))
    if not pairs:
        raise NoConjugatePairError(
            f"group at frequency {group.frequency:.6g} has no conjugate eigenvalue pair")
    return pairs


__all__ = [
    "FrequencyGroup",
    "SpectralDecomposition",
    "decompose",
    "pi_orthonormal_decomposition",
    "frequency_groups",
    "gft",
    "igft",
    "dirichlet_energy",
    "rayleigh_quotient",
    "real_modes",
    "inner_pi",
]
