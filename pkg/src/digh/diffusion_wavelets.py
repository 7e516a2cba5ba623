"""Critically sampled diffusion wavelets on directed graphs.

At each scale the columns of the current compressed operator are taken as
candidate scaling functions. A pivoted modified Gram-Schmidt pass keeps
columns until every candidate is approximated within ``eps``. In
orthogonal mode the kept span is orthonormalized. In biorthogonal mode
the selected columns themselves are the basis. Wavelets are columns
selected from the projector onto the complement of the next scaling space.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyBasisError, InvalidArgumentError, SingularTransformError

ORTHOGONAL = "orthogonal"
BIORTHOGONAL = "biorthogonal"
DEFAULT_EPS = {ORTHOGONAL: 1e-2, BIORTHOGONAL: 1e-2}


def pivoted_gram_schmidt(A, eps, max_cols=None):
    """Greedy column subset selection on ``A``.

    Repeatedly picks the column with the largest residual norm (ties go to
    the smallest index), orthogonalizes every residual against it, and
    stops once all residuals are <= ``eps`` or ``max_cols`` are chosen.
    Returns ``(indices, Q)`` with Q the orthonormal basis of the selection.
    """
    R = np.array(A, dtype=float, copy=True)
    n, m = R.shape
    limit = min(n, m) if max_cols is None else min(max_cols, n, m)
    norms = np.linalg.norm(R, axis=0)
    chosen = []
    qs = []
    available = np.ones(m, dtype=bool)
    while len(chosen) < limit:
        cand = np.where(available, norms, -1.0)
        k = int(np.argmax(cand))
        if cand[k] <= eps:
            break
        q = R[:, k] / norms[k]
        # second pass keeps q orthogonal to earlier picks at working precision
        for prev in qs:
            q -= prev * (prev @ q)
        q /= np.linalg.norm(q)
        chosen.append(k)
        qs.append(q)
        available[k] = False
        R -= np.outer(q, q @ R)
        norms = np.linalg.norm(R, axis=0)
    Q = np.column_stack(qs) if qs else np.zeros((n, 0))
    return np.asarray(chosen, dtype=np.int64), Q


@dataclass(eq=False)
class MultiResolution:
    """Nested scaling bases, wavelet bases and their duals.

    ``scaling_bases[j]`` is Phi_{j+1} written in Phi_j coordinates;
    ``scaling_in_v0[j]`` is Phi_j in vertex coordinates (``scaling_in_v0[0]``
    is the identity). ``wavelet_bases[j]`` spans the complement W_j of
    V_{j+1} in V_j, in vertex coordinates.
    """

    mode: str
    eps: float
    scaling_bases: list = field(repr=False)
    scaling_in_v0: list = field(repr=False)
    selected: list = field(repr=False)
    wavelets_local: list = field(repr=False)
    wavelet_bases: list = field(repr=False)
    compressed_ops: list = field(repr=False)
    transform: np.ndarray = field(repr=False)
    dual: np.ndarray = field(repr=False)

    @property
    def n_scales(self):
        return len(self.scaling_bases)

    @property
    def dims(self):
        """[dim V_0, dim V_1, ..., dim V_J]."""
        return [B.shape[1] for B in self.scaling_in_v0]

    @property
    def block_sizes(self):
        return [W.shape[1] for W in self.wavelet_bases] + [self.scaling_in_v0[-1].shape[1]]

    def _block_slices(self):
        out, start = [], 0
        for size in self.block_sizes:
            out.append(slice(start, start + size))
            start += size
        return out

    @property
    def dual_wavelets(self):
        """Duals Psi^_j with Psi^_j^T Psi_j = I (rows of the inverse transform)."""
        sl = self._block_slices()
        return [self.dual[s].T for s in sl[:-1]]

    @property
    def dual_scaling(self):
        return self.dual[self._block_slices()[-1]].T


def _pinv(A):
    return np.linalg.pinv(A, rcond=1e-12)


def _scale_step(A, eps, mode, j):
    idx, Q = pivoted_gram_schmidt(A, eps)
    if idx.size == 0:
        raise EmptyBasisError(f"scale {j + 1}: no column exceeds eps={eps:g}")
    if mode == ORTHOGONAL:
        basis = Q
        basis_pinv = Q.T
    else:
        basis = A[:, idx]
        basis_pinv = _pinv(basis)
    return idx, basis, basis_pinv


def _wavelets(B, B_next, B_next_pinv):
    """Wavelets of W_j as columns of (I - Phi_{j+1} Phi_{j+1}^+) Phi_j in V_0.

    The projector acts in vertex coordinates, so W_j is orthogonal to
    V_{j+1}. Exactly dim V_j - dim V_{j+1} columns are kept.
    """
    count = B.shape[1] - B_next.shape[1]
    if count <= 0:
        return np.zeros((B.shape[0], 0))
    cols = B - B_next @ (B_next_pinv @ B)
    idx, _ = pivoted_gram_schmidt(cols, 0.0, max_cols=count)
    return cols[:, idx]


def _assemble(mode, eps, ops_for_scale, n, J):
    if eps <= 0:
        raise InvalidArgumentError(f"selection threshold must be positive, got {eps}")
    if mode not in (ORTHOGONAL, BIORTHOGONAL):
        raise InvalidArgumentError(f"unknown mode {mode!r}")
    B = np.eye(n)
    scaling_bases, in_v0, selected, wl_local, wl_v0 = [], [B], [], [], []
    compressed = []
    A = None
    for j in range(J):
        A = ops_for_scale(j, B, A)
        compressed.append(A)
        idx, basis, basis_pinv = _scale_step(A, eps, mode, j)
        B_next = B @ basis
        B_next_pinv = B_next.T if mode == ORTHOGONAL else _pinv(B_next)
        W = _wavelets(B, B_next, B_next_pinv)
        scaling_bases.append(basis)
        selected.append(idx)
        wl_v0.append(W)
        wl_local.append(B.T @ W if mode == ORTHOGONAL else _pinv(B) @ W)
        A = (basis, basis_pinv, A)
        B = B_next
        in_v0.append(B)
    stack = np.hstack(wl_v0 + [B])
    if stack.shape[1] != n or np.linalg.matrix_rank(stack) < n:
        raise SingularTransformError(
            f"wavelet/scaling stack has {stack.shape[1]} columns and rank "
            f"{np.linalg.matrix_rank(stack)} for {n} vertices")
    dual = _pinv(stack)
    return MultiResolution(mode, eps, scaling_bases, in_v0, selected, wl_local, wl_v0,
                           compressed, stack, dual)


def build(T, J, eps=None, mode=ORTHOGONAL):
    """Diffusion wavelets from dyadic powers of ``T``.

    Scale 1 uses the columns of T. Afterwards the compressed operator for
    V_{j+1} is the restriction of the square of the scale-j compressed
    operator: A_{j+1} = Phi^+ A_j^2 Phi (Phi in V_j coordinates).
    """
    T = np.asarray(T, dtype=float)
    eps = DEFAULT_EPS[mode] if eps is None else eps

    def ops(j, B, prev):
        if prev is None:
            return T
        basis, basis_pinv, A = prev
        return basis_pinv @ (A @ (A @ basis))

    return _assemble(mode, eps, ops, T.shape[0], int(J))


def build_generalized(filters, eps=None, mode=ORTHOGONAL):
    """Same pipeline with arbitrary low-pass filters.

    ``filters[j]`` (vertex coordinates) defines V_{j+1}: its candidates are
    the columns of its restriction B_j^+ H_j B_j to V_j.
    """
    filters = [np.asarray(H, dtype=float) for H in filters]
    if not filters:
        raise InvalidArgumentError("need at least one filter")
    eps = DEFAULT_EPS[mode] if eps is None else eps

    def ops(j, B, prev):
        H = filters[j]
        if j == 0:
            return H
        Bp = B.T if mode == ORTHOGONAL else _pinv(B)
        return Bp @ H @ B

    return _assemble(mode, eps, ops, filters[0].shape[0], len(filters))


def wavelets_at_scale(mr, j):
    """``(Psi_j, dual Psi^_j)`` in vertex coordinates."""
    if not 0 <= j < mr.n_scales:
        raise InvalidArgumentError(f"scale {j} outside 0..{mr.n_scales - 1}")
    return mr.wavelet_bases[j], mr.dual_wavelets[j]


def forward(mr, f):
    """Coefficients ``[c_Psi_0, ..., c_Psi_{J-1}, c_Phi_J]`` against the dual bases."""
    c = mr.dual @ np.asarray(f)
    return [c[s] for s in mr._block_slices()]


def inverse(mr, coefficients):
    sizes = mr.block_sizes
    if len(coefficients) != len(sizes) or any(
            np.shape(c)[0] != s for c, s in zip(coefficients, sizes)):
        raise InvalidArgumentError(
            f"coefficient blocks must have sizes {sizes}, got "
            f"{[np.shape(c)[0] for c in coefficients]}")
    return mr.transform @ np.concatenate([np.asarray(c) for c in coefficients])


def transform_condition_number(mr):
    """2-norm condition number of [Psi_0, ..., Psi_{J-1}, Phi_J]."""
    s = np.linalg.svd(mr.transform, compute_uv=False)
    if s[-1] <= s[0] * 1e-15:
        raise SingularTransformError("inverse transform matrix is singular")
    return float(s[0] / s[-1])


def write_atoms_csv(path_or_file, mr):
    """Rows ``kind, scale, index, vertex, value`` for every basis vector."""
    rows = [("kind", "scale", "index", "vertex", "value")]
    for j, B in enumerate(mr.scaling_in_v0[1:], start=1):
        for k in range(B.shape[1]):
            rows.extend(("scaling", str(j), str(k), str(x), f"{v:.17g}")
                        for x, v in enumerate(B[:, k]))
    for j, W in enumerate(mr.wavelet_bases):
        for k in range(W.shape[1]):
            rows.extend(("wavelet", str(j), str(k), str(x), f"{v:.17g}")
                        for x, v in enumerate(W[:, k]))
    if hasattr(path_or_file, "write"):
        csv.writer(path_or_file, lineterminator="\n").writerows(rows)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
