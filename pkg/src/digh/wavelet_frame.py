"""Redundant spectral wavelet frames on directed graphs.

Synthesis bank K = (H_{t_J}, G_{t_1}, ..., G_{t_J}) and analysis bank
K~ = (H~_{t_J}, G~_{t_1}, ..., G~_{t_J}) are all sums of the same
mono-frequency projectors, so perfect reconstruction reduces to a scalar
identity on each realized frequency.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DesignInvalidError, InvalidArgumentError
from .filters import frequency_matrix, group_responses


def heat_lowpass(x):
    return np.exp(-x)


def heat_bandpass(x):
    return np.exp(-x / 2) - np.exp(-x)


@dataclass(frozen=True)
class FilterBankSpec:
    """Dilations and kernels. ``g_dual`` may be one callable per scale."""

    scales: Sequence[float]
    h: Callable = heat_lowpass
    g: Callable = heat_bandpass
    h_dual: Callable | None = None
    g_dual: Callable | Sequence[Callable] | None = None

    def __post_init__(self):
        s = np.asarray(self.scales, dtype=float)
        if s.size < 1 or np.any(np.diff(s) <= 0) or np.any(s <= 0):
            raise InvalidArgumentError("scales must be positive and strictly increasing")

    @classmethod
    def dyadic(cls, J, **kw):
        return cls(tuple(2.0 ** j for j in range(1, J + 1)), **kw)


@dataclass(frozen=True, eq=False)
class FrameOperators:
    synthesis: list = field(repr=False)
    analysis: list = field(repr=False)
    frame_lower: float
    frame_upper: float

    @property
    def n_blocks(self):
        return len(self.synthesis)

    def stacked_synthesis(self):
        """K, shape N x N(J+1)."""
        return np.hstack(self.synthesis)

    def stacked_analysis(self):
        """K~, shape N(J+1) x N."""
        return np.vstack(self.analysis)


def _frame_bounds(synthesis, analysis):
    K = np.hstack(synthesis)
    Kt = np.vstack(analysis)
    nK = np.linalg.norm(K, 2)
    return (1.0 / nK ** 2 if nK > 0 else 0.0), float(np.linalg.norm(Kt, 2) ** 2)


def _scalar_table(dec, spec):
    """Per-eigenvalue responses: h(t_J w), g(t_j w), and the duals."""
    scales = list(spec.scales)
    tJ = scales[-1]
    h = group_responses(dec, spec.h, tJ)
    g = [group_responses(dec, spec.g, t) for t in scales]
    if spec.h_dual is None and spec.g_dual is None:
        delta = h ** 2 + sum(gj ** 2 for gj in g)
        if np.any(delta < 1e-12):
            raise DesignInvalidError(
                f"h^2 + sum g^2 vanishes ({delta.min():.2e}) at a realized frequency")
        ht = h / delta
        gt = [gj / delta for gj in g]
    elif spec.h_dual is not None and spec.g_dual is not None:
        ht = group_responses(dec, spec.h_dual, tJ)
        gd = spec.g_dual if isinstance(spec.g_dual, (list, tuple)) else [spec.g_dual] * len(scales)
        if len(gd) != len(scales):
            raise InvalidArgumentError("need one band-pass dual per scale")
        gt = [group_responses(dec, f, t) for f, t in zip(gd, scales)]
    else:
        raise InvalidArgumentError("give both h_dual and g_dual or neither")
    return h, g, ht, gt


def build_bank(dec, spec):
    """Assemble synthesis and analysis operators from ``dec``'s projectors.

    Without explicit duals the analysis responses are h/D and g_j/D with
    D = h(t_J w)^2 + sum_j g(t_j w)^2, which satisfies perfect
    reconstruction on every realized frequency.
    """
    h, g, ht, gt = _scalar_table(dec, spec)
    synthesis = [frequency_matrix(dec, h)] + [frequency_matrix(dec, gj) for gj in g]
    analysis = [frequency_matrix(dec, ht)] + [frequency_matrix(dec, gj) for gj in gt]
    lo, hi = _frame_bounds(synthesis, analysis)
    return FrameOperators(synthesis, analysis, lo, hi)


@dataclass(frozen=True)
class PRCheck:
    ok: bool
    scalar_residual: float
    matrix_residual: float

    def __bool__(self):
        return self.ok


def check_pr(bank, dec, spec, tol_scalar=1e-10, tol_matrix=1e-8):
    """Check perfect reconstruction on the realized frequencies and as matrices."""
    h, g, ht, gt = _scalar_table(dec, spec)
    scalar = np.abs(h * ht + sum(a * b for a, b in zip(g, gt)) - 1.0)
    scalar_res = float(scalar.max())
    total = sum(S @ A for S, A in zip(bank.synthesis, bank.analysis))
    matrix_res = float(np.abs(total - np.eye(total.shape[0])).max())
    ok = scalar_res <= tol_scalar and matrix_res <= tol_matrix
    return PRCheck(ok, scalar_res, matrix_res)


def analyze(bank, f):
    """Coefficient blocks [H~ f, G~_1 f, ..., G~_J f], shape (J+1, N)."""
    f = np.asarray(f)
    return np.stack([A @ f for A in bank.analysis])


def synthesize(bank, blocks):
    """H b_0 + sum_j G_j b_j."""
    blocks = np.asarray(blocks)
    if blocks.shape[0] != bank.n_blocks:
        raise InvalidArgumentError(
            f"expected {bank.n_blocks} coefficient blocks, got {blocks.shape[0]}")
    return sum(S @ b for S, b in zip(bank.synthesis, blocks))


def atoms(bank, block, vertices=None):
    """Synthesis atoms H delta_y (block 0) or G_j delta_y (block j) as columns."""
    M = bank.synthesis[block]
    return M if vertices is None else M[:, list(vertices)]


def write_atoms_csv(path_or_file, bank, vertices, scales):
    """Rows ``kind, scale, vertex, node, value`` for the selected atoms."""
    rows = [("kind", "scale", "vertex", "node", "value")]
    labels = [("scaling", scales[-1])] + [("wavelet", t) for t in scales]
    for b, (kind, t) in enumerate(labels):
        for y in vertices:
            col = bank.synthesis[b][:, y]
            rows.extend((kind, f"{t:.17g}", str(y), str(x), f"{v:.17g}")
                        for x, v in enumerate(col))
    _write_rows(path_or_file, rows)


def _write_rows(path_or_file, rows):
    if hasattr(path_or_file, "write"):
        csv.writer(path_or_file, lineterminator="\n").writerows(rows)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
