import io

import numpy as np
import pytest

from digh.errors import DesignInvalidError, InvalidArgumentError
from digh.graph_core import gen_directed_cycle, gen_directed_watts_strogatz
from digh.random_walk import from_graph, lazy
from digh.spectral import decompose
from digh.wavelet_frame import (FilterBankSpec, analyze, atoms, build_bank, check_pr,
                                heat_bandpass, heat_lowpass, synthesize, write_atoms_csv)


def _one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


@pytest.fixture(scope="module")
def dws_dec():
    return decompose(from_graph(gen_directed_watts_strogatz(64, 2, 0.02, seed=0)).P)


@pytest.fixture(scope="module")
def small_dec():
    return decompose(lazy(from_graph(gen_directed_cycle(16)), 0.5).P)


def test_identity_design(small_dec):
    spec = FilterBankSpec((1.0,), h=_one, g=_zero, h_dual=_one, g_dual=_zero)
    bank = build_bank(small_dec, spec)
    pr = check_pr(bank, small_dec, spec)
    assert pr.ok and pr.scalar_residual == 0.0
    assert np.allclose(bank.synthesis[0], np.eye(16))


def test_default_design_pr(dws_dec, rng):
    spec = FilterBankSpec.dyadic(3)
    bank = build_bank(dws_dec, spec)
    assert bank.n_blocks == 4 and all(S.shape == (64, 64) for S in bank.synthesis)
    pr = check_pr(bank, dws_dec, spec)
    assert pr and pr.scalar_residual <= 1e-10 and pr.matrix_residual <= 1e-8
    F = rng.standard_normal((64, 100))
    back = synthesize(bank, analyze(bank, F))
    assert np.abs(back - F).max() / np.abs(F).max() < 1e-8


def perturbed_spec(scales, delta_h):
    """Default duals written out explicitly, with h~ shifted by ``delta_h``."""
    tJ = scales[-1]

    def delta(w):
        return heat_lowpass(tJ * w) ** 2 + sum(heat_bandpass(t * w) ** 2 for t in scales)

    def g_dual(t):
        return lambda x: heat_bandpass(x) / delta(x / t)

    return FilterBankSpec(scales,
                          h_dual=lambda x: heat_lowpass(x) / delta(x / tJ) + delta_h,
                          g_dual=[g_dual(t) for t in scales])


def test_explicit_duals_reproduce_default(small_dec):
    spec = perturbed_spec(FilterBankSpec.dyadic(2).scales, 0.0)
    pr = check_pr(build_bank(small_dec, spec), small_dec, spec)
    assert pr and pr.scalar_residual < 1e-12


def test_violated_design_detected(small_dec):
    spec = perturbed_spec(FilterBankSpec.dyadic(2).scales, 1e-3)
    pr = check_pr(build_bank(small_dec, spec), small_dec, spec)
    # h(t_J * 0) = 1, so the residual at omega = 0 equals the perturbation
    assert not pr
    assert abs(pr.scalar_residual - 1e-3) <= 1e-4
    assert pr.matrix_residual > 1e-8


def test_design_invalid(small_dec):
    spec = FilterBankSpec((1.0,), h=_zero, g=_zero)
    with pytest.raises(DesignInvalidError):
        build_bank(small_dec, spec)
    with pytest.raises(InvalidArgumentError):
        FilterBankSpec((2.0, 1.0))


def test_frame_bounds_and_blocks(dws_dec, rng):
    spec = FilterBankSpec.dyadic(3)
    bank = build_bank(dws_dec, spec)
    assert 0 < bank.frame_lower <= bank.frame_upper
    for _ in range(20):
        f = rng.standard_normal(64)
        e = np.sum(analyze(bank, f) ** 2)
        n2 = f @ f
        assert bank.frame_lower * n2 <= e * (1 + 1e-12) and e <= bank.frame_upper * n2 * (1 + 1e-12)
    assert np.allclose(analyze(bank, np.zeros(64)), 0)
    assert np.allclose(synthesize(bank, np.zeros((4, 64))), 0)
    blocks = np.zeros((4, 64))
    blocks[2, 5] = 1.0
    assert np.allclose(synthesize(bank, blocks), atoms(bank, 2, [5])[:, 0])
    ones = np.ones(64)
    blocks = analyze(bank, ones)
    for j, t in enumerate(spec.scales, start=1):
        # band responses vanish at omega = 0, so analysis duals do too
        assert np.abs(blocks[j]).max() < 1e-8
    with pytest.raises(InvalidArgumentError):
        synthesize(bank, np.zeros((2, 64)))


def test_atoms_csv(small_dec):
    spec = FilterBankSpec.dyadic(2)
    bank = build_bank(small_dec, spec)
    buf = io.StringIO()
    write_atoms_csv(buf, bank, [0, 3], spec.scales)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "kind,scale,vertex,node,value"
    assert len(rows) == 1 + 3 * 2 * 16
