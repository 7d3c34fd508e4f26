import math

import numpy as np
import pytest

from qevp.cheby import ChebExpansion, exp_coeffs
from qevp.core import norm2
from qevp.fourier import (
    FourierOracle,
    chebyshev_coeff_state,
    dirichlet_l1,
    direct_coefficient_operator,
    direct_fourier_coeffs,
    fourier_coeff_report,
    fourier_sizes,
    lebesgue_constant,
    quantized_mean,
    random_band_limited,
    rescaled_convolution,
    riemann_block,
    riemann_error_bound,
    riesz_check,
    trig_oracle,
)
from qevp.transform import shifted_coeff_state


def test_oracle_checks_bound():
    with pytest.raises(ValueError):
        FourierOracle(lambda w: 2 + 0 * w, 1.0, 0.0)
    with pytest.raises(ValueError):
        FourierOracle(lambda w: 0 * w, 0.0, 0.0)


def test_direct_coeffs_examples():
    xi = direct_fourier_coeffs(trig_oracle({3: 1.0}), 8)
    assert xi[3] == pytest.approx(1)
    assert np.max(np.abs(np.delete(xi, 3))) <= 1e-10
    xi = direct_fourier_coeffs(FourierOracle(lambda w: np.ones_like(w), 1.0, 0.0), 5)
    assert np.allclose(xi, [1, 0, 0, 0, 0])


def test_joukowsky_pushforward():
    # e^{-iw} Psi(e^{iw}) for Psi(w) = (w + 1/w)/2
    g = FourierOracle(lambda w: np.exp(-1j * w) * np.cos(w), 1.0, 1.0)
    xi = direct_fourier_coeffs(g, 4)
    assert np.allclose(xi, [0.5, 0, 0.5, 0], atol=1e-12)


def test_trig_oracle_values():
    g = trig_oracle({-2: 0.5, 0: 1.0, 3: 0.25j})
    w = np.linspace(-3, 3, 11)
    ref = 0.5 * np.exp(2j * w) + 1.0 + 0.25j * np.exp(-3j * w)
    assert np.allclose(g(w), ref)
    assert g.g_max >= np.abs(ref).max()


def test_riemann_block_examples():
    val = riemann_block(lambda x: np.full(x.shape, 2.0), 0, 1, 2.0, 0.0, 8, 1000, 1000)
    assert val == pytest.approx(1.0)
    val = riemann_block(lambda x: x + 0j, 0, 1, 1.0, 1.0, 4096, 10 ** 6, 10 ** 6)
    assert abs(val - 0.5) <= riemann_error_bound(0, 1, 1.0, 1.0, 4096, 10 ** 6, 10 ** 6)
    with pytest.raises(ValueError):
        quantized_mean(np.array([2.0]), 1.0, 10, 10)


def test_riemann_discretization_term_halves():
    h = lambda x: np.exp(1j * x) * x
    ref = (np.exp(1j) * (1 - 1j) + 1j)  # int_0^1 x e^{ix} dx
    e1 = abs(riemann_block(h, 0, 1, 1.0, 2.0, 2000, 10 ** 9, 10 ** 9) - ref)
    e2 = abs(riemann_block(h, 0, 1, 1.0, 2.0, 1000, 10 ** 9, 10 ** 9) - ref)
    assert e1 <= e2 <= 2.2 * e1


def test_sizes_formula():
    s = fourier_sizes(trig_oracle({0: 1.0, 1: 0.5}), 16, 1e-3)
    assert s["n_abs"] == s["n_arg"] == 8000
    assert s["n_in"] <= s["n_in_formula"]


def test_rescaled_convolution_constant():
    g = FourierOracle(lambda w: np.ones_like(w), 1.0, 0.0)
    sizes = {"n_in": 4096, "n_abs": 10 ** 7, "n_arg": 10 ** 7}
    for m in (0, 3, 17, 31):
        assert abs(rescaled_convolution(g, 16, m, sizes) - 1) <= 1e-3


def test_rescaled_convolution_single_frequency():
    n, k = 16, 3
    g = trig_oracle({k: 1.0})
    sizes = fourier_sizes(g, n, 1e-4)
    for m in (0, 5, 20):
        val = rescaled_convolution(g, n, m, sizes)
        assert abs(val - np.exp(-1j * k * np.pi * m / n)) <= 1e-3


def test_operator_constant_function():
    g = FourierOracle(lambda w: np.ones_like(w), 1.0, 0.0)
    be, _ = fourier_coeff_report(g, 16, 1e-4)
    assert np.max(np.abs(be.m - np.eye(16) / (np.pi / 2 + np.log(16)))) <= 1e-4


def test_operator_matches_direct(rng):
    n, eps = 16, 1e-4
    for _ in range(3):
        g = random_band_limited(rng)
        be, info = fourier_coeff_report(g, n, eps)
        direct = direct_coefficient_operator(direct_fourier_coeffs(g, n))
        assert np.max(np.abs(be.m - direct / be.alpha)) <= eps
        assert norm2(direct) <= be.alpha
        peaks = info["peaks"]
        assert peaks[0] <= np.pi / 4 * g.g_max and peaks[3] <= np.pi / 4 * g.g_max
        assert max(peaks[1], peaks[2]) <= np.log(n) / 2 * g.g_max


def test_operator_rejects_coarse_grid(rng):
    g = random_band_limited(rng)
    with pytest.raises(ValueError):
        fourier_coeff_report(g, 16, 1e-6, n_in_cap=64)


def test_chebyshev_coeff_state_qeve_input():
    n = 8
    bt = np.zeros(n)
    bt[-1] = 1
    _, shifted, _ = chebyshev_coeff_state(ChebExpansion(bt), 1e-4)
    ref = np.zeros(n)
    ref[0], ref[2] = 1, -1
    assert abs(abs(np.vdot(ref / math.sqrt(2), shifted)) - 1) <= 1e-6


def test_chebyshev_coeff_state_exp():
    p = exp_coeffs(3.0, 32)
    _, shifted, cost = chebyshev_coeff_state(p, 1e-4)
    ref, _ = shifted_coeff_state(p.coeffs)
    assert np.linalg.norm(shifted - ref) <= 1e-4
    assert cost > 0


def test_dirichlet_l1():
    assert dirichlet_l1(0) == pytest.approx(2 * np.pi)
    assert dirichlet_l1(1) == pytest.approx(2 * np.pi / 3 + 4 * math.sqrt(3), rel=1e-12)
    ns = np.array([64, 128, 256, 512, 1024, 2048])
    slope = np.polyfit(np.log(ns), [lebesgue_constant(n) for n in ns], 1)[0]
    assert abs(slope - 4 / np.pi ** 2) <= 0.1 * 4 / np.pi ** 2
    with pytest.raises(ValueError):
        dirichlet_l1(-1)


def test_riesz_inequality(rng):
    for _ in range(5):
        one, full = riesz_check(random_band_limited(rng))
        assert one <= full * (1 + 1e-12)
