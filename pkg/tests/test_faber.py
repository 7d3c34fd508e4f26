import math
import warnings

import numpy as np
import pytest

from qevp.cheby import exp_coeffs
from qevp.core import BlockEncoding, lower_shift, norm2, normalize
from qevp.faber import (
    FaberRegion,
    build_padded_faber,
    faber_coeffs,
    faber_exp_trunc_error,
    faber_generating_error,
    faber_history,
    faber_history_direct,
    faber_matrices,
    faber_max_on_boundary,
    faber_pad_inverse_norm_bound,
    faber_polys,
    faber_sum,
    faber_sum_matrix,
    faber_values,
    load_region,
    qevt_faber,
    region_flags_hold,
    solve_diffeq_faber,
    special_region,
    verify_pad_inverse_faber,
)
from qevp.histstate import build_padded_chebyshev, chebyshev_history

KINDS = ("interval", "disk", "left_halfdisk_smooth")


def test_special_maps():
    w = np.exp(1j * np.linspace(0, 6, 17)) * 1.3
    assert np.allclose(special_region("interval").psi(w), (w + 1 / w) / 2)
    assert np.allclose(special_region("disk").psi(w), w)
    z = special_region("left_halfdisk_smooth").boundary(4096)
    assert z.real.max() <= 0
    with pytest.raises(ValueError):
        special_region("square")


@pytest.mark.parametrize("kind", KINDS)
def test_region_flags(kind):
    assert all(region_flags_hold(special_region(kind)).values())


def test_region_validation():
    with pytest.raises(ValueError):
        FaberRegion(0.0, [0.0])
    # Psi(w) = w + 1/w folds the circle onto a segment
    with pytest.raises(ValueError):
        FaberRegion(1.0, [0.0, 1.0])


def test_region_json_roundtrip(tmp_path):
    import json

    r = special_region("left_halfdisk_smooth")
    path = tmp_path / "r.json"
    path.write_text(json.dumps(r.to_json()))
    r2 = load_region(path)
    assert r2.varsigma == r.varsigma and np.array_equal(r2.tail, r.tail) and r2.flags == r.flags


def test_interval_faber_is_twice_chebyshev():
    polys = faber_polys(special_region("interval"), 65)
    assert np.allclose(polys[0], [1])
    assert np.allclose(polys[1], [0, 2])
    for j in range(1, 65):
        ref = 2 * np.polynomial.chebyshev.cheb2poly(np.eye(j + 1)[j])
        assert np.all(np.abs(polys[j] - ref) <= 1e-10 * np.maximum(1, np.abs(ref)))


def test_disk_faber_is_monomial():
    polys = faber_polys(special_region("disk"), 20)
    for j in range(20):
        assert np.array_equal(polys[j], np.eye(j + 1)[j])


@pytest.mark.parametrize("kind", KINDS)
def test_faber_polys_contour_oracle(kind):
    # F_j is the polynomial part of Phi^j: Psi'(w)/(Psi(w)-z) = sum F_j(z) w^{-j-1}
    region = special_region(kind)
    n, r, grid = 12, 1.5, 4096
    w = r * np.exp(2j * np.pi * np.arange(grid) / grid)
    z = region.tail[0] + np.array([0.1 - 0.05j, -0.05 + 0.1j])
    for zi in z:
        g = region.dpsi(w) / (region.psi(w) - zi)
        # coefficient of w^{-j-1} = mean(g w^{j+1})
        ref = np.array([np.mean(g * w ** (j + 1)) for j in range(n)])
        vals = faber_values(region, n, zi)
        assert np.max(np.abs(vals - ref)) <= 1e-8


def test_faber_values_agree_with_polys():
    region = special_region("left_halfdisk_smooth")
    polys = faber_polys(region, 15)
    z = np.array([-0.3 + 0.2j, -0.6, 0.1j])
    vals = faber_values(region, 15, z)
    for j in range(15):
        assert np.allclose(polys(j, z), vals[j])


def test_convex_max_bound():
    for kind in KINDS:
        assert faber_max_on_boundary(special_region(kind), 65).max() <= 2 + 1e-6


@pytest.mark.parametrize("kind", KINDS)
def test_faber_coeffs_uniqueness(kind, rng):
    region = special_region(kind)
    f5 = faber_coeffs(lambda z: faber_values(region, 6, z)[5], region, 10)
    assert f5[5] == pytest.approx(1)
    assert np.max(np.abs(np.delete(f5, 5))) <= 1e-9
    beta = rng.standard_normal(11) + 1j * rng.standard_normal(11)
    rec = faber_coeffs(lambda z: faber_sum(region, beta, z), region, 11)
    assert np.max(np.abs(rec - beta)) <= 1e-9
    rec13 = faber_coeffs(lambda z: faber_sum(region, beta, z), region, 11, r=1.3)
    assert np.max(np.abs(rec13 - rec)) <= 1e-9


def test_interval_coeffs_match_bessel():
    region = special_region("interval")
    beta = faber_coeffs(lambda z: np.exp(-2j * z), region, 20)
    # F_j = 2 T~_j, so Faber coefficients are half the rescaled Chebyshev ones
    assert np.max(np.abs(beta - exp_coeffs(2.0, 20).coeffs / 2)) <= 1e-12


@pytest.mark.parametrize("kind", KINDS)
def test_generating_function_and_pad_inverse(kind, rng):
    region = special_region(kind)
    m = 0.2 * (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    if kind == "interval":
        m = (m + m.conj().T) / 2
    assert faber_generating_error(region, m, 8) <= 1e-10
    be = BlockEncoding.from_operator(m, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sys = build_padded_faber(be, region, 6, 1)
    assert verify_pad_inverse_faber(sys, region) <= 1e-8
    assert norm2(np.linalg.inv(sys.padA)) <= faber_pad_inverse_norm_bound(sys, region) * (1 + 1e-12)


def test_disk_padded_block():
    m = np.diag([0.3, -0.2j])
    sys = build_padded_faber(BlockEncoding(m, 1.0), special_region("disk"), 4, 0)
    ref = np.eye(8) - np.kron(lower_shift(4), m)
    assert np.allclose(sys.padA, ref)


def test_interval_padded_matches_chebyshev(rng):
    m = np.diag([0.3, -0.5])
    be = BlockEncoding(m, 1.0)
    fa = build_padded_faber(be, special_region("interval"), 5, 1).padA
    ch = build_padded_chebyshev(be, 5, 1).padA
    nd = 10
    assert np.allclose(2 * fa[:nd, :nd], ch[:nd, :nd])


def test_pad_inverse_column_is_derivative(rng):
    region = special_region("left_halfdisk_smooth")
    m = -0.3 * np.eye(2) + 0.05 * rng.standard_normal((2, 2))
    n = 5
    sys = build_padded_faber(BlockEncoding(m, 1.0), region, n, 0)
    inv = np.linalg.inv(sys.padA)
    _, df = faber_matrices(region, n + 1, m, derivatives=True)
    for j in range(n):
        assert np.allclose(inv[2 * j: 2 * j + 2, :2], df[j + 1] / (j + 1))


def test_disk_history_is_fourier_state():
    theta = 0.7
    be = BlockEncoding(np.array([[0.9 * np.exp(1j * theta)]]), 1.0)
    n = 16
    beta = np.zeros(n)
    beta[-1] = 1
    h = faber_history(be, special_region("disk"), beta, [1.0], 0)
    ref = np.exp(1j * theta * np.arange(n)) * 0.9 ** np.arange(n)
    assert abs(abs(np.vdot(normalize(ref), h.amps)) - 1) <= 1e-12


def test_interval_history_matches_chebyshev(rng):
    m = np.diag([0.3, -0.4])
    be = BlockEncoding(m, 1.0)
    bt = rng.standard_normal(8)
    psi = normalize(np.array([1.0, 2.0]))
    # p = sum bt_k T~_k = sum (bt_k/2) F_k on the interval
    fo = qevt_faber(be, special_region("interval"), bt / 2, psi).output
    ch = chebyshev_history(be, bt, psi, 1).sector(1).sum(axis=0)
    assert abs(abs(np.vdot(normalize(ch), fo)) - 1) <= 1e-12


def test_history_matches_direct(rng):
    region = special_region("left_halfdisk_smooth")
    m = -0.4 * np.eye(3) + 0.08 * (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    be = BlockEncoding(m, 1.0)
    beta = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    psi = normalize(rng.standard_normal(3) + 0j)
    for dense in (True, False):
        h = faber_history(be, region, beta, psi, 2, dense=dense)
        # the direct formula omits the Psi'(L^-1) mixing of the input, so compare sector 1
        target = faber_sum_matrix(region, beta, m) @ psi
        assert abs(abs(np.vdot(normalize(target), normalize(h.sector(1)[0]))) - 1) <= 1e-8
    raw = faber_history_direct(region, m, beta, psi, 1).reshape(2, 7, 3)
    assert np.allclose(raw[1, 0], faber_sum_matrix(region, beta, m) @ psi)


def test_qevt_faber_examples(rng):
    m = 0.2 * (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    be = BlockEncoding.from_operator(m, 1.0)
    psi = normalize(rng.standard_normal(3) + 0j)
    disk = special_region("disk")
    rep = qevt_faber(be, disk, [1.0], psi)
    assert abs(abs(np.vdot(psi, rep.output)) - 1) <= 1e-12
    rep = qevt_faber(be, disk, [0, 0, 0, 1.0], psi)
    ref = normalize(np.linalg.matrix_power(be.m, 3) @ psi)
    assert abs(abs(np.vdot(ref, rep.output)) - 1) <= 1e-10


def test_faber_diffeq(rng):
    region = special_region("left_halfdisk_smooth")
    # spectrum on a short imaginary segment shifted inside the region
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = (h + h.conj().T) / 2
    m = -0.45 * np.eye(4) + 0.3j * h / norm2(h)
    be = BlockEncoding(m, 1.0)
    psi = normalize(rng.standard_normal(4) + 0j)
    rep = solve_diffeq_faber(be, 0.0, psi, 1e-6, region)
    assert abs(abs(np.vdot(psi, rep.output)) - 1) <= 1e-12
    rep = solve_diffeq_faber(be, 5.0, psi, 1e-6, region)
    assert rep.fidelity >= 1 - 1e-6
    with pytest.raises(ValueError):
        solve_diffeq_faber(be, -1.0, psi, 1e-6, region)


def test_faber_truncation_decays():
    region = special_region("left_halfdisk_smooth")
    m = np.diag([-0.3, -0.5 + 0.2j, -0.2 - 0.3j])
    errs = [faber_exp_trunc_error(region, m, 6.0, n) for n in (6, 9, 12, 15)]
    assert all(b < a / 10 for a, b in zip(errs, errs[1:]))
