import math

import numpy as np
import pytest

from qevp.cheby import ChebExpansion, exp_coeffs
from qevp.core import BlockEncoding, JordanSpec, build_from_jordan, norm2, normalize
from qevp.transform import (
    diffeq_order,
    ground_filter,
    ground_parameters,
    matrix_sign_trunc_check,
    prepare_ground,
    qevt,
    qevt_block,
    sector_probability,
    shifted_coeff_state,
    shifted_norm_quadrature,
    signed_overlap,
    solve_diffeq,
    state_transform_bound,
)

from conftest import random_real_diag


def test_qevt_constant_and_linear(rng):
    a, _, _ = random_real_diag(rng, 4)
    be = BlockEncoding.from_operator(a, 1.0)
    psi = normalize(rng.standard_normal(4) + 0j)
    rep = qevt(be, [1.0], psi)
    assert rep.fidelity == pytest.approx(1, abs=1e-12)
    assert abs(abs(np.vdot(psi, rep.output)) - 1) <= 1e-12
    d = np.diag([0.3, -0.2, 0.1])
    rep = qevt(BlockEncoding(d, 1.0), [0.0, 1.0], normalize(np.ones(3)))
    assert rep.fidelity >= 1 - 1e-10
    assert abs(abs(np.vdot(normalize(d @ np.ones(3)), rep.output)) - 1) <= 1e-10


def test_qevt_degenerate_target():
    with pytest.raises(ValueError):
        qevt(BlockEncoding(np.zeros((1, 1)), 1.0), [0.0, 1.0], [1.0])


def test_sector_probability_matches_report(rng):
    a, _, _ = random_real_diag(rng, 3)
    be = BlockEncoding.from_operator(a, 1.0)
    bt = rng.standard_normal(8)
    psi = normalize(rng.standard_normal(3) + 0j)
    rep = qevt(be, bt, psi)
    assert sector_probability(be, bt, psi) == pytest.approx(1 / rep.amp_ratio ** 2)


def test_qevt_block(rng):
    one = qevt_block(BlockEncoding(np.diag([0.2, -0.1]), 1.0), [2.0])
    op = one.operator
    assert np.allclose(op, op[0, 0] * np.eye(2))
    a = rng.standard_normal((3, 3))
    be = BlockEncoding.from_operator(a)
    p = ChebExpansion(rng.standard_normal(8))
    enc = qevt_block(be, p)
    assert np.max(np.abs(enc.operator - p.matrix(be.m))) <= 1e-9


def test_shifted_coeff_state():
    n = 6
    bt = np.zeros(n)
    bt[-1] = 1
    v, a = shifted_coeff_state(bt)
    ref = np.zeros(n)
    ref[0], ref[2] = 1, -1
    assert np.allclose(v, ref / math.sqrt(2))
    v, a = shifted_coeff_state([2.0, 0, 0, 0])
    assert np.allclose(v, [0, 0, 0, 1]) and a == pytest.approx(2)


def test_shifted_norm_parseval(rng):
    bt = rng.standard_normal(10)
    p = ChebExpansion(np.concatenate([bt, [0, 0]]))
    _, a = shifted_coeff_state(p.coeffs)
    assert shifted_norm_quadrature(p) == pytest.approx(a, rel=1e-10)


def test_state_transform_bound(rng):
    c = rng.standard_normal((4, 4))
    psi = normalize(rng.standard_normal(4))
    for _ in range(10):
        lhs, rhs = state_transform_bound(c, c + 1e-3 * rng.standard_normal((4, 4)), psi,
                                         psi + 1e-3 * rng.standard_normal(4))
        assert lhs <= rhs


def test_diffeq_trivial_and_hermitian(rng):
    a, _, _ = random_real_diag(rng, 5)
    be = BlockEncoding.from_operator(a)
    psi = normalize(rng.standard_normal(5) + 0j)
    rep = solve_diffeq(be, 0.0, psi, 1e-8)
    assert abs(abs(np.vdot(psi, rep.output)) - 1) <= 1e-10
    rep = solve_diffeq(be, 10.0 / (2 * norm2(a)), psi, 1e-8)
    assert rep.fidelity >= 1 - 1e-8
    with pytest.raises(ValueError):
        solve_diffeq(be, -1.0, psi, 1e-8)


def test_diffeq_nonnormal(rng):
    spec = JordanSpec([(x, 1) for x in rng.uniform(-0.5, 0.5, 6)], kappa_target=20.0, seed=3)
    a, s, _ = build_from_jordan(spec)
    be = BlockEncoding.from_operator(a, 2 * norm2(a))
    psi = normalize(rng.standard_normal(6) + 0j)
    rep = solve_diffeq(be, 5.0 / be.alpha, psi, 1e-7, float(np.linalg.cond(s)))
    assert rep.fidelity >= 1 - 1e-7
    assert diffeq_order(10, 1e-6, 20.0) > diffeq_order(10, 1e-6, 1.0)


def test_ground_projector_spectrum():
    a = np.diag([-0.4, 0.4])
    be = BlockEncoding.from_operator(a, 1.0)
    psi = normalize(np.array([1.0, 1.0]))
    rep = prepare_ground(be, 0.8, psi, 1e-6, s=np.eye(2))
    assert rep.fidelity >= 1 - 1e-6


def test_ground_negative_phase():
    a = np.diag([-0.3, 0.2, 0.4])
    be = BlockEncoding.from_operator(a, 1.0)
    psi = normalize(np.array([-1.0, 0.5, 0.5]))
    rep = prepare_ground(be, 0.4, psi, 1e-6, s=np.eye(3))
    assert signed_overlap(rep) >= 1 - 1e-4
    assert rep.output[0].real < 0


def test_ground_gap_checks():
    be = BlockEncoding(np.diag([-0.05, 0.3]), 1.0)
    with pytest.raises(ValueError):
        prepare_ground(be, 0.4, [1, 1], 1e-4, s=np.eye(2))


def test_ground_order_scaling():
    n1 = ground_parameters(1.0, 0.2, 0.5, 1e-6)[1]
    n2 = ground_parameters(1.0, 0.1, 0.5, 1e-6)[1]
    assert 1.6 <= n2 / n1 <= 2.4


def test_matrix_sign_truncation():
    c, n = 30.0, 200
    spec = JordanSpec([(-0.3, 1), (0.2, 1)])
    act, bound = matrix_sign_trunc_check(spec, c, n, 0.05)
    a = np.diag([-0.3, 0.2])
    f = ground_filter(c, n)
    assert act == pytest.approx(max(abs(f(-0.3) - 1), abs(f(0.2))), abs=1e-14)
    assert act <= bound
    with pytest.raises(ValueError):
        matrix_sign_trunc_check(JordanSpec([(0.01, 1)]), c, n, 0.05)


def test_matrix_sign_jordan_block():
    c, n = 30.0, 200
    act1, b1 = matrix_sign_trunc_check(JordanSpec([(-0.3, 1), (0.2, 1)]), c, n, 0.05)
    act2, b2 = matrix_sign_trunc_check(JordanSpec([(-0.3, 2), (0.2, 1)]), c, n, 0.05)
    assert act2 <= b2
    assert b2 / b1 <= 2 * (n / math.sqrt(0.05))
