import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qevp.core import (
    BlockEncoding,
    JordanSpec,
    basis_condition,
    block_norm_bound,
    build_from_jordan,
    check_bound,
    BoundViolation,
    cmod,
    jordan_matrix,
    lower_shift,
    matrix_from_json,
    matrix_to_json,
    norm2,
    rescale_encoding,
    shift_encoding_check,
)


def test_diagonal_jordan_gives_diagonal_matrix():
    a, s, j = build_from_jordan(JordanSpec([(0.3, 1), (-0.4, 1)]))
    assert np.allclose(a, np.diag([0.3, -0.4]))
    assert np.allclose(s.conj().T @ s, np.eye(2))


def test_nilpotent_block_is_lower_shift():
    a, s, j = build_from_jordan(JordanSpec([(0.0, 2)]))
    assert np.allclose(j, lower_shift(2))
    assert np.allclose(np.linalg.solve(s, a @ s), lower_shift(2))


def test_condition_target():
    spec = JordanSpec([(0.1, 1), (0.2, 2)], kappa_target=10.0, seed=5)
    _, s, _ = build_from_jordan(spec)
    assert 10 - 1e-8 <= basis_condition(s) <= 20


def test_jordan_spec_validation():
    with pytest.raises(ValueError):
        JordanSpec([])
    with pytest.raises(ValueError):
        JordanSpec([(0.1, 0)])
    with pytest.raises(ValueError):
        JordanSpec([(0.1, 1)], kappa_target=0.5)


def test_jordan_matrix_layout():
    j = jordan_matrix(JordanSpec([(0.5, 2), (0.1, 1)]).blocks)
    assert np.allclose(np.diag(j), [0.5, 0.5, 0.1])
    assert j[1, 0] == 1 and j[2, 1] == 0


def test_lower_shift_examples():
    assert np.array_equal(lower_shift(1), np.zeros((1, 1)))
    assert np.array_equal(lower_shift(3).real, [[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    assert not np.any(np.linalg.matrix_power(lower_shift(5), 5))


@pytest.mark.parametrize("n,j", [(3, 1), (4, 0), (7, 5)] + [(n, j) for n in (1, 2, 8, 16) for j in range(n)])
def test_shift_encoding_exact(n, j):
    assert shift_encoding_check(n, j) == 0


def test_shift_encoding_range():
    with pytest.raises(ValueError):
        shift_encoding_check(4, 4)


def test_block_norm_bound_examples(rng):
    m = rng.standard_normal((3, 3))
    assert block_norm_bound([[m]]) == pytest.approx(norm2(m))
    eye = np.eye(2)
    assert block_norm_bound([[eye, eye], [eye, eye]]) == pytest.approx(2.0)
    assert norm2(np.block([[eye, eye], [eye, eye]])) == pytest.approx(2.0)
    grid = [[rng.standard_normal((2, 2)) for _ in range(3)] for _ in range(3)]
    assert block_norm_bound(grid) >= norm2(np.block(grid))
    with pytest.raises(ValueError):
        block_norm_bound([[eye, eye], [eye]])


def test_cmod_examples():
    assert cmod(2 * np.pi, 3 * np.pi) == pytest.approx(-np.pi)
    assert cmod(1, 0.75) == pytest.approx(-0.25)
    with pytest.raises(ValueError):
        cmod(0, 1.0)


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.1, 10), finite, finite)
def test_cmod_triangle(q, x, y):
    assert abs(cmod(q, x + y)) <= abs(cmod(q, x)) + abs(cmod(q, y)) + 1e-9


@settings(max_examples=300, deadline=None)
@given(st.floats(0.1, 10), finite)
def test_cmod_range_and_congruence(q, x):
    r = cmod(q, x)
    assert -q / 2 <= r < q / 2
    k = (x - r) / q
    assert abs(k - round(k)) < 1e-6


def test_cmod_triangle_random(rng):
    q = 2 * np.pi
    x, y = rng.uniform(-50, 50, (2, 10 ** 4))
    assert np.all(np.abs(cmod(q, x + y)) <= np.abs(cmod(q, x)) + np.abs(cmod(q, y)) + 1e-12)


def test_block_encoding_validation(rng):
    with pytest.raises(ValueError):
        BlockEncoding(np.eye(2) * 2, 1.0)
    with pytest.raises(ValueError):
        BlockEncoding(np.eye(2), 0.0)
    with pytest.raises(ValueError):
        BlockEncoding(np.ones((2, 3)), 1.0)


def test_rescale_encoding(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    be = BlockEncoding.from_operator(a)
    assert rescale_encoding(be, be.alpha) is be
    be1 = BlockEncoding(np.eye(2) * 0.5, 1.0)
    assert np.allclose(rescale_encoding(be1, 2.0).m, np.eye(2) * 0.25)
    be2 = rescale_encoding(be, 3 * be.alpha)
    assert np.max(np.abs(be2.operator - be.operator)) <= 1e-14 * max(1, np.abs(a).max())
    with pytest.raises(ValueError):
        rescale_encoding(be, be.alpha / 2)


def test_matrix_json_roundtrip(rng):
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.array_equal(matrix_from_json(matrix_to_json(a)), a)
    with pytest.raises(ValueError):
        matrix_from_json({"rows": 2, "cols": 2, "re": [1, 2, 3]})


def test_check_bound():
    assert check_bound(1.0, 2.0, "x") == (1.0, 2.0)
    with pytest.raises(BoundViolation):
        check_bound(2.0, 1.0, "x")
