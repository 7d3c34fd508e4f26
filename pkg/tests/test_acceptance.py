"""Acceptance criteria, one named suite each; every run prints a PASS/FAIL line."""

import pytest

from qevp.cli import SUITES, run_suite

SEED = 20261015

CRITERIA = [
    (1, "gen_identity", "generating-function identity"),
    (2, "pad_inverse", "padded-inverse structure"),
    (3, "shift_encoding", "shift encoding"),
    (4, "cheby_l2", "Chebyshev l2 bounds"),
    (5, "qpe", "Chebyshev-state QPE success probability"),
    (6, "heisenberg", "Heisenberg scaling of eigenvalue estimation"),
    (7, "diffeq", "differential-equation fidelity"),
    (8, "ground", "ground-state fidelity with phase"),
    (9, "faber_special", "Faber special cases"),
    (10, "faber_coeffs", "Faber coefficient uniqueness"),
    (11, "faber_diffeq", "Faber differential equation"),
    (12, "fourier", "Fourier-coefficient pipeline"),
    (13, "crouzeix", "Crouzeix-Palencia inequality"),
    (14, "bounds", "Bernstein and abscissa contracts"),
    (15, "carleson", "Carleson-Hunt partial sums"),
    (16, "leading_eigenvalue", "leading-eigenvalue phase"),
]


def test_every_suite_is_listed():
    assert sorted(c[1] for c in CRITERIA) == sorted(SUITES)


@pytest.mark.parametrize("number,name,label", CRITERIA, ids=[c[1] for c in CRITERIA])
def test_criterion(number, name, label, capsys):
    ok, detail, secs = run_suite(name, SEED)
    with capsys.disabled():
        print("criterion %2d %-45s %s  %s  (%.1fs)" % (number, label, "PASS" if ok else "FAIL", detail, secs))
    assert ok, detail
