import numpy as np
import pytest

from qevp.core import JordanSpec, build_from_jordan


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_real_diag(rng, d, lo=-0.5, hi=0.5, kappa=1.0):
    eig = rng.uniform(lo, hi, d)
    spec = JordanSpec([(x, 1) for x in eig], kappa_target=kappa, seed=int(rng.integers(1 << 30)))
    a, s, _ = build_from_jordan(spec)
    return a, s, eig
