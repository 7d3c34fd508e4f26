"""Chebyshev-state phase estimation, eigenvalue estimation and
leading-eigenvalue estimation."""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from .cheby import cheb_all
from .core import check_bound, cmod, norm2, normalize, rescale_encoding
from .histstate import chebyshev_history, perturb_unit, solve_padded, emulate_qls, toeplitz_lower

N1_DEFAULT = 5


@dataclass(frozen=True)
class QpeOutcome:
    """Outcome distribution over l, an optional sample and its estimate."""

    distribution: np.ndarray
    sample: int | None = None
    estimate: float | None = None

    def __post_init__(self):
        p = np.asarray(self.distribution, dtype=float)
        if abs(p.sum() - 1) > 1e-12:
            raise ValueError("probabilities sum to %.15g" % p.sum())
        object.__setattr__(self, "distribution", p)

    @property
    def n(self):
        return self.distribution.size


def success_lower_bound(n1):
    """1 - n1 / ((n1 - 2 sqrt3 / 3)(n1 - 2))."""
    return 1 - n1 / ((n1 - 2 * math.sqrt(3) / 3) * (n1 - 2))


def chebyshev_state(phi, n, rescaled=False):
    """Normalized sum_l T_l(cos 2 pi phi)|l> (or the T~ version)."""
    amps = np.cos(2 * np.pi * phi * np.arange(n)).astype(complex)
    if rescaled:
        amps[0] = 0.5
    return normalize(amps)


def register_dft(state):
    """Apply F|j> = n^-1/2 sum_l e^{-2 pi i j l / n}|l> to the first axis."""
    return np.fft.fft(state, axis=0, norm="ortho")


def chebyshev_qpe(state, n1=N1_DEFAULT, alpha=1.0, rng=None):
    """Fourier transform of the shift register followed by measurement.

    `state` has shape (n,) or (n, d); the system register is traced out.
    """
    state = np.asarray(state, dtype=complex)
    if abs(np.linalg.norm(state) - 1) > 1e-10:
        raise ValueError("input state is not normalized")
    n = state.shape[0]
    if n % n1:
        raise ValueError("n=%d is not a multiple of n1=%d" % (n, n1))
    amp = register_dft(state)
    p = np.abs(amp) ** 2
    if p.ndim > 1:
        p = p.reshape(n, -1).sum(axis=1)
    p = p / p.sum()
    if rng is None:
        return QpeOutcome(p)
    l = int(rng.choice(n, p=p))
    return QpeOutcome(p, l, float(alpha * np.cos(2 * np.pi * l / n)))


def qpe_success_probability(distribution, phi, n1=N1_DEFAULT):
    """Mass of outcomes with |cmod(1, l/n +- phi)| <= n1/n."""
    p = np.asarray(distribution)
    n = p.size
    l = np.arange(n) / n
    tol = n1 / n + 1e-12
    ok = (np.abs(cmod(1.0, l - phi)) <= tol) | (np.abs(cmod(1.0, l + phi)) <= tol)
    return float(p[ok].sum())


def qeve_order(alpha, eps, n1=N1_DEFAULT):
    """n = n0 n1 with n0 = ceil(2 pi alpha / eps)."""
    return int(math.ceil(2 * math.pi * alpha / eps)) * n1


def qeve_repetitions(p_fail):
    return 2 * int(math.ceil(math.log(1 / p_fail))) + 1


def _prepare_encoding(be):
    # eigenphases stay inside [1/6, 1/3] only when alpha >= 2 ||A||
    need = 2 * norm2(be.operator)
    return rescale_encoding(be, need) if be.alpha < need else be


def qeve_state(be, psi, n, eps_lin=0.0, rng=None):
    """eta = 0 history state with only bt_{n-1} = 1, shaped (n, d)."""
    coeffs = np.zeros(n)
    coeffs[-1] = 1.0
    h = chebyshev_history(be, coeffs, psi, 0, eps_lin, rng)
    return h.register()


def qeve(be, psi, eps, p_fail=0.05, rng=None, n1=N1_DEFAULT, eps_lin=0.0, n=None):
    """Median of repeated Chebyshev-state phase estimates of an eigenvalue."""
    if rng is None:
        raise ValueError("qeve samples outcomes and needs a seeded generator")
    be = _prepare_encoding(be)
    if n is None:
        n = qeve_order(be.alpha, eps, n1)
    state = qeve_state(be, psi, n, eps_lin, rng)
    out = chebyshev_qpe(state, n1)
    ls = rng.choice(n, size=qeve_repetitions(p_fail), p=out.distribution)
    return float(np.median(be.alpha * np.cos(2 * np.pi * ls / n)))


def qeve_worst_error(be, psi, lam, n, trials, rng, n1=N1_DEFAULT, p_fail=0.05):
    """Worst |lambda_hat - lambda| over independent single-shot median runs at order n."""
    be = _prepare_encoding(be)
    out = chebyshev_qpe(qeve_state(be, psi, n), n1)
    reps = qeve_repetitions(p_fail)
    ls = rng.choice(n, size=(trials, reps), p=out.distribution)
    est = np.median(be.alpha * np.cos(2 * np.pi * ls / n), axis=1)
    return float(np.max(np.abs(est - lam)))


def rescaled_state_distance(x, n, check=True):
    """Distance between the T~- and T-normalized Chebyshev states at x."""
    if abs(x) > 0.5:
        raise ValueError("x must lie in [-1/2, 1/2]")
    t = cheb_all("T", n, x)
    tt = t.copy()
    tt[0] = 0.5
    dist = float(np.linalg.norm(tt / np.linalg.norm(tt) - t / np.linalg.norm(t)))
    lo = n / 2 - math.sqrt(3) / 3
    bound = 0.375 / (math.sqrt(lo) * math.sqrt(lo - 0.75)) + 0.5 / math.sqrt(lo)
    if check:
        check_bound(dist, bound, "rescaled Chebyshev state distance")
    return dist, bound


def imperfect_state_distance(be, psi, psi_lam, lam, n, eps_lin=0.0, rng=None):
    """Distance of the computed register state to the ideal T-Chebyshev state.

    The ideal state is sum_l T_l(lam/alpha)|l>|psi_lam>, normalized.
    """
    x = qeve_state(be, psi, n, eps_lin, rng).ravel()
    ideal = np.kron(cheb_all("T", n, lam / be.alpha), normalize(psi_lam))
    ideal = normalize(ideal)
    # compare up to the global phase picked by the solver
    ph = np.vdot(ideal, x)
    ph = ph / abs(ph) if abs(ph) > 0 else 1.0
    return float(np.linalg.norm(x - ph * ideal))


def median_amplify(samples, q=None):
    """Median, circular under cmod distance when modulus q is given."""
    s = np.asarray(samples, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("no samples")
    if q is None:
        return float(np.median(s))
    # sample minimizing the total circular distance to the others
    cost = np.abs(cmod(q, s[:, None] - s[None, :])).sum(axis=1)
    return float(s[np.argmin(cost)])


def leading_fourier_state(be, lambda_max, psi, n, eps_lin=0.0, rng=None):
    """Normalized solution of (I - L (x) A/lambda_max) x = |0>|psi>, shaped (n, d)."""
    a = be.operator / lambda_max
    d = a.shape[0]
    rhs = np.zeros(n * d, dtype=complex)
    rhs[:d] = normalize(np.ravel(psi))
    blocks = [np.eye(d, dtype=complex), -a]
    if n * d <= 2048:
        x = emulate_qls(toeplitz_lower(blocks, n), rhs, eps_lin, rng)
    else:
        x = perturb_unit(normalize(solve_padded(blocks, n, 0, rhs)), eps_lin, rng)
    return x.reshape(n, d)


def leading_eigenvalue_qpe(be, lambda_max, psi_theta, n, rng, reps=None, eps_lin=0.0):
    """Phase angle of the leading eigenvalue lambda_max e^{i theta}, in [0, 2 pi)."""
    from .analysis import numerical_range

    w = numerical_range(be.operator, 180).points
    if np.max(np.abs(w)) > lambda_max * (1 + 1e-8):
        warnings.warn("numerical range is not inside the lambda_max disk", RuntimeWarning)
    state = leading_fourier_state(be, lambda_max, psi_theta, n, eps_lin, rng)
    # amplitudes e^{ij theta} peak at l = theta n / 2 pi under the forward transform
    amp = np.fft.fft(state, axis=0, norm="ortho")
    p = (np.abs(amp) ** 2).reshape(n, -1).sum(axis=1)
    p /= p.sum()
    if reps is None:
        reps = qeve_repetitions(0.01)
    ls = rng.choice(n, size=reps, p=p)
    theta = median_amplify(2 * np.pi * ls / n, 2 * np.pi)
    return float(theta % (2 * np.pi))
