"""Eigenvalue transformation (state and block-encoded versions), the
differential-equation solver and ground-state preparation."""

from dataclasses import dataclass
import math

import numpy as np

from .cheby import ChebExpansion, erf_coeffs, exp_coeffs
from .core import (
    BlockEncoding,
    check_bound,
    expm,
    norm2,
    normalize,
    phase_fidelity,
    rescale_encoding,
)
from .histstate import build_padded_chebyshev, chebyshev_history, shifted_coefficients

DIFFEQ_C2 = 3.0
DIFFEQ_MARGIN = 1.25


@dataclass(frozen=True)
class TransformReport:
    """Output state of a transformation plus amplification bookkeeping."""

    output: np.ndarray
    fidelity_target: np.ndarray | None
    amp_ratio: float
    predicted_queries: float
    n: int = 0

    def __post_init__(self):
        out = np.ravel(np.asarray(self.output, dtype=complex))
        if abs(np.linalg.norm(out) - 1) > 1e-12:
            raise ValueError("output is not normalized")
        object.__setattr__(self, "output", out)

    @property
    def fidelity(self):
        """|<target|output>|, or None without a target."""
        if self.fidelity_target is None:
            return None
        return phase_fidelity(self.fidelity_target, self.output)


def _coeff_array(coeffs):
    if isinstance(coeffs, ChebExpansion):
        return coeffs.coeffs
    return np.asarray(coeffs, dtype=complex)


def _at_least_two(bt):
    # the padded system needs n >= 2; a trailing zero does not change p
    return bt if bt.size >= 2 else np.concatenate([bt, np.zeros(2 - bt.size)])


def qevt(be, coeffs, psi, eps_lin=0.0, rng=None):
    """p(A/alpha) psi / ||p(A/alpha) psi|| by post-selecting pad sector 1."""
    bt = _at_least_two(_coeff_array(coeffs))
    n = bt.size
    psi = normalize(np.ravel(psi))
    target = ChebExpansion(bt).matrix(be.m) @ psi
    if np.linalg.norm(target) < 1e-12:
        raise ValueError("degenerate target: ||p(A/alpha) psi|| < 1e-12")
    h = chebyshev_history(be, bt, psi, 1, eps_lin, rng)
    sector = h.sector(1)
    # the shift register of sector 1 is uniform; project onto it
    out = normalize(sector.sum(axis=0))
    amp_ratio = 1.0 / h.sector_norms[1]
    return TransformReport(out, normalize(target), float(amp_ratio), float(amp_ratio * 2 * n), n)


def sector_probability(be, coeffs, psi):
    """n ||p psi||^2 over the total squared norm of the padded output."""
    bt = _coeff_array(coeffs)
    n = bt.size
    psi = normalize(np.ravel(psi))
    from .histstate import history_direct

    raw = history_direct(be.m, bt, psi, 1).reshape(2, n, -1)
    full = ChebExpansion(bt).matrix(be.m) @ psi
    return float(n * np.vdot(full, full).real / np.vdot(raw, raw).real)


def shifted_coeff_state(coeffs):
    """(sum_k (bt_k - bt_{k+2})|n-1-k> / alpha_bt, alpha_bt)."""
    v = shifted_coefficients(_coeff_array(coeffs))
    a = float(np.linalg.norm(v))
    if a == 0:
        raise ValueError("all-zero shifted coefficients")
    return v / a, a


def shifted_norm_quadrature(p, grid=4096):
    """sqrt((4/pi) int_{-pi}^{pi} |p(cos t) sin t|^2 dt), equal to alpha_bt for deg p < n-1."""
    t = -np.pi + 2 * np.pi * np.arange(grid) / grid
    vals = np.abs(p(np.cos(t)) * np.sin(t)) ** 2
    return float(np.sqrt(vals.mean() * 2 * np.pi * 4 / np.pi))


def qevt_block(be, coeffs):
    """Block encoding of p(A/alpha) with alpha_pre = ||Pad^-1|| alpha_bt / sqrt(n)."""
    bt = _at_least_two(_coeff_array(coeffs))
    n = bt.size
    d = be.dim
    sys = build_padded_chebyshev(be, n, 1)
    inv = np.linalg.inv(sys.padA)
    alpha_inv = norm2(inv)
    state, alpha_bt = shifted_coeff_state(bt)
    # columns: Pad^-1 / (2 alpha_inv) applied to |0>|shifted>|e_i>
    rhs = np.zeros((sys.dim, d), dtype=complex)
    rhs[: n * d] = np.kron(state.reshape(n, 1), np.eye(d))
    x = (inv @ rhs) / (2 * alpha_inv)
    # contract with <1| (1/sqrt n) sum_k <k|
    m = x[n * d:].reshape(n, d, d).sum(axis=0) / math.sqrt(n)
    alpha_pre = alpha_inv * alpha_bt / math.sqrt(n)
    return BlockEncoding(m, alpha_pre)


def state_transform_bound(c, c_tilde, psi, psi_tilde, check=True):
    """||norm(C~ psi~) - norm(C psi)|| vs 2||C|| ||psi~ - psi|| / ||C psi|| + 2||C~ - C|| / ||C psi||."""
    psi = np.ravel(psi)
    psi_tilde = np.ravel(psi_tilde)
    x = c @ psi
    xt = c_tilde @ psi_tilde
    lhs = float(np.linalg.norm(normalize(xt) - normalize(x)))
    nx = np.linalg.norm(x)
    rhs = float(2 * norm2(c) * np.linalg.norm(psi_tilde - psi) / nx + 2 * norm2(c_tilde - c) / nx)
    if check:
        check_bound(lhs, rhs, "state transformation perturbation", rtol=1e-12)
    return lhs, rhs


def _ensure_half(be):
    need = 2 * norm2(be.operator)
    return rescale_encoding(be, need) if be.alpha < need else be


def diffeq_order(alpha_t, eps, kappa_s=1.0, d_max=1):
    """n = c1 alpha t + c2 log(kappa_S / eps) with c1 = 1.25 e d_max / 2."""
    c1 = DIFFEQ_MARGIN * math.e * d_max / 2
    return max(2, int(math.ceil(c1 * alpha_t + DIFFEQ_C2 * math.log(kappa_s / eps))))


def solve_diffeq(be, t, psi, eps, kappa_s=1.0, d_max=1, eps_lin=0.0, rng=None):
    """e^{-itA} psi / ||.|| through the Chebyshev expansion of e^{-i alpha t x}."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    be = _ensure_half(be)
    tau = be.alpha * t
    n = diffeq_order(tau, eps, kappa_s, d_max)
    rep = qevt(be, exp_coeffs(tau, n), psi, eps_lin, rng)
    target = normalize(expm(-1j * t * be.operator) @ normalize(np.ravel(psi)))
    return TransformReport(rep.output, target, rep.amp_ratio, rep.predicted_queries, n)


def ground_filter(c, n):
    """Expansion of (1 - Erf(c x)) / 2."""
    bt = -erf_coeffs(c, n).coeffs / 2
    bt[0] += 1.0
    return ChebExpansion(bt)


def ground_parameters(alpha, delta_a, gamma0_abs, eps, kappa_s=1.0, d_max=1):
    """(c, n, m, delta_tilde) for the erf filter with explicit constants.

    c = sqrt(log(1/eps_t)) / delta_t,  m = ceil(2 c^2),
    n = sqrt(2 m log(c / eps_t)),  eps_t = |gamma0| eps / (4 kappa_S (n/sqrt(delta_t))^(d_max-1)).
    """
    dt = delta_a / (4 * alpha)
    n = 1
    for _ in range(4):
        infl = (n / math.sqrt(dt)) ** (d_max - 1)
        eps_t = gamma0_abs * eps / (4 * kappa_s * infl)
        c = math.sqrt(math.log(1 / eps_t)) / dt
        m = int(math.ceil(2 * c * c))
        n_new = int(math.ceil(math.sqrt(2 * m * math.log(max(c / eps_t, math.e)))))
        if n_new == n:
            break
        n = n_new
    return c, max(n, 2), m, dt


def jordan_ground(s, psi):
    """(psi_0, gamma_0): normalized first Jordan column and the coefficient of psi on it."""
    col = s[:, 0]
    norm = np.linalg.norm(col)
    coeff = np.linalg.solve(s, np.ravel(psi))[0]
    return col / norm, complex(coeff * norm)


def prepare_ground(be, delta_a, psi, eps, s=None, kappa_s=None, d_max=1, gamma0_abs=None,
                   eps_lin=0.0, rng=None):
    """Filter psi onto the ground state with the shifted error function.

    `s` is the Jordan basis with the ground state in column 0. When given the
    report's target is (gamma0/|gamma0|) psi_0, so the signed overlap can be checked.
    """
    be = _ensure_half(be)
    psi = normalize(np.ravel(psi))
    eig = np.linalg.eigvals(be.operator)
    if np.max(np.abs(eig.imag)) > 1e-6 * be.alpha:
        raise ValueError("spectrum is not real")
    neg = np.sort(eig.real[eig.real < 0])
    pos = eig.real[eig.real >= 0]
    if neg.size == 0 or neg[-1] > -delta_a / 2 + 1e-12 or (pos.size and pos.min() < delta_a / 2 - 1e-12):
        raise ValueError("spectral gap condition violated")
    target = None
    if s is not None:
        psi0, gamma0 = jordan_ground(s, psi)
        if abs(gamma0) < 1e-10:
            raise ValueError("initial state has no overlap with the ground state")
        gamma0_abs = abs(gamma0) if gamma0_abs is None else gamma0_abs
        target = psi0 * (gamma0 / abs(gamma0))
        if kappa_s is None:
            kappa_s = float(np.linalg.cond(s))
    if gamma0_abs is None:
        raise ValueError("need the Jordan basis or a lower bound on |gamma0|")
    kappa_s = 1.0 if kappa_s is None else kappa_s
    c, n, _, _ = ground_parameters(be.alpha, delta_a, gamma0_abs, eps, kappa_s, d_max)
    rep = qevt(be, ground_filter(c, n), psi, eps_lin, rng)
    # no phase fixing: the solver output keeps the phase of p(A/alpha) psi
    return TransformReport(rep.output, target, rep.amp_ratio, rep.predicted_queries, n)


def signed_overlap(report):
    """Re <target|output> (no phase optimization)."""
    return float(np.vdot(report.fidelity_target, report.output).real)


def sign_truncation_bound(c, n, delta_t, kappa_s, d_max, m=None):
    """kappa (n/sqrt dt)^(d-1) (e^{-c^2 dt^2}/(c dt) + (c/n) e^{-n^2/2m} + (c/n) e^{-c^2/2}(e c^2/2m)^m)."""
    if m is None:
        m = int(math.ceil(2 * c * c))
    t1 = math.exp(-(c * delta_t) ** 2) / (c * delta_t)
    t2 = (c / n) * math.exp(-n * n / (2 * m))
    # third term in log space to avoid overflow
    t3 = (c / n) * math.exp(-c * c / 2 + m * math.log(math.e * c * c / (2 * m)))
    return kappa_s * (n / math.sqrt(delta_t)) ** (d_max - 1) * (t1 + t2 + t3)


def matrix_sign_trunc_check(spec, c, n, delta_tilde, const=1.0):
    """(actual, bound) for the Chebyshev truncation of (I - Sgn(A))/2.

    The spectrum of the Jordan data must avoid (-2 delta~, 2 delta~).
    """
    from .core import build_from_jordan

    eig = spec.eigenvalues
    if np.any(np.abs(eig.imag) > 1e-12) or np.any(np.abs(eig.real) < 2 * delta_tilde - 1e-12) \
            or np.any(np.abs(eig.real) > 0.5 + 1e-12):
        raise ValueError("spectrum must lie in [-1/2, -2 delta] U [2 delta, 1/2]")
    a, s, _ = build_from_jordan(spec)
    # (I - Sgn(J))/2 is the identity on negative blocks and zero on positive ones
    diag = np.concatenate([np.full(size, 1.0 if lam.real < 0 else 0.0) for lam, size in spec.blocks])
    exact = (s * diag) @ np.linalg.inv(s)
    approx = ground_filter(c, n).matrix(a)
    actual = norm2(exact - approx)
    kappa = float(np.linalg.cond(s))
    bound = const * sign_truncation_bound(c, n, delta_tilde, kappa, spec.d_max)
    return actual, bound
