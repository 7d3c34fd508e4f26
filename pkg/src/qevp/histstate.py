"""Padded Chebyshev generating-function systems, an emulated linear-system
solver, and history states."""

from dataclasses import dataclass

import numpy as np

from .cheby import ChebExpansion, cheb_all_matrix
from .core import (
    as_cmatrix,
    block_norm_bound,
    check_bound,
    lower_shift,
    norm2,
    normalize,
)

MAX_PADDED_DIM = 2 ** 13
DENSE_LIMIT = 2048
CHEB_ENC_ALPHA = 4.0


@dataclass(frozen=True)
class PaddedSystem:
    """Pad(A), Pad(B) on the ancilla (sector s, shift l) times system register.

    Row/column index is (s*n + l)*d + i.
    """

    padA: np.ndarray
    padB: np.ndarray
    n: int
    eta: int
    d: int
    m: np.ndarray
    enc_alpha: float = CHEB_ENC_ALPHA

    @property
    def dim(self):
        return (1 + self.eta) * self.n * self.d


@dataclass(frozen=True)
class HistoryState:
    """Unit vector over (sector, shift, system) with per-sector norms."""

    amps: np.ndarray
    sector_norms: np.ndarray
    n: int
    eta: int
    d: int

    def blocks(self):
        """Amplitudes reshaped to (eta+1, n, d)."""
        return self.amps.reshape(self.eta + 1, self.n, self.d)

    def sector(self, s):
        return self.blocks()[s]

    def register(self):
        """Amplitudes reshaped to ((eta+1)*n, d): shift register times system."""
        return self.amps.reshape((self.eta + 1) * self.n, self.d)


def _make_history(x, n, eta, d):
    amps = normalize(np.ravel(x))
    sec = np.linalg.norm(amps.reshape(eta + 1, n * d), axis=1)
    return HistoryState(amps, sec, n, eta, d)


def _pad_blocks(top, n, eta, d):
    """Assemble Pad from the top-left A11 with the runaway rows appended."""
    nd = n * d
    total = (1 + eta) * nd
    pad = np.zeros((total, total), dtype=complex)
    pad[:nd, :nd] = top
    if eta > 0:
        eye = np.eye(d)
        # A21 = -|0><n-1| (x) I
        pad[nd:nd + d, nd - d:nd] = -eye
        # A22 = (I - L_{eta n}) (x) I
        pad[nd:, nd:] = np.kron(np.eye(eta * n) - lower_shift(eta * n), eye)
    return pad


def chebyshev_top_blocks(m, n):
    """Toeplitz blocks [I, -2M, I] of A11 = I + L^2 (x) I - 2 L (x) M."""
    d = m.shape[0]
    eye = np.eye(d, dtype=complex)
    return [eye, -2 * m, eye][: max(1, min(3, n))]


def toeplitz_lower(blocks, n):
    """Dense block lower-triangular Toeplitz matrix sum_k L^k (x) blocks[k]."""
    d = blocks[0].shape[0]
    out = np.zeros((n * d, n * d), dtype=complex)
    for k, b in enumerate(blocks[:n]):
        out += np.kron(np.linalg.matrix_power(lower_shift(n), k), b)
    return out


def build_padded_chebyshev(be, n, eta):
    """Pad(A) and Pad(B) for the matrix Chebyshev generating function."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if eta < 0:
        raise ValueError("eta must be >= 0")
    m = be.m
    d = m.shape[0]
    if (1 + eta) * n * d > MAX_PADDED_DIM:
        raise ValueError("padded dimension %d exceeds %d" % ((1 + eta) * n * d, MAX_PADDED_DIM))
    ln = lower_shift(n)
    eye = np.eye(d)
    a11 = np.kron(np.eye(n) + ln @ ln, eye) - 2 * np.kron(ln, m)
    pad_a = _pad_blocks(a11, n, eta, d)
    b11 = np.kron((np.eye(n) - ln @ ln) / 2, eye)
    pad_b = np.eye(pad_a.shape[0], dtype=complex)
    pad_b[: n * d, : n * d] = b11
    return PaddedSystem(pad_a, pad_b, n, eta, d, m)


def solve_padded(top_blocks, n, eta, rhs):
    """Exact solve of Pad x = rhs by block forward substitution.

    `top_blocks` are the Toeplitz blocks T_0, T_1, ... of A11 = sum L^k (x) T_k;
    the runaway rows are x_r - x_{r-1} = b_r.
    """
    d = top_blocks[0].shape[0]
    b = np.asarray(rhs, dtype=complex).reshape((1 + eta) * n, d)
    x = np.zeros_like(b)
    t0 = top_blocks[0]
    diag_identity = np.allclose(t0, np.eye(d))
    lu = None if diag_identity else np.linalg.inv(t0)
    tail = top_blocks[1:n]
    for l in range(n):
        acc = b[l].copy()
        for k, tk in enumerate(tail[:l], start=1):
            acc -= tk @ x[l - k]
        x[l] = acc if diag_identity else lu @ acc
    for r in range(n, (1 + eta) * n):
        x[r] = b[r] + x[r - 1]
    return x.ravel()


def perturb_unit(x, eps_lin, rng):
    """Rotate unit x toward a random orthogonal direction by Euclidean distance eps_lin."""
    if eps_lin <= 0:
        return x
    if eps_lin > 2:
        raise ValueError("eps_lin must be <= 2")
    if rng is None:
        raise ValueError("a random generator is required when eps_lin > 0")
    w = rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)
    w = w - np.vdot(x, w) * x
    w = normalize(w)
    phi = 2 * np.arcsin(eps_lin / 2)
    return np.cos(phi) * x + np.sin(phi) * w


def emulate_qls(c, b, eps_lin=0.0, rng=None):
    """Normalized C^-1 b, optionally displaced by exactly eps_lin."""
    c = as_cmatrix(c)
    b = np.ravel(np.asarray(b, dtype=complex))
    sv = np.linalg.svd(c, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > 1e12:
        raise np.linalg.LinAlgError("matrix is singular to working precision")
    x = normalize(np.linalg.solve(c, b))
    return perturb_unit(x, eps_lin, rng)


def shifted_coefficients(coeffs):
    """sum_k (bt_k - bt_{k+2}) |n-1-k> as a length-n vector (index n-1-k)."""
    bt = np.asarray(coeffs, dtype=complex)
    n = bt.size
    diff = bt - np.concatenate([bt[2:], np.zeros(min(2, n))])
    return diff[::-1].copy()


def initial_state(coeffs):
    """sum_k bt_k |n-1-k> (unshifted)."""
    return np.asarray(coeffs, dtype=complex)[::-1].copy()


def chebyshev_history(be, coeffs, psi, eta, eps_lin=0.0, rng=None, dense=None):
    """Padded Chebyshev history state from the shifted-coefficient input."""
    if isinstance(coeffs, ChebExpansion):
        coeffs = coeffs.coeffs
    coeffs = np.asarray(coeffs, dtype=complex)
    n = coeffs.size
    if n < 2:
        raise ValueError("n must be >= 2")
    psi = normalize(np.ravel(psi))
    d = be.dim
    total = (1 + eta) * n * d
    shifted = shifted_coefficients(coeffs)
    if not np.any(shifted):
        raise ValueError("all-zero shifted coefficients")
    rhs = np.zeros(total, dtype=complex)
    rhs[: n * d] = np.kron(normalize(shifted), psi)
    if dense is None:
        dense = total <= DENSE_LIMIT
    if dense:
        sys = build_padded_chebyshev(be, n, eta)
        x = emulate_qls(sys.padA, rhs, eps_lin, rng)
    else:
        x = normalize(solve_padded(chebyshev_top_blocks(be.m, n), n, eta, rhs))
        x = perturb_unit(x, eps_lin, rng)
    return _make_history(x, n, eta, d)


def history_direct(m, coeffs, psi, eta):
    """Unnormalized padded output assembled from explicit Chebyshev matrices."""
    coeffs = np.asarray(coeffs, dtype=complex)
    n = coeffs.size
    tt = cheb_all_matrix("Ttilde", n, m)
    psi = np.ravel(psi)
    d = psi.size
    out = np.zeros((1 + eta, n, d), dtype=complex)
    for l in range(n):
        for k in range(n - 1 - l, n):
            out[0, l] += coeffs[k] * (tt[k + l - n + 1] @ psi)
    full = sum(coeffs[k] * (tt[k] @ psi) for k in range(n))
    out[1:] = full
    return out.ravel()


def pad_inverse_closed_form(m, n, eta):
    """Closed-form block grid of Pad(A)^-1 (U_{l-k} blocks, repeated last row, unit corner)."""
    d = m.shape[0]
    us = cheb_all_matrix("U", n, m)
    zero = np.zeros((d, d), dtype=complex)
    eye = np.eye(d, dtype=complex)
    size = (1 + eta) * n
    grid = [[zero] * size for _ in range(size)]
    for l in range(size):
        row_l = min(l, n - 1)
        for k in range(n):
            if row_l >= k:
                grid[l][k] = us[row_l - k]
        for k in range(n, l + 1):
            grid[l][k] = eye
    return grid


def assemble(grid):
    return np.block(grid)


def verify_pad_inverse(sys):
    """Max entry deviation between inv(Pad(A)) and its closed form."""
    if sys.eta < 1:
        raise ValueError("verification expects eta >= 1")
    inv = np.linalg.inv(sys.padA)
    closed = assemble(pad_inverse_closed_form(sys.m, sys.n, sys.eta))
    return float(np.max(np.abs(inv - closed)))


def pad_inverse_norm_bound(sys):
    """Block-norm bound on ||Pad(A)^-1|| from the closed-form grid."""
    return block_norm_bound(pad_inverse_closed_form(sys.m, sys.n, sys.eta))


def generating_function_error(m, n):
    """||sum_j L^j (x) T~_j(M) - (I - L^2 (x) I)(2(I + L^2 (x) I - 2 L (x) M))^-1||."""
    m = as_cmatrix(m)
    d = m.shape[0]
    ln = lower_shift(n)
    eye = np.eye(d)
    tt = cheb_all_matrix("Ttilde", n, m)
    lhs = sum(np.kron(np.linalg.matrix_power(ln, j), tt[j]) for j in range(n))
    l2 = np.kron(ln @ ln, eye)
    big = np.eye(n * d)
    rhs = (big - l2) @ np.linalg.inv(2 * (big + l2 - 2 * np.kron(ln, m)))
    return norm2(lhs - rhs)


def perturbed_solution_bound(c, c_tilde, psi, psi_tilde, check=True):
    """Distance of normalized solutions vs the perturbation bound.

    rhs = 2||C^-1|| ||psi~ - psi|| / ||C^-1 psi|| + 2||C~^-1|| ||C^-1|| ||C~ - C|| / ||C^-1 psi||
    """
    c, c_tilde = as_cmatrix(c), as_cmatrix(c_tilde)
    psi, psi_tilde = np.ravel(psi), np.ravel(psi_tilde)
    ci = np.linalg.inv(c)
    cti = np.linalg.inv(c_tilde)
    x = ci @ psi
    xt = cti @ psi_tilde
    lhs = float(np.linalg.norm(normalize(xt) - normalize(x)))
    nx = np.linalg.norm(x)
    rhs = (2 * norm2(ci) * np.linalg.norm(psi_tilde - psi) / nx
           + 2 * norm2(cti) * norm2(ci) * norm2(c_tilde - c) / nx)
    if check:
        check_bound(lhs, rhs, "linear-system perturbation", rtol=1e-12)
    return lhs, float(rhs)
