"""Chebyshev polynomials (scalar and matrix), expansion coefficients and
truncation bounds."""

from dataclasses import dataclass

import numpy as np
from scipy.special import ive, jv

from .core import as_cmatrix, build_from_jordan, expm, norm2

KINDS = ("T", "Ttilde", "U")


@dataclass(frozen=True)
class ChebExpansion:
    """Coefficients in the rescaled convention p(x) = sum_k bt_k T~_k(x), T~_0 = 1/2."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or c.size < 1:
            raise ValueError("need a nonempty 1-D coefficient sequence")
        object.__setattr__(self, "coeffs", c)
        # both conventions must evaluate to the same function
        x = np.cos(np.linspace(0.1, 3.0, 16))
        a = c @ cheb_all("Ttilde", c.size, x)
        b = chebyshev_sum(self.plain(), x)
        if not np.allclose(a, b, rtol=1e-10, atol=1e-10 * (1 + np.abs(c).sum())):
            raise ValueError("inconsistent coefficient conventions")

    @classmethod
    def from_plain(cls, beta):
        """Build from un-rescaled coefficients beta_k of sum beta_k T_k."""
        bt = np.array(beta, dtype=complex)
        bt[0] *= 2
        return cls(bt)

    @property
    def order(self):
        return self.coeffs.size

    def plain(self):
        """Coefficients beta_k with p = sum beta_k T_k."""
        b = self.coeffs.copy()
        b[0] /= 2
        return b

    def __call__(self, x):
        return chebyshev_sum(self.plain(), x)

    def matrix(self, m):
        """p(M) for a square matrix M."""
        return chebyshev_sum_matrix(self.plain(), m)


def chebyshev_sum(beta, x):
    """sum_k beta_k T_k(x) by the three-term recurrence, vectorized in x."""
    x = np.asarray(x, dtype=complex)
    t_prev = np.ones_like(x)
    out = beta[0] * t_prev
    if len(beta) == 1:
        return out
    t = x.copy()
    out = out + beta[1] * t
    for b in beta[2:]:
        t_prev, t = t, 2 * x * t - t_prev
        out = out + b * t
    return out


def chebyshev_sum_matrix(beta, m):
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix argument must be square")
    eye = np.eye(m.shape[0], dtype=complex)
    out = beta[0] * eye
    if len(beta) == 1:
        return out
    t_prev, t = eye, m.copy()
    out = out + beta[1] * t
    for b in beta[2:]:
        t_prev, t = t, 2 * m @ t - t_prev
        out = out + b * t
    return out


def _check_kind(kind):
    if kind not in KINDS:
        raise ValueError("kind must be one of %s, got %r" % (KINDS, kind))


def cheb_eval(kind, j, x):
    """T_j, T~_j or U_j at x (scalar or array) by the three-term recurrence."""
    _check_kind(kind)
    if j < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=complex if np.iscomplexobj(x) else float)
    p0 = np.ones_like(x)
    if j == 0:
        out = p0 / 2 if kind == "Ttilde" else p0
    else:
        p1 = 2 * x if kind == "U" else x.copy()
        for _ in range(j - 1):
            p0, p1 = p1, 2 * x * p1 - p0
        out = p1
    return out[()] if out.ndim == 0 else out


def cheb_all(kind, n, x):
    """Array of shape (n, *x.shape) with P_0(x), ..., P_{n-1}(x)."""
    _check_kind(kind)
    x = np.asarray(x, dtype=complex if np.iscomplexobj(x) else float)
    out = np.empty((n,) + x.shape, dtype=x.dtype)
    if n == 0:
        return out
    out[0] = 1.0
    if n > 1:
        out[1] = 2 * x if kind == "U" else x
    for j in range(2, n):
        out[j] = 2 * x * out[j - 1] - out[j - 2]
    if kind == "Ttilde":
        out[0] = 0.5
    return out


def cheb_all_matrix(kind, n, m):
    """List [P_0(M), ..., P_{n-1}(M)] by the matrix recurrence."""
    _check_kind(kind)
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix argument must be square")
    eye = np.eye(m.shape[0], dtype=complex)
    out = []
    if n > 0:
        out.append(eye)
    if n > 1:
        out.append(2 * m if kind == "U" else m.copy())
    for _ in range(2, n):
        out.append(2 * m @ out[-1] - out[-2])
    if kind == "Ttilde" and n > 0:
        out[0] = eye / 2
    return out


def cheb_eval_matrix(kind, j, m):
    if j < 0:
        raise ValueError("degree must be nonnegative")
    return cheb_all_matrix(kind, j + 1, m)[j]


def exp_coeffs(tau, n):
    """Expansion of e^{-i tau x}: beta_0 = J_0(tau), beta_j = 2 (-i)^j J_j(tau)."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if n < 1:
        raise ValueError("n must be >= 1")
    j = np.arange(n)
    beta = 2 * (-1j) ** j * jv(j, tau)
    # rescaled convention: bt_0 = 2 beta_0 = 2 J_0
    return ChebExpansion(beta.astype(complex))


def erf_coeffs(c, n):
    """Expansion of Erf(c x); only odd degrees are nonzero."""
    if not c > 0:
        raise ValueError("c must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    beta = np.zeros(n, dtype=complex)
    j = np.arange(1, n, 2)
    h = c * c / 2
    # I_k(h) e^{-h} is evaluated stably through the scaled Bessel function
    beta[j] = (2 * c / (j * np.sqrt(np.pi))) * (-1.0) ** ((j - 1) // 2) * (
        ive((j - 1) // 2, h) + ive((j + 1) // 2, h)
    )
    return ChebExpansion(beta)


def cheb_coeffs_numeric(f, n):
    """Cosine-transform quadrature of f(cos theta) on a 4n-point grid."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = 4 * n
    theta = np.pi * (np.arange(m) + 0.5) / m
    fx = np.asarray(f(np.cos(theta)), dtype=complex) * np.ones(m)
    j = np.arange(n)
    beta = (2.0 / m) * (np.cos(np.outer(j, theta)) @ fx)
    # beta here is already the rescaled bt_j (the j=0 term carries the factor 2)
    return ChebExpansion(beta)


def gen_function_check(x, y, terms=None):
    """Partial sums vs closed forms of the T~ and U generating functions.

    Returns ((lhs_T, rhs_T), (lhs_U, rhs_U)).
    """
    if abs(y) >= 1:
        raise ValueError("|y| must be < 1")
    if terms is None:
        terms = 64 if y == 0 else int(np.ceil(40 / -np.log10(max(abs(y), 1e-300)))) + 64
    powers = y ** np.arange(terms)
    lhs_t = np.sum(cheb_all("Ttilde", terms, np.asarray(x, dtype=complex)) * powers)
    lhs_u = np.sum(cheb_all("U", terms, np.asarray(x, dtype=complex)) * powers)
    den = 1 + y * y - 2 * y * x
    return (lhs_t, (1 - y * y) / (2 * den)), (lhs_u, 1 / den)


def exp_truncation_error(tau, n, grid=2001):
    """Max error on [-1,1] of the order-n truncation of e^{-i tau x}."""
    x = np.linspace(-1, 1, grid)
    return float(np.max(np.abs(exp_coeffs(tau, n)(x) - np.exp(-1j * tau * x))))


def matrix_exp_trunc_error(a, tau, n):
    """||e^{-i tau A} - sum_{j<n} bt_j T~_j(A)||."""
    return norm2(expm(-1j * tau * a) - exp_coeffs(tau, n).matrix(a))


def matrix_exp_trunc_bound(spec, tau, ns, const=None):
    """Check the matrix exponential truncation rate over a sweep of orders.

    The constant C in C kappa_S (e d_max tau / (2n))^n is fitted at the
    smallest n of the sweep (unless given) and must dominate the rest.
    Returns a list of (n, actual, bound).
    """
    a, s, _ = build_from_jordan(spec)
    eig = spec.eigenvalues
    if np.max(np.abs(eig.imag)) > 1e-12 or np.max(np.abs(eig.real)) > 0.5 + 1e-12:
        raise ValueError("spectrum must lie in [-1/2, 1/2]")
    ns = sorted(int(n) for n in np.atleast_1d(ns))
    kappa = np.linalg.cond(s)
    d_max = spec.d_max
    if tau > 0 and ns[0] < np.e * d_max * tau:
        raise ValueError("need n >= e d_max tau")

    def rate(n):
        return kappa * (np.e * d_max * tau / (2 * n)) ** n if tau > 0 else 0.0

    rows = [(n, matrix_exp_trunc_error(a, tau, n), rate(n)) for n in ns]
    if const is None:
        n0, act0, r0 = rows[0]
        const = act0 / r0 if r0 > 0 else 1.0
        const = max(const, 1.0)
    # round-off floor: once the truncation is below machine precision the
    # measured error is dominated by the dense exponential itself
    floor = 1e-13 * kappa * max(1.0, norm2(expm(-1j * tau * a)))
    return [(n, act, const * r + floor) for n, act, r in rows]


def cheby_l2_sums(x, n):
    """(sum_{j<n} T_j(x)^2, sum_{j<n} T~_j(x)^2)."""
    t = cheb_all("T", n, x)
    s = np.sum(t * t, axis=0)
    return s, s - 0.75


def cheby_l2_bounds(n):
    """Lower/upper bounds for sum T_j^2 on [-1/2, 1/2] (T~ version shifts by -3/4)."""
    r = np.sqrt(3) / 3
    return n / 2 - r, n / 2 + r


def pell_residual(j, x):
    """T_j(x)^2 - (x^2 - 1) U_{j-1}(x)^2 - 1."""
    if j == 0:
        return cheb_eval("T", 0, x) ** 2 - 1
    return cheb_eval("T", j, x) ** 2 - (x * x - 1) * cheb_eval("U", j - 1, x) ** 2 - 1
