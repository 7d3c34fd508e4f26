"""Fourier-coefficient operators by frequency-domain convolution with the
Dirichlet kernel, evaluated through quantized Riemann sums with a
logarithmic rescaling, plus Chebyshev-coefficient state preparation."""

from dataclasses import dataclass
import math

import numpy as np

from .core import BlockEncoding, lower_shift, norm2, normalize
from .transform import shifted_coeff_state

DIRECT_GRID = 2 ** 13
ORACLE_CHECK_GRID = 2 ** 12
N_IN_CAP = 2 ** 14
MAX_OPERATOR_N = 512


@dataclass(frozen=True)
class FourierOracle:
    """Periodic g on [-pi, pi] with bounds g_max >= ||g|| and gprime_max >= ||g'||."""

    g: object
    g_max: float
    gprime_max: float

    def __post_init__(self):
        if not self.g_max > 0:
            raise ValueError("g_max must be positive")
        w = -np.pi + 2 * np.pi * np.arange(ORACLE_CHECK_GRID) / ORACLE_CHECK_GRID
        peak = np.abs(self(w)).max()
        if peak > self.g_max * (1 + 1e-9):
            raise ValueError("sampled |g| = %.6g exceeds g_max = %.6g" % (peak, self.g_max))

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        return np.asarray(self.g(w), dtype=complex) * np.ones(w.shape)


def trig_oracle(xi):
    """Oracle for g(w) = sum_j xi_j e^{-ijw}; `xi` maps frequency j (any sign) to xi_j."""
    lo, hi = min(xi), max(xi)
    dense = np.array([xi.get(j, 0) for j in range(lo, hi + 1)], dtype=complex)
    freqs = np.arange(lo, hi + 1, dtype=float)

    def g(w):
        # Horner in z = e^{-iw}, then the z^lo offset
        z = np.exp(-1j * np.asarray(w, dtype=float))
        acc = np.full(z.shape, dense[-1])
        for c in dense[-2::-1]:
            acc = acc * z + c
        return acc * z ** lo

    gp = float(np.sum(np.abs(dense * freqs)))
    w = -np.pi + 2 * np.pi * np.arange(2 ** 14) / 2 ** 14
    # sampled max plus the largest possible excursion between grid points
    g_max = float(np.abs(g(w)).max() + gp * np.pi / 2 ** 14)
    return FourierOracle(g, max(g_max, 1e-300), gp)


def random_band_limited(rng, band=6):
    """Random trigonometric polynomial with frequencies in [-band, band]."""
    xi = {j: (rng.standard_normal() + 1j * rng.standard_normal()) / (1 + abs(j))
          for j in range(-band, band + 1)}
    return trig_oracle(xi)


def direct_fourier_coeffs(oracle, n, grid=DIRECT_GRID):
    """xi_j = (2 pi)^-1 int g(w) e^{ijw} dw for j < n (trapezoidal)."""
    w = -np.pi + 2 * np.pi * np.arange(grid) / grid
    c = np.fft.ifft(oracle(w))[:n]
    return c * (-1.0) ** np.arange(n)


def quantized_mean(vals, h_max, n_abs, n_arg):
    """Mean over the last axis of Floor-quantized |h|/h_max with Floor-quantized Arg h."""
    if not h_max > 0:
        raise ValueError("h_max must be positive")
    vals = np.asarray(vals, dtype=complex)
    mag = np.floor(n_abs * np.abs(vals) / h_max) / n_abs
    if np.any(mag > 1):
        raise ValueError("|h| exceeds h_max")
    arg = np.mod(np.angle(vals), 2 * np.pi)
    arg = np.floor(n_arg * arg / (2 * np.pi)) * (2 * np.pi / n_arg)
    return (mag * np.exp(1j * arg)).mean(axis=-1)


def riemann_block(h, a, b, h_max, mu, n_in, n_abs, n_arg):
    """Quantized left Riemann sum approximating int_a^b h / ((b-a) h_max)."""
    if min(n_in, n_abs, n_arg) < 1:
        raise ValueError("n_in, n_abs, n_arg must be >= 1")
    if h_max == 0:
        raise ValueError("h_max must be nonzero")
    x = a + (b - a) * np.arange(n_in) / n_in
    return complex(quantized_mean(h(x), h_max, n_abs, n_arg))


def riemann_error_bound(a, b, h_max, mu, n_in, n_abs, n_arg):
    """2 pi / n_arg + 1 / n_abs + mu (b-a) / (2 n_in h_max)."""
    return 2 * np.pi / n_arg + 1 / n_abs + mu * (b - a) / (2 * n_in * h_max)


def fourier_sizes(oracle, n, eps, n_in_cap=N_IN_CAP):
    """Grid sizes; n_in is the explicit-constant formula clipped at n_in_cap."""
    logn = math.log(max(n, 2))
    formula = math.ceil(8 * (oracle.gprime_max * n * logn / (oracle.g_max * eps)
                             + n * n * logn / eps))
    n_abs = math.ceil(8 / eps)
    return {"n_in": int(min(formula, n_in_cap)), "n_in_formula": int(formula),
            "n_abs": n_abs, "n_arg": n_abs}


def _part_integrands(oracle, n, m):
    """The four convolution pieces as functions of the sample variable, batched over m.

    Pieces 1 and 4 live on v in [0, pi/2n]; pieces 2 and 3 on s in
    [ln(pi/2n), ln(pi/2)] with v = e^s.
    """
    shift = np.asarray(m, dtype=float)[:, None] * np.pi / n

    def kernel(v):
        # sin(nv)/sin(v) with its limit n at v = 0
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.sin(n * v) / np.sin(v)
        return np.where(v == 0, float(n), r)

    def inner(v, sign):
        return oracle(shift - sign * 2 * v) * np.exp(-sign * (n - 1) * 1j * v) * kernel(v) / np.pi

    def outer(s, sign):
        v = np.exp(s)
        return v * inner(v, sign)

    return [
        lambda x: inner(x[None, :], 1),
        lambda x: outer(x[None, :], 1),
        lambda x: outer(x[None, :], -1),
        lambda x: inner(x[None, :], -1),
    ]


def part_budgets(oracle, n):
    """(interval, h_max) of each piece; len * h_max is pi/4 g_max or ln(n)/2 g_max."""
    g = oracle.g_max
    lo, hi = math.log(math.pi / (2 * n)), math.log(math.pi / 2)
    inner = ((0.0, math.pi / (2 * n)), g * n / 2)
    outer = ((lo, hi), g / 2)
    return [inner, outer, outer, inner]


def convolution_diagonal(oracle, n, sizes, chunk=64):
    """Quantized evaluations D_m ~ sum_{j<n} xi_j e^{-ij pi m/n}, m = 0..2n-1.

    Returns (values, half_grid_gap, peaks) where half_grid_gap is |R_N - R_{N/2}|
    summed over pieces (an a-posteriori discretization estimate) and peaks
    holds len * max|h| per piece on the sample grid.
    """
    n_in, n_abs, n_arg = sizes["n_in"], sizes["n_abs"], sizes["n_arg"]
    budgets = part_budgets(oracle, n)
    ms = np.arange(2 * n)
    values = np.zeros(2 * n, dtype=complex)
    gap = np.zeros(2 * n)
    peaks = np.zeros(4)
    for start in range(0, 2 * n, chunk):
        mc = ms[start:start + chunk]
        parts = _part_integrands(oracle, n, mc)
        for k, (h, ((a, b), h_max)) in enumerate(zip(parts, budgets)):
            x = a + (b - a) * np.arange(n_in) / n_in
            vals = h(x)
            peaks[k] = max(peaks[k], (b - a) * np.abs(vals).max())
            scale = (b - a) * h_max
            full = quantized_mean(vals, h_max, n_abs, n_arg)
            values[start:start + chunk] += scale * full
            if n_in >= 2:
                half = quantized_mean(vals[:, ::2], h_max, n_abs, n_arg)
                gap[start:start + chunk] += scale * np.abs(full - half)
    return values, gap, peaks


def rescaled_convolution(oracle, n, m, sizes):
    """Single-m evaluation of the four-piece rescaled convolution."""
    if not 0 <= m < 2 * n:
        raise ValueError("m must lie in 0..2n-1")
    parts = _part_integrands(oracle, n, [m])
    total = 0j
    for h, ((a, b), h_max) in zip(parts, part_budgets(oracle, n)):
        x = a + (b - a) * np.arange(sizes["n_in"]) / sizes["n_in"]
        total += (b - a) * h_max * complex(quantized_mean(h(x), h_max, sizes["n_abs"],
                                                          sizes["n_arg"])[0])
    return total


def operator_normalization(oracle, n):
    return (math.pi / 2 + math.log(n)) * oracle.g_max


def diagonal_to_shift_operator(diag, n):
    """P F_2n^dagger diag F_2n P restricted to the first n levels."""
    f = np.fft.fft(np.eye(2 * n), norm="ortho")
    full = f.conj().T @ np.diag(diag) @ f
    return full[:n, :n]


def fourier_coeff_report(oracle, n, eps, n_in_cap=N_IN_CAP, sizes=None):
    """(block encoding, diagnostics) for sum_{j<n} xi_j L_n^j / ((pi/2 + ln n) g_max).

    Diagnostics hold the grid sizes, the normalized half-grid gap and the
    per-piece len * max|h| peaks.
    """
    if n > MAX_OPERATOR_N:
        raise ValueError("n capped at %d" % MAX_OPERATOR_N)
    if n < 2:
        raise ValueError("n must be >= 2")
    if sizes is None:
        sizes = fourier_sizes(oracle, n, eps, n_in_cap)
    alpha = operator_normalization(oracle, n)
    diag, gap, peaks = convolution_diagonal(oracle, n, sizes)
    if gap.max() / alpha > eps:
        raise ValueError("sizes insufficient for eps: half-grid gap %.3g" % (gap.max() / alpha))
    m = diagonal_to_shift_operator(diag / alpha, n)
    # the quantized operator can overshoot the unit ball by the quantization error
    nm = norm2(m)
    if nm > 1:
        m = m / nm
    info = {"sizes": sizes, "gap": float(gap.max() / alpha), "peaks": peaks}
    return BlockEncoding(m, alpha), info


def fourier_coeff_operator(oracle, n, eps, n_in_cap=N_IN_CAP, sizes=None):
    """Block encoding of sum_{j<n} xi_j L_n^j / ((pi/2 + ln n) g_max)."""
    return fourier_coeff_report(oracle, n, eps, n_in_cap, sizes)[0]


def direct_coefficient_operator(xi):
    """sum_j xi_j L_n^j assembled directly."""
    xi = np.asarray(xi, dtype=complex)
    n = xi.size
    out = np.zeros((n, n), dtype=complex)
    for j, c in enumerate(xi):
        out += c * np.eye(n, k=-j)
    return out


def chebyshev_oracle(p):
    """g(w) = p(cos w), whose one-sided coefficients are bt_j / 2."""
    bt = p.coeffs
    t = np.linspace(-np.pi, np.pi, 2 ** 14 + 1)
    pv = p(np.cos(t))
    deriv = np.polynomial.chebyshev.chebder(p.plain())
    dp = np.polynomial.chebyshev.chebval(np.cos(t), deriv) * np.sin(t)
    gp = float(np.abs(dp).max() * 1.01 + 1e-300)
    g_max = float(np.abs(pv).max() + gp * (t[1] - t[0]))
    return FourierOracle(lambda w: p(np.cos(w)), g_max, gp), bt.size


def chebyshev_coeff_state(p, eps, n_in_cap=N_IN_CAP):
    """(coefficient state, shifted state, amplification cost) via the Fourier operator."""
    oracle, n = chebyshev_oracle(p)
    n = max(n, 2)
    be = fourier_coeff_operator(oracle, n, eps, n_in_cap)
    col = be.m[:, 0]
    if np.linalg.norm(col) < 1e-14:
        raise ValueError("degenerate coefficients")
    coeff_state = normalize(col)
    ln = lower_shift(n)
    shifted = (np.eye(n) - ln @ ln) @ coeff_state[::-1] / 2
    if np.linalg.norm(shifted) < 1e-14:
        raise ValueError("degenerate coefficients")
    _, alpha_bt = shifted_coeff_state(p.coeffs)
    return coeff_state, normalize(shifted), float(be.alpha / alpha_bt)


def dirichlet_l1(n, nodes=16):
    """int_{-pi}^{pi} |D_n(w)| dw for D_n = sum_{|j|<=n} e^{-ijw}.

    Gauss-Legendre on each interval between consecutive zeros of D_n.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 2 * math.pi
    zeros = 2 * np.pi * np.arange(n + 1) / (2 * n + 1)
    edges = np.append(zeros, np.pi)
    x, w = np.polynomial.legendre.leggauss(nodes)
    a, b = edges[:-1, None], edges[1:, None]
    pts = (a + b) / 2 + (b - a) / 2 * x
    vals = np.abs(np.sin((n + 0.5) * pts) / np.sin(pts / 2))
    # D_n is even, integrate over [0, pi] and double
    return float(2 * np.sum(vals * w * (b - a) / 2))


def lebesgue_constant(n):
    """(2 pi)^-1 ||D_n||_1, which grows like (4/pi^2) log n."""
    return dirichlet_l1(n) / (2 * math.pi)


def riesz_check(oracle, grid=DIRECT_GRID):
    """(||sum_{j>=0} xi_j e^{-ijw}||_2, ||g||_2), both as grid root-mean-squares."""
    w = -np.pi + 2 * np.pi * np.arange(grid) / grid
    vals = oracle(w)
    c = np.fft.ifft(vals) * (-1.0) ** np.arange(grid)
    freq = np.fft.fftfreq(grid, 1 / grid)
    # xi_j sits at fft index j; negative j wrap to the top half
    c[freq < 0] = 0
    one_sided = np.fft.fft(c * (-1.0) ** np.arange(grid))
    rms = lambda v: float(np.sqrt(np.mean(np.abs(v) ** 2)))
    return rms(one_sided), rms(vals)
