"""Numerical range, pseudospectra and the bound checks: Crouzeix-Palencia,
recursive Bernstein bounds for matrix polynomials, exponential-norm bounds
and the Carleson-Hunt partial-sum experiment."""

from dataclasses import dataclass
import csv
import math

import numpy as np

from .cheby import ChebExpansion
from .core import as_cmatrix, build_from_jordan, expm, norm2

CROUZEIX_CONST = 1 + math.sqrt(2)
DEFAULT_ANGLES = 720
CARLESON_OMEGA = (math.pi / 3, 2 * math.pi / 3)


@dataclass(frozen=True)
class RangeBoundary:
    """Support points of the numerical range, one per sweep angle."""

    points: np.ndarray
    angles: np.ndarray

    def polygon(self):
        """Boundary points with consecutive duplicates dropped."""
        p = self.points
        keep = np.ones(p.size, dtype=bool)
        keep[1:] = np.abs(np.diff(p)) > 1e-14
        if p.size > 1 and abs(p[-1] - p[0]) <= 1e-14:
            keep[-1] = False
        return p[keep]

    def contains(self, z, margin=1e-8):
        """z inside the convex polygon, allowing `margin` outside each edge."""
        poly = self.polygon()
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if poly.size < 3:
            # segment or point: distance to the segment
            a, b = poly[0], poly[-1]
            ab = b - a
            t = np.zeros(z.shape) if abs(ab) == 0 else np.clip(((z - a) * np.conj(ab)).real / abs(ab) ** 2, 0, 1)
            return np.abs(z - (a + t * ab)) <= margin
        e = np.roll(poly, -1) - poly
        rel = z[:, None] - poly[None, :]
        cross = (e.real * rel.imag - e.imag * rel.real) / np.abs(e)
        # counterclockwise sweep keeps the interior on the left
        return np.all(cross >= -margin, axis=1)

    def is_convex(self, tol=1e-10):
        p = self.polygon()
        if p.size < 3:
            return True
        e1 = np.roll(p, -1) - p
        e2 = np.roll(e1, -1)
        cross = e1.real * e2.imag - e1.imag * e2.real
        return bool(np.all(cross >= -tol) or np.all(cross <= tol))


def numerical_range(c, n_angles=DEFAULT_ANGLES):
    """Boundary of W(C): Rayleigh quotients of top eigenvectors of Re(e^{i theta} C)."""
    c = as_cmatrix(c)
    if c.shape[0] != c.shape[1]:
        raise ValueError("matrix must be square")
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    rot = np.exp(1j * theta)[:, None, None] * c[None]
    herm = (rot + np.conj(np.swapaxes(rot, 1, 2))) / 2
    _, vecs = np.linalg.eigh(herm)
    v = vecs[:, :, -1]
    pts = np.einsum("ki,ij,kj->k", v.conj(), c, v)
    # support direction e^{-i theta}: points move clockwise as theta grows
    return RangeBoundary(pts[::-1], theta[::-1])


def numerical_abscissa(c):
    """lambda_max((C + C^dagger)/2)."""
    c = as_cmatrix(c)
    return float(np.linalg.eigvalsh((c + c.conj().T) / 2)[-1])


@dataclass(frozen=True)
class PseudospecGrid:
    grid: np.ndarray
    sigma_min: np.ndarray
    delta: float

    def __post_init__(self):
        if np.any(self.sigma_min < 0):
            raise ValueError("negative singular value")

    @property
    def mask(self):
        return self.sigma_min < self.delta

    def with_delta(self, delta):
        return PseudospecGrid(self.grid, self.sigma_min, delta)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z_re", "z_im", "sigma_min"])
            for z, s in zip(self.grid.ravel(), self.sigma_min.ravel()):
                w.writerow(["%.17g" % z.real, "%.17g" % z.imag, "%.17g" % s])


def pseudospectrum(c, delta, bounds, resolution):
    """sigma_min(C - z) on the lattice bounds = (xmin, xmax, ymin, ymax)."""
    c = as_cmatrix(c)
    nx, ny = (resolution, resolution) if np.isscalar(resolution) else resolution
    if nx * ny > 256 * 256:
        raise ValueError("resolution capped at 256^2 points")
    xs = np.linspace(bounds[0], bounds[1], nx)
    ys = np.linspace(bounds[2], bounds[3], ny)
    grid = xs[None, :] + 1j * ys[:, None]
    eye = np.eye(c.shape[0])
    shifted = c[None, None] - grid[..., None, None] * eye
    smin = np.linalg.svd(shifted, compute_uv=False)[..., -1]
    return PseudospecGrid(grid, np.maximum(smin, 0.0), float(delta))


def polynomial_matrix(coeffs, c):
    """p(C) for monomial coefficients (low to high) by Horner."""
    c = as_cmatrix(c)
    out = np.zeros_like(c)
    eye = np.eye(c.shape[0], dtype=complex)
    for a in np.asarray(coeffs, dtype=complex)[::-1]:
        out = out @ c + a * eye
    return out


def max_on_range(c, coeffs, n_angles=DEFAULT_ANGLES, interior=24):
    """max |p| over the numerical range boundary and a radial interior grid."""
    wr = numerical_range(c, n_angles)
    pts = wr.points
    center = pts.mean()
    rad = np.linspace(0, 1, interior)
    inner = center + rad[:, None] * (pts[None, :: max(1, n_angles // 90)] - center)
    vals = np.polynomial.polynomial.polyval(np.concatenate([pts, inner.ravel()]), coeffs)
    return float(np.abs(vals).max())


def crouzeix_check(c, coeffs, n_angles=DEFAULT_ANGLES):
    """(||p(C)||, (1 + sqrt2) max_{W(C)} |p|); raises if the inequality fails."""
    lhs = norm2(polynomial_matrix(coeffs, c))
    # boundary sampling slightly underestimates the max over W(C)
    rhs = CROUZEIX_CONST * max_on_range(c, coeffs, n_angles)
    if lhs > rhs * (1 + 1e-6):
        raise AssertionError("Crouzeix-Palencia bound violated: %.6g > %.6g" % (lhs, rhs))
    return lhs, rhs


def psi_shift_norm_check(region, n):
    """(||L_n Psi(L_n^-1)||, (1 + sqrt2) max over the cos(pi/(n+1)) disk of |w Psi(1/w)|)."""
    from .faber import psi_shift_operator

    q = region.q_series(n)
    lhs = norm2(psi_shift_operator(region, n))
    r = math.cos(math.pi / (n + 1))
    w = r * np.exp(2j * np.pi * np.arange(2048) / 2048)
    rhs = CROUZEIX_CONST * float(np.abs(np.polynomial.polynomial.polyval(w, q)).max())
    return lhs, rhs


def _as_cheb(p):
    if isinstance(p, ChebExpansion):
        return np.polynomial.Chebyshev(p.plain())
    if isinstance(p, np.polynomial.Chebyshev):
        return p
    return np.polynomial.Polynomial(p).convert(kind=np.polynomial.Chebyshev)


def _interval_max(p, a, b, grid=8192):
    x = np.cos(np.pi * (np.arange(grid) + 0.5) / grid)
    x = (a + b) / 2 + (b - a) / 2 * x
    return float(np.abs(p(x)).max())


def bernstein_derivative_bounds(p, a, b, delta, order):
    """Recursive Bernstein bounds on max |p^(k)| over [a+delta, b-delta], k = 0..order.

    The k-th derivative is bounded on the nested interval shrunk by k*h with
    h = delta / order, applying Bernstein's inequality with distance h to the
    previous interval's endpoints.
    """
    p = _as_cheb(p)
    deg = p.degree()
    out = [_interval_max(p, a, b)]
    if order == 0:
        return out
    h = delta / order
    for k in range(order):
        lo, hi = a + k * h, b - k * h
        length = hi - lo
        if length <= 2 * h:
            raise ValueError("delta too large for the interval")
        out.append(max(deg - k, 0) / math.sqrt(h * (length - h)) * out[-1])
    return out


def bernstein_matrix_bound(spec, p, a, b, delta, const=None):
    """(||p(A)||, bound) for A built from the Jordan spec.

    With const=None the bound is the rigorous recursive form
    kappa_S max_l sum_{k < d_l} D_k / k!; otherwise it is the asymptotic form
    const * kappa_S (deg / sqrt delta)^(d_max - 1) ||p||_max.
    """
    eig = spec.eigenvalues
    if np.max(np.abs(eig.imag)) > 1e-12 or eig.real.min() < a + delta - 1e-12 or eig.real.max() > b - delta + 1e-12:
        raise ValueError("spectrum must lie in [a + delta, b - delta]")
    a_mat, s, _ = build_from_jordan(spec)
    pc = _as_cheb(p)
    actual = norm2(_cheb_matrix(pc, a_mat))
    kappa = float(np.linalg.cond(s))
    d_max = spec.d_max
    if const is None:
        d = bernstein_derivative_bounds(pc, a, b, delta, d_max - 1)
        bound = kappa * sum(d[k] / math.factorial(k) for k in range(d_max))
    else:
        bound = const * kappa * (max(pc.degree(), 1) / math.sqrt(delta)) ** (d_max - 1) * _interval_max(pc, a, b)
    return actual, float(bound)


def _cheb_matrix(pc, m):
    from .cheby import chebyshev_sum_matrix

    # map [domain] to the reference window before summing
    off, scl = pc.mapparms()
    return chebyshev_sum_matrix(pc.coef, off * np.eye(m.shape[0]) + scl * m)


def calibrate_dominate(actuals, rates, slack=2.0):
    """Fit C on the first instance with headroom `slack`, then check C * rate >= actual.

    Returns (C, ok, margins) with margins = C * rate / actual.
    """
    actuals = np.asarray(actuals, dtype=float)
    rates = np.asarray(rates, dtype=float)
    const = slack * actuals[0] / rates[0]
    margins = const * rates / np.maximum(actuals, 1e-300)
    return float(const), bool(np.all(margins >= 1.0)), margins


def exp_norm_bounds(c, tau, jordan=None):
    """(||e^{tau C}||, e^{tau lambda_max(Re C)}, jordan bound or None).

    The Jordan bound e kappa_S max_l max(1, tau)^(d_l - 1) e^{tau Re lambda_l}
    follows from sum_{k<d} tau^k / k! <= e max(1, tau)^(d-1).
    """
    c = as_cmatrix(c)
    actual = norm2(expm(tau * c))
    abscissa = math.exp(tau * numerical_abscissa(c))
    jb = None
    if jordan is not None:
        s = build_from_jordan(jordan)[1]
        kappa = float(np.linalg.cond(s))
        jb = math.e * kappa * max(max(1.0, tau) ** (dl - 1) * math.exp(tau * complex(lam).real)
                                  for lam, dl in jordan.blocks)
    return actual, abscissa, jb


def square_wave_design(n):
    """Chebyshev expansion of sgn(x) truncated at order n; its one-sided Fourier
    partial sums grow like log n at x = 0."""
    beta = np.zeros(n, dtype=complex)
    j = np.arange(1, n, 2)
    beta[j] = 4 / (np.pi * j) * (-1.0) ** ((j - 1) // 2)
    return ChebExpansion.from_plain(beta)


def one_sided_coeffs(p):
    """Coefficients c_j of the positive frequencies e^{ijw} in p(cos w): c_0 = beta_0, c_j = beta_j/2."""
    beta = p.plain().copy()
    beta[1:] /= 2
    return beta


def carleson_experiment(p, n_max, trials, rng, ns=None, omega=CARLESON_OMEGA):
    """(worst_curve, avg_curve) of one-sided partial sums of p(cos w), over ns.

    worst_curve(n) = max over w of |S_n(w)| / ||p||; avg_curve(n) = mean over
    random w of max_{m <= n} |S_m(w)| / ||p||.
    """
    if trials < 30:
        raise ValueError("need at least 30 trials")
    c = one_sided_coeffs(p)
    if c.size < n_max:
        c = np.concatenate([c, np.zeros(n_max - c.size)])
    c = c[:n_max]
    if ns is None:
        ns = 2 ** np.arange(3, int(math.log2(n_max)) + 1)
    ns = np.asarray(ns, dtype=int)
    pmax = max(_interval_max(_as_cheb(p), -1, 1), 1e-300)
    size = 16 * n_max
    worst = np.empty(ns.size)
    for i, n in enumerate(ns):
        buf = np.zeros(size, dtype=complex)
        buf[:n] = c[:n]
        worst[i] = np.abs(np.fft.ifft(buf) * size).max() / pmax
    w = rng.uniform(omega[0], omega[1], trials)
    terms = c[None, :] * np.exp(1j * np.outer(w, np.arange(n_max)))
    running = np.maximum.accumulate(np.abs(np.cumsum(terms, axis=1)), axis=1)
    avg = running[:, ns - 1].mean(axis=0) / pmax
    return worst, avg
