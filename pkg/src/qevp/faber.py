"""Faber regions given by truncated Laurent series of the exterior map,
Faber polynomials and coefficients, padded Faber systems and the Faber
eigenvalue transformation."""

from dataclasses import dataclass, field
import json
import math
import warnings

import numpy as np
from scipy.spatial import cKDTree

from .core import block_norm_bound, expm, lower_shift, norm2, normalize
from .histstate import (
    DENSE_LIMIT,
    MAX_PADDED_DIM,
    PaddedSystem,
    _make_history,
    _pad_blocks,
    emulate_qls,
    perturb_unit,
    solve_padded,
    toeplitz_lower,
)
from .transform import TransformReport

BOUNDARY_GRID = 4096
COEFF_GRID = 2 ** 13
MAX_FABER_DEGREE = 128
FABER_C1 = 1.25
FABER_C2 = 3.0


@dataclass(frozen=True)
class FaberRegion:
    """Exterior map Psi(w) = varsigma w + sum_k tail[k] w^{-k}, k = 0..m."""

    varsigma: float
    tail: np.ndarray
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.varsigma > 0:
            raise ValueError("varsigma must be positive")
        tail = np.atleast_1d(np.asarray(self.tail, dtype=complex))
        object.__setattr__(self, "tail", tail)
        object.__setattr__(self, "varsigma", float(self.varsigma))
        object.__setattr__(self, "flags", dict(self.flags))
        if not self.flags.get("slit", False):
            w = np.exp(2j * np.pi * np.arange(BOUNDARY_GRID) / BOUNDARY_GRID)
            z = self.psi(w)
            pts = np.column_stack([z.real, z.imag])
            dist, _ = cKDTree(pts).query(pts, k=2)
            if dist[:, 1].min() < 1e-12 * max(1.0, np.abs(z).max()):
                raise ValueError("Psi is not injective on the unit circle grid")

    @property
    def capacity(self):
        """zeta = Psi'(infinity)."""
        return self.varsigma

    def psi(self, w):
        w = np.asarray(w, dtype=complex)
        out = self.varsigma * w
        for k, c in enumerate(self.tail):
            out = out + c * w ** (-k)
        return out

    def dpsi(self, w):
        w = np.asarray(w, dtype=complex)
        out = self.varsigma * np.ones_like(w)
        for k, c in enumerate(self.tail):
            if k:
                out = out - k * c * w ** (-k - 1)
        return out

    def boundary(self, grid=BOUNDARY_GRID, r=1.0):
        theta = 2 * np.pi * np.arange(grid) / grid
        return self.psi(r * np.exp(1j * theta))

    def q_series(self, n):
        """Coefficients of y Psi(1/y) = varsigma + tail_0 y + tail_1 y^2 + ... up to y^(n-1)."""
        q = np.zeros(n, dtype=complex)
        q[0] = self.varsigma
        m = min(self.tail.size, n - 1)
        q[1:m + 1] = self.tail[:m]
        return q

    def p_series(self, n):
        """Coefficients of Psi'(1/y) = varsigma - sum_k k tail_k y^(k+1) up to y^(n-1)."""
        p = np.zeros(n, dtype=complex)
        p[0] = self.varsigma
        for k in range(1, self.tail.size):
            if k + 1 < n:
                p[k + 1] = -k * self.tail[k]
        return p

    def contains(self, z, margin=0.0):
        """Points inside the boundary polygon (winding number), at distance >= margin."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        b = self.boundary()
        if self.flags.get("slit", False):
            # the interval [-varsigma-tail1, ...] degenerates to a segment
            lo, hi = b.real.min(), b.real.max()
            return (np.abs(z.imag) <= 1e-12) & (z.real >= lo) & (z.real <= hi)
        diff = b[None, :] - z[:, None]
        ang = np.angle(np.roll(diff, -1, axis=1) / diff)
        inside = np.abs(ang.sum(axis=1)) > np.pi
        if margin > 0:
            dist = np.abs(diff).min(axis=1)
            inside &= dist >= margin
        return inside

    def to_json(self):
        return {
            "varsigma": self.varsigma,
            "tail_re": self.tail.real.tolist(),
            "tail_im": self.tail.imag.tolist(),
            "flags": self.flags,
        }

    @classmethod
    def from_json(cls, obj):
        tail = np.asarray(obj.get("tail_re", []), dtype=float)
        tail_im = np.asarray(obj.get("tail_im", np.zeros_like(tail)), dtype=float)
        if tail.size != tail_im.size:
            raise ValueError("tail_re and tail_im differ in length")
        return cls(float(obj["varsigma"]), tail + 1j * tail_im, obj.get("flags", {}))


def load_region(path):
    with open(path) as fh:
        return FaberRegion.from_json(json.load(fh))


def special_region(kind):
    """interval: Joukowsky map; disk: identity; left_halfdisk_smooth: a
    rounded D-shape in the closed left half plane."""
    if kind == "interval":
        return FaberRegion(0.5, [0.0, 0.5], {"convex": True, "real_symmetric": True,
                                             "left_half_plane": False, "slit": True})
    if kind == "disk":
        return FaberRegion(1.0, [0.0], {"convex": True, "real_symmetric": True,
                                        "left_half_plane": False})
    if kind == "left_halfdisk_smooth":
        return FaberRegion(0.42, [-0.5, -0.06, 0.012],
                           {"convex": True, "real_symmetric": True, "left_half_plane": True})
    raise ValueError("unknown region kind %r" % kind)


def region_flags_hold(region, grid=BOUNDARY_GRID):
    """Numerically verify the convex / real-symmetric / left-half-plane flags."""
    z = region.boundary(grid)
    out = {}
    if region.flags.get("convex"):
        if region.flags.get("slit"):
            out["convex"] = bool(np.max(np.abs(z.imag)) < 1e-12)
        else:
            e1 = np.roll(z, -1) - z
            e2 = np.roll(e1, -1)
            cross = (e1.real * e2.imag - e1.imag * e2.real)
            out["convex"] = bool(np.all(cross >= -1e-14) or np.all(cross <= 1e-14))
    if region.flags.get("real_symmetric"):
        out["real_symmetric"] = bool(np.max(np.abs(region.tail.imag)) < 1e-15)
    if region.flags.get("left_half_plane"):
        out["left_half_plane"] = bool(z.real.max() <= 1e-14)
    return out


@dataclass(frozen=True)
class FaberPolySet:
    """Monomial-basis coefficients (low to high) of F_0 .. F_{n-1}."""

    polys: list

    def __getitem__(self, j):
        return self.polys[j]

    def __len__(self):
        return len(self.polys)

    def __call__(self, j, z):
        return np.polynomial.polynomial.polyval(z, self.polys[j])


def faber_polys(region, n):
    """F_j by matching (Q(y) - z y) sum F_j y^j = P(y) order by order."""
    if n > MAX_FABER_DEGREE + 1:
        raise ValueError("degree capped at %d" % MAX_FABER_DEGREE)
    q = region.q_series(n)
    p = region.p_series(n)
    s = region.varsigma
    polys = []
    for j in range(n):
        acc = np.zeros(j + 1, dtype=complex)
        acc[0] += p[j]
        if j:
            acc[1:] += polys[j - 1]
        for k in range(1, j + 1):
            acc[: j - k + 1] -= q[k] * polys[j - k]
        polys.append(acc / s)
    return FaberPolySet(polys)


def faber_values(region, n, z):
    """Array (n, *z.shape) with F_j(z), by the same recurrence evaluated pointwise."""
    z = np.asarray(z, dtype=complex)
    q = region.q_series(n)
    p = region.p_series(n)
    out = np.zeros((n,) + z.shape, dtype=complex)
    for j in range(n):
        acc = p[j] * np.ones_like(z)
        if j:
            acc = acc + z * out[j - 1]
        for k in range(1, j + 1):
            if q[k] != 0:
                acc = acc - q[k] * out[j - k]
        out[j] = acc / region.varsigma
    return out


def faber_matrices(region, n, m, derivatives=False):
    """[F_j(M)] for j < n, and [F_j'(M)] when `derivatives` is set."""
    d = m.shape[0]
    eye = np.eye(d, dtype=complex)
    q = region.q_series(n + 1)
    p = region.p_series(n + 1)
    f, df = [], []
    for j in range(n + 1 if derivatives else n):
        acc = p[j] * eye
        dacc = np.zeros((d, d), dtype=complex)
        if j:
            acc = acc + m @ f[j - 1]
            dacc = dacc + f[j - 1] + m @ df[j - 1]
        for k in range(1, j + 1):
            if q[k] != 0:
                acc = acc - q[k] * f[j - k]
                dacc = dacc - q[k] * df[j - k]
        f.append(acc / region.varsigma)
        df.append(dacc / region.varsigma)
    if derivatives:
        return f[:n], df
    return f


def faber_coeffs(f, region, n, r=1.0, grid=COEFF_GRID):
    """beta_j = (2 pi r^j)^-1 int e^{-ij theta} f(Psi(r e^{i theta})) d theta (trapezoidal)."""
    if r < 1:
        raise ValueError("contour radius must be >= 1")
    theta = 2 * np.pi * np.arange(grid) / grid
    vals = np.asarray(f(region.psi(r * np.exp(1j * theta))), dtype=complex)
    c = np.fft.fft(vals)[:n] / grid
    return c / r ** np.arange(n)


def faber_sum(region, beta, z):
    beta = np.asarray(beta, dtype=complex)
    return np.tensordot(beta, faber_values(region, beta.size, z), axes=1)


def faber_sum_matrix(region, beta, m):
    beta = np.asarray(beta, dtype=complex)
    return sum(b * fm for b, fm in zip(beta, faber_matrices(region, beta.size, m)))


def faber_top_blocks(region, m, n):
    """Toeplitz blocks of A11 = L Psi(L^-1) (x) I - L (x) M."""
    d = m.shape[0]
    eye = np.eye(d, dtype=complex)
    q = region.q_series(n)
    blocks = [q[k] * eye for k in range(n)]
    if n > 1:
        blocks[1] = blocks[1] - m
    return blocks


def psi_shift_operator(region, n):
    """L_n Psi(L_n^-1) as an n x n matrix."""
    return toeplitz_lower([np.array([[c]]) for c in region.q_series(n)], n)


def dpsi_shift_operator(region, n):
    """Psi'(L_n^-1) as an n x n matrix."""
    return toeplitz_lower([np.array([[c]]) for c in region.p_series(n)], n)


def build_padded_faber(be, region, n, eta, check_enclosure=True):
    """Pad(A), Pad(B) for the matrix Faber generating function."""
    if n < 2:
        raise ValueError("n must be >= 2")
    m = be.m
    d = m.shape[0]
    if (1 + eta) * n * d > MAX_PADDED_DIM:
        raise ValueError("padded dimension %d exceeds %d" % ((1 + eta) * n * d, MAX_PADDED_DIM))
    if check_enclosure:
        _warn_enclosure(region, m)
    a11 = toeplitz_lower(faber_top_blocks(region, m, n), n)
    pad_a = _pad_blocks(a11, n, eta, d)
    pad_b = np.eye(pad_a.shape[0], dtype=complex)
    pad_b[: n * d, : n * d] = np.kron(dpsi_shift_operator(region, n), np.eye(d))
    alpha_psi = norm2(psi_shift_operator(region, n))
    return PaddedSystem(pad_a, pad_b, n, eta, d, m, 2 * alpha_psi + 2)


def _warn_enclosure(region, m):
    eig = np.linalg.eigvals(m)
    if region.flags.get("slit"):
        ok = np.all(np.abs(eig.imag) < 1e-8) and np.all(np.abs(eig.real) <= 1 + 1e-8)
    else:
        ok = np.all(region.contains(eig))
    if not ok:
        warnings.warn("eigenvalues of A/alpha are not enclosed by the region", RuntimeWarning)


def faber_generating_error(region, m, n):
    """||sum L^j (x) F_j(M) - Psi'(L^-1)(x)I (L Psi(L^-1)(x)I - L(x)M)^-1||."""
    d = m.shape[0]
    ln = lower_shift(n)
    fm = faber_matrices(region, n, m)
    lhs = sum(np.kron(np.linalg.matrix_power(ln, j), fm[j]) for j in range(n))
    eye = np.eye(d)
    den = np.kron(psi_shift_operator(region, n), eye) - np.kron(ln, m)
    rhs = np.kron(dpsi_shift_operator(region, n), eye) @ np.linalg.inv(den)
    return norm2(lhs - rhs)


def faber_pad_inverse_closed_form(region, m, n, eta):
    """Blocks F'_{l-k+1}(M)/(l-k+1), last row repeated below, unit pad corner."""
    d = m.shape[0]
    _, df = faber_matrices(region, n + 1, m, derivatives=True)
    g = [df[j + 1] / (j + 1) for j in range(n)]
    zero = np.zeros((d, d), dtype=complex)
    eye = np.eye(d, dtype=complex)
    size = (1 + eta) * n
    grid = [[zero] * size for _ in range(size)]
    for l in range(size):
        row_l = min(l, n - 1)
        for k in range(min(row_l, n - 1) + 1):
            grid[l][k] = g[row_l - k]
        for k in range(n, l + 1):
            grid[l][k] = eye
    return grid


def verify_pad_inverse_faber(sys, region):
    inv = np.linalg.inv(sys.padA)
    closed = np.block(faber_pad_inverse_closed_form(region, sys.m, sys.n, sys.eta))
    return float(np.max(np.abs(inv - closed)))


def faber_pad_inverse_norm_bound(sys, region):
    return block_norm_bound(faber_pad_inverse_closed_form(region, sys.m, sys.n, sys.eta))


def faber_history(be, region, beta, psi, eta, eps_lin=0.0, rng=None, dense=None):
    """Solve Pad(A) x = Pad(B)(|0> sum beta_k |n-1-k> psi); sectors s >= 1 hold p(A/alpha) psi."""
    beta = np.asarray(beta, dtype=complex)
    n = beta.size
    if n < 2:
        raise ValueError("n must be >= 2")
    psi = normalize(np.ravel(psi))
    d = be.dim
    total = (1 + eta) * n * d
    shifted = dpsi_shift_operator(region, n) @ beta[::-1]
    if not np.any(shifted):
        raise ValueError("all-zero coefficient state")
    rhs = np.zeros(total, dtype=complex)
    rhs[: n * d] = np.kron(normalize(shifted), psi)
    if dense is None:
        dense = total <= DENSE_LIMIT
    if dense:
        sys = build_padded_faber(be, region, n, eta, check_enclosure=False)
        x = emulate_qls(sys.padA, rhs, eps_lin, rng)
    else:
        x = normalize(solve_padded(faber_top_blocks(region, be.m, n), n, eta, rhs))
        x = perturb_unit(x, eps_lin, rng)
    return _make_history(x, n, eta, d)


def faber_history_direct(region, m, beta, psi, eta):
    """Unnormalized padded Faber output from explicit F_j(M)."""
    beta = np.asarray(beta, dtype=complex)
    n = beta.size
    fm = faber_matrices(region, n, m)
    psi = np.ravel(psi)
    out = np.zeros((1 + eta, n, psi.size), dtype=complex)
    for l in range(n):
        for k in range(n - 1 - l, n):
            out[0, l] += beta[k] * (fm[k + l - n + 1] @ psi)
    out[1:] = sum(beta[k] * (fm[k] @ psi) for k in range(n))
    return out.ravel()


def qevt_faber(be, region, beta, psi, eps_lin=0.0, rng=None):
    """p(A/alpha) psi normalized, p = sum beta_k F_k, via pad sector 1."""
    beta = np.asarray(beta, dtype=complex)
    if beta.size < 2:
        beta = np.concatenate([beta, np.zeros(2 - beta.size)])
    n = beta.size
    psi = normalize(np.ravel(psi))
    target = faber_sum_matrix(region, beta, be.m) @ psi
    if np.linalg.norm(target) < 1e-12:
        raise ValueError("degenerate target: ||p(A/alpha) psi|| < 1e-12")
    h = faber_history(be, region, beta, psi, 1, eps_lin, rng)
    out = normalize(h.sector(1).sum(axis=0))
    amp_ratio = 1.0 / h.sector_norms[1]
    return TransformReport(out, normalize(target), float(amp_ratio), float(amp_ratio * 2 * n), n)


def faber_diffeq_order(tau, capacity, eps, alpha_exp=1.0):
    """n = c1 tau e^zeta + c2 log(1/(alpha_exp eps))."""
    return max(2, int(math.ceil(FABER_C1 * tau * math.exp(capacity)
                                + FABER_C2 * math.log(1 / (alpha_exp * eps)))))


def solve_diffeq_faber(be, t, psi, eps, region, alpha_exp=None, eps_lin=0.0, rng=None):
    """e^{tA} psi / ||.|| through the Faber expansion of e^{alpha t z}."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    from .analysis import numerical_range

    w = numerical_range(be.m, 180).points
    if not np.all(region.contains(w)):
        warnings.warn("numerical range of A/alpha is not inside the region", RuntimeWarning)
    psi = normalize(np.ravel(psi))
    tau = be.alpha * t
    if alpha_exp is None:
        # ||e^{tA} psi|| >= e^{t lambda_min(Re A)} for unit psi
        herm = (be.operator + be.operator.conj().T) / 2
        alpha_exp = min(1.0, math.exp(t * np.linalg.eigvalsh(herm)[0]))
    n = faber_diffeq_order(tau, region.capacity, eps, alpha_exp)
    beta = faber_coeffs(lambda z: np.exp(tau * z), region, n)
    rep = qevt_faber(be, region, beta, psi, eps_lin, rng)
    target = normalize(expm(t * be.operator) @ psi)
    return TransformReport(rep.output, target, rep.amp_ratio, rep.predicted_queries, n)


def faber_exp_trunc_error(region, m, tau, n):
    """||e^{tau M} - sum_{j<n} beta_j F_j(M)||."""
    beta = faber_coeffs(lambda z: np.exp(tau * z), region, n)
    return norm2(expm(tau * m) - faber_sum_matrix(region, beta, m))


def faber_max_on_boundary(region, n, grid=BOUNDARY_GRID):
    """max over the boundary grid of |F_j| for j < n."""
    vals = faber_values(region, n, region.boundary(grid))
    return np.abs(vals).max(axis=1)
