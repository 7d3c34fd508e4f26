"""Dense complex linear algebra helpers, block encodings, shift matrices,
centered modulus and constructive Jordan test matrices."""

from dataclasses import dataclass
import json

import numpy as np
import scipy.linalg as sla
from scipy.stats import unitary_group

MAX_JORDAN_DIM = 64
NORM_TOL = 1e-12


def as_cmatrix(a):
    """Return `a` as a 2-D complex ndarray (vectors become columns)."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)
    elif a.ndim != 2:
        raise ValueError("expected a scalar, vector or matrix, got ndim=%d" % a.ndim)
    return a


def norm2(a):
    """Spectral norm (largest singular value)."""
    a = np.asarray(a)
    if a.ndim < 2:
        return float(np.linalg.norm(a))
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def normalize(v):
    v = np.asarray(v, dtype=complex)
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / nv


def phase_fidelity(u, v):
    """|<u|v>| for unit vectors, i.e. fidelity up to a global phase."""
    return float(abs(np.vdot(normalize(u), normalize(v))))


@dataclass(frozen=True)
class BlockEncoding:
    """Operator A carried as the pair (m, alpha) with A = alpha * m and ||m|| <= 1."""

    m: np.ndarray
    alpha: float

    def __post_init__(self):
        m = as_cmatrix(self.m)
        if m.shape[0] != m.shape[1]:
            raise ValueError("block encoded operator must be square")
        if not self.alpha > 0:
            raise ValueError("normalization factor must be positive")
        if norm2(m) > 1 + NORM_TOL:
            raise ValueError("||m|| = %.3g exceeds 1" % norm2(m))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def from_operator(cls, a, alpha=None, factor=1.0):
        """Encode `a` with normalization `alpha`, or `factor`*||a|| when alpha is None."""
        a = as_cmatrix(a)
        if alpha is None:
            alpha = factor * norm2(a)
            if alpha == 0:
                alpha = 1.0
        return cls(a / alpha, alpha)

    @property
    def operator(self):
        return self.alpha * self.m

    @property
    def dim(self):
        return self.m.shape[0]


def rescale_encoding(be, alpha_new):
    """Same operator with a larger normalization factor."""
    if alpha_new < be.alpha:
        raise ValueError("alpha_new=%g is smaller than alpha=%g" % (alpha_new, be.alpha))
    if alpha_new == be.alpha:
        return be
    return BlockEncoding(be.m * (be.alpha / alpha_new), alpha_new)


@dataclass(frozen=True)
class JordanSpec:
    """Jordan data (eigenvalue, block size) plus a target basis condition number."""

    blocks: tuple
    kappa_target: float = 1.0
    seed: int = 0

    def __post_init__(self):
        blocks = tuple((complex(lam), int(size)) for lam, size in self.blocks)
        if not blocks:
            raise ValueError("need at least one Jordan block")
        if any(size < 1 for _, size in blocks):
            raise ValueError("Jordan block sizes must be positive")
        if self.kappa_target < 1:
            raise ValueError("kappa_target must be >= 1")
        object.__setattr__(self, "blocks", blocks)

    @property
    def dim(self):
        return sum(size for _, size in self.blocks)

    @property
    def d_max(self):
        return max(size for _, size in self.blocks)

    @property
    def eigenvalues(self):
        return np.array([lam for lam, size in self.blocks for _ in range(size)])


def jordan_matrix(blocks):
    """Block diagonal Jordan form with ones on the first subdiagonal of each block."""
    d = sum(size for _, size in blocks)
    j = np.zeros((d, d), dtype=complex)
    k = 0
    for lam, size in blocks:
        for i in range(size):
            j[k + i, k + i] = lam
            if i > 0:
                j[k + i, k + i - 1] = 1.0
        k += size
    return j


def conditioned_basis(d, kappa, rng):
    """S = Q1 diag(s) Q2 with geometric singular values from 1 to kappa."""
    if kappa == 1:
        return np.eye(d, dtype=complex)
    q1 = unitary_group.rvs(d, random_state=rng) if d > 1 else np.ones((1, 1))
    q2 = unitary_group.rvs(d, random_state=rng) if d > 1 else np.ones((1, 1))
    s = np.geomspace(1.0, kappa, d) if d > 1 else np.ones(1)
    return (q1 * s) @ q2


def build_from_jordan(spec):
    """Return (A, S, J) with A = S J S^-1 and cond(S) in [kappa, 2 kappa].

    kappa_target = 1 gives S = I so that A is exactly the Jordan form.
    """
    d = spec.dim
    if d > MAX_JORDAN_DIM:
        raise ValueError("dimension %d exceeds %d" % (d, MAX_JORDAN_DIM))
    if d == 1 and spec.kappa_target > 1:
        raise ValueError("a 1x1 basis cannot have condition number > 1")
    rng = np.random.default_rng(spec.seed)
    j = jordan_matrix(spec.blocks)
    s = conditioned_basis(d, spec.kappa_target, rng)
    a = s @ np.linalg.solve(s.T, j.T).T
    return a, s, j


def basis_condition(s):
    sv = np.linalg.svd(s, compute_uv=False)
    return float(sv[0] / sv[-1])


def lower_shift(n):
    """L_n = sum_k |k+1><k|."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.eye(n, k=-1, dtype=complex)


def cyclic_shift(n):
    """X_n |k> = |k+1 mod n>."""
    return np.roll(np.eye(n, dtype=complex), 1, axis=0)


def comparator_projector(n, total):
    """Projector onto |k>, k < n, built from the +-1 comparator diagonal."""
    sign = np.where(np.arange(total) < n, 1.0, -1.0)
    return np.diag((1.0 + sign) / 2).astype(complex)


def shift_encoding_check(n, j):
    """Max entry deviation of P X_{2n}^j P from L_n^j embedded in 2n dims."""
    if not 0 <= j <= n - 1:
        raise ValueError("need 0 <= j <= n-1, got j=%d, n=%d" % (j, n))
    x = np.linalg.matrix_power(cyclic_shift(2 * n), j)
    p = comparator_projector(n, 2 * n)
    target = np.zeros((2 * n, 2 * n), dtype=complex)
    target[:n, :n] = np.linalg.matrix_power(lower_shift(n), j)
    return float(np.max(np.abs(p @ x @ p - target)))


def block_norm_bound(blocks):
    """sqrt(max column sum) * sqrt(max row sum) of the block norms.

    Upper bounds the spectral norm of the assembled block matrix.
    """
    rows = len(blocks)
    if rows == 0 or any(len(r) != len(blocks[0]) for r in blocks):
        raise ValueError("ragged block grid")
    if len(blocks[0]) != rows:
        raise ValueError("row and column partitions differ in count")
    norms = np.array([[norm2(b) for b in r] for r in blocks])
    return float(np.sqrt(norms.sum(axis=0).max()) * np.sqrt(norms.sum(axis=1).max()))


def cmod(q, x):
    """Centered modulus: representative of x mod q in [-q/2, q/2)."""
    if not q > 0:
        raise ValueError("modulus must be positive")
    x = np.asarray(x, dtype=float)
    r = x - q * np.floor((x + q / 2) / q)
    # guard against round-off landing exactly on the excluded endpoint
    r = np.where(r >= q / 2, r - q, r)
    return float(r) if r.ndim == 0 else r


def matrix_to_json(a):
    a = as_cmatrix(a)
    return {
        "rows": a.shape[0],
        "cols": a.shape[1],
        "re": a.real.ravel().tolist(),
        "im": a.imag.ravel().tolist(),
    }


def matrix_from_json(obj):
    rows, cols = int(obj["rows"]), int(obj["cols"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros(rows * cols)), dtype=float)
    if re.size != rows * cols or im.size != rows * cols:
        raise ValueError("entry count does not match %dx%d" % (rows, cols))
    return (re + 1j * im).reshape(rows, cols)


def load_matrix(path):
    with open(path) as fh:
        return matrix_from_json(json.load(fh))


def save_matrix(path, a):
    with open(path, "w") as fh:
        json.dump(matrix_to_json(a), fh)


def expm(a):
    return sla.expm(as_cmatrix(a))


class BoundViolation(AssertionError):
    """A verified inequality failed numerically."""


def check_bound(lhs, rhs, what, rtol=0.0):
    if not lhs <= rhs * (1 + rtol):
        raise BoundViolation("%s: %.6g > %.6g" % (what, lhs, rhs))
    return lhs, rhs
