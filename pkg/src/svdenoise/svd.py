"""Singular value decomposition by Jacobi rotations.

General matrices go through a one-sided (Hestenes) Jacobi iteration: column
pairs of a working copy of ``A`` are rotated until all columns are mutually
orthogonal, at which point the column norms are the singular values and the
accumulated rotations form ``V``.  Pairs are visited in round-robin order so
that each step rotates ``n/2`` disjoint pairs at once with array operations.

The MSVD transform only needs the left basis of a 4 x m matrix.  For that case
:func:`left_singular_basis_4` diagonalises the 4x4 Gram matrix with a cyclic
Jacobi eigensolver instead of factoring the wide matrix.

Output is made deterministic by a sign convention: the largest-magnitude entry
of every left singular vector is positive (first such entry on ties).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DimensionError
from .matrix import as_matrix

__all__ = ["SvdFactors", "svd", "symmetric_eigh", "left_singular_basis_4"]

MAX_SWEEPS = 30
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class SvdFactors:
    """Full SVD ``A = u @ diag(s) @ v.T``.

    Attributes
    ----------
    u : ndarray, shape (M, M)
        Orthonormal left singular vectors, one per column.
    s : ndarray, shape (min(M, N),)
        Non-negative singular values in non-increasing order.
    v : ndarray, shape (N, N)
        Orthonormal right singular vectors, one per column.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape[0], self.v.shape[0]

    def reconstruct(self, k: int | None = None) -> np.ndarray:
        """Sum of the leading ``k`` rank-one terms (all of them by default)."""
        k = len(self.s) if k is None else k
        return (self.u[:, :k] * self.s[:k]) @ self.v[:, :k].T


@lru_cache(maxsize=None)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Tournament schedule: n-1 rounds (n even) covering every pair exactly once.

    An odd ``n`` gets a phantom player whose pairings are dropped.
    """
    players = list(range(n + (n % 2)))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        p, q = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a < n and b < n:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=np.intp), np.array(q, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _negligible(a: np.ndarray) -> float:
    """Column norm below which a column counts as zero: rounding noise relative to ||a||_F."""
    return max(a.shape) * _EPS * float(np.sqrt(np.sum(a * a)))


def _one_sided_jacobi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonalise the columns of ``a`` (M >= N).  Returns (W, V) with W = A V.

    Columns whose norm falls below :func:`_negligible` are left alone; the
    caller treats them as zero.
    """
    m, n = a.shape
    # columns of W and V are kept as contiguous rows of wt and vt
    wt = np.array(a.T, order="C")
    vt = np.eye(n)
    if n == 1:
        return wt.T, vt.T
    tol = max(m, n) * _EPS
    floor = _negligible(a) ** 2
    schedule = _round_robin(n)
    for _ in range(MAX_SWEEPS):
        rotated = False
        for p, q in schedule:
            wp, wq = wt[p], wt[q]
            alpha = np.einsum("ij,ij->i", wp, wp)
            beta = np.einsum("ij,ij->i", wq, wq)
            gamma = np.einsum("ij,ij->i", wp, wq)
            active = (np.abs(gamma) > tol * np.sqrt(alpha * beta)) & (alpha > floor) & (beta > floor)
            if not active.any():
                continue
            rotated = True
            if not active.all():
                p, q = p[active], q[active]
                wp, wq = wp[active], wq[active]
                alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
            c = (1.0 / np.hypot(1.0, t))[:, None]
            s = c * t[:, None]
            wt[p] = c * wp - s * wq
            wt[q] = s * wp + c * wq
            vp, vq = vt[p], vt[q]
            vt[p] = c * vp - s * vq
            vt[q] = s * vp + c * vq
        if not rotated:
            return wt.T, vt.T
    raise ConvergenceError(f"one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps")


def _complete_basis(q: np.ndarray, m: int) -> np.ndarray:
    """Extend the orthonormal columns of ``q`` (m x r) to an m x m orthogonal matrix.

    The extra columns come from a complete Householder QR of ``q``; they are
    orthogonal to ``q`` and fully determined by it.
    """
    r = q.shape[1]
    if r == 0:
        return np.eye(m)
    if r == m:
        return q
    full, _ = np.linalg.qr(q, mode="complete")
    return np.column_stack([q, full[:, r:]])


def _sign_flips(u: np.ndarray) -> np.ndarray:
    """+1/-1 per column so that each column's largest-magnitude entry becomes positive."""
    lead = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[lead, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return signs


def _svd_tall(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m, n = a.shape
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return np.eye(m), np.zeros(n), np.eye(n)
    a = a / scale
    w, v = _one_sided_jacobi(a)
    norms = np.sqrt(np.einsum("ij,ij->j", w, w))
    order = np.argsort(-norms, kind="stable")
    s, w, v = norms[order], w[:, order], v[:, order]
    r = int(np.count_nonzero(s > _negligible(a)))
    u = _complete_basis(w[:, :r] / s[:r], m)
    return u, s * scale, v


def svd(a) -> SvdFactors:
    """Full singular value decomposition of a real matrix.

    Zero and rank-deficient inputs are fine: singular vectors for zero
    singular values are filled in by a deterministic orthogonal completion.

    Examples
    --------
    >>> svd([[3.0, 0.0], [4.0, 0.0]]).s.tolist()
    [5.0, 0.0]
    """
    a = as_matrix(a)
    m, n = a.shape
    if m >= n:
        u, s, v = _svd_tall(a)
    else:
        v, s, u = _svd_tall(a.T)
    signs = _sign_flips(u)
    u = u * signs
    k = len(s)
    v = v.copy()
    v[:, :k] *= signs[:k]
    return SvdFactors(u=u, s=s, v=v)


def symmetric_eigh(g) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, q)`` with eigenvalues ``w`` in descending order and the
    matching orthonormal eigenvectors as the columns of ``q``.  Intended for
    matrices of a handful of rows; every rotation touches the full matrix.
    """
    g = as_matrix(g, name="symmetric matrix")
    n = g.shape[0]
    if g.shape[1] != n:
        raise DimensionError(f"matrix must be square, got {g.shape}")
    a = 0.5 * (g + g.T)
    q = np.eye(n)
    tol = _EPS * np.linalg.norm(a)
    for _ in range(MAX_SWEEPS):
        off = np.abs(a[np.triu_indices(n, 1)])
        if off.size == 0 or off.max() <= tol:
            break
        for i in range(n - 1):
            for j in range(i + 1, n):
                if abs(a[i, j]) <= tol:
                    continue
                theta = (a[j, j] - a[i, i]) / (2.0 * a[i, j])
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.hypot(1.0, theta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                rot = np.eye(n)
                rot[i, i] = rot[j, j] = c
                rot[i, j] = s
                rot[j, i] = -s
                a = rot.T @ a @ rot
                a[i, j] = a[j, i] = 0.0
                q = q @ rot
    else:
        off = np.abs(a[np.triu_indices(n, 1)])
        if off.size and off.max() > tol:
            raise ConvergenceError(f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], q[:, order]


def left_singular_basis_4(a1) -> np.ndarray:
    """Left singular vectors of a 4 x m matrix via the eigenvectors of ``a1 @ a1.T``.

    Columns are ordered by descending singular value and sign-normalised the
    same way as :func:`svd`, so the result matches ``svd(a1).u`` whenever the
    singular values are distinct.
    """
    a1 = as_matrix(a1, name="block matrix")
    if a1.shape[0] != 4:
        raise DimensionError(f"expected 4 rows, got {a1.shape[0]}")
    if a1.shape[1] < 4:
        raise DimensionError(f"expected at least 4 columns, got {a1.shape[1]}")
    _, q = symmetric_eigh(a1 @ a1.T)
    return q * _sign_flips(q)
