"""Dense real linear algebra kernels.

Matrices are plain float64 numpy arrays.  Everything here is deterministic:
fixed sweep orders, stable sorts, and a fixed sign convention, so repeated
calls on the same input are bitwise identical.

The SVD is a cyclic one-sided Jacobi: columns of the work matrix are rotated
pairwise until all mutual Gram entries vanish relative to the column norms.
It is run on the taller orientation (the input is transposed internally when
rows < cols) and the left basis is completed to a full square factor, so
``X = U[:, :r] @ np.diag(S) @ V.T`` with ``r = min(n, p)`` always holds with
orthonormal square U and V.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, RankDeficient

# Convergence / rank thresholds.  JACOBI_TOL is relative to the geometric
# mean of the two column norms; QR_RANK_TOL is relative to the Frobenius
# norm of the factored matrix.
JACOBI_SWEEP_LIMIT = 30
JACOBI_TOL = 1e-14
QR_RANK_TOL = 1e-13


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array with positive dims and finite entries."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionMismatch(f"{name} must have positive dims, got {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True)
class SvdFull:
    """Full decomposition: U is n x n, V is p x p, S holds the min(n, p)
    singular values in descending order."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray


def matmul(a, b) -> np.ndarray:
    """Matrix product with an explicit shape check."""
    A = as_matrix(a, "A")
    B = as_matrix(b, "B")
    if A.shape[1] != B.shape[0]:
        raise DimensionMismatch(
            f"inner dimensions differ: {A.shape} vs {B.shape}"
        )
    return A @ B


def frobenius_norm(a) -> float:
    """Square root of the sum of squared entries."""
    A = as_matrix(a, "A")
    return float(np.sqrt(np.sum(A * A)))


def spectral_norm_estimate(a) -> float:
    """Largest singular value (shares the Jacobi kernel's accuracy)."""
    return float(svd(a).S[0])


def _jacobi_sweeps(X: np.ndarray, max_sweeps: int):
    """Rotate column pairs of a copy of X until mutually orthogonal.

    Returns (W, V) with W = X @ V, V orthogonal.  Sweep order is fixed
    (row-cyclic over pairs i < j), so the result is deterministic.
    """
    p = X.shape[1]
    W = X.astype(float, copy=True)
    V = np.eye(p)
    for _ in range(max_sweeps):
        rotated = False
        for i in range(p - 1):
            for j in range(i + 1, p):
                wi = W[:, i]
                wj = W[:, j]
                a = float(wi @ wi)
                b = float(wj @ wj)
                c = float(wi @ wj)
                if abs(c) <= JACOBI_TOL * math.sqrt(a * b):
                    continue
                rotated = True
                zeta = (b - a) / (2.0 * c)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                cs = 1.0 / math.sqrt(1.0 + t * t)
                sn = cs * t
                W[:, i], W[:, j] = cs * wi - sn * wj, sn * wi + cs * wj
                vi = V[:, i]
                vj = V[:, j]
                V[:, i], V[:, j] = cs * vi - sn * vj, sn * vi + cs * vj
        if not rotated:
            return W, V
    raise ConvergenceFailure(
        f"one-sided Jacobi did not converge in {max_sweeps} sweeps"
    )


def _complete_basis(U: np.ndarray, empty_slots) -> None:
    """Fill the zero columns of U (listed in empty_slots, ascending) with an
    orthonormal extension of the remaining columns.

    Candidates are the coordinate axes; each round picks the axis with the
    largest residual outside the current span (ties break to the lowest
    index), which is deterministic and always well conditioned: the residual
    mass summed over all axes equals the missing dimension count.
    """
    n = U.shape[0]
    filled = [k for k in range(U.shape[1]) if k not in set(empty_slots)]
    B = U[:, filled] if filled else np.zeros((n, 0))
    for slot in empty_slots:
        residual = 1.0 - np.sum(B * B, axis=1)
        pick = int(np.argmax(residual))
        v = -B @ B[pick, :]
        v[pick] += 1.0
        v -= B @ (B.T @ v)  # one re-orthogonalization pass
        v /= math.sqrt(float(v @ v))
        U[:, slot] = v
        B = np.concatenate([B, v[:, None]], axis=1)


def _svd_tall(X: np.ndarray, max_sweeps: int):
    """Jacobi SVD of a matrix with rows >= cols; returns (U, S, V)."""
    n, p = X.shape
    W, V = _jacobi_sweeps(X, max_sweeps)
    norms = np.sqrt(np.sum(W * W, axis=0))
    order = np.argsort(-norms, kind="stable")
    S = norms[order]
    W = W[:, order]
    V = V[:, order]
    U = np.zeros((n, n))
    empty = []
    for k in range(p):
        if S[k] > 0.0:
            U[:, k] = W[:, k] / S[k]
        else:
            empty.append(k)
    empty.extend(range(p, n))
    if empty:
        _complete_basis(U, empty)
    return U, S, V


def _normalize_signs(U: np.ndarray, V: np.ndarray, nmin: int) -> None:
    """Fix signs in place: the largest-magnitude entry of each right vector
    is made nonnegative (ties break to the lowest index) and the paired left
    vector flips with it; unpaired basis columns get the same rule applied
    to themselves."""
    for k in range(nmin):
        idx = int(np.argmax(np.abs(V[:, k])))
        if V[idx, k] < 0.0:
            V[:, k] = -V[:, k]
            U[:, k] = -U[:, k]
    for k in range(nmin, V.shape[1]):
        idx = int(np.argmax(np.abs(V[:, k])))
        if V[idx, k] < 0.0:
            V[:, k] = -V[:, k]
    for k in range(nmin, U.shape[1]):
        idx = int(np.argmax(np.abs(U[:, k])))
        if U[idx, k] < 0.0:
            U[:, k] = -U[:, k]


def svd(x, max_sweeps: int = JACOBI_SWEEP_LIMIT) -> SvdFull:
    """Full singular value decomposition via one-sided Jacobi.

    Raises ConvergenceFailure if the sweep budget is exhausted (finite
    inputs converge well within the default limit).
    """
    X = as_matrix(x, "X")
    n, p = X.shape
    if n >= p:
        U, S, V = _svd_tall(X, max_sweeps)
    else:
        V, S, U = _svd_tall(X.T, max_sweeps)
    _normalize_signs(U, V, min(n, p))
    return SvdFull(U=U, S=S, V=V)


def _householder_qr(A: np.ndarray):
    """Householder QR; returns full square Q and R with R[k, k] possibly of
    either sign.  Does not reject rank deficiency."""
    n, m = A.shape
    R = A.astype(float, copy=True)
    Q = np.eye(n)
    for k in range(min(n, m)):
        x = R[k:, k]
        nx = math.sqrt(float(x @ x))
        if nx == 0.0:
            continue
        alpha = -math.copysign(nx, x[0])
        v = x.copy()
        v[0] -= alpha
        beta = 2.0 / float(v @ v)
        R[k:, k:] -= np.outer(v, beta * (v @ R[k:, k:]))
        Q[:, k:] -= np.outer(Q[:, k:] @ v, beta * v)
        R[k, k] = alpha
        R[k + 1:, k] = 0.0
    return Q, R


def qr_orthonormal(a) -> np.ndarray:
    """Orthonormal basis of the column span, via Householder QR with the
    diagonal of R made nonnegative (so a matrix that already has orthonormal
    columns is reproduced up to roundoff).

    Raises RankDeficient when any |R[k, k]| falls at or below
    QR_RANK_TOL times the Frobenius norm of the input.
    """
    A = as_matrix(a, "A")
    n, m = A.shape
    if n < m:
        raise DimensionMismatch(f"need rows >= cols, got {A.shape}")
    Q, R = _householder_qr(A)
    scale = frobenius_norm(A)
    diag = np.diag(R)[:m]
    if np.any(np.abs(diag) <= QR_RANK_TOL * scale):
        raise RankDeficient(
            f"column span has numerical rank below {m} "
            f"(min |R_kk| = {float(np.min(np.abs(diag))):.3e})"
        )
    return Q[:, :m] * np.sign(diag)
