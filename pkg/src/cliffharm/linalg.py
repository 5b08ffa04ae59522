"""Inner-product geometry on R^n and the Clifford lift of orthogonal maps.

Matrices follow t[j, k] = <T e_k, e_j>, i.e. ordinary numpy row/column
convention. Eigenvalues of symmetric matrices come from a cyclic Jacobi
iteration written out here; numpy is used for the array arithmetic only.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, PreconditionError, RankError
from .multivector import Multivector, mask_indices

JACOBI_MAX_SWEEPS = 100


def _vec(x):
    return np.asarray(x, dtype=float)


def inner(x, y) -> float:
    x, y = _vec(x), _vec(y)
    if x.shape != y.shape:
        raise DimensionError(f"inner product of shapes {x.shape} and {y.shape}")
    return float(np.dot(x, y))


def norm(x) -> float:
    return math.sqrt(inner(x, x))


def adjoint(T) -> np.ndarray:
    return np.asarray(T, dtype=float).T.copy()


def gram_schmidt(vectors, tol: float = 1e-10) -> list[np.ndarray]:
    """Orthonormalize in order; each output prefix spans the input prefix.

    Uses modified Gram-Schmidt with one re-orthogonalization pass.
    """
    out: list[np.ndarray] = []
    dim = None
    for idx, v in enumerate(vectors):
        w = _vec(v).copy()
        if dim is None:
            dim = w.shape
        elif w.shape != dim:
            raise DimensionError(f"vector {idx} has shape {w.shape}, expected {dim}")
        for _ in range(2):
            for u in out:
                w -= np.dot(w, u) * u
        r = np.linalg.norm(w)
        if r < tol:
            raise RankError(f"vector {idx} is (numerically) dependent on its predecessors", index=idx)
        out.append(w / r)
    return out


def _check_orthonormal(basis, tol=1e-10):
    B = np.array([_vec(v) for v in basis])
    if B.size == 0:
        return B.reshape(0, 0)
    G = B @ B.T
    if np.max(np.abs(G - np.eye(len(B)))) > tol:
        raise PreconditionError("projection basis is not orthonormal")
    return B


def project(basis, x) -> np.ndarray:
    """Orthogonal projection of x onto span(basis); basis must be orthonormal."""
    x = _vec(x)
    B = _check_orthonormal(basis)
    if B.size == 0:
        return np.zeros_like(x)
    if B.shape[1] != x.shape[0]:
        raise DimensionError("basis and vector dimensions differ")
    return (B @ x) @ B


def projection_matrix(basis) -> np.ndarray:
    B = _check_orthonormal(basis)
    return B.T @ B


def symmetric_eigendecomposition(T, tol: float = 1e-10):
    """Eigenvalues (descending) and orthogonal eigenvector matrix V of symmetric T.

    Cyclic Jacobi rotations until a full sweep finds every off-diagonal
    entry negligible against its diagonal pair. Columns of V are the eigenvectors, so
    T = V diag(lam) V^T.
    """
    A = np.array(T, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"square matrix required, got shape {A.shape}")
    if A.size and np.max(np.abs(A - A.T)) > tol:
        raise PreconditionError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    eps = np.finfo(float).eps
    for _ in range(JACOBI_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                # negligible against the diagonal: drop it (classical threshold)
                if abs(apq) <= 0.1 * eps * math.sqrt(abs(A[p, p] * A[q, q])) or abs(apq) < 1e-300:
                    A[p, q] = A[q, p] = 0.0
                    continue
                rotated = True
                # rotation annihilating A[p, q] (Golub & Van Loan 8.4)
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                J = np.array([[c, s], [-s, c]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                V[:, idx] = V[:, idx] @ J
        if not rotated:
            break
    lam = np.diag(A).copy()
    order = np.argsort(-lam, kind="stable")
    return lam[order], V[:, order]


def operator_norm(T) -> float:
    """sup |Tx| over unit x, as sqrt of the top eigenvalue of T^T T."""
    T = np.asarray(T, dtype=float)
    if T.size == 0:
        return 0.0
    lam, _ = symmetric_eigendecomposition(T.T @ T)
    return math.sqrt(max(lam[0], 0.0))


def nonnegative_sqrt(S, clamp: float = 1e-12):
    """Symmetric nonnegative square root of a symmetric nonnegative S.

    Eigenvalues in [-clamp * scale, 0) are treated as zero; anything more
    negative is an error.
    """
    lam, V = symmetric_eigendecomposition(S)
    scale = max(1.0, abs(lam[0]) if len(lam) else 1.0)
    if len(lam) and lam[-1] < -clamp * scale:
        raise PreconditionError(f"matrix is not nonnegative (eigenvalue {lam[-1]!r})")
    root = np.sqrt(np.clip(lam, 0.0, None))
    return (V * root) @ V.T, lam, V


def polar_decomposition(T):
    """T = A @ That with A orthogonal and That = sqrt(T^T T).

    On the kernel of That (singular T) an orthonormal basis of ker(That), in
    eigenvector order, is sent to the Gram-Schmidt completion of the image of
    T built from the standard basis in index order.
    """
    T = np.asarray(T, dtype=float)
    n = T.shape[0]
    if T.shape != (n, n):
        raise DimensionError("polar decomposition needs a square matrix")
    That, lam, V = nonnegative_sqrt(T.T @ T)
    sig = np.sqrt(np.clip(lam, 0.0, None))
    cutoff = 1e-10 * max(1.0, sig[0] if n else 1.0)
    good = sig > cutoff
    # sig is descending, so the well-conditioned directions come first
    r = int(good.sum())
    cols = [T @ V[:, i] / sig[i] for i in range(r)]
    for k in range(n):
        if len(cols) == n:
            break
        w = np.zeros(n)
        w[k] = 1.0
        for _ in range(2):
            for u in cols:
                w -= np.dot(w, u) * u
        nw = np.linalg.norm(w)
        if nw > 1e-8:
            cols.append(w / nw)
    W = np.array(cols).T if n else np.zeros((0, 0))
    A = W @ V.T
    return A, That


def is_orthogonal(A, tol: float = 1e-10) -> bool:
    A = np.asarray(A, dtype=float)
    return A.ndim == 2 and A.shape[0] == A.shape[1] and np.max(np.abs(A.T @ A - np.eye(A.shape[0]))) <= tol


@dataclass(frozen=True)
class CliffordLift:
    """The algebra automorphism of C(n) induced by an orthogonal map.

    ``matrix`` is the 2^n x 2^n matrix acting on coefficient vectors.
    """

    orthogonal: np.ndarray
    matrix: np.ndarray

    @property
    def n(self):
        return self.orthogonal.shape[0]

    def __call__(self, x: Multivector) -> Multivector:
        if x.n != self.n:
            raise DimensionError(f"lift acts on C({self.n}), got C({x.n})")
        return Multivector(self.n, self.matrix @ x.coeffs.astype(float))

    def generator_image(self, k: int) -> Multivector:
        return Multivector.vector(self.orthogonal[:, k - 1])


def lift_orthogonal_to_clifford(A, tol: float = 1e-10) -> CliffordLift:
    """Extend e_k -> sum_j a[j, k] e_j multiplicatively to all blades."""
    A = np.asarray(A, dtype=float)
    if not is_orthogonal(A, tol):
        raise PreconditionError("Clifford lift needs an orthogonal matrix")
    n = A.shape[0]
    gens = [Multivector.vector(A[:, k]) for k in range(n)]
    cols = []
    for mask in range(1 << n):
        img = Multivector.scalar(n, 1.0)
        for i in mask_indices(mask):
            img = img * gens[i - 1]
        cols.append(img.coeffs)
    return CliffordLift(A.copy(), np.array(cols).T)


# I/O

def read_matrix_csv(text_or_file) -> np.ndarray:
    handle = io.StringIO(text_or_file) if isinstance(text_or_file, str) else text_or_file
    rows = [[float(v) for v in row] for row in csv.reader(handle) if row and not row[0].startswith("#")]
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise DimensionError("matrix CSV must have equal-length rows")
    return np.array(rows)


def write_matrix_csv(M) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.atleast_2d(M):
        writer.writerow([format(float(v), ".17g") for v in row])
    return buf.getvalue()


def eigen_to_json(eigenvalues, eigenvectors) -> str:
    return json.dumps(
        {
            "eigenvalues": [float(v) for v in eigenvalues],
            "eigenvectors": [[float(v) for v in col] for col in np.asarray(eigenvectors).T],
        },
        sort_keys=True,
    )
