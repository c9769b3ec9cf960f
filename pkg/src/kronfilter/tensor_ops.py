"""Vectorization, Kronecker products, and the structured matrices that
linearize the bilinear filter model in each factor.

Conventions, fixed globally:

* vectorization is column-major (Fortran order) everywhere;
* the rank-R filter is W = U1 @ U2.T with U1 (m1 x r), U2 (m2 x r),
  and its vector form is w = vec(W) = sum_r u2[:, r] (x) u1[:, r];
* the side-one matrix linearizes w in vec(U1), the side-two matrix in
  vec(U2), with columns grouped by rank term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIDE_ONE = "one"
SIDE_TWO = "two"


@dataclass(frozen=True)
class KroneckerShape:
    """Dimensions (m1, m2, r) of the factorization; the filter length is m1*m2."""

    m1: int
    m2: int
    r: int

    def __post_init__(self):
        if self.m1 < 1 or self.m2 < 1:
            raise ValueError(f"factor lengths must be >= 1, got ({self.m1}, {self.m2})")
        if not 1 <= self.r <= min(self.m1, self.m2):
            raise ValueError(
                f"construction rank must satisfy 1 <= r <= min(m1, m2), "
                f"got r={self.r} for ({self.m1}, {self.m2})"
            )

    @property
    def m(self) -> int:
        return self.m1 * self.m2


@dataclass(frozen=True)
class FactorPair:
    """The two factor matrices u1 (m1 x r), u2 (m2 x r) of a rank-r filter."""

    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        u1 = np.asarray(self.u1, dtype=float)
        u2 = np.asarray(self.u2, dtype=float)
        if u1.ndim != 2 or u2.ndim != 2:
            raise ValueError("factors must be 2-d arrays")
        if u1.shape[1] != u2.shape[1]:
            raise ValueError(
                f"factors must share the column count, got {u1.shape} and {u2.shape}"
            )
        if not (np.isfinite(u1).all() and np.isfinite(u2).all()):
            raise ValueError("factors must be finite")
        object.__setattr__(self, "u1", u1)
        object.__setattr__(self, "u2", u2)

    @property
    def shape(self) -> KroneckerShape:
        return KroneckerShape(self.u1.shape[0], self.u2.shape[0], self.u1.shape[1])


@dataclass(frozen=True)
class StructuredFactorMatrix:
    """Dense m x (m_k * r) matrix a with a @ vec(Uk) = vec(U1 @ U2.T)."""

    a: np.ndarray
    side: str


def vec(w: np.ndarray) -> np.ndarray:
    """Stack the columns of a matrix into a vector."""
    return np.asarray(w, dtype=float).ravel(order="F")


def mat(w: np.ndarray, k: int, l: int) -> np.ndarray:
    """Inverse of :func:`vec`: reshape a length k*l vector to a k x l matrix."""
    w = np.asarray(w, dtype=float).ravel()
    if w.size != k * l:
        raise ValueError(f"length {w.size} not divisible as k*l = {k}*{l}")
    return w.reshape((k, l), order="F")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two vectors; entry i*len(b)+j is a[i]*b[j]."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def _check_conforms(fp: FactorPair, shape: KroneckerShape) -> None:
    if fp.u1.shape != (shape.m1, shape.r) or fp.u2.shape != (shape.m2, shape.r):
        raise ValueError(
            f"factor pair {fp.u1.shape}/{fp.u2.shape} does not conform to "
            f"shape ({shape.m1}, {shape.m2}, {shape.r})"
        )


def build_factor_matrix(
    side: str, fp: FactorPair, shape: KroneckerShape
) -> StructuredFactorMatrix:
    """Build the dense matrix linearizing the filter in the requested factor.

    Side one is [u2_1 (x) I, ..., u2_r (x) I] (built from u2); side two is
    [I (x) u1_1, ..., I (x) u1_r] (built from u1). Column block r multiplies
    the r-th column of the factor being solved for, matching column-major
    vec(Uk).
    """
    _check_conforms(fp, shape)
    m1, m2, r = shape.m1, shape.m2, shape.r
    if side == SIDE_ONE:
        # t[i1, i2, j1, q] = delta(i1, j1) * u2[i2, q]
        t = np.einsum("ab,cd->acbd", np.eye(m1), fp.u2)
        a = t.reshape((m1 * m2, m1 * r), order="F")
    elif side == SIDE_TWO:
        # t[i1, i2, j2, q] = u1[i1, q] * delta(i2, j2)
        t = np.einsum("ad,bc->abcd", fp.u1, np.eye(m2))
        a = t.reshape((m1 * m2, m2 * r), order="F")
    else:
        raise ValueError(f"side must be '{SIDE_ONE}' or '{SIDE_TWO}', got {side!r}")
    return StructuredFactorMatrix(a=a, side=side)


def concat_factor_matrices(
    a1: StructuredFactorMatrix, a2: StructuredFactorMatrix
) -> np.ndarray:
    """Concatenate [side-one | side-two]; the result maps the stacked factor
    vector to twice the filter vector."""
    if a1.side != SIDE_ONE or a2.side != SIDE_TWO:
        raise ValueError(f"expected sides ('one', 'two'), got ({a1.side!r}, {a2.side!r})")
    if a1.a.shape[0] != a2.a.shape[0]:
        raise ValueError(
            f"row counts differ: {a1.a.shape[0]} vs {a2.a.shape[0]}"
        )
    return np.hstack([a1.a, a2.a])


def reconstruct(fp: FactorPair) -> tuple[np.ndarray, np.ndarray]:
    """Return (W, vec(W)) for W = u1 @ u2.T; rank(W) <= r by construction."""
    w_mat = fp.u1 @ fp.u2.T
    return w_mat, vec(w_mat)


def apply_factor_matrix_transpose(
    side: str, fp: FactorPair, shape: KroneckerShape, x: np.ndarray
) -> np.ndarray:
    """Compute A(side).T @ x without materializing the structured matrix.

    Uses mat(A1.T x_n) = X_n @ U2 and mat(A2.T x_n) = X_n.T @ U1, where
    X_n = mat(x_n). Accepts a single vector (m,) or columns (m, n); returns
    (m_k*r,) or (m_k*r, n) accordingly.
    """
    _check_conforms(fp, shape)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    cols = x[:, None] if single else x
    n = cols.shape[1]
    if cols.shape[0] != shape.m:
        raise ValueError(f"expected vectors of length {shape.m}, got {cols.shape[0]}")
    # (m1, m2, n) tensor of matricized columns
    xt = cols.reshape((shape.m1, shape.m2, n), order="F")
    if side == SIDE_ONE:
        prod = np.einsum("abn,bq->aqn", xt, fp.u2)  # X_n @ U2
        out = prod.reshape((shape.m1 * shape.r, n), order="F")
    elif side == SIDE_TWO:
        prod = np.einsum("abn,aq->bqn", xt, fp.u1)  # X_n.T @ U1
        out = prod.reshape((shape.m2 * shape.r, n), order="F")
    else:
        raise ValueError(f"side must be '{SIDE_ONE}' or '{SIDE_TWO}', got {side!r}")
    return out[:, 0] if single else out
