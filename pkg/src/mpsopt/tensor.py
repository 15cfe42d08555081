"""Dense tensor primitives: contraction, matricization, QR and truncated SVD.

All tensors are float64 numpy arrays in row-major order. Decompositions use a
deterministic sign convention (largest-magnitude entry of every Q / left
singular column is non-negative) so results are reproducible in tests.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError, ShapeError

# singular values below this fraction of the largest count as numerically zero
RANK_CUTOFF = 1e-14


def _as_tensor(a) -> np.ndarray:
    t = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise FloatingPointError("tensor contains non-finite entries")
    return t


def contract(a, a_legs, b, b_legs) -> np.ndarray:
    """Contract the paired legs of `a` and `b`; remaining legs ordered a-then-b."""
    a = _as_tensor(a)
    b = _as_tensor(b)
    a_legs = list(a_legs)
    b_legs = list(b_legs)
    if len(a_legs) != len(b_legs):
        raise ShapeError(f"leg lists have different lengths: {a_legs} vs {b_legs}")
    if len(set(a_legs)) != len(a_legs) or len(set(b_legs)) != len(b_legs):
        raise ShapeError(f"duplicate legs in contraction: {a_legs}, {b_legs}")
    for la, lb in zip(a_legs, b_legs):
        if not (0 <= la < a.ndim and 0 <= lb < b.ndim):
            raise ShapeError(f"leg index out of range: ({la}, {lb})")
        if a.shape[la] != b.shape[lb]:
            raise ShapeError(
                f"dimension mismatch on legs ({la}, {lb}): "
                f"{a.shape[la]} != {b.shape[lb]}")
    return np.tensordot(a, b, axes=(a_legs, b_legs))


def matricize(t, row_legs, col_legs) -> np.ndarray:
    """Reshape `t` to a matrix with composite row/column indices.

    Within each composite index the last listed leg varies fastest, so
    matricize(T, [k, n], [k', n']) realizes the (d*k + n) convention when n is
    the physical leg of dimension d.
    """
    t = _as_tensor(t)
    row_legs = list(row_legs)
    col_legs = list(col_legs)
    if sorted(row_legs + col_legs) != list(range(t.ndim)):
        raise ShapeError(
            f"row_legs={row_legs} and col_legs={col_legs} do not partition "
            f"the {t.ndim} legs")
    perm = t.transpose(row_legs + col_legs)
    rows = int(np.prod([t.shape[i] for i in row_legs], dtype=np.int64)) if row_legs else 1
    cols = int(np.prod([t.shape[i] for i in col_legs], dtype=np.int64)) if col_legs else 1
    return np.ascontiguousarray(perm.reshape(rows, cols))


def tensorize(m, row_dims, col_dims) -> np.ndarray:
    """Inverse of matricize for legs listed in their original order."""
    m = _as_tensor(m)
    if m.ndim != 2:
        raise ShapeError("tensorize expects a 2-leg input")
    row_dims = tuple(row_dims)
    col_dims = tuple(col_dims)
    if m.shape != (int(np.prod(row_dims or (1,))), int(np.prod(col_dims or (1,)))):
        raise ShapeError(f"cannot reshape {m.shape} to {row_dims} x {col_dims}")
    return m.reshape(row_dims + col_dims)


@dataclass
class SvdResult:
    u: np.ndarray                 # (rows, k) left isometry
    singular_values: np.ndarray   # (k,) non-increasing, >= 0
    vt: np.ndarray                # (k, cols) right isometry
    truncation_error: float       # Frobenius norm of the discarded part


def _fix_signs(u, vt):
    """Make the largest-magnitude entry of every column of u non-negative."""
    if u.shape[1] == 0:
        return u, vt
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs, vt * signs[:, None]


def truncated_svd(m, chi) -> SvdResult:
    """SVD truncated to at most `chi` singular values, Lambda renormalized to 1.

    The reported truncation error is the Frobenius norm of the discarded
    singular values, measured before the renormalization.
    """
    m = _as_tensor(m)
    if m.ndim != 2:
        raise ShapeError("truncated_svd expects a 2-leg input")
    if chi < 1:
        raise ShapeError("chi must be >= 1")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if s[0] <= 0.0:
        raise DegenerateStateError("cannot decompose a zero matrix")
    rank = int(np.count_nonzero(s > RANK_CUTOFF * s[0]))
    k = max(1, min(int(chi), rank))
    err = float(np.sqrt(np.sum(s[k:] ** 2)))
    u, s, vt = u[:, :k], s[:k].copy(), vt[:k, :]
    u, vt = _fix_signs(u, vt)
    s /= np.linalg.norm(s)
    return SvdResult(u=u, singular_values=s, vt=vt, truncation_error=err)


def qr(m):
    """Reduced QR with the same deterministic sign convention as the SVD."""
    m = _as_tensor(m)
    if m.ndim != 2:
        raise ShapeError("qr expects a 2-leg input")
    q, r = np.linalg.qr(m, mode="reduced")
    q, r = _fix_signs(q, r)
    return q, r
