"""Dense linear algebra over F_p.

Matrices are numpy integer arrays with entries in [0, p).  Over F_2 rows are
bit-packed into uint64 words and eliminated with word-wide XORs; other primes
use one int64 residue per entry.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrixError

_ONE = np.uint64(1)


def pack_gf2(m: np.ndarray) -> np.ndarray:
    """Pack a 0/1 matrix into rows of uint64 words, bit j of row -> word j//64, bit j%64."""
    m = np.asarray(m, dtype=np.uint8)
    if m.ndim != 2:
        raise ValueError("expected a matrix")
    b = np.packbits(m, axis=1, bitorder="little")
    pad = (-b.shape[1]) % 8
    if pad:
        b = np.pad(b, ((0, 0), (0, pad)))
    return np.ascontiguousarray(b).view(np.uint64).copy()


def unpack_gf2(words: np.ndarray, ncols: int) -> np.ndarray:
    b = np.ascontiguousarray(words).view(np.uint8)
    return np.unpackbits(b, axis=1, count=ncols, bitorder="little")


def _gf2_eliminate(rows: np.ndarray, ncols: int, full: bool) -> list[int]:
    """In-place elimination on packed rows; returns pivot columns."""
    nrows = rows.shape[0]
    r = 0
    pivots = []
    for col in range(ncols):
        if r == nrows:
            break
        w = col // 64
        bit = np.uint64(col % 64)
        nz = np.flatnonzero((rows[r:, w] >> bit) & _ONE)
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            rows[[r, piv]] = rows[[piv, r]]
        # the pivot row is zero left of col, so only words >= w change
        if full:
            sel = np.flatnonzero((rows[:, w] >> bit) & _ONE)
            sel = sel[sel != r]
        else:
            sel = r + 1 + np.flatnonzero((rows[r + 1:, w] >> bit) & _ONE)
        if sel.size:
            rows[sel, w:] ^= rows[r, w:]
        pivots.append(col)
        r += 1
    return pivots


def _modp_eliminate(m: np.ndarray, p: int, ncols: int, full: bool) -> list[int]:
    nrows = m.shape[0]
    r = 0
    pivots = []
    for col in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(m[r:, col])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        m[r] = m[r] * pow(int(m[r, col]), p - 2, p) % p
        if full:
            sel = np.flatnonzero(m[:, col])
            sel = sel[sel != r]
        else:
            sel = r + 1 + np.flatnonzero(m[r + 1:, col])
        if sel.size:
            m[sel] = (m[sel] - np.outer(m[sel, col], m[r])) % p
        pivots.append(col)
        r += 1
    return pivots


def rank_mod_p(m: np.ndarray, p: int) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    if m.ndim != 2:
        raise ValueError("expected a matrix")
    ncols = m.shape[1]
    if p == 2:
        return len(_gf2_eliminate(pack_gf2(m % 2), ncols, full=False))
    return len(_modp_eliminate(m.astype(np.int64) % p, p, ncols, full=False))


def inverse_mod_p(m: np.ndarray, p: int) -> np.ndarray:
    """Inverse of a square matrix over F_p, as a uint8/int64 array."""
    m = np.asarray(m)
    n = m.shape[0]
    if m.ndim != 2 or m.shape[1] != n:
        raise ValueError("expected a square matrix")
    eye = np.eye(n, dtype=np.int64)
    if p == 2:
        rows = pack_gf2(np.hstack([m % 2, eye]))
        pivots = _gf2_eliminate(rows, n, full=True)
        if len(pivots) < n:
            raise SingularMatrixError(f"matrix has rank {len(pivots)} < {n}")
        return unpack_gf2(rows, 2 * n)[:, n:]
    aug = np.hstack([m.astype(np.int64) % p, eye])
    pivots = _modp_eliminate(aug, p, n, full=True)
    if len(pivots) < n:
        raise SingularMatrixError(f"matrix has rank {len(pivots)} < {n}")
    return aug[:, n:]


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """(a @ b) mod p, using BLAS when the integer sums fit exactly in a float."""
    inner = a.shape[-1]
    bound = inner * (p - 1) ** 2
    if bound < 2**24:
        out = np.asarray(a, dtype=np.float32) @ np.asarray(b, dtype=np.float32)
    elif bound < 2**53:
        out = np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64)
    else:
        return (np.asarray(a, dtype=object) @ np.asarray(b, dtype=object)) % p
    return np.rint(out).astype(np.int64) % p


__all__ = ["pack_gf2", "unpack_gf2", "rank_mod_p", "inverse_mod_p", "matmul_mod"]
