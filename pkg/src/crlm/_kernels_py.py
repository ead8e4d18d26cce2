"""Pure numpy versions of the scan kernels.

Same contract and same arithmetic as the compiled module: squared distances
are summed left to right over coordinates (``np.cumsum`` is sequential, unlike
``np.sum``), and per-row losses are accumulated in partner-index order with
``np.add.at``. Candidate pairs come from a blocked Gram-matrix screen whose
tolerance bounds the rounding error of the Gram expansion, so no pair inside
the ball is ever dropped; every candidate is then checked exactly.
"""
import numpy as np

_EPS = np.finfo(np.float64).eps
# Gram block holds roughly this many doubles.
_BLOCK_ELEMS = 1 << 22
_PAIR_CHUNK = 1 << 16


def _exact_sqdist(X, I, J):
    out = np.empty(len(I))
    if X.shape[1] == 0:
        out[:] = 0.0
        return out
    for lo in range(0, len(I), _PAIR_CHUNK):
        hi = lo + _PAIR_CHUNK
        diff = X[I[lo:hi]] - X[J[lo:hi]]
        out[lo:hi] = np.cumsum(diff * diff, axis=1)[:, -1]
    return out


class _Screen:
    """Gram-based candidate search for pairs with squared distance < r2."""

    def __init__(self, X, r2):
        self.X = X
        self.r2 = r2
        d = X.shape[1]
        shift = X.mean(axis=0) if len(X) else np.zeros(d)
        self.shift = shift
        self.C = X - shift
        self.sn = np.einsum("ij,ij->i", self.C, self.C)
        # slack for the centering step, which rounds each coordinate
        self.nx = np.sqrt(np.einsum("ij,ij->i", X, X)) + np.sqrt(shift @ shift)
        self.ga = 4.0 * (d + 4) * _EPS
        self.gb = 4.0 * _EPS * np.sqrt(r2)

    def candidates(self, Q, q_sn, q_nx):
        """Boolean mask (len(Q), n) of pairs that may lie strictly inside r2."""
        approx = q_sn[:, None] + self.sn[None, :] - 2.0 * (Q @ self.C.T)
        tol = 2.0 * (self.ga * (q_sn[:, None] + self.sn[None, :])
                     + self.gb * (q_nx[:, None] + self.nx[None, :])) + 1e-300
        return approx < self.r2 + tol


def _block_rows(n):
    return max(1, _BLOCK_ELEMS // max(n, 1))


def row_losses(X, rows, r2, inv, G, nthreads=1):
    """Total loss centred at ``X[rows]`` against all rows of ``X``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    rows = np.asarray(rows, dtype=np.intp)
    out = np.zeros(len(rows))
    if len(rows) == 0 or len(X) == 0:
        return out
    scr = _Screen(X, r2)
    step = _block_rows(len(X))
    for lo in range(0, len(rows), step):
        blk = rows[lo:lo + step]
        mask = scr.candidates(scr.C[blk], scr.sn[blk], scr.nx[blk])
        mask[np.arange(len(blk)), blk] = True
        bi, J = np.nonzero(mask)  # row-major: sorted by row, then partner
        s = _exact_sqdist(X, blk[bi], J)
        keep = s < r2
        terms = np.minimum(s[keep] * inv - G, 0.0)
        acc = np.zeros(len(blk))
        np.add.at(acc, bi[keep], terms)
        out[lo:lo + step] = acc
    return out


def scan_losses(X, r2, inv, G, nthreads=1):
    """Total loss centred at every row of ``X`` against all rows of ``X``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    return row_losses(X, np.arange(len(X)), r2, inv, G)


def sqdist_to(X, x):
    """Squared distance from every row of ``X`` to ``x``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.shape[1] == 0:
        return np.zeros(len(X))
    diff = X - np.asarray(x, dtype=np.float64)
    return np.cumsum(diff * diff, axis=1)[:, -1]


def any_within(Q, X, r2):
    """Flag rows of ``Q`` that have some row of ``X`` strictly inside ``r2``."""
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    flags = np.zeros(len(Q), dtype=bool)
    if len(Q) == 0 or len(X) == 0:
        return flags
    scr = _Screen(X, r2)
    shift = scr.shift
    Qc = Q - shift
    q_sn = np.einsum("ij,ij->i", Qc, Qc)
    q_nx = np.sqrt(np.einsum("ij,ij->i", Q, Q)) + np.sqrt(shift @ shift)
    step = _block_rows(len(X))
    for lo in range(0, len(Q), step):
        mask = scr.candidates(Qc[lo:lo + step], q_sn[lo:lo + step], q_nx[lo:lo + step])
        bi, J = np.nonzero(mask)
        if len(bi) == 0:
            continue
        diff_rows = Q[lo:lo + step]
        s = np.empty(len(bi))
        for a in range(0, len(bi), _PAIR_CHUNK):
            b = a + _PAIR_CHUNK
            diff = diff_rows[bi[a:b]] - X[J[a:b]]
            s[a:b] = np.cumsum(diff * diff, axis=1)[:, -1] if X.shape[1] else 0.0
        hit = np.unique(bi[s < r2])
        flags[lo + hit] = True
    return flags
