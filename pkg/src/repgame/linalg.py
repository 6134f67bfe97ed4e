"""Cancellation-free resolvent solves for stopped Markov chains.

We need v = w * v0 @ inv(I - (1 - w) M) for row-stochastic M.  For small w
the matrix is nearly singular and an ordinary LU solve loses about
eps / w in accuracy (1e-7 at w = 1e-10).  I - (1 - w) M is an M-matrix
whose row sums are exactly w, so Gaussian elimination can be run the GTH
way: the pivot of every row is recomputed as its stopping mass plus its
remaining outflow, and all later steps only add nonnegative numbers.  The
result is accurate to a few ulps componentwise regardless of w.
"""

import numpy as np


def discounted_occupation(v0, M, w):
    """Stacked w * v0 @ inv(I - (1 - w) M).

    v0: (N, n) start distributions, M: (N, n, n) stochastic matrices, w in (0, 1].
    Returns (N, n); each row is a probability vector.
    """
    v0 = np.asarray(v0, dtype=float)
    M = np.asarray(M, dtype=float)
    N, n, _ = M.shape
    # batch axis last: every step below works on contiguous length-N vectors
    P = np.ascontiguousarray(M.transpose(1, 2, 0)) * (1.0 - w)
    idx = np.arange(n)
    P[idx, idx] = 0.0
    kill = np.full((n, N), float(w))  # row sums of I - (1 - w) M
    piv = np.empty((n, N))
    for k in range(n):
        piv[k] = kill[k] + P[k, k + 1:].sum(axis=0)
        if k == n - 1:
            break
        lk = P[k + 1:, k] / piv[k]
        P[k + 1:, k] = lk             # the strict lower part now holds the multipliers
        P[k + 1:, k + 1:] += lk[:, None] * P[k, None, k + 1:]
        kill[k + 1:] += lk * kill[k]
        sub = idx[k + 1:]
        P[sub, sub] = 0.0
    # y U = w v0, with U = diag(piv) - strict upper part of P
    y = np.empty((n, N))
    b = w * v0.T
    for j in range(n):
        y[j] = (b[j] + (y[:j] * P[:j, j]).sum(axis=0)) / piv[j]
    # x L = y, L unit lower with the negated multipliers
    x = np.empty((n, N))
    for i in range(n - 1, -1, -1):
        x[i] = y[i] + (x[i + 1:] * P[i + 1:, i]).sum(axis=0)
    return x.T
