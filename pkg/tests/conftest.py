"""Shared oracles for the test suite.

The helpers here are deliberately written as independent routes: exhaustive
enumeration over all valid codeword pairs, and a plain dictionary-based
binary sum-product decoder. They must not share code paths with the
vectorized decoder they are used to check.
"""

import numpy as np

from ancrelay.ldpc import ParityCheckMatrix


def make_matrix(rows, n):
    """ParityCheckMatrix from explicit row index lists."""
    rows = [np.asarray(sorted(r), dtype=np.int64) for r in rows]
    cols = [[] for _ in range(n)]
    for i, r in enumerate(rows):
        for v in r:
            cols[v].append(i)
    cols = [np.asarray(c, dtype=np.int64) for c in cols]
    return ParityCheckMatrix(n=n, m=len(rows), rows=rows, cols=cols)


def random_tree_matrix(rng, n_max=12):
    """Random cycle-free parity-check matrix with at most n_max variables.

    Each new check joins one existing variable to freshly created ones, so
    the Tanner graph is a tree by construction.
    """
    n = 1
    rows = []
    while n < n_max:
        grow = int(rng.integers(1, 3))  # check degree 2 or 3
        grow = min(grow, n_max - n)
        anchor = int(rng.integers(0, n))
        rows.append([anchor] + list(range(n, n + grow)))
        n += grow
    return make_matrix(rows, n)


def enumerate_codewords(H):
    """All binary vectors x with Hx = 0, by exhaustive search (n <= 16)."""
    n = H.n
    cand = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    dense = H.to_dense().astype(np.int64)
    ok = (cand @ dense.T) % 2 == 0
    return cand[ok.all(axis=1)]


def brute_force_pair_posterior(H, evidence):
    """Exact per-symbol posterior over (x1, x2) pairs by summing every
    codeword pair weighted by the product of per-symbol evidence terms."""
    C = enumerate_codewords(H)
    K, n = C.shape
    log_ev = np.log(np.maximum(np.asarray(evidence), 1e-300))
    lw = np.zeros((K, K))
    for k in range(n):
        lw += log_ev[k][(2 * C[:, k])[:, None] + C[None, :, k]]
    lw -= lw.max()
    w = np.exp(lw)
    w /= w.sum()
    post = np.empty((n, 4))
    for k in range(n):
        pair_idx = (2 * C[:, k])[:, None] + C[None, :, k]
        post[k] = np.bincount(pair_idx.ravel(), weights=w.ravel(), minlength=4)
    return post


def binary_sumproduct_beliefs(H, evidence, iterations):
    """Reference single-user sum-product decoder, probability domain.

    evidence is (n, 2); returns the per-iteration list of (n, 2) beliefs
    under the same flooding schedule as the joint decoder: all variable
    updates, then all check updates, then beliefs.
    """
    ev = np.asarray(evidence, dtype=np.float64)
    edges = [(v, int(c)) for v in range(H.n) for c in H.cols[v]]
    c2v = {e: np.array([0.5, 0.5]) for e in edges}
    v2c = {e: np.array([0.5, 0.5]) for e in edges}
    trajectory = []
    for _ in range(iterations):
        for (v, c) in edges:
            msg = ev[v].copy()
            for c2 in H.cols[v]:
                if int(c2) != c:
                    msg = msg * c2v[(v, int(c2))]
            v2c[(v, c)] = msg / msg.sum()
        for (v, c) in edges:
            delta = 1.0
            for v2 in H.rows[c]:
                if int(v2) != v:
                    m = v2c[(int(v2), c)]
                    delta *= m[0] - m[1]
            c2v[(v, c)] = np.array([(1 + delta) / 2, (1 - delta) / 2])
        beliefs = ev.copy()
        for (v, c) in edges:
            beliefs[v] = beliefs[v] * c2v[(v, c)]
        beliefs /= beliefs.sum(axis=1, keepdims=True)
        trajectory.append(beliefs)
    return trajectory
