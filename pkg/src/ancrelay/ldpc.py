"""Regular Gallager LDPC codes over GF(2): construction, generators, encoding.

Parity-check matrices are kept sparse as row/column incidence lists; the
generator is derived by bit-packed Gaussian elimination so that per-packet
code regeneration stays cheap at blocklengths in the thousands.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class LdpcError(ValueError):
    """Invalid code parameters or malformed matrix data."""


@dataclass(eq=False)
class ParityCheckMatrix:
    """Sparse GF(2) parity-check matrix H with its Tanner-graph adjacency.

    rows[c] lists the variable indices checked by row c, cols[v] the check
    indices incident to variable v; both are sorted and duplicate-free.
    col_weight/row_weight are the nominal degrees of a regular construction
    (None for ad-hoc matrices loaded from dense arrays).
    """

    n: int
    m: int
    rows: list[np.ndarray]
    cols: list[np.ndarray]
    col_weight: int | None = None
    row_weight: int | None = None
    # flattened row adjacency for vectorized syndrome computation
    _rows_flat: np.ndarray = field(init=False, repr=False)
    _rows_ptr: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._rows_flat = (
            np.concatenate(self.rows) if self.m else np.empty(0, dtype=np.int64)
        ).astype(np.int64)
        self._rows_ptr = np.zeros(self.m + 1, dtype=np.int64)
        np.cumsum([len(r) for r in self.rows], out=self._rows_ptr[1:])

    @classmethod
    def from_dense(cls, h, col_weight=None, row_weight=None):
        h = np.asarray(h)
        m, n = h.shape
        rows = [np.flatnonzero(h[i]).astype(np.int64) for i in range(m)]
        cols = [np.flatnonzero(h[:, j]).astype(np.int64) for j in range(n)]
        return cls(n=n, m=m, rows=rows, cols=cols,
                   col_weight=col_weight, row_weight=row_weight)

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.m, self.n), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            h[i, r] = 1
        return h

    def validate(self):
        """Check transposition consistency, sortedness and degree regularity."""
        edges_r = {(i, int(v)) for i, r in enumerate(self.rows) for v in r}
        edges_c = {(int(c), j) for j, col in enumerate(self.cols) for c in col}
        if edges_r != edges_c:
            raise LdpcError("row/column incidence lists disagree")
        for r in self.rows:
            if len(np.unique(r)) != len(r):
                raise LdpcError("repeated entry within a row")
        for c in self.cols:
            if len(np.unique(c)) != len(c):
                raise LdpcError("repeated entry within a column")
        if self.row_weight is not None and any(len(r) != self.row_weight for r in self.rows):
            raise LdpcError("row weight mismatch")
        if self.col_weight is not None and any(len(c) != self.col_weight for c in self.cols):
            raise LdpcError("column weight mismatch")


@dataclass(eq=False)
class GeneratorMatrix:
    """Dense GF(2) generator spanning the null space of some H.

    matrix has shape (n, info_len); column i is the basis codeword activated
    by information bit i. info_positions maps each information bit to the
    codeword position where it appears systematically.
    """

    n: int
    info_len: int
    matrix: np.ndarray
    info_positions: np.ndarray


def build_gallager(n: int, col_weight: int, row_weight: int,
                   rng: np.random.Generator) -> ParityCheckMatrix:
    """Construct a regular (col_weight, row_weight) parity-check matrix.

    Stacks col_weight band submatrices of n/row_weight rows each; the first
    band partitions the columns into consecutive blocks and every further
    band is a random column permutation of it. Row and column weights are
    exact by construction. Deterministic given the generator state.
    """
    j, k = col_weight, row_weight
    if j < 1 or k < 2:
        raise LdpcError(f"need col_weight >= 1 and row_weight >= 2, got ({j}, {k})")
    if n % k != 0:
        raise LdpcError(f"row_weight {k} must divide n={n}")
    band = n // k
    m = j * band
    rows = []
    for b in range(j):
        perm = np.arange(n) if b == 0 else rng.permutation(n)
        for t in range(band):
            rows.append(np.sort(perm[t * k:(t + 1) * k]).astype(np.int64))
    cols = [[] for _ in range(n)]
    for i, r in enumerate(rows):
        for v in r:
            cols[v].append(i)
    cols = [np.asarray(c, dtype=np.int64) for c in cols]
    return ParityCheckMatrix(n=n, m=m, rows=rows, cols=cols,
                             col_weight=j, row_weight=k)


def syndrome(H: ParityCheckMatrix, x: np.ndarray) -> np.ndarray:
    """GF(2) syndrome Hx: one parity bit per check row."""
    x = np.asarray(x)
    if x.shape[-1] != H.n:
        raise LdpcError(f"codeword length {x.shape[-1]} != n={H.n}")
    if H.m == 0:
        return np.zeros(0, dtype=np.uint8)
    sums = np.add.reduceat(x[..., H._rows_flat].astype(np.int64),
                           H._rows_ptr[:-1], axis=-1)
    return (sums & 1).astype(np.uint8)


def _pack_rows(H: ParityCheckMatrix) -> np.ndarray:
    """Pack H into little-endian uint64 words, one row of words per check."""
    words = (H.n + 63) // 64
    packed = np.zeros((H.m, words), dtype=np.uint64)
    if H._rows_flat.size:
        row_idx = np.repeat(np.arange(H.m), np.diff(H._rows_ptr))
        np.bitwise_or.at(packed, (row_idx, H._rows_flat >> 6),
                         np.uint64(1) << (H._rows_flat & 63).astype(np.uint64))
    return packed


def derive_generator(H: ParityCheckMatrix) -> GeneratorMatrix:
    """Gaussian elimination over GF(2); returns a basis of the null space.

    Rank deficiency (common for random Gallager matrices, whose bands share
    linear dependencies) is not an error: info_len = n - rank(H) and the
    generator spans the full null space.
    """
    packed = _pack_rows(H)
    m, n = H.m, H.n
    rank = 0
    pivot_cols = []
    for col in range(n):
        if rank == m:
            break
        if col % 128 == 0 and not packed[rank:].any():
            break  # remaining rows eliminated; no pivots left
        w, b = divmod(col, 64)
        bits = (packed[:, w] >> np.uint64(b)) & np.uint64(1)
        below = np.flatnonzero(bits[rank:])
        if below.size == 0:
            continue
        piv = rank + below[0]
        if piv != rank:
            packed[[rank, piv]] = packed[[piv, rank]]
            bits[[rank, piv]] = bits[[piv, rank]]
        bits[rank] = 0
        flip = np.flatnonzero(bits)
        if flip.size:
            # row `rank` is zero left of `col`, so earlier words are unaffected
            packed[flip, w:] ^= packed[rank, w:]
        pivot_cols.append(col)
        rank += 1

    pivots = np.asarray(pivot_cols, dtype=np.int64)
    free = np.setdiff1d(np.arange(n), pivots)
    info_len = n - rank
    G = np.zeros((n, info_len), dtype=np.uint8)
    for i, f in enumerate(free):
        G[f, i] = 1
        if rank:
            w, b = divmod(int(f), 64)
            G[pivots, i] = ((packed[:rank, w] >> np.uint64(b)) & np.uint64(1)).astype(np.uint8)
    return GeneratorMatrix(n=n, info_len=info_len, matrix=G, info_positions=free)


def encode(G: GeneratorMatrix, s: np.ndarray) -> np.ndarray:
    """Encode an information vector: x = G s over GF(2)."""
    s = np.asarray(s)
    if s.shape != (G.info_len,):
        raise LdpcError(f"source length {s.shape} != info_len={G.info_len}")
    if G.info_len == 0:
        return np.zeros(G.n, dtype=np.uint8)
    x = G.matrix[:, s != 0].sum(axis=1, dtype=np.int64)
    return (x & 1).astype(np.uint8)


def write_alist(H: ParityCheckMatrix, path):
    """Dump H in plain-text alist interchange format (1-based indices)."""
    max_col = max((len(c) for c in H.cols), default=0)
    max_row = max((len(r) for r in H.rows), default=0)
    lines = [f"{H.n} {H.m}", f"{max_col} {max_row}",
             " ".join(str(len(c)) for c in H.cols),
             " ".join(str(len(r)) for r in H.rows)]
    for c in H.cols:
        entries = [str(int(i) + 1) for i in c] + ["0"] * (max_col - len(c))
        lines.append(" ".join(entries))
    for r in H.rows:
        entries = [str(int(v) + 1) for v in r] + ["0"] * (max_row - len(r))
        lines.append(" ".join(entries))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_alist(path) -> ParityCheckMatrix:
    with open(path) as fh:
        tokens = fh.read().split("\n")
    n, m = (int(t) for t in tokens[0].split())
    cols = []
    for j in range(n):
        cols.append(np.asarray(sorted(int(t) - 1 for t in tokens[4 + j].split() if t != "0"),
                               dtype=np.int64))
    rows = []
    for i in range(m):
        rows.append(np.asarray(sorted(int(t) - 1 for t in tokens[4 + n + i].split() if t != "0"),
                               dtype=np.int64))
    return ParityCheckMatrix(n=n, m=m, rows=rows, cols=cols)
