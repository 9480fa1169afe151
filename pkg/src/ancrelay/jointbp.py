"""Joint belief propagation over pairs of superimposed LDPC codewords.

The two end nodes' packets share one parity-check matrix, so the symbol
pairs (x1[k], x2[k]) form a virtual code over {0,1}^2 whose checks constrain
both components at once. Messages are probability 4-vectors indexed
t = 2*x1 + x2, i.e. (p00, p01, p10, p11). Variable nodes multiply messages
componentwise; check nodes convolve them under componentwise XOR, which the
vectorized sweeps evaluate through a 4-point Walsh-Hadamard transform.

The relay never needs to fully decode either packet: after the iterations
stop, the per-symbol posterior drives an MMSE estimate of
h13*(1-2*x1) + h23*(1-2*x2) for broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ldpc import ParityCheckMatrix, syndrome

# Walsh-Hadamard transform over Z2 x Z2; W[s, t] = (-1)^<s, t> on 2-bit indices.
_WHT = np.array([[1.0, 1.0, 1.0, 1.0],
                 [1.0, -1.0, 1.0, -1.0],
                 [1.0, 1.0, -1.0, -1.0],
                 [1.0, -1.0, -1.0, 1.0]])

# XOR table on pair indices: _XOR[s, t] = s ^ t
_XOR = np.arange(4)[:, None] ^ np.arange(4)[None, :]

UNIFORM = np.full(4, 0.25)


def pair_constellation(a, b) -> np.ndarray:
    """Received-signal values of the four bit pairs, in (p00,p01,p10,p11) order."""
    a = complex(a)
    b = complex(b)
    return np.array([a + b, a - b, -a + b, -a - b])


def init_evidence(r, h13, h23, sigma2) -> np.ndarray:
    """Likelihood 4-vector(s) of the pair (x1, x2) given received sample(s).

    p_t proportional to exp(-|r - c_t|^2 / sigma2) with c_t the superimposed
    constellation point of pair t. Computed in the log domain with max
    subtraction, so extreme SNRs degrade gracefully to the indicator of the
    nearest constellation point instead of underflowing to all zeros.

    Accepts a scalar sample (returns shape (4,)) or a packet (returns (n, 4)).
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    r = np.asarray(r, dtype=np.complex128)
    c = pair_constellation(h13, h23)
    logp = -np.abs(r[..., None] - c) ** 2 / sigma2
    logp -= logp.max(axis=-1, keepdims=True)
    p = np.exp(logp)
    p /= p.sum(axis=-1, keepdims=True)
    return p


def var_update(msgs) -> np.ndarray:
    """Variable-node rule: componentwise product of the inputs, renormalized.

    An identically zero product (contradictory inputs) falls back to the
    uniform message; the vectorized decoder counts these events.
    """
    out = np.ones(4)
    for m in msgs:
        out = out * np.asarray(m, dtype=np.float64)
    s = out.sum()
    if not s > 0:
        return UNIFORM.copy()
    return out / s


def pair_convolve(p, q) -> np.ndarray:
    """XOR convolution of two pair messages: g[t] = sum_s p[s] q[s^t]."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    return p @ q[_XOR]


def chk_update(msgs) -> np.ndarray:
    """Check-node rule: left-to-right fold of the pairwise XOR convolution."""
    msgs = list(msgs)
    out = np.asarray(msgs[0], dtype=np.float64)
    for m in msgs[1:]:
        out = pair_convolve(out, m)
    return out


def hard_decide(belief) -> tuple[int, int]:
    """Marginal hard decisions for both users; ties resolve to bit 0."""
    b = np.asarray(belief, dtype=np.float64)
    x1 = 0 if b[0] + b[1] >= b[2] + b[3] else 1
    x2 = 0 if b[0] + b[2] >= b[1] + b[3] else 1
    return x1, x2


def hard_decisions(beliefs) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized marginal hard decisions over an (n, 4) belief array."""
    b = np.asarray(beliefs, dtype=np.float64)
    hard1 = (b[..., 0] + b[..., 1] < b[..., 2] + b[..., 3]).astype(np.uint8)
    hard2 = (b[..., 0] + b[..., 2] < b[..., 1] + b[..., 3]).astype(np.uint8)
    return hard1, hard2


def _fold_user1(a, bits):
    """Point-mass user 1 on the decided bits, preserving user 2's marginal."""
    a = np.asarray(a, dtype=np.float64)
    bits = np.asarray(bits)
    keep0 = a[..., 0] + a[..., 2]
    keep1 = a[..., 1] + a[..., 3]
    zero = bits == 0
    out = np.empty_like(a)
    out[..., 0] = np.where(zero, keep0, 0.0)
    out[..., 1] = np.where(zero, keep1, 0.0)
    out[..., 2] = np.where(zero, 0.0, keep0)
    out[..., 3] = np.where(zero, 0.0, keep1)
    return out


def _fold_user2(a, bits):
    a = np.asarray(a, dtype=np.float64)
    bits = np.asarray(bits)
    keep0 = a[..., 0] + a[..., 1]
    keep1 = a[..., 2] + a[..., 3]
    zero = bits == 0
    out = np.empty_like(a)
    out[..., 0] = np.where(zero, keep0, 0.0)
    out[..., 2] = np.where(zero, keep1, 0.0)
    out[..., 1] = np.where(zero, 0.0, keep0)
    out[..., 3] = np.where(zero, 0.0, keep1)
    return out


def clamp_user(msg, user: int, bit: int) -> np.ndarray:
    """Freeze one user's decided bit in a message by folding its mass.

    The clamped user's marginal becomes a point mass on the decision while
    the other user's marginal is preserved; idempotent on already-clamped
    messages.
    """
    if user == 1:
        return _fold_user1(msg, np.asarray(bit))
    if user == 2:
        return _fold_user2(msg, np.asarray(bit))
    raise ValueError(f"user must be 1 or 2, got {user}")


def relay_mmse_output(beliefs, a, b) -> np.ndarray:
    """Posterior-mean broadcast symbols: x3[k] = sum_t p_t[k] * c_t(a, b)."""
    return np.asarray(beliefs, dtype=np.float64) @ pair_constellation(a, b)


def _exclusive_prod(a):
    """All-but-self products along axis 1 of an (g, d, 4) block."""
    d = a.shape[1]
    out = np.empty_like(a)
    if d == 1:
        out[:] = 1.0
        return out
    if d == 2:
        out[:, 0] = a[:, 1]
        out[:, 1] = a[:, 0]
        return out
    if d == 3:
        np.multiply(a[:, 1], a[:, 2], out=out[:, 0])
        np.multiply(a[:, 0], a[:, 2], out=out[:, 1])
        np.multiply(a[:, 0], a[:, 1], out=out[:, 2])
        return out
    out[:, 0] = 1.0
    np.cumprod(a[:, :-1], axis=1, out=out[:, 1:])
    suffix = np.cumprod(a[:, :0:-1], axis=1)[:, ::-1]
    out[:, :-1] *= suffix
    return out


@dataclass(eq=False)
class DecodeResult:
    """Final posteriors and per-user decode status for one packet."""

    beliefs: np.ndarray
    hard1: np.ndarray
    hard2: np.ndarray
    decoded1: bool
    decoded2: bool
    iterations: int
    relay_out: np.ndarray
    contradictions: int


class JointDecoder:
    """Flooding-schedule decoder for the virtual pair code of one packet.

    Keeps one message per directed Tanner-graph edge. Each sweep() runs all
    variable-to-check updates then all check-to-variable updates; evidence
    messages stay fixed unless a user's syndrome check succeeds, at which
    point every message belonging to that user is mass-folded onto the hard
    decision so later sweeps cannot change it.

    stop_and_clamp=False disables the per-user stop rule entirely (pure
    sum-product), which is what exactness-versus-enumeration checks need.
    """

    def __init__(self, H: ParityCheckMatrix, evidence, stop_and_clamp: bool = True):
        self.H = H
        ev = np.array(evidence, dtype=np.float64)
        if ev.shape != (H.n, 4):
            raise ValueError(f"evidence shape {ev.shape} != ({H.n}, 4)")
        self.evidence = ev
        self.stop_and_clamp = stop_and_clamp

        col_deg = np.array([len(c) for c in H.cols], dtype=np.int64)
        row_deg = np.array([len(r) for r in H.rows], dtype=np.int64)
        self.edge_var = np.repeat(np.arange(H.n), col_deg)
        n_edges = int(col_deg.sum())
        cols_ptr = np.zeros(H.n + 1, dtype=np.int64)
        np.cumsum(col_deg, out=cols_ptr[1:])
        chk_ptr = np.zeros(H.m + 1, dtype=np.int64)
        np.cumsum(row_deg, out=chk_ptr[1:])
        edge_chk = np.concatenate(H.cols) if n_edges else np.empty(0, dtype=np.int64)
        by_chk = np.argsort(edge_chk, kind="stable")

        # variables/checks grouped by degree so sweeps stay rectangular
        self.var_groups = []
        for d in np.unique(col_deg):
            if d == 0:
                continue
            vids = np.flatnonzero(col_deg == d)
            eids = cols_ptr[vids][:, None] + np.arange(d)[None, :]
            self.var_groups.append((vids, eids))
        self.chk_groups = []
        for d in np.unique(row_deg):
            if d == 0:
                continue
            cids = np.flatnonzero(row_deg == d)
            eids = by_chk[chk_ptr[cids][:, None] + np.arange(d)[None, :]]
            self.chk_groups.append(eids)

        self.v2c = np.full((n_edges, 4), 0.25)
        self.c2v = np.full((n_edges, 4), 0.25)
        self.contradictions = 0
        self._clamp_bits = {1: None, 2: None}
        # variable-major edge ids are contiguous for single-degree graphs,
        # letting the variable sweep run on reshaped views without gathers
        self._var_contig = (len(self.var_groups) == 1
                            and self.var_groups[0][1].size == n_edges
                            and np.array_equal(
                                self.var_groups[0][1].ravel(), np.arange(n_edges)))

    def _normalize(self, a):
        flat = a.reshape(-1, 4)
        np.maximum(flat, 0.0, out=flat)
        s = flat[:, 0] + flat[:, 1]
        s += flat[:, 2]
        s += flat[:, 3]
        bad = ~(s > 0)
        nbad = int(np.count_nonzero(bad))
        if nbad:
            s[bad] = 1.0
            flat[bad] = 0.25
        flat /= s[:, None]
        self.contradictions += nbad
        return a

    def _refold(self, a, per_edge: bool):
        # uniform fallbacks must not resurrect a clamped user's lost bit
        for user, fold in ((1, _fold_user1), (2, _fold_user2)):
            bits = self._clamp_bits[user]
            if bits is not None:
                a[:] = fold(a, bits[self.edge_var] if per_edge else bits)
        return a

    def sweep(self):
        """One flooding iteration: all variable updates, then all check updates."""
        if self._var_contig:
            d = self.var_groups[0][1].shape[1]
            inc = self.c2v.reshape(-1, d, 4)
            out = self.v2c.reshape(-1, d, 4)
            np.multiply(self.evidence[:, None, :], _exclusive_prod(inc), out=out)
            self._normalize(out)
        else:
            for vids, eids in self.var_groups:
                out = self.evidence[vids][:, None, :] * _exclusive_prod(self.c2v[eids])
                self._normalize(out)
                self.v2c[eids] = out
        if any(self._clamp_bits[u] is not None for u in (1, 2)):
            self._refold(self.v2c, per_edge=True)
        t = self.v2c @ _WHT
        for eids in self.chk_groups:
            out = _exclusive_prod(t[eids]) @ _WHT
            out *= 0.25
            self._normalize(out)
            self.c2v[eids] = out
        if any(self._clamp_bits[u] is not None for u in (1, 2)):
            self._refold(self.c2v, per_edge=True)

    def beliefs(self) -> np.ndarray:
        """Posterior per symbol: evidence times all incoming check messages."""
        b = self.evidence.copy()
        if self._var_contig:
            d = self.var_groups[0][1].shape[1]
            inc = self.c2v.reshape(-1, d, 4)
            for t in range(d):
                b *= inc[:, t]
        else:
            for vids, eids in self.var_groups:
                b[vids] *= self.c2v[eids].prod(axis=1)
        self._normalize(b)
        if any(self._clamp_bits[u] is not None for u in (1, 2)):
            self._refold(b, per_edge=False)
        return b

    def clamp(self, user: int, bits):
        """Fold evidence and every edge message onto one user's decisions."""
        bits = np.asarray(bits, dtype=np.uint8)
        fold = _fold_user1 if user == 1 else _fold_user2
        self.evidence = fold(self.evidence, bits)
        self.v2c = fold(self.v2c, bits[self.edge_var])
        self.c2v = fold(self.c2v, bits[self.edge_var])
        self._clamp_bits[user] = bits

    def run(self, max_iters: int):
        """Iterate until both users pass their syndrome check or the budget ends.

        The returned beliefs are the posteriors of the stopping iteration; a
        user decoded mid-run gets clamped so the remaining iterations decode
        the other packet alone, but no clamp is applied after the final sweep.
        """
        if max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        decoded1 = decoded2 = False
        b = None
        iters = 0
        for iters in range(1, max_iters + 1):
            self.sweep()
            b = self.beliefs()
            hard1, hard2 = hard_decisions(b)
            if not self.stop_and_clamp:
                continue
            ok1 = decoded1 or not syndrome(self.H, hard1).any()
            ok2 = decoded2 or not syndrome(self.H, hard2).any()
            if ok1 and ok2:
                decoded1 = decoded2 = True
                break
            if ok1 and not decoded1:
                decoded1 = True
                self.clamp(1, hard1)
            if ok2 and not decoded2:
                decoded2 = True
                self.clamp(2, hard2)
        hard1, hard2 = hard_decisions(b)
        if not self.stop_and_clamp:
            decoded1 = not syndrome(self.H, hard1).any()
            decoded2 = not syndrome(self.H, hard2).any()
        return b, hard1, hard2, decoded1, decoded2, iters


def decode(H: ParityCheckMatrix, r, ch, max_iters: int = 20,
           broadcast=None, stop_and_clamp: bool = True) -> DecodeResult:
    """Decode one received packet and produce the relay's MMSE broadcast.

    broadcast optionally overrides the (a, b) output coefficients, which
    default to the uplink gains (ch.h13, ch.h23).
    """
    evidence = init_evidence(np.asarray(r, dtype=np.complex128), ch.h13, ch.h23, ch.sigma2)
    dec = JointDecoder(H, evidence, stop_and_clamp=stop_and_clamp)
    beliefs, hard1, hard2, decoded1, decoded2, iters = dec.run(max_iters)
    a, b = broadcast if broadcast is not None else (ch.h13, ch.h23)
    return DecodeResult(beliefs=beliefs, hard1=hard1, hard2=hard2,
                        decoded1=decoded1, decoded2=decoded2, iterations=iters,
                        relay_out=relay_mmse_output(beliefs, a, b),
                        contradictions=dec.contradictions)
