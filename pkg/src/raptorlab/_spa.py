"""Sum-product message-passing kernels.

One factor-graph engine serves both layers of the code:

* LT output nodes are factors with a channel observation; their tanh
  factor is tanh(m0/2).
* LDPC check nodes are pure parity factors; their tanh factor is 1.

State per edge is the factor-to-variable message m_e; the variable side
is summarized by S_i = lambda_i + sum_e m_e, so a variable-to-factor
message is S[i_e] - m_e.  One iteration updates every factor (flooding).

The hot loop exists twice with identical semantics: a fused numba kernel
(tanh and atanh spelled via exp/log so LLVM can vectorize them) and a
pure-numpy fallback.  `iterate` picks whichever is available.

Clamping: variable messages are clamped to +/-MSG_CLAMP before tanh;
product magnitudes are pulled back from 1 before atanh.  Constants
differ per dtype (float32 saturates earlier).
"""

from __future__ import annotations

import math
import os

import numpy as np

MSG_CLAMP = {np.dtype(np.float32): 30.0, np.dtype(np.float64): 50.0}
ONE_MINUS = {np.dtype(np.float32): 1.0 - 1e-6, np.dtype(np.float64): 1.0 - 1e-15}

_use_numba = os.environ.get("RAPTORLAB_NO_NUMBA", "") == ""
if _use_numba:
    try:
        import numba
        from numba import njit, prange
    except ImportError:  # pragma: no cover - exercised only without numba
        _use_numba = False

if _use_numba:

    @njit(parallel=True, fastmath=True, cache=True)
    def _iterate_numba(off, in_idx, m, tbuf, t0, S, S_new_threads, clamp, one_minus, one):
        n_factors = off.shape[0] - 1
        for o in prange(n_factors):
            tid = numba.get_thread_id()
            lo, hi = off[o], off[o + 1]
            f0 = t0[o]
            for e in range(lo, hi):
                x = S[in_idx[e]] - m[e]
                if x > clamp:
                    x = clamp
                elif x < -clamp:
                    x = -clamp
                # tanh(x/2) = sign(x) * (1 - e^-|x|) / (1 + e^-|x|)
                ax = abs(x)
                ex = math.exp(-ax)
                t = (one - ex) / (one + ex)
                tbuf[e] = t if x >= 0.0 else -t
            # suffix products stored into m (its old values are consumed)
            run = one
            for e in range(hi - 1, lo - 1, -1):
                m[e] = run
                run *= tbuf[e]
            # forward pass: prefix product, atanh, scatter
            run = one
            for e in range(lo, hi):
                y = f0 * m[e] * run
                run *= tbuf[e]
                if y > one_minus:
                    y = one_minus
                elif y < -one_minus:
                    y = -one_minus
                mn = math.log((one + y) / (one - y))  # = 2*atanh(y)
                m[e] = mn
                S_new_threads[tid, in_idx[e]] += mn

    def _num_threads() -> int:
        return numba.get_num_threads()
else:  # pragma: no cover - numpy-only environments

    def _num_threads() -> int:
        return 1


def _iterate_numpy(off, in_idx, m, t0, S, clamp, one_minus):
    x = S[in_idx] - m
    np.clip(x, -clamp, clamp, out=x)
    t = np.tanh(0.5 * x.astype(np.float64))
    deg = np.diff(off)
    oid = np.repeat(np.arange(len(deg)), deg)
    zero = t == 0.0
    zcount = np.bincount(oid, weights=zero, minlength=len(deg))
    t_nz = np.where(zero, 1.0, t)
    prod_nz = np.multiply.reduceat(t_nz, off[:-1])
    prod_edge = prod_nz[oid]
    zc_edge = zcount[oid]
    excl = np.where(zc_edge == 0, prod_edge / t_nz,
                    np.where(zero & (zc_edge == 1), prod_edge, 0.0))
    y = t0.astype(np.float64)[oid] * excl
    np.clip(y, -one_minus, one_minus, out=y)
    m_new = 2.0 * np.arctanh(y)
    s_new = np.bincount(in_idx, weights=m_new, minlength=len(S))
    return m_new, s_new


class FactorGraphState:
    """Mutable message state for flooding sum-product on one graph.

    `off`/`in_idx` describe factor adjacency (CSR-style), `t0` is the
    per-factor tanh observation factor, `lam` the per-variable intrinsic
    LLR (zeros for LT input symbols).
    """

    def __init__(self, off, in_idx, t0, lam, dtype=np.float64):
        dtype = np.dtype(dtype)
        self.off = np.ascontiguousarray(off, dtype=np.int64)
        self.in_idx = np.ascontiguousarray(in_idx, dtype=np.int32)
        self.t0 = np.ascontiguousarray(t0, dtype=dtype)
        self.lam = np.ascontiguousarray(lam, dtype=dtype)
        self.dtype = dtype
        self.n_vars = len(lam)
        self.m = np.zeros(len(in_idx), dtype=dtype)
        self.posterior = self.lam.astype(np.float64).copy()
        self._tbuf = np.empty(len(in_idx), dtype=dtype)
        self._clamp = dtype.type(MSG_CLAMP[dtype])
        self._one_minus = dtype.type(ONE_MINUS[dtype])
        if _use_numba:
            self._s_threads = np.zeros((_num_threads(), self.n_vars), dtype=dtype)

    def extend(self, off_new, in_idx_new, t0_new):
        """Append more factors (new symbols revealed); messages start at 0."""
        base = self.off[-1]
        self.off = np.concatenate([self.off, np.asarray(off_new, dtype=np.int64)[1:] + base])
        self.in_idx = np.concatenate([self.in_idx, np.asarray(in_idx_new, dtype=np.int32)])
        self.t0 = np.concatenate([self.t0, np.asarray(t0_new, dtype=self.dtype)])
        self.m = np.concatenate([self.m, np.zeros(len(in_idx_new), dtype=self.dtype)])
        self._tbuf = np.empty(len(self.in_idx), dtype=self.dtype)

    def clone(self) -> "FactorGraphState":
        """Deep copy; lets a rateless receiver branch from a past state."""
        dup = object.__new__(FactorGraphState)
        dup.off = self.off.copy()
        dup.in_idx = self.in_idx.copy()
        dup.t0 = self.t0.copy()
        dup.lam = self.lam
        dup.dtype = self.dtype
        dup.n_vars = self.n_vars
        dup.m = self.m.copy()
        dup.posterior = self.posterior.copy()
        dup._tbuf = np.empty(len(self.in_idx), dtype=self.dtype)
        dup._clamp = self._clamp
        dup._one_minus = self._one_minus
        if _use_numba:
            dup._s_threads = np.zeros_like(self._s_threads)
        return dup

    def iterate(self) -> None:
        """One flooding pass: all factor updates, then all variable sums."""
        if _use_numba:
            s_full = self.posterior.astype(self.dtype)
            self._s_threads[:] = 0
            _iterate_numba(self.off, self.in_idx, self.m, self._tbuf, self.t0,
                           s_full, self._s_threads, self._clamp, self._one_minus,
                           self.dtype.type(1.0))
            incoming = self._s_threads.sum(axis=0, dtype=np.float64)
        else:
            m_new, incoming = _iterate_numpy(self.off, self.in_idx,
                                             self.m.astype(np.float64),
                                             self.t0, self.posterior,
                                             float(self._clamp), float(self._one_minus))
            self.m = m_new.astype(self.dtype)
        self.posterior = self.lam.astype(np.float64) + incoming

    def hard_bits(self) -> np.ndarray:
        """0 where the posterior says +1 (LLR >= 0), else 1."""
        return (self.posterior < 0).astype(np.uint8)
