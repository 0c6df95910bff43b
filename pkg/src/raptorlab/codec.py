"""Raptor encoder and decoder: high-rate LDPC precode + LT layer.

Encoding: a k-bit message passes through a systematic rate-0.95,
column-weight-3 LDPC precode (progressive-edge-growth construction with
a fixed seed) into k' input symbols; the LT layer then emits output
symbols, each the XOR of d input symbols chosen uniformly without
replacement, d drawn from the design's degree distribution.

Decoding is two-stage, on LLRs: flooding sum-product on the LT factor
graph (output nodes carry the channel observation, input symbols carry
none), then a second sum-product pass over the precode's parity checks
seeded with the LT posteriors.  Success is declared when the hard
decisions satisfy every precode check.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import csr_matrix

from . import _spa as _spa_mod
from ._spa import FactorGraphState
from .degree_design import DegreeDistribution


# ---------------------------------------------------------------------------
# Precode
# ---------------------------------------------------------------------------

@dataclass
class Precode:
    """Systematic LDPC outer code: codeword = [message | parity].

    `h` is the (m x k') parity-check matrix after the systematic column
    relabeling, `parity_gen` the dense (m x k) generator of the parity
    bits.  A zero-check precode (k = k', rate 1) is valid and serves as
    the identity outer code.
    """

    k: int
    k_prime: int
    h: csr_matrix
    parity_gen: np.ndarray
    seed: int = 0

    @property
    def n_checks(self) -> int:
        return self.h.shape[0]

    @property
    def rate(self) -> float:
        return self.k / self.k_prime

    def encode(self, message: np.ndarray) -> np.ndarray:
        message = np.asarray(message, dtype=np.uint8)
        if message.shape != (self.k,):
            raise ValueError(f"message must have length {self.k}")
        if self.n_checks == 0:
            return message.copy()
        parity = (self.parity_gen @ message) & 1
        return np.concatenate([message, parity.astype(np.uint8)])

    def checks_ok(self, bits: np.ndarray) -> bool:
        if self.n_checks == 0:
            return True
        return not np.any((self.h @ bits) & 1)

    def syndrome_weight(self, bits: np.ndarray) -> int:
        if self.n_checks == 0:
            return 0
        return int(np.count_nonzero((self.h @ bits) & 1))

    def save_text(self, path) -> None:
        """One check's variable list per line, header with the dimensions."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"precode k={self.k} k_prime={self.k_prime} "
                     f"checks={self.n_checks} seed={self.seed}\n")
            h = self.h.tocsr()
            for row in range(self.n_checks):
                cols = h.indices[h.indptr[row]:h.indptr[row + 1]]
                fh.write(" ".join(str(int(c)) for c in sorted(cols)) + "\n")

    @classmethod
    def load_text(cls, path) -> "Precode":
        with open(path, "r", encoding="utf-8") as fh:
            header = dict(part.split("=") for part in fh.readline().split()[1:])
            k, k_prime, n_checks, seed = (int(header[f]) for f in
                                          ("k", "k_prime", "checks", "seed"))
            rows, cols = [], []
            for row in range(n_checks):
                for tok in fh.readline().split():
                    rows.append(row)
                    cols.append(int(tok))
        h = csr_matrix((np.ones(len(rows), dtype=np.uint8), (rows, cols)),
                       shape=(n_checks, k_prime))
        return cls(k=k, k_prime=k_prime, h=h,
                   parity_gen=_parity_from_systematic(h, k), seed=seed)


def trivial_precode(k: int) -> Precode:
    """Rate-1 outer code: input symbols are the message itself."""
    h = csr_matrix((0, k), dtype=np.uint8)
    return Precode(k=k, k_prime=k, h=h, parity_gen=np.zeros((0, k), np.uint8))


def _parity_from_systematic(h: csr_matrix, k: int) -> np.ndarray:
    """Recover the parity generator from a column-relabeled H whose last
    rows' positions form an invertible block: solve B P = A over GF(2)."""
    m = h.shape[0]
    if m == 0:
        return np.zeros((0, k), np.uint8)
    dense = np.asarray(h.todense(), dtype=np.uint8)
    a = dense[:, :k].copy()
    b = dense[:, k:].copy()
    for col in range(m):
        hit = np.flatnonzero(b[col:, col]) + col
        if len(hit) == 0:
            raise ValueError("parity block is singular; not a systematic layout")
        r = hit[0]
        if r != col:
            b[[col, r]] = b[[r, col]]
            a[[col, r]] = a[[r, col]]
        others = np.flatnonzero(b[:, col])
        others = others[others != col]
        if len(others):
            b[others] ^= b[col]
            a[others] ^= a[col]
    return a


def _peg_parity_check(n_vars: int, n_checks: int, col_weight: int,
                      rng: np.random.Generator) -> list[list[int]]:
    """Progressive edge growth: per variable, each new edge goes to a
    check outside (or failing that, deepest in) the variable's current
    BFS tree, minimum degree first.  Keeps local girth large."""
    var_adj: list[list[int]] = [[] for _ in range(n_vars)]
    chk_adj: list[list[int]] = [[] for _ in range(n_checks)]
    chk_deg = np.zeros(n_checks, dtype=np.int64)

    def bfs_levels(v: int) -> np.ndarray:
        """Distance (in check hops) from v to every check; -1 unreachable."""
        dist = np.full(n_checks, -1, dtype=np.int64)
        seen_var = np.zeros(n_vars, dtype=bool)
        seen_var[v] = True
        frontier = [c for c in var_adj[v]]
        level = 0
        while frontier:
            new_checks: list[int] = []
            for c in frontier:
                if dist[c] < 0:
                    dist[c] = level
                    new_checks.append(c)
            if not new_checks:
                break
            next_vars: list[int] = []
            for c in new_checks:
                for u in chk_adj[c]:
                    if not seen_var[u]:
                        seen_var[u] = True
                        next_vars.append(u)
            frontier = []
            for u in next_vars:
                frontier.extend(var_adj[u])
            level += 1
        return dist

    def pick_min_degree(candidates: np.ndarray) -> int:
        degs = chk_deg[candidates]
        pool = candidates[degs == degs.min()]
        return int(pool[rng.integers(len(pool))])

    for v in range(n_vars):
        for _ in range(col_weight):
            if not var_adj[v]:
                cand = np.arange(n_checks)
            else:
                dist = bfs_levels(v)
                unreachable = np.flatnonzero(dist < 0)
                if len(unreachable):
                    cand = unreachable
                else:
                    cand = np.flatnonzero(dist == dist.max())
            cand = np.setdiff1d(cand, np.asarray(var_adj[v], dtype=np.int64),
                                assume_unique=False)
            if len(cand) == 0:
                cand = np.setdiff1d(np.arange(n_checks), var_adj[v])
            c = pick_min_degree(cand)
            var_adj[v].append(c)
            chk_adj[c].append(v)
            chk_deg[c] += 1
    return var_adj


def _systematize(var_adj: list[list[int]], n_vars: int, n_checks: int):
    """Column-relabel H so the last n_checks positions are invertible
    parity positions; returns (csr H, parity generator, ok flag)."""
    dense = np.zeros((n_checks, n_vars), dtype=np.uint8)
    for v, checks in enumerate(var_adj):
        dense[checks, v] = 1
    h = dense.copy()
    pivot_of_row: list[int] = []
    pivot_cols: set[int] = set()
    row = 0
    for col in range(n_vars - 1, -1, -1):
        if row >= n_checks:
            break
        hit = np.flatnonzero(h[row:, col]) + row
        if len(hit) == 0:
            continue
        r = hit[0]
        if r != row:
            h[[row, r]] = h[[r, row]]
        others = np.flatnonzero(h[:, col])
        others = others[others != row]
        if len(others):
            h[others] ^= h[row]
        pivot_of_row.append(col)
        pivot_cols.add(col)
        row += 1
    if row < n_checks:
        return None, None, False
    info_cols = [c for c in range(n_vars) if c not in pivot_cols]
    order = info_cols + pivot_of_row  # parity col of row r sits at position k+r
    parity_gen = h[:, info_cols].copy()
    h_relab = dense[:, order]
    return csr_matrix(h_relab), parity_gen, True


@lru_cache(maxsize=8)
def build_precode(k: int, rate: float = 0.95, seed: int = 7,
                  column_weight: int = 3) -> Precode:
    """Regular column-weight-3 LDPC precode at the given rate.

    Deterministic for fixed arguments; the PEG construction plus the
    systematic relabeling take a minute or so at k = 10^4, so results
    are cached in-process and, when RAPTORLAB_CACHE_DIR is set, on disk.
    """
    if not 0.9 <= rate <= 1.0:
        raise ValueError("precode rate must be at least 0.9")
    if rate == 1.0:
        return trivial_precode(k)
    k_prime = int(round(k / rate))
    n_checks = k_prime - k
    if n_checks < 1:
        return trivial_precode(k)

    cache_dir = os.environ.get("RAPTORLAB_CACHE_DIR", "")
    cache_path = None
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        tag = f"precode_k{k}_r{round(rate * 10000)}_s{seed}_w{column_weight}.npz"
        cache_path = os.path.join(cache_dir, tag)
        if os.path.exists(cache_path):
            blob = np.load(cache_path)
            h = csr_matrix((blob["h_data"], blob["h_indices"], blob["h_indptr"]),
                           shape=(n_checks, k_prime))
            return Precode(k=k, k_prime=k_prime, h=h,
                           parity_gen=blob["parity_gen"],
                           seed=int(blob["seed"][0]))

    attempt = seed
    for _ in range(10):
        rng = np.random.default_rng(attempt)
        var_adj = _peg_parity_check(k_prime, n_checks, column_weight, rng)
        h, parity_gen, ok = _systematize(var_adj, k_prime, n_checks)
        if ok:
            if cache_path:
                np.savez_compressed(cache_path, h_data=h.data, h_indices=h.indices,
                                    h_indptr=h.indptr, parity_gen=parity_gen,
                                    seed=np.array([attempt]))
            return Precode(k=k, k_prime=k_prime, h=h, parity_gen=parity_gen,
                           seed=attempt)
        attempt += 1  # rank-deficient draw; deterministic retry
    raise RuntimeError("could not draw a full-rank parity-check matrix")


# ---------------------------------------------------------------------------
# LT layer
# ---------------------------------------------------------------------------

@dataclass
class LtGraph:
    """Bipartite LT graph: output symbol o covers edges
    edges[offsets[o]:offsets[o+1]] (input-symbol indices, distinct)."""

    k_prime: int
    n: int
    edges: np.ndarray
    offsets: np.ndarray
    seed: int

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets).astype(np.int64)

    def input_degrees(self) -> np.ndarray:
        return np.bincount(self.edges, minlength=self.k_prime)

    def prefix(self, n: int) -> "LtGraph":
        """The graph restricted to the first n output symbols."""
        if n > self.n:
            raise ValueError("prefix longer than the graph")
        end = int(self.offsets[n])
        return LtGraph(self.k_prime, n, self.edges[:end],
                       self.offsets[:n + 1], self.seed)

    def save_text(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"lt-graph k_prime={self.k_prime} n={self.n} seed={self.seed}\n")
            for o in range(self.n):
                row = self.edges[self.offsets[o]:self.offsets[o + 1]]
                fh.write(" ".join(str(int(i)) for i in row) + "\n")

    @classmethod
    def load_text(cls, path) -> "LtGraph":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().split()
            fields = dict(part.split("=") for part in header[1:])
            k_prime, n, seed = (int(fields[key]) for key in ("k_prime", "n", "seed"))
            edges: list[int] = []
            offsets = [0]
            for _ in range(n):
                row = [int(tok) for tok in fh.readline().split()]
                edges.extend(row)
                offsets.append(len(edges))
        return cls(k_prime, n, np.asarray(edges, dtype=np.int32),
                   np.asarray(offsets, dtype=np.int64), seed)


def _sample_degrees(dist: DegreeDistribution, count: int,
                    rng: np.random.Generator) -> np.ndarray:
    support = np.asarray(dist.support, dtype=np.int64)
    pmf = np.asarray([dist.omega_node[int(d)] for d in support])
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    picks = np.searchsorted(cdf, rng.random(count), side="right")
    return support[np.minimum(picks, len(support) - 1)]


def _sample_neighbors(k_prime: int, degrees: np.ndarray,
                      rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Distinct uniform neighbors for every output symbol.

    Partial Fisher-Yates against a shared index pool, undone after each
    row: exactly uniform without replacement at O(degree) per symbol for
    any degree up to k'.  The uniform draws come from the caller's
    generator, so results are reproducible and independent of the kernel
    used (a numba loop when available, plain Python otherwise).
    """
    if np.any(degrees > k_prime):
        d = int(degrees[degrees > k_prime][0])
        raise ValueError(f"degree {d} exceeds the {k_prime} input symbols")
    offsets = np.zeros(len(degrees) + 1, dtype=np.int64)
    np.cumsum(degrees, out=offsets[1:])
    total = int(offsets[-1])
    uniforms = rng.random(total)
    edges = np.empty(total, dtype=np.int32)
    pool = np.arange(k_prime, dtype=np.int32)
    _fisher_yates_rows(offsets, degrees.astype(np.int64), uniforms, pool, edges)
    return edges, offsets


def _fisher_yates_rows_py(offsets, degrees, uniforms, pool, edges):
    k_prime = len(pool)
    for row in range(len(degrees)):
        lo = offsets[row]
        d = degrees[row]
        for j in range(d):
            swap = j + int(uniforms[lo + j] * (k_prime - j))
            pool[j], pool[swap] = pool[swap], pool[j]
            edges[lo + j] = pool[j]
        for j in range(d - 1, -1, -1):  # undo, restoring pool = arange
            swap = j + int(uniforms[lo + j] * (k_prime - j))
            pool[j], pool[swap] = pool[swap], pool[j]


if _spa_mod._use_numba:
    from numba import njit as _njit

    _fisher_yates_rows = _njit(cache=True)(_fisher_yates_rows_py)
else:  # pragma: no cover - numpy-only environments
    _fisher_yates_rows = _fisher_yates_rows_py


def lt_graph(k_prime: int, dist: DegreeDistribution, count: int,
             rng_seed: int) -> LtGraph:
    """Sample an LT graph alone (useful with the all-zero codeword)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    degrees = _sample_degrees(dist, count, rng)
    edges, offsets = _sample_neighbors(k_prime, degrees, rng)
    return LtGraph(k_prime, count, edges, offsets, rng_seed)


def lt_fold(input_symbols: np.ndarray, graph: LtGraph) -> np.ndarray:
    """XOR each output symbol's neighborhood."""
    bits = np.asarray(input_symbols, dtype=np.uint8)
    contrib = bits[graph.edges]
    return np.bitwise_xor.reduceat(contrib, graph.offsets[:-1]).astype(np.uint8)


def lt_encode(input_symbols: np.ndarray, dist: DegreeDistribution, count: int,
              rng_seed: int) -> tuple[np.ndarray, LtGraph]:
    """Generate `count` LT output symbols from the input symbols."""
    bits = np.asarray(input_symbols, dtype=np.uint8)
    graph = lt_graph(len(bits), dist, count, rng_seed)
    return lt_fold(bits, graph), graph


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

@dataclass
class SpaResult:
    posteriors: np.ndarray
    bits: np.ndarray
    success: bool
    iters_used: int
    stalled: bool = False


def _graph_t0(channel_llrs: np.ndarray, dtype) -> np.ndarray:
    clamped = np.clip(channel_llrs, -50.0, 50.0)
    return np.tanh(0.5 * clamped).astype(dtype)


def spa_decode(graph: LtGraph, channel_llrs: np.ndarray, precode: Precode,
               max_iters: int, *, early_stop: bool = True,
               stall_tol: float = 0.0, stall_patience: int = 10,
               syndrome_window: int = 0, dtype=np.float64,
               state: FactorGraphState | None = None) -> SpaResult:
    """Flooding sum-product on the LT graph, verified by precode checks.

    Each iteration runs the tanh-rule output update followed by the sum
    input update; decoding stops early once the hard decisions satisfy
    every precode check (when the precode has any and early_stop is on).
    Failure to verify is a normal outcome, not an error.

    Two optional stall detectors cut off hopeless decodes: posterior
    movement below stall_tol (relative) for stall_patience consecutive
    iterations, and no new minimum of the precode syndrome weight within
    syndrome_window iterations.

    A pre-built FactorGraphState can be passed in to continue from an
    earlier decode (incremental/rateless use); it must correspond to the
    same graph.
    """
    if len(channel_llrs) != graph.n:
        raise ValueError("one channel LLR per output symbol required")
    if state is None:
        state = FactorGraphState(graph.offsets, graph.edges,
                                 _graph_t0(channel_llrs, dtype),
                                 np.zeros(graph.k_prime), dtype=dtype)
    can_verify = precode.n_checks > 0
    prev_mean = 0.0
    flat = 0
    stalled = False
    iters = 0
    best_syndrome = np.inf
    best_at = 0
    for iters in range(1, max_iters + 1):
        state.iterate()
        if can_verify and (early_stop or syndrome_window > 0):
            bits = state.hard_bits()
            undecided = int(np.count_nonzero(state.posterior == 0.0))
            weight = precode.syndrome_weight(bits) + undecided
            if early_stop and weight == 0:
                return SpaResult(state.posterior.copy(), bits, True, iters)
            if weight < best_syndrome:
                best_syndrome, best_at = weight, iters
            if syndrome_window > 0 and iters - best_at >= syndrome_window:
                stalled = True
                break
        if stall_tol > 0:
            mean_abs = float(np.mean(np.abs(state.posterior)))
            if abs(mean_abs - prev_mean) < stall_tol * max(1.0, mean_abs):
                flat += 1
                if flat >= stall_patience:
                    stalled = True
                    break
            else:
                flat = 0
            prev_mean = mean_abs
    bits = state.hard_bits()
    success = can_verify and precode.checks_ok(bits) and _decided(state.posterior)
    return SpaResult(state.posterior.copy(), bits, success, iters, stalled)


def _decided(posterior: np.ndarray) -> bool:
    """Verification needs every symbol decided; an exactly-zero posterior
    (an uncovered input, or no information at all) is a coin flip that
    would let the all-zero pattern pass the checks vacuously."""
    return bool(np.all(posterior != 0.0))


def precode_decode(posterior_llrs: np.ndarray, precode: Precode,
                   iters: int = 50, dtype=np.float64) -> tuple[np.ndarray, bool]:
    """Sum-product over the precode checks, seeded with LT posteriors.

    Check nodes are pure parity factors (observation factor 1); variable
    nodes carry the LT posterior as intrinsic information.  Returns the
    message bits and the check-verification flag.
    """
    lam = np.asarray(posterior_llrs, dtype=float)
    if len(lam) != precode.k_prime:
        raise ValueError(f"expected {precode.k_prime} posteriors")
    if precode.n_checks == 0:
        bits = (lam < 0).astype(np.uint8)
        return bits[:precode.k], bool(np.all(np.abs(lam) > 0))
    h = precode.h.tocsr()
    state = FactorGraphState(h.indptr.astype(np.int64), h.indices,
                             np.ones(precode.n_checks), lam, dtype=dtype)
    bits = state.hard_bits()
    for _ in range(iters):
        if precode.checks_ok(bits) and _decided(state.posterior):
            break
        state.iterate()
        bits = state.hard_bits()
    return bits[:precode.k], precode.checks_ok(bits) and _decided(state.posterior)
