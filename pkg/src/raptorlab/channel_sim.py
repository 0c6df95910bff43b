"""BI-AWGN channel and the incremental rateless transmission loop.

A trial encodes once, reveals output symbols in batches, and re-decodes
after each batch until the precode checks verify; the number of symbols
consumed at first success gives the realized rate k/n, and dividing by
channel capacity gives the measured rate efficiency.  Batches continue
the previous message state (the revealed prefix fully determines it),
and a final bisection between the last failing and first succeeding
length recovers n to sub-batch resolution.

Batch size scales with the capacity-ideal length k/C(gamma), not with k:
at -20 dB a code needs ~140x more symbols than message bits and a fixed
1%-of-k step would mean thousands of decode attempts.

BER-versus-overhead curves use the all-zero codeword (channel and
decoder are symmetric); efficiency measurements encode random messages.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .codec import (Precode, SpaResult, build_precode, lt_fold, lt_graph,
                    spa_decode)
from ._spa import FactorGraphState
from .codec import _decided, _graph_t0
from .degree_design import DegreeDistribution
from .numerics import Snr, bi_awgn_capacity


def awgn_channel(symbols: np.ndarray, snr: Snr, seed: int) -> np.ndarray:
    """Channel LLRs 2*y/sigma^2 for BPSK symbols (-1)^c + N(0, 1/gamma)."""
    bits = np.asarray(symbols, dtype=np.uint8)
    rng = np.random.default_rng(seed)
    sigma = math.sqrt(1.0 / snr.gamma)
    y = np.where(bits == 0, 1.0, -1.0) + sigma * rng.standard_normal(len(bits))
    return 2.0 * snr.gamma * y


@dataclass
class TrialConfig:
    k: int
    snr: Snr
    dist: DegreeDistribution
    seed: int = 0
    batch: int | None = None          # default: 1% of the capacity-ideal length
    max_symbols: int | None = None    # default: 4 * k / C(gamma)
    spa_iters: int = 1000             # SPA iteration cap per decode attempt
    sweep_iter_cap: int | None = None  # softer cap during the upward sweep
    bisection: bool = True            # refine n between last fail / first success
    eta_hint: float | None = None     # design efficiency; starts the sweep at
                                      # k/(eta_hint*C) instead of k/C
    precode_rate: float = 0.95
    precode_seed: int = 7
    precode_iters: int = 50
    dtype: type = np.float64
    stall_tol: float = 1e-3
    stall_patience: int = 8
    syndrome_window: int = 25
    ber_overheads: tuple = ()

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.batch is not None and self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.max_symbols is not None and self.max_symbols <= self.k:
            raise ValueError("max_symbols must exceed k")

    def resolved_batch(self) -> int:
        if self.batch is not None:
            return self.batch
        ideal = self.k / bi_awgn_capacity(self.snr)
        return max(32, int(math.ceil(0.01 * ideal)))

    def resolved_max_symbols(self) -> int:
        if self.max_symbols is not None:
            return self.max_symbols
        return int(math.ceil(4.0 * self.k / bi_awgn_capacity(self.snr)))

    def resolved_sweep_cap(self) -> int:
        if self.sweep_iter_cap is not None:
            return min(self.sweep_iter_cap, self.spa_iters)
        return min(150, self.spa_iters)


@dataclass
class SimulationRecord:
    k: int
    symbols_used: int
    success: bool
    iterations: list[int] = field(default_factory=list)
    ber_curve: dict[float, float] = field(default_factory=dict)
    seed: int = 0
    bit_errors: int | None = None  # decoded vs true input symbols at success

    @property
    def realized_rate(self) -> float:
        return self.k / self.symbols_used

    @property
    def overhead(self) -> float:
        return (self.symbols_used - self.k) / self.symbols_used


class _Trial:
    """One seeded trial: precode, LT graph, channel stream, decoders."""

    def __init__(self, cfg: TrialConfig, all_zero: bool = False):
        self.cfg = cfg
        self.precode = build_precode(cfg.k, cfg.precode_rate, cfg.precode_seed)
        self.max_symbols = cfg.resolved_max_symbols()
        ss = np.random.SeedSequence([cfg.seed, 0xC0DE])
        msg_seed, graph_seed, noise_seed = (int(s.generate_state(1)[0])
                                            for s in ss.spawn(3))
        if all_zero:
            self.message = np.zeros(cfg.k, dtype=np.uint8)
            self.input_symbols = np.zeros(self.precode.k_prime, dtype=np.uint8)
        else:
            self.message = np.random.default_rng(msg_seed).integers(
                0, 2, cfg.k, dtype=np.uint8)
            self.input_symbols = self.precode.encode(self.message)
        self.graph = lt_graph(self.precode.k_prime, cfg.dist,
                              self.max_symbols, graph_seed)
        if all_zero:
            out_bits = np.zeros(self.max_symbols, dtype=np.uint8)
        else:
            out_bits = lt_fold(self.input_symbols, self.graph)
        self.llrs = awgn_channel(out_bits, cfg.snr, noise_seed)

    def _final_decision(self, res: SpaResult) -> tuple[np.ndarray, bool, np.ndarray]:
        """LT result, then the precode cleanup stage if checks failed.

        Returns (bits, verified, final posteriors)."""
        if res.success:
            return res.bits, True, res.posteriors
        state = _precode_state(res.posteriors, self.precode, self.cfg.dtype)
        if state is None:
            return res.bits, False, res.posteriors
        bits = state.hard_bits()
        for _ in range(self.cfg.precode_iters):
            if self.precode.checks_ok(bits) and _decided(state.posterior):
                break
            state.iterate()
            bits = state.hard_bits()
        ok = self.precode.checks_ok(bits) and _decided(state.posterior)
        return bits, ok, state.posterior

    def _grow(self, state: FactorGraphState | None, revealed: int,
              n: int) -> FactorGraphState:
        """Extend (or create) a message state to cover the first n symbols."""
        cfg = self.cfg
        if state is None:
            g = self.graph.prefix(n)
            return FactorGraphState(g.offsets, g.edges,
                                    _graph_t0(self.llrs[:n], cfg.dtype),
                                    np.zeros(g.k_prime), dtype=cfg.dtype)
        lo, hi = self.graph.offsets[revealed], self.graph.offsets[n]
        state.extend(self.graph.offsets[revealed:n + 1] - lo,
                     self.graph.edges[lo:hi],
                     _graph_t0(self.llrs[revealed:n], cfg.dtype))
        return state

    def _attempt(self, state: FactorGraphState, n: int, iter_cap: int,
                 patient: bool = False) -> tuple[bool, np.ndarray, int, np.ndarray]:
        """One decode attempt.  Sweep attempts use twitchy stall exits (a
        false stall just rolls into the next batch, warm); attempts whose
        verdict decides the measured n get patient settings."""
        cfg = self.cfg
        if patient:
            window = max(4 * cfg.syndrome_window, 120) if cfg.syndrome_window else 0
            tol, patience = cfg.stall_tol / 4, 3 * cfg.stall_patience
        else:
            window, tol, patience = (cfg.syndrome_window, cfg.stall_tol,
                                     cfg.stall_patience)
        res = spa_decode(self.graph.prefix(n), self.llrs[:n], self.precode,
                         iter_cap, early_stop=True, stall_tol=tol,
                         stall_patience=patience, syndrome_window=window,
                         dtype=cfg.dtype, state=state)
        bits, ok, posteriors = self._final_decision(res)
        return ok, bits, res.iters_used, posteriors

    def decode_cold(self, n: int) -> tuple[bool, np.ndarray, int, np.ndarray]:
        """Fresh decode using the first n symbols."""
        state = self._grow(None, 0, n)
        return self._attempt(state, n, self.cfg.spa_iters, patient=True)

    def run(self) -> SimulationRecord:
        cfg = self.cfg
        batch = cfg.resolved_batch()
        capacity = bi_awgn_capacity(cfg.snr)
        start = cfg.k / capacity
        if cfg.eta_hint is not None:
            # the design efficiency is an a-priori upper bound on what a
            # finite-length trial achieves; starting the sweep there skips
            # provably hopeless lengths (the bisection anchor survives)
            start = cfg.k / (min(1.0, cfg.eta_hint) * capacity)
        n = min(self.max_symbols, max(cfg.k + 1, int(math.ceil(start))))
        iterations: list[int] = []
        state: FactorGraphState | None = None
        fail_state: FactorGraphState | None = None
        revealed = 0
        success = False
        n_fail = 0
        final_bits: np.ndarray | None = None
        while True:
            state = self._grow(state, revealed, n)
            revealed = n
            last_sweep = n + batch > self.max_symbols
            cap = cfg.spa_iters if last_sweep else cfg.resolved_sweep_cap()
            ok, bits, iters_used, _ = self._attempt(state, n, cap, patient=last_sweep)
            iterations.append(iters_used)
            if ok:
                success = True
                final_bits = bits
                break
            n_fail = n
            if n >= self.max_symbols:
                break
            if cfg.bisection:
                fail_state = state.clone()
            n = min(self.max_symbols, n + batch)
        if success and n_fail and cfg.bisection:
            # refine n between the last failure and this success, continuing
            # each probe from the saved failing state (same revealed prefix)
            resolution = max(1, batch // 4)
            lo, hi = n_fail, n
            while hi - lo > resolution and fail_state is not None:
                mid = (lo + hi) // 2
                probe = self._grow(fail_state.clone(), lo, mid)
                ok, bits, iters_mid, _ = self._attempt(probe, mid, cfg.spa_iters,
                                                       patient=True)
                iterations.append(iters_mid)
                if ok:
                    hi = mid
                    final_bits = bits
                else:
                    lo = mid
                    fail_state = probe
            n = hi
        bit_errors = None
        if final_bits is not None:
            bit_errors = int(np.count_nonzero(final_bits != self.input_symbols))
        record = SimulationRecord(k=cfg.k, symbols_used=n, success=success,
                                  iterations=iterations, seed=cfg.seed,
                                  bit_errors=bit_errors)
        for ov in cfg.ber_overheads:
            n_ov = int(round(cfg.k / (1.0 - ov)))
            if n_ov <= self.max_symbols:
                record.ber_curve[ov] = self.bit_error_rate(n_ov)
        return record

    def bit_error_rate(self, n: int) -> float:
        """Input-symbol BER; an exactly-zero posterior is an undecided
        symbol and counts half an error (a tie broken by coin flip),
        which keeps the all-zero-codeword shortcut unbiased."""
        _, bits, _, posteriors = self.decode_cold(n)
        undecided = posteriors == 0.0
        wrong = (bits != self.input_symbols) & ~undecided
        return float((np.count_nonzero(wrong) + 0.5 * np.count_nonzero(undecided))
                     / len(bits))


def _precode_state(posteriors, precode: Precode, dtype) -> FactorGraphState | None:
    if precode.n_checks == 0:
        return None
    h = precode.h.tocsr()
    return FactorGraphState(h.indptr.astype(np.int64), h.indices,
                            np.ones(precode.n_checks),
                            np.asarray(posteriors, dtype=float), dtype=dtype)


def _derived_seed(base: int, index: int) -> int:
    return int(np.random.SeedSequence([base, index]).generate_state(1)[0])


def run_trial(cfg: TrialConfig) -> SimulationRecord:
    """Encode once, reveal symbols in batches, decode until verified.

    Stops at max_symbols with success=False (a partial record, not an
    exception).  Identical configs reproduce identical records.
    """
    return _Trial(cfg).run()


@dataclass
class EfficiencyEstimate:
    eta_hat: float                 # failures counted at max_symbols (pessimistic)
    halfwidth: float               # 95% normal-approximation half-width
    eta_hat_success_only: float
    mean_symbols: float
    success_rate: float
    capacity: float
    trials: int

    def as_dict(self) -> dict:
        return {"eta_hat": self.eta_hat, "halfwidth": self.halfwidth,
                "eta_hat_success_only": self.eta_hat_success_only,
                "mean_symbols": self.mean_symbols,
                "success_rate": self.success_rate,
                "capacity": self.capacity, "trials": self.trials}


def measure_efficiency(cfg: TrialConfig, trials: int,
                       collect=None) -> EfficiencyEstimate:
    """Realized rate efficiency over independent trials.

    eta_hat = (k / mean n) / C(gamma), with failed trials counted at
    max_symbols; the success-only mean is reported alongside.  `collect`
    (if given) receives each SimulationRecord as it completes.
    """
    if trials < 30:
        raise ValueError("at least 30 trials required for the estimate")
    capacity = bi_awgn_capacity(cfg.snr)
    max_symbols = cfg.resolved_max_symbols()
    ns, succ_ns = [], []
    for i in range(trials):
        rec = run_trial(replace(cfg, seed=_derived_seed(cfg.seed, i)))
        ns.append(rec.symbols_used if rec.success else max_symbols)
        if rec.success:
            succ_ns.append(rec.symbols_used)
        if collect is not None:
            collect(rec)
    ns = np.asarray(ns, dtype=float)
    mean_n = float(ns.mean())
    eta = (cfg.k / mean_n) / capacity
    halfwidth = 0.0
    if trials > 1 and ns.std() > 0:
        se_n = float(ns.std(ddof=1)) / math.sqrt(trials)
        halfwidth = 1.96 * se_n * (cfg.k / mean_n ** 2) / capacity
    eta_succ = ((cfg.k / float(np.mean(succ_ns))) / capacity) if succ_ns else 0.0
    return EfficiencyEstimate(eta, halfwidth, eta_succ, mean_n,
                              len(succ_ns) / trials, capacity, trials)


def ber_vs_overhead(cfg: TrialConfig, overheads, trials: int) -> dict[float, float]:
    """Input-symbol BER at fixed lengths n = round(k/(1-overhead)).

    All-zero codeword (symmetric channel and decoder), fresh decode per
    overhead point, averaged over trials.
    """
    overheads = sorted(float(v) for v in overheads)
    if any(not 0 < v < 1 for v in overheads):
        raise ValueError("overheads must lie in (0, 1)")
    n_needed = int(round(cfg.k / (1.0 - overheads[-1])))
    cfg = replace(cfg, max_symbols=max(n_needed, cfg.k + 1))
    errors = {ov: 0.0 for ov in overheads}
    for i in range(trials):
        trial = _Trial(replace(cfg, seed=_derived_seed(cfg.seed, i)), all_zero=True)
        for ov in overheads:
            n = int(round(cfg.k / (1.0 - ov)))
            errors[ov] += trial.bit_error_rate(n)
    return {ov: errors[ov] / trials for ov in overheads}


def iteration_stats(cfg: TrialConfig, trials: int) -> tuple[float, int]:
    """Mean and max SPA iterations of the succeeding decode attempts."""
    if trials < 30:
        raise ValueError("at least 30 trials required")
    finals = []
    for i in range(trials):
        rec = run_trial(replace(cfg, seed=_derived_seed(cfg.seed, i)))
        if rec.success and rec.iterations:
            finals.append(rec.iterations[-1])
    if not finals:
        return math.nan, 0
    return float(np.mean(finals)), int(max(finals))


def write_trials_csv(path, records: list[SimulationRecord]) -> None:
    overheads = sorted({ov for r in records for ov in r.ber_curve})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "n", "success", "iters"]
                        + [f"ber_at_{ov:g}" for ov in overheads])
        for r in sorted(records, key=lambda r: r.seed):
            writer.writerow([r.seed, r.symbols_used, int(r.success),
                             ";".join(str(i) for i in r.iterations)]
                            + [f"{r.ber_curve.get(ov, float('nan')):.6g}"
                               for ov in overheads])


def write_summary_json(path, estimate: EfficiencyEstimate, config_echo: dict) -> None:
    doc = {"summary": estimate.as_dict(), "config": config_echo}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
