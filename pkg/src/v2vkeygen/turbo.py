"""Parallel-concatenated RSC (turbo) codec with exact log-MAP decoding.

The code is a parallel concatenation of two identical recursive
systematic convolutional encoders separated by a seeded random
interleaver.  Encoder 1 is trellis-terminated (its tail is transmitted
unpunctured); encoder 2 is left open.  Decoding runs the standard
iterative schedule, exchanging extrinsic information between two BCJR
(forward-backward) component decoders until hard decisions stabilize or
the iteration budget is spent.

Soft values are log-likelihood ratios with the convention
LLR = log P(bit=0) / P(bit=1): positive means bit 0 is more likely.
All LLRs are clamped to +-LLR_MAX.  The trellis kernels are compiled
with numba; "log-map" uses exact jacobian logarithm steps,
"max-log-map" replaces them with max().
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

__all__ = [
    "LLR_MAX",
    "PUNCTURE_NONE",
    "PUNCTURE_HALF",
    "LOG_MAP",
    "MAX_LOG_MAP",
    "RscSpec",
    "TurboConfig",
    "TurboCodeword",
    "TurboDecodeResult",
    "rsc_encode",
    "make_interleaver",
    "turbo_encode",
    "puncture_masks",
    "bits_to_llr",
    "bsc_flip",
    "bcjr_decode",
    "turbo_decode",
]

LLR_MAX = 50.0
_NEG = -1.0e30

PUNCTURE_NONE = "none"
PUNCTURE_HALF = "half"
LOG_MAP = "log-map"
MAX_LOG_MAP = "max-log-map"


@dataclass(frozen=True)
class RscSpec:
    """Recursive systematic convolutional code, octal-coded polynomials.

    The polynomial's leading bit (position constraint_length-1) taps the
    register input; lower bits tap the shift-register contents, most
    recent first.  The default (7, 5) pair is the classical memory-2
    code G(D) = (1 + D^2) / (1 + D + D^2).
    """

    constraint_length: int = 3
    feedback_poly: int = 0o7
    feedforward_poly: int = 0o5
    terminated: bool = True

    def __post_init__(self):
        if self.constraint_length < 2:
            raise ValueError("constraint_length must be >= 2")
        top = 1 << (self.constraint_length - 1)
        if not self.feedback_poly & top:
            raise ValueError("feedback polynomial must have leading coefficient 1")
        for name, poly in (("feedback", self.feedback_poly),
                           ("feedforward", self.feedforward_poly)):
            if poly <= 0 or poly >= (1 << self.constraint_length):
                raise ValueError(f"{name} polynomial degree must be < constraint_length")

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @property
    def n_states(self) -> int:
        return 1 << self.memory


@dataclass(frozen=True)
class TurboConfig:
    rsc: RscSpec = field(default_factory=RscSpec)
    block_len: int = 512
    interleaver_seed: int = 1
    puncture: str = PUNCTURE_NONE
    iterations: int = 8
    algorithm: str = LOG_MAP
    extrinsic_scale: float = 1.0

    def __post_init__(self):
        if self.block_len < self.rsc.constraint_length:
            raise ValueError("block_len must be >= constraint_length")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.puncture not in (PUNCTURE_NONE, PUNCTURE_HALF):
            raise ValueError(f"unknown puncture mode {self.puncture!r}")
        if self.algorithm not in (LOG_MAP, MAX_LOG_MAP):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not 0 < self.extrinsic_scale <= 1:
            raise ValueError("extrinsic_scale must be in (0, 1]")


class TurboCodeword(NamedTuple):
    systematic: np.ndarray
    parity1: np.ndarray  # punctured per config
    parity2: np.ndarray  # punctured per config
    tail: np.ndarray     # encoder-1 tail: m systematic bits then m parity bits


class TurboDecodeResult(NamedTuple):
    bits: np.ndarray
    iterations_used: int
    converged: bool


class _Trellis(NamedTuple):
    next_state: np.ndarray  # [state, input] -> state
    out_parity: np.ndarray  # [state, input] -> parity bit
    pred_state: np.ndarray  # [state, branch] -> predecessor state
    pred_input: np.ndarray  # [state, branch] -> input on that branch
    fb_taps: np.ndarray     # [state] -> feedback parity of the state


@functools.lru_cache(maxsize=None)
def _trellis(constraint_length: int, feedback_poly: int, feedforward_poly: int) -> _Trellis:
    m = constraint_length - 1
    n_states = 1 << m
    fb_low = feedback_poly & (n_states - 1)
    ff_top = (feedforward_poly >> m) & 1
    ff_low = feedforward_poly & (n_states - 1)
    next_state = np.zeros((n_states, 2), dtype=np.int64)
    out_parity = np.zeros((n_states, 2), dtype=np.int64)
    fb_taps = np.zeros(n_states, dtype=np.int64)
    for s in range(n_states):
        fb = bin(fb_low & s).count("1") & 1
        fb_taps[s] = fb
        for u in (0, 1):
            a = u ^ fb
            next_state[s, u] = (a << (m - 1)) | (s >> 1)
            out_parity[s, u] = (ff_top & a) ^ (bin(ff_low & s).count("1") & 1)
    pred_state = np.zeros((n_states, 2), dtype=np.int64)
    pred_input = np.zeros((n_states, 2), dtype=np.int64)
    fill = np.zeros(n_states, dtype=np.int64)
    for s in range(n_states):
        for u in (0, 1):
            nxt = next_state[s, u]
            pred_state[nxt, fill[nxt]] = s
            pred_input[nxt, fill[nxt]] = u
            fill[nxt] += 1
    if not np.all(fill == 2):
        raise ValueError("trellis is not a binary-input permutation; check polynomials")
    return _Trellis(next_state, out_parity, pred_state, pred_input, fb_taps)


@njit(cache=True)
def _rsc_encode_kernel(bits, next_state, out_parity, fb_taps, memory, terminated):
    n = bits.shape[0]
    parity = np.empty(n, dtype=np.uint8)
    s = 0
    for k in range(n):
        u = bits[k]
        parity[k] = out_parity[s, u]
        s = next_state[s, u]
    tail_sys = np.zeros(memory, dtype=np.uint8)
    tail_par = np.zeros(memory, dtype=np.uint8)
    if terminated:
        for i in range(memory):
            u = fb_taps[s]  # drives register input to zero
            tail_sys[i] = u
            tail_par[i] = out_parity[s, u]
            s = next_state[s, u]
    return parity, tail_sys, tail_par, s


@njit(cache=True)
def _maxstar(a, b, use_max):
    if a < b:
        a, b = b, a
    if use_max or a - b > 40.0:
        return a
    return a + math.log1p(math.exp(b - a))


@njit(cache=True)
def _bcjr_kernel(sys_llr, par_llr, apriori, next_state, out_parity,
                 pred_state, pred_input, n_info, terminated, use_max):
    n_steps = sys_llr.shape[0]
    n_states = next_state.shape[0]

    # branch metric gamma[k,s,u] = -u*(Lsys+Lapr) - p(s,u)*Lpar  (log p up to
    # a per-step constant that cancels in the posterior)
    gamma = np.empty((n_steps, n_states, 2))
    for k in range(n_steps):
        lu = sys_llr[k] + apriori[k]
        lp = par_llr[k]
        for s in range(n_states):
            for u in range(2):
                g = 0.0
                if u == 1:
                    g -= lu
                if out_parity[s, u] == 1:
                    g -= lp
                gamma[k, s, u] = g

    alpha = np.empty((n_steps + 1, n_states))
    for s in range(n_states):
        alpha[0, s] = _NEG
    alpha[0, 0] = 0.0
    for k in range(n_steps):
        mx = _NEG
        for s in range(n_states):
            p0 = pred_state[s, 0]
            p1 = pred_state[s, 1]
            a0 = alpha[k, p0] + gamma[k, p0, pred_input[s, 0]]
            a1 = alpha[k, p1] + gamma[k, p1, pred_input[s, 1]]
            v = _maxstar(a0, a1, use_max)
            alpha[k + 1, s] = v
            if v > mx:
                mx = v
        for s in range(n_states):
            alpha[k + 1, s] -= mx

    beta = np.empty((n_steps + 1, n_states))
    for s in range(n_states):
        beta[n_steps, s] = _NEG if terminated else 0.0
    if terminated:
        beta[n_steps, 0] = 0.0
    for k in range(n_steps - 1, -1, -1):
        mx = _NEG
        for s in range(n_states):
            b0 = gamma[k, s, 0] + beta[k + 1, next_state[s, 0]]
            b1 = gamma[k, s, 1] + beta[k + 1, next_state[s, 1]]
            v = _maxstar(b0, b1, use_max)
            beta[k, s] = v
            if v > mx:
                mx = v
        for s in range(n_states):
            beta[k, s] -= mx

    post = np.empty(n_info)
    for k in range(n_info):
        m0 = _NEG
        m1 = _NEG
        for s in range(n_states):
            t0 = alpha[k, s] + gamma[k, s, 0] + beta[k + 1, next_state[s, 0]]
            t1 = alpha[k, s] + gamma[k, s, 1] + beta[k + 1, next_state[s, 1]]
            m0 = _maxstar(m0, t0, use_max)
            m1 = _maxstar(m1, t1, use_max)
        post[k] = m0 - m1
    return post


def _check_bits(bits) -> np.ndarray:
    arr = np.asarray(getattr(bits, "bits", bits), dtype=np.uint8)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("bits must be a non-empty 1D sequence")
    if arr.max(initial=0) > 1:
        raise ValueError("bit values must be 0 or 1")
    return arr


def rsc_encode(spec: RscSpec, bits) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Systematic stream, parity stream and termination tail.

    The tail holds the ``memory`` register-flushing systematic bits
    followed by their ``memory`` parity bits (empty when unterminated).
    """
    arr = _check_bits(bits)
    tr = _trellis(spec.constraint_length, spec.feedback_poly, spec.feedforward_poly)
    parity, tail_sys, tail_par, end_state = _rsc_encode_kernel(
        arr, tr.next_state, tr.out_parity, tr.fb_taps, spec.memory, spec.terminated)
    tail = np.concatenate([tail_sys, tail_par]) if spec.terminated else np.empty(0, dtype=np.uint8)
    return arr.copy(), parity, tail


def make_interleaver(k: int, seed: int) -> np.ndarray:
    """Deterministic Fisher-Yates permutation of 0..k-1."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF).permutation(k)


def puncture_masks(cfg: TurboConfig) -> tuple[np.ndarray, np.ndarray]:
    """Boolean transmit masks for the two parity streams."""
    k = np.arange(cfg.block_len)
    if cfg.puncture == PUNCTURE_HALF:
        return k % 2 == 0, k % 2 == 1
    ones = np.ones(cfg.block_len, dtype=bool)
    return ones, ones.copy()


def turbo_encode(cfg: TurboConfig, bits) -> TurboCodeword:
    """Encode one block: systematic, two (punctured) parity streams, tail."""
    arr = _check_bits(bits)
    if len(arr) != cfg.block_len:
        raise ValueError(f"block length mismatch: got {len(arr)}, expected {cfg.block_len}")
    perm = make_interleaver(cfg.block_len, cfg.interleaver_seed)
    spec1 = cfg.rsc
    spec2 = RscSpec(cfg.rsc.constraint_length, cfg.rsc.feedback_poly,
                    cfg.rsc.feedforward_poly, terminated=False)
    _, parity1, tail = rsc_encode(spec1, arr)
    _, parity2, _ = rsc_encode(spec2, arr[perm])
    m1, m2 = puncture_masks(cfg)
    return TurboCodeword(systematic=arr.copy(), parity1=parity1[m1],
                         parity2=parity2[m2], tail=tail)


def bits_to_llr(bits, crossover_p: float) -> np.ndarray:
    """Soft input for bits observed through a BSC with the given crossover."""
    if not 0 < crossover_p < 0.5:
        raise ValueError("crossover probability must be in (0, 0.5)")
    arr = _check_bits(bits)
    mag = math.log((1.0 - crossover_p) / crossover_p)
    return np.where(arr == 0, mag, -mag)


def bsc_flip(bits, p: float, rng: np.random.Generator) -> np.ndarray:
    """Pass bits through a binary symmetric channel."""
    arr = _check_bits(bits)
    return arr ^ (rng.random(arr.shape) < p).astype(np.uint8)


def bcjr_decode(spec: RscSpec, sys_llr, parity_llr, apriori,
                terminated: bool | None = None,
                algorithm: str = LOG_MAP) -> tuple[np.ndarray, np.ndarray]:
    """Exact a-posteriori LLRs of one RSC stream via forward-backward.

    For a terminated trellis the tail observations are appended to
    ``sys_llr``/``parity_llr`` (``apriori`` covers information bits
    only).  Returns (posterior, extrinsic) over the information bits,
    with extrinsic = posterior - sys_llr - apriori.
    """
    if terminated is None:
        terminated = spec.terminated
    sys_llr = np.clip(np.asarray(sys_llr, dtype=np.float64), -LLR_MAX, LLR_MAX)
    parity_llr = np.clip(np.asarray(parity_llr, dtype=np.float64), -LLR_MAX, LLR_MAX)
    apriori = np.clip(np.asarray(apriori, dtype=np.float64), -LLR_MAX, LLR_MAX)
    if sys_llr.shape != parity_llr.shape:
        raise ValueError("systematic/parity LLR length mismatch")
    n_info = len(sys_llr) - (spec.memory if terminated else 0)
    if n_info < 1:
        raise ValueError("LLR sequences shorter than the trellis tail")
    if len(apriori) != n_info:
        raise ValueError("apriori length must cover exactly the information bits")
    tr = _trellis(spec.constraint_length, spec.feedback_poly, spec.feedforward_poly)
    apr_full = np.concatenate([apriori, np.zeros(len(sys_llr) - n_info)])
    post = _bcjr_kernel(sys_llr, parity_llr, apr_full, tr.next_state, tr.out_parity,
                        tr.pred_state, tr.pred_input, n_info, terminated,
                        algorithm == MAX_LOG_MAP)
    extrinsic = post - sys_llr[:n_info] - apriori
    return post, extrinsic


def turbo_decode(cfg: TurboConfig, sys_llr, parity1_llr, parity2_llr,
                 tail_sys_llr=None, tail_parity_llr=None,
                 iterations: int | None = None,
                 early_stop: bool = True) -> TurboDecodeResult:
    """Iterative turbo decoding of one block.

    Parity LLR arrays are full length (``block_len``) with zeros at
    punctured positions; the encoder-1 tail LLRs are optional (zeros
    stand in when the tail was not observed).  Stops early once hard
    decisions repeat across an iteration.
    """
    k = cfg.block_len
    sys_llr = np.clip(np.asarray(sys_llr, dtype=np.float64), -LLR_MAX, LLR_MAX)
    parity1_llr = np.clip(np.asarray(parity1_llr, dtype=np.float64), -LLR_MAX, LLR_MAX)
    parity2_llr = np.clip(np.asarray(parity2_llr, dtype=np.float64), -LLR_MAX, LLR_MAX)
    if not len(sys_llr) == len(parity1_llr) == len(parity2_llr) == k:
        raise ValueError("LLR lengths must equal block_len (punctured positions carry 0)")
    m = cfg.rsc.memory
    zeros_m = np.zeros(m)
    tail_sys = zeros_m if tail_sys_llr is None else np.clip(
        np.asarray(tail_sys_llr, dtype=np.float64), -LLR_MAX, LLR_MAX)
    tail_par = zeros_m if tail_parity_llr is None else np.clip(
        np.asarray(tail_parity_llr, dtype=np.float64), -LLR_MAX, LLR_MAX)
    if len(tail_sys) != m or len(tail_par) != m:
        raise ValueError("tail LLR length must equal the encoder memory")
    n_iter = cfg.iterations if iterations is None else iterations
    if n_iter < 1:
        raise ValueError("iterations must be >= 1")

    perm = make_interleaver(k, cfg.interleaver_seed)
    inv = np.argsort(perm)
    spec = cfg.rsc
    use_max = cfg.algorithm == MAX_LOG_MAP
    tr = _trellis(spec.constraint_length, spec.feedback_poly, spec.feedforward_poly)

    sys1_full = np.concatenate([sys_llr, tail_sys])
    par1_full = np.concatenate([parity1_llr, tail_par])
    sys2 = sys_llr[perm]
    apr_tail = np.zeros(m)

    apriori1 = np.zeros(k)
    prev_hard: np.ndarray | None = None
    hard = np.zeros(k, dtype=np.uint8)
    converged = False
    used = 0
    for it in range(n_iter):
        used = it + 1
        post1 = _bcjr_kernel(sys1_full, par1_full, np.concatenate([apriori1, apr_tail]),
                             tr.next_state, tr.out_parity, tr.pred_state, tr.pred_input,
                             k, True, use_max)
        ext1 = np.clip((post1 - sys_llr - apriori1) * cfg.extrinsic_scale, -LLR_MAX, LLR_MAX)
        apriori2 = ext1[perm]
        post2 = _bcjr_kernel(sys2, parity2_llr, apriori2,
                             tr.next_state, tr.out_parity, tr.pred_state, tr.pred_input,
                             k, False, use_max)
        ext2 = np.clip((post2 - sys2 - apriori2) * cfg.extrinsic_scale, -LLR_MAX, LLR_MAX)
        apriori1 = ext2[inv]
        hard = (post2[inv] < 0).astype(np.uint8)
        if early_stop and prev_hard is not None and np.array_equal(hard, prev_hard):
            converged = True
            break
        prev_hard = hard
    return TurboDecodeResult(bits=hard, iterations_used=used, converged=converged)
