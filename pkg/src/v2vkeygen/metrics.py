"""Performance metrics: entropy, extraction rate, mismatch, key rate.

Closed forms:

    H(p0)        = -p0*log2(p0) - (1-p0)*log2(1-p0)
    R_k          = 2 * f_P * p(A=1, B=1)
    P_N          = 1 - (1 - p_e)^N
    p_e          = P(B=0 | A=1)

BMR is the fraction of disagreeing positions measured right after
thresholding (a single mismatch ruins a key, so it is tracked before
any correction).  KGR counts verified, amplified keys per minute of
simulated channel time (samples / f_P), never wall-clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "SessionReport",
    "BlockOutcome",
    "EntropyResult",
    "entropy_per_bit",
    "empirical_entropy",
    "secret_bit_rate",
    "mismatch_prob",
    "estimate_pe",
    "measure_bmr",
    "measure_kgr",
]


def _bits(x) -> np.ndarray:
    arr = np.asarray(getattr(x, "bits", x), dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit sequences must be one-dimensional")
    if arr.size and arr.max() > 1:
        raise ValueError("bit values must be 0 or 1")
    return arr


def entropy_per_bit(p0: float) -> float:
    """Binary entropy of the zero-probability, in bits (0*log 0 == 0)."""
    if not 0 <= p0 <= 1:
        raise ValueError("p0 must be in [0, 1]")
    h = 0.0
    if p0 > 0:
        h -= p0 * math.log2(p0)
    if p0 < 1:
        h -= (1 - p0) * math.log2(1 - p0)
    return h


class EntropyResult(NamedTuple):
    per_window: np.ndarray
    mean: float


def empirical_entropy(bits, window: int) -> EntropyResult:
    """Plug-in entropy over disjoint windows and its mean.

    Each window contributes H(p0_hat) with p0_hat the window's zero
    fraction; trailing bits that do not fill a window are dropped.
    """
    if window < 8:
        raise ValueError("window must be >= 8")
    arr = _bits(bits)
    if arr.size < window:
        raise ValueError(f"need at least {window} bits, got {arr.size}")
    n_win = arr.size // window
    blocks = arr[:n_win * window].reshape(n_win, window)
    p0 = 1.0 - blocks.mean(axis=1)
    h = np.array([entropy_per_bit(float(p)) for p in p0])
    return EntropyResult(per_window=h, mean=float(h.mean()))


def secret_bit_rate(f_p: float, p_joint: float) -> float:
    """Secret bit extraction rate R_k = 2 * f_P * p(A=1, B=1)."""
    if f_p <= 0:
        raise ValueError("f_p must be > 0")
    if not 0 <= p_joint <= 1:
        raise ValueError("p_joint must be in [0, 1]")
    return 2.0 * f_p * p_joint


def mismatch_prob(p_e: float, n: int) -> float:
    """Probability that an N-bit string contains at least one mismatch."""
    if not 0 <= p_e <= 1:
        raise ValueError("p_e must be in [0, 1]")
    if n < 1:
        raise ValueError("N must be >= 1")
    return 1.0 - (1.0 - p_e) ** n


def estimate_pe(a, b) -> float:
    """Conditional single-bit error frequency P(B=0 | A=1)."""
    arr_a = _bits(a)
    arr_b = _bits(b)
    if arr_a.shape != arr_b.shape:
        raise ValueError("length mismatch")
    ones = arr_a == 1
    n_ones = int(ones.sum())
    if n_ones == 0:
        raise ValueError("undefined conditional: no ones in the first string")
    return float(np.sum(ones & (arr_b == 0)) / n_ones)


def measure_bmr(a, b) -> float:
    """Fraction of positions where the two bit strings differ."""
    arr_a = _bits(a)
    arr_b = _bits(b)
    if arr_a.shape != arr_b.shape or arr_a.size == 0:
        raise ValueError("bit strings must share a positive length")
    return float(np.mean(arr_a != arr_b))


@dataclass(frozen=True)
class BlockOutcome:
    """Per-block session log entry: verification flag and emitted keys."""

    block_id: int
    verified: bool
    key_lengths: tuple[int, ...] = ()


def measure_kgr(report_log: Sequence[BlockOutcome], key_len: int,
                simulated_seconds: float) -> float:
    """Verified keys of the requested length per simulated minute."""
    if simulated_seconds <= 0:
        raise ValueError("simulated_seconds must be > 0")
    n_keys = sum(
        sum(1 for length in outcome.key_lengths if length == key_len)
        for outcome in report_log if outcome.verified)
    return n_keys / (simulated_seconds / 60.0)


@dataclass
class SessionReport:
    """Per-session metrics for one scheme at one configuration point."""

    scheme: str
    key_len: int
    bmr: float
    kgr_keys_per_min: float
    entropy_per_bit_mean: float
    secret_bit_rate: float
    blocks_attempted: int
    blocks_verified: int
    leaked_bits_total: int
    config_fingerprint: str
    sigma2: float = 0.0
    f_p_hz: float = 0.0
    trial: int = 0
    point_id: str = ""
    keys_generated: int = 0
    simulated_seconds: float = 0.0
    wall_seconds: float = 0.0
    post_reconciliation_mismatch: float = float("nan")
    trace_digest: str = ""

    def __post_init__(self):
        if not (math.isnan(self.bmr) or 0.0 <= self.bmr <= 1.0):
            raise ValueError("bmr must lie in [0, 1]")
        if self.blocks_verified > self.blocks_attempted:
            raise ValueError("verified blocks cannot exceed attempted blocks")
        if not (math.isnan(self.entropy_per_bit_mean)
                or 0.0 <= self.entropy_per_bit_mean <= 1.0 + 1e-12):
            raise ValueError("entropy per bit must lie in [0, 1]")
