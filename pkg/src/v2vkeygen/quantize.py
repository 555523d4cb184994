"""Envelope quantization: lossy excursion indexing and lossless single threshold.

Two quantizers are provided.

Dual-threshold lossy ("indexing") scheme: runs of at least m successive
envelope samples strictly above q+ (bit 1) or strictly below q- (bit 0)
form excursions; samples inside [q-, q+] are discarded.  Alice announces
the center indices of a random subset of her excursions; Bob keeps those
whose m-sample window in his own envelope lies entirely beyond the same
threshold, and returns the surviving list.  Both sides then quantize
their own sample at each surviving index, so the exchange doubles as
information reconciliation.

Single-threshold lossless scheme: every sample maps to a bit against the
envelope median, feeding the code-based reconciliation path.

Thresholds are refreshed once a configurable number of coherence regions
has elapsed, or sooner when the correlation between consecutive
normalized Doppler spectra

    rho(X, Y) = cov(X, Y) / (sigma_X * sigma_Y)

drops below a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "DUAL_LOSSY",
    "SINGLE_LOSSLESS",
    "Thresholds",
    "Excursion",
    "BitString",
    "DopplerSpectrum",
    "IndexingResult",
    "compute_thresholds",
    "find_excursions",
    "index_reconcile",
    "quantize_lossless",
    "doppler_spectrum",
    "doppler_correlation",
    "refresh_due",
]

DUAL_LOSSY = "dual-lossy"
SINGLE_LOSSLESS = "single-lossless"


@dataclass(frozen=True)
class Thresholds:
    mode: str
    q_minus: float | None = None
    q_plus: float | None = None
    q_single: float | None = None
    gamma: float = 0.0
    window_id: int = 0

    def __post_init__(self):
        if self.mode not in (DUAL_LOSSY, SINGLE_LOSSLESS):
            raise ValueError(f"unknown threshold mode {self.mode!r}")
        if self.mode == DUAL_LOSSY:
            if self.q_minus is None or self.q_plus is None:
                raise ValueError("dual-lossy thresholds need q_minus and q_plus")
            if self.q_minus > self.q_plus:
                raise ValueError("q_minus must not exceed q_plus")
        elif self.q_single is None:
            raise ValueError("single-lossless thresholds need q_single")


@dataclass(frozen=True)
class Excursion:
    """Maximal run of >= m samples beyond one threshold; yields one bit."""

    i_start: int
    i_end: int
    bit: int
    i_center: int

    def __post_init__(self):
        if self.i_end < self.i_start:
            raise ValueError("i_end before i_start")
        if self.bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        if self.i_center != (self.i_start + self.i_end) // 2:
            raise ValueError("i_center must be floor((i_start+i_end)/2)")


def _as_bit_array(bits) -> np.ndarray:
    arr = np.asarray(bits.bits if isinstance(bits, BitString) else bits)
    arr = arr.astype(np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit sequences must be one-dimensional")
    if arr.size and arr.max() > 1:
        raise ValueError("bit values must be 0 or 1")
    return arr


@dataclass
class BitString:
    """Binary sequence plus, optionally, the trace index behind each bit."""

    bits: np.ndarray
    source_indices: np.ndarray | None = None

    def __post_init__(self):
        self.bits = _as_bit_array(self.bits)
        if self.source_indices is not None:
            self.source_indices = np.asarray(self.source_indices, dtype=np.int64)
            if len(self.source_indices) != len(self.bits):
                raise ValueError("source_indices length must match bits")

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class DopplerSpectrum:
    """Periodogram bins treated as a probability distribution when normalized."""

    bins: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "bins", np.asarray(self.bins, dtype=np.float64))
        if np.any(self.bins < 0):
            raise ValueError("spectrum bins must be non-negative")
        if self.normalized and len(self.bins) and not np.isclose(self.bins.sum(), 1.0):
            raise ValueError("normalized spectrum must sum to 1")


class IndexingResult(NamedTuple):
    bits_a: BitString
    bits_b: BitString
    l_b: np.ndarray
    discarded: int


def compute_thresholds(env, gamma: float, mode: str, window_id: int = 0) -> Thresholds:
    """Threshold levels for one refresh window.

    Dual-lossy: q+- = mean(env) +- gamma*std(env).  Single-lossless:
    the window median, which balances zeros and ones by construction.
    """
    env = np.asarray(env, dtype=np.float64)
    if env.size == 0:
        raise ValueError("envelope is empty")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if mode == DUAL_LOSSY:
        std = float(env.std())
        if std == 0.0:
            raise ValueError("degenerate envelope: zero standard deviation")
        mean = float(env.mean())
        return Thresholds(mode=mode, q_minus=mean - gamma * std,
                          q_plus=mean + gamma * std, gamma=gamma, window_id=window_id)
    if mode == SINGLE_LOSSLESS:
        return Thresholds(mode=mode, q_single=float(np.median(env)),
                          gamma=gamma, window_id=window_id)
    raise ValueError(f"unknown threshold mode {mode!r}")


def find_excursions(env, th: Thresholds, m: int) -> list[Excursion]:
    """Maximal runs of >= m consecutive samples strictly beyond one threshold.

    Samples inside [q-, q+] (boundary included) break runs and are
    discarded.  Each excursion carries its center index
    floor((i_start + i_end) / 2).
    """
    if th.mode != DUAL_LOSSY:
        raise ValueError("excursions need dual-lossy thresholds")
    if m < 1:
        raise ValueError("m must be >= 1")
    env = np.asarray(env, dtype=np.float64)
    state = np.zeros(env.shape, dtype=np.int8)
    state[env > th.q_plus] = 1
    state[env < th.q_minus] = -1
    out: list[Excursion] = []
    n = len(state)
    i = 0
    while i < n:
        s = state[i]
        if s == 0:
            i += 1
            continue
        j = i
        while j + 1 < n and state[j + 1] == s:
            j += 1
        if j - i + 1 >= m:
            out.append(Excursion(i_start=i, i_end=j, bit=1 if s == 1 else 0,
                                 i_center=(i + j) // 2))
        i = j + 1
    return out


def _quantize_outside(value: float, th: Thresholds) -> int | None:
    if value > th.q_plus:
        return 1
    if value < th.q_minus:
        return 0
    return None


def index_reconcile(alice_env, bob_env, th: Thresholds, m: int,
                    fraction: float = 1.0,
                    rng: np.random.Generator | None = None) -> IndexingResult:
    """Excursion indexing exchange over a pair of envelopes.

    Alice finds her excursions, keeps a random subset (``fraction`` of
    them) and announces the center indices.  Bob verifies each index by
    checking that his m samples centered there fall entirely beyond the
    same pair of thresholds, and announces the surviving indices; both
    sides quantize their own sample at each surviving index.
    """
    alice_env = np.asarray(alice_env, dtype=np.float64)
    bob_env = np.asarray(bob_env, dtype=np.float64)
    if alice_env.shape != bob_env.shape:
        raise ValueError("envelope length mismatch")
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must be in [0, 1]")

    excursions = find_excursions(alice_env, th, m)
    if fraction < 1.0 and excursions:
        if rng is None:
            raise ValueError("a random stream is required when fraction < 1")
        keep = round(fraction * len(excursions))
        chosen = sorted(rng.choice(len(excursions), size=keep, replace=False))
        excursions = [excursions[i] for i in chosen]
    l_a = [e.i_center for e in excursions]

    half_lo = (m - 1) // 2
    half_hi = m // 2
    n = len(bob_env)
    l_b: list[int] = []
    bits_a: list[int] = []
    bits_b: list[int] = []
    for idx in l_a:
        lo, hi = idx - half_lo, idx + half_hi
        if lo < 0 or hi >= n:
            continue
        window = bob_env[lo:hi + 1]
        if np.all(window > th.q_plus):
            bob_bit = 1
        elif np.all(window < th.q_minus):
            bob_bit = 0
        else:
            continue
        alice_bit = _quantize_outside(alice_env[idx], th)
        l_b.append(idx)
        bits_a.append(alice_bit)
        bits_b.append(bob_bit)

    l_b_arr = np.asarray(l_b, dtype=np.int64)
    return IndexingResult(
        bits_a=BitString(np.asarray(bits_a, dtype=np.uint8), l_b_arr.copy()),
        bits_b=BitString(np.asarray(bits_b, dtype=np.uint8), l_b_arr),
        l_b=l_b_arr,
        discarded=len(l_a) - len(l_b),
    )


def quantize_lossless(env, th: Thresholds) -> BitString:
    """One bit per sample against the single threshold (>= maps to 1)."""
    if th.mode != SINGLE_LOSSLESS:
        raise ValueError("lossless quantization needs a single threshold")
    env = np.asarray(env, dtype=np.float64)
    bits = (env >= th.q_single).astype(np.uint8)
    return BitString(bits, np.arange(len(env), dtype=np.int64))


def doppler_spectrum(samples) -> DopplerSpectrum:
    """Normalized periodogram of a complex probe window."""
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.size == 0:
        raise ValueError("window is empty")
    bins = np.abs(np.fft.fft(samples)) ** 2
    total = bins.sum()
    if total == 0:
        raise ValueError("flat spectrum: all-zero window")
    return DopplerSpectrum(bins=bins / total, normalized=True)


def doppler_correlation(x: DopplerSpectrum, y: DopplerSpectrum) -> float:
    """Pearson correlation of two normalized Doppler spectra on one grid."""
    if not (x.normalized and y.normalized):
        raise ValueError("spectra must be normalized")
    if len(x.bins) != len(y.bins):
        raise ValueError("spectra must share one frequency grid")
    xs, ys = x.bins, y.bins
    sx, sy = xs.std(), ys.std()
    if sx == 0 or sy == 0:
        raise ValueError("flat spectrum: zero variance")
    cov = float(np.mean((xs - xs.mean()) * (ys - ys.mean())))
    return cov / (sx * sy)


def refresh_due(windows_elapsed: int, rho: float, rho_threshold: float,
                region_budget: int) -> bool:
    """True when thresholds must be recomputed: the coherence-region
    budget is spent, or the Doppler spectra decorrelated."""
    if region_budget < 1:
        raise ValueError("region_budget must be >= 1")
    return windows_elapsed >= region_budget or rho < rho_threshold
