"""Non-reciprocity model and compensation.

Within one coherence region the two directions of a reciprocal channel
agree; hardware asymmetry and noise leave a discrepancy modelled as

    G_A(t) - G_B(t) ~ N(mu, sigma^2)

Alice's view is generated from Bob's by injecting a complex offset plus
circular Gaussian discrepancy.  Both parties estimate the systematic
part from M probe pairs taken during a calibration window:

    mu_hat     = (1/M) * sum_i (G_A,i - G_B,i)
    sigma2_hat = (1/M) * sum_i |G_A,i - G_B,i - mu_hat|^2

and Alice subtracts mu_hat before quantization.  The residual variance
is not removed (it is noise, not bias); it feeds the reconciliation
stage's crossover prior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelTrace

__all__ = [
    "NonReciprocityModel",
    "DiscrepancyEstimate",
    "derive_alice_trace",
    "apply_measurement_noise",
    "estimate_discrepancy",
    "compensate",
]


@dataclass(frozen=True)
class NonReciprocityModel:
    """Injected Alice-Bob discrepancy: complex mean offset, circular
    Gaussian variance, and optional per-party measurement noise."""

    sigma2_true: float = 0.0
    mu_true: complex = 0j
    snr_db: float | None = None  # additive measurement noise, dB below channel power

    def __post_init__(self):
        if self.sigma2_true < 0:
            raise ValueError("sigma2_true must be >= 0")


@dataclass(frozen=True)
class DiscrepancyEstimate:
    mu_hat: complex
    sigma2_hat: float
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("estimate needs at least one probe pair")
        if self.sigma2_hat < 0:
            raise ValueError("sigma2_hat must be >= 0")


def _circular_noise(rng: np.random.Generator, variance: float, n: int) -> np.ndarray:
    # total variance split evenly between real and imaginary parts
    s = np.sqrt(variance / 2.0)
    return rng.normal(0.0, s, n) + 1j * rng.normal(0.0, s, n)


def derive_alice_trace(bob: ChannelTrace, model: NonReciprocityModel,
                       rng: np.random.Generator) -> ChannelTrace:
    """Alice's measured trace: bob + mu + discrepancy (+ measurement noise).

    The discrepancy d[k] is circular complex Gaussian with total variance
    ``sigma2_true``; measurement noise (when ``snr_db`` is set) is scaled
    relative to the mean power of the input trace.
    """
    n = len(bob)
    if n == 0:
        raise ValueError("bob trace is empty")
    samples = bob.samples + model.mu_true
    if model.sigma2_true > 0:
        samples = samples + _circular_noise(rng, model.sigma2_true, n)
    if model.snr_db is not None:
        power = float(np.mean(np.abs(bob.samples) ** 2))
        samples = samples + _circular_noise(rng, power * 10.0 ** (-model.snr_db / 10.0), n)
    return bob.with_samples(samples)


def apply_measurement_noise(trace: ChannelTrace, snr_db: float | None,
                            rng: np.random.Generator) -> ChannelTrace:
    """Add circular measurement noise at the given SNR; identity when None."""
    if snr_db is None:
        return trace
    power = float(np.mean(np.abs(trace.samples) ** 2))
    noise = _circular_noise(rng, power * 10.0 ** (-snr_db / 10.0), len(trace))
    return trace.with_samples(trace.samples + noise)


def estimate_discrepancy(alice_probes, bob_probes) -> DiscrepancyEstimate:
    """Mean/variance of the per-probe Alice-Bob discrepancy over M pairs."""
    a = np.asarray(alice_probes, dtype=np.complex128)
    b = np.asarray(bob_probes, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"probe length mismatch: {a.shape} vs {b.shape}")
    m = a.size
    if m == 0:
        raise ValueError("estimate needs at least one probe pair")
    diff = a - b
    mu_hat = complex(diff.mean())
    sigma2_hat = float(np.mean(np.abs(diff - mu_hat) ** 2))
    return DiscrepancyEstimate(mu_hat=mu_hat, sigma2_hat=sigma2_hat, m=m)


def compensate(alice: ChannelTrace, est: DiscrepancyEstimate) -> ChannelTrace:
    """Subtract the estimated systematic offset from Alice's trace.

    The estimate must come from a calibration window disjoint from the
    key-generation window; residual discrepancy is approximately
    zero-mean afterwards.
    """
    return alice.with_samples(alice.samples - est.mu_hat)
