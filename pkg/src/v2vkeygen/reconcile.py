"""Code-based information reconciliation and privacy amplification.

Side-information construction: Bob turbo-encodes his quantized block and
discloses only the parity streams plus the termination tail, never the
systematic bits, together with a short digest of the block.  Alice
decodes her own correlated block against the disclosed parity (public
channel, error free) with her bits as noisy systematic observations;
the digest decides whether she converged to Bob's block.

Privacy amplification compresses verified material through a binary
Toeplitz-matrix universal hash.  The digest is a fixed 64-bit
non-cryptographic check for simulation bookkeeping, not a security
primitive.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .quantize import BitString
from .rng import substream
from .turbo import (
    LLR_MAX,
    TurboConfig,
    bits_to_llr,
    puncture_masks,
    turbo_decode,
    turbo_encode,
)

__all__ = [
    "DIGEST_BITS",
    "ReconciliationFailed",
    "ReconciliationMessage",
    "KeyMaterial",
    "digest64",
    "bob_prepare",
    "alice_reconcile",
    "toeplitz_hash",
    "privacy_amplify",
    "verify_keys",
]

DIGEST_BITS = 64


class ReconciliationFailed(Exception):
    """Digest mismatch after decoding; carries the (corrupt) decoded bits."""

    def __init__(self, message: str, decoded: np.ndarray):
        super().__init__(message)
        self.decoded = decoded


def _bit_array(bits) -> np.ndarray:
    arr = np.asarray(getattr(bits, "bits", bits), dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit sequences must be one-dimensional")
    if arr.size and arr.max() > 1:
        raise ValueError("bit values must be 0 or 1")
    return arr


def digest64(bits) -> bytes:
    """64-bit digest of a bit sequence (length-prefixed, MSB-first packing)."""
    arr = _bit_array(bits)
    payload = struct.pack(">Q", arr.size) + np.packbits(arr).tobytes()
    return hashlib.blake2b(payload, digest_size=DIGEST_BITS // 8).digest()


@dataclass(frozen=True)
class ReconciliationMessage:
    """Public disclosure for one block: parity payload and block digest."""

    block_id: int
    parity_payload: np.ndarray  # parity1 || parity2 || tail, post-puncturing
    interleaver_seed: int
    check_value: bytes

    def __post_init__(self):
        object.__setattr__(self, "parity_payload", _bit_array(self.parity_payload))
        if len(self.check_value) != DIGEST_BITS // 8:
            raise ValueError("check_value must be 8 bytes")
        if not 0 <= self.block_id < 2 ** 32:
            raise ValueError("block_id must fit 4 bytes")

    def to_bytes(self) -> bytes:
        """Fixed wire layout: block_id u32 BE | seed u64 BE | payload bit
        count u32 BE | payload packed MSB-first | check_value (8 bytes)."""
        packed = np.packbits(self.parity_payload).tobytes()
        return (struct.pack(">I", self.block_id)
                + struct.pack(">Q", self.interleaver_seed & 0xFFFFFFFFFFFFFFFF)
                + struct.pack(">I", self.parity_payload.size)
                + packed
                + self.check_value)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ReconciliationMessage":
        if len(blob) < 24:
            raise ValueError("message too short")
        block_id = struct.unpack(">I", blob[0:4])[0]
        seed = struct.unpack(">Q", blob[4:12])[0]
        n_bits = struct.unpack(">I", blob[12:16])[0]
        n_bytes = (n_bits + 7) // 8
        if len(blob) != 16 + n_bytes + DIGEST_BITS // 8:
            raise ValueError("message length inconsistent with payload bit count")
        payload = np.unpackbits(
            np.frombuffer(blob[16:16 + n_bytes], dtype=np.uint8), count=n_bits)
        return cls(block_id=block_id, parity_payload=payload,
                   interleaver_seed=seed, check_value=blob[16 + n_bytes:])


@dataclass
class KeyMaterial:
    """Reconciled bits plus the public-disclosure tally backing them."""

    bits: BitString
    leaked_bits: int
    verified: bool = False

    def __post_init__(self):
        if not isinstance(self.bits, BitString):
            self.bits = BitString(self.bits)
        if self.leaked_bits < 0:
            raise ValueError("leaked_bits must be >= 0")


def bob_prepare(cfg: TurboConfig, bob_bits, block_id: int = 0) -> ReconciliationMessage:
    """Encode Bob's block; disclose parity, tail and a digest of the block."""
    arr = _bit_array(bob_bits)
    if len(arr) != cfg.block_len:
        raise ValueError(f"block length mismatch: got {len(arr)}, expected {cfg.block_len}")
    cw = turbo_encode(cfg, arr)
    payload = np.concatenate([cw.parity1, cw.parity2, cw.tail])
    return ReconciliationMessage(block_id=block_id, parity_payload=payload,
                                 interleaver_seed=cfg.interleaver_seed,
                                 check_value=digest64(arr))


def alice_reconcile(cfg: TurboConfig, alice_bits, msg: ReconciliationMessage,
                    p_hat: float) -> KeyMaterial:
    """Decode Bob's block from Alice's correlated bits and the parity payload.

    Alice's bits enter as systematic LLRs at the estimated crossover
    ``p_hat``; disclosed parity bits get +-LLR_MAX (the public channel is
    error free) and punctured positions 0.  Success requires the decoded
    digest to match; failure raises ReconciliationFailed so the caller
    can discard the block.
    """
    arr = _bit_array(alice_bits)
    if len(arr) != cfg.block_len:
        raise ValueError(f"block length mismatch: got {len(arr)}, expected {cfg.block_len}")
    if not 0 < p_hat < 0.5:
        raise ValueError("p_hat must be in (0, 0.5)")
    mask1, mask2 = puncture_masks(cfg)
    n1 = int(mask1.sum())
    n2 = int(mask2.sum())
    m = cfg.rsc.memory
    expected = n1 + n2 + 2 * m
    if msg.parity_payload.size != expected:
        raise ValueError(f"payload length {msg.parity_payload.size} != expected {expected}")

    run_cfg = cfg if msg.interleaver_seed == cfg.interleaver_seed else \
        TurboConfig(cfg.rsc, cfg.block_len, msg.interleaver_seed, cfg.puncture,
                    cfg.iterations, cfg.algorithm, cfg.extrinsic_scale)

    hard = lambda bits: np.where(np.asarray(bits) == 0, LLR_MAX, -LLR_MAX)
    p1 = msg.parity_payload[:n1]
    p2 = msg.parity_payload[n1:n1 + n2]
    tail = msg.parity_payload[n1 + n2:]
    parity1_llr = np.zeros(cfg.block_len)
    parity1_llr[mask1] = hard(p1)
    parity2_llr = np.zeros(cfg.block_len)
    parity2_llr[mask2] = hard(p2)

    result = turbo_decode(run_cfg, bits_to_llr(arr, p_hat), parity1_llr, parity2_llr,
                          tail_sys_llr=hard(tail[:m]), tail_parity_llr=hard(tail[m:]))
    leaked = msg.parity_payload.size + DIGEST_BITS
    if digest64(result.bits) != msg.check_value:
        raise ReconciliationFailed(
            f"reconciliation failed: digest mismatch on block {msg.block_id}",
            decoded=result.bits)
    return KeyMaterial(bits=BitString(result.bits), leaked_bits=leaked, verified=True)


def toeplitz_hash(bits, seed: int, out_len: int) -> np.ndarray:
    """Binary Toeplitz matrix-vector product over GF(2).

    The matrix is defined by n+out_len-1 seed-derived bits; output bit i
    is the parity of sum_j T[i,j]*bits[j] with T[i,j] = r[n-1+i-j].
    """
    arr = _bit_array(bits)
    if out_len < 0:
        raise ValueError("out_len must be >= 0")
    if out_len == 0:
        return np.empty(0, dtype=np.uint8)
    if arr.size == 0:
        raise ValueError("cannot hash an empty bit sequence")
    diag = substream(seed, "toeplitz").integers(0, 2, arr.size + out_len - 1, dtype=np.uint8)
    conv = np.convolve(arr.astype(np.int64), diag.astype(np.int64))
    return (conv[arr.size - 1:arr.size - 1 + out_len] & 1).astype(np.uint8)


def privacy_amplify(km: KeyMaterial, seed: int, out_len: int) -> BitString:
    """Compress verified key material, honouring the leakage margin.

    The output length may not exceed |bits| - leaked_bits; requesting
    more raises, because the disclosed information could cover the whole
    output.
    """
    if not km.verified:
        raise ValueError("key material must be verified before amplification")
    margin = len(km.bits) - km.leaked_bits
    if out_len > margin:
        raise ValueError(
            f"insufficient residual entropy: requested {out_len} bits, "
            f"margin is {max(margin, 0)}")
    return BitString(toeplitz_hash(km.bits, seed, out_len))


def verify_keys(a, b) -> bool:
    """True iff the two bit strings match in length and content."""
    arr_a = _bit_array(a)
    arr_b = _bit_array(b)
    return arr_a.shape == arr_b.shape and bool(np.array_equal(arr_a, arr_b))
