"""End-to-end key-generation sessions, parameter sweeps and comparisons.

One session synthesizes Bob's channel, derives Alice's view through the
non-reciprocity model, spends a calibration prefix on discrepancy
estimation and compensation, then walks the remaining trace in refresh
windows of ``region_budget`` coherence regions.  Each window gets fresh
thresholds; the configured scheme(s) turn envelope windows into bits:

  indexing   dual-threshold excursions, center-index exchange, digest
             verified chunks of key_len+64 bits, Toeplitz-compressed to
             key_len (the 64-bit digest is the only disclosure).
  turbo      single-threshold lossless bits, blocked to the code length;
             Bob disclosed parity+digest, Alice decodes, verified blocks
             are whitened into key_len-bit keys.

Both schemes consume byte-identical traces when run together, so their
BMR/KGR comparison is paired.  The indexing branch reports the segment
discard ratio as its BMR (discarded candidates over announced
candidates); the turbo branch reports the raw post-thresholding
mismatch, plus the residual mismatch after decoding as a separate
field.  KGR always counts verified keys per simulated minute.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .channel import (
    ChannelTrace,
    V2VChannelParams,
    default_scenario,
    doppler_bounds,
    draw_components,
    envelope,
    synthesize_trace,
)
from .metrics import (
    BlockOutcome,
    SessionReport,
    empirical_entropy,
    measure_bmr,
    measure_kgr,
    secret_bit_rate,
)
from .quantize import (
    DUAL_LOSSY,
    SINGLE_LOSSLESS,
    BitString,
    compute_thresholds,
    doppler_correlation,
    doppler_spectrum,
    index_reconcile,
    quantize_lossless,
    refresh_due,
)
from .reconcile import (
    DIGEST_BITS,
    KeyMaterial,
    ReconciliationFailed,
    alice_reconcile,
    bob_prepare,
    digest64,
    privacy_amplify,
    toeplitz_hash,
)
from .reciprocity import (
    NonReciprocityModel,
    apply_measurement_noise,
    compensate,
    derive_alice_trace,
    estimate_discrepancy,
)
from .rng import derive_seed, substream
from .turbo import TurboConfig

__all__ = [
    "QuantPolicy",
    "ExperimentConfig",
    "CSV_COLUMNS",
    "SCHEME_INDEXING",
    "SCHEME_TURBO",
    "run_session",
    "run_sweep",
    "emit_comparison",
    "ComparisonResult",
    "experiment_config_from_options",
    "read_results_csv",
    "rows_to_csv_text",
]

SCHEME_INDEXING = "indexing"
SCHEME_TURBO = "turbo"
SCHEME_BOTH = "both"


@dataclass(frozen=True)
class QuantPolicy:
    """Quantizer knobs shared by both schemes plus the refresh policy."""

    gamma: float = 0.35
    m: int = 5
    fraction: float = 1.0
    rho_threshold: float = 0.9
    region_budget: int = 10

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0 <= self.fraction <= 1:
            raise ValueError("fraction must be in [0, 1]")
        if self.region_budget < 1:
            raise ValueError("region_budget must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    channel: V2VChannelParams = field(default_factory=default_scenario)
    nr: NonReciprocityModel = field(default_factory=NonReciprocityModel)
    quant: QuantPolicy = field(default_factory=QuantPolicy)
    turbo: TurboConfig = field(default_factory=TurboConfig)
    key_len: int = 128
    scheme: str = SCHEME_BOTH
    master_seed: int = 1
    trials: int = 1
    simulated_minutes: float = 1.0
    calibration_samples: int = 256

    def __post_init__(self):
        if self.key_len < 1:
            raise ValueError("key_len must be >= 1")
        if self.scheme not in (SCHEME_INDEXING, SCHEME_TURBO, SCHEME_BOTH):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.simulated_minutes <= 0:
            raise ValueError("simulated_minutes must be > 0")
        if self.calibration_samples < 2:
            raise ValueError("calibration needs at least two probe pairs")

    def fingerprint(self) -> str:
        return hashlib.sha256(repr(self).encode("utf-8")).hexdigest()[:16]


def experiment_config_from_options(options: dict[str, Any]) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed flat-config dict."""
    from .turbo import RscSpec

    channel = V2VChannelParams(
        n_paths=options["channel.paths"],
        fc_hz=options["channel.carrier_hz"],
        wave_speed=options["channel.wave_speed"],
        u_t_max=options["channel.u_t_max"],
        u_r_max=options["channel.u_r_max"],
        azimuth_t=options["channel.azimuth_t"],
        azimuth_r=options["channel.azimuth_r"],
        elevation_t=options["channel.elevation_t"],
        elevation_r=options["channel.elevation_r"],
        weibull_b=options["channel.weibull_b"],
        weibull_w=options["channel.weibull_w"],
        u_s_max=options["channel.u_s_max"],
        normalization=options["channel.normalization"],
        probe_rate_factor=options["channel.probe_rate_factor"],
        n_samples=options["channel.n_samples"],
    )
    nr = NonReciprocityModel(
        sigma2_true=options["nr.sigma2"],
        mu_true=complex(options["nr.mu_real"], options["nr.mu_imag"]),
        snr_db=options["nr.snr_db"],
    )
    quant = QuantPolicy(
        gamma=options["quant.gamma"],
        m=options["quant.m"],
        fraction=options["quant.fraction"],
        rho_threshold=options["quant.rho_threshold"],
        region_budget=options["quant.region_budget"],
    )
    turbo = TurboConfig(
        rsc=RscSpec(
            constraint_length=options["turbo.constraint_length"],
            feedback_poly=options["turbo.feedback_poly"],
            feedforward_poly=options["turbo.feedforward_poly"],
        ),
        block_len=options["turbo.block_len"],
        interleaver_seed=options["turbo.interleaver_seed"],
        puncture=options["turbo.puncture"],
        iterations=options["turbo.iterations"],
        algorithm=options["turbo.algorithm"],
        extrinsic_scale=options["turbo.extrinsic_scale"],
    )
    return ExperimentConfig(
        channel=channel, nr=nr, quant=quant, turbo=turbo,
        key_len=options["run.key_len"], scheme=options["run.scheme"],
        master_seed=options["run.master_seed"], trials=options["run.trials"],
        simulated_minutes=options["run.simulated_minutes"],
        calibration_samples=options["run.calibration_samples"],
    )


# --------------------------------------------------------------------------
# session internals


@dataclass
class _SessionData:
    """Everything both scheme branches share within one trial."""

    env_a: np.ndarray
    env_b: np.ndarray
    bob_complex: np.ndarray
    p_hat: float
    f_p: float
    seg_len: int
    n_total: int
    trace_digest: str


def _segment_length(cfg: ExperimentConfig) -> int:
    # one coherence region spans probe_rate_factor samples at f_P
    seg = round(cfg.quant.region_budget * cfg.channel.probe_rate_factor)
    return max(int(seg), 2)


def _prepare_session(cfg: ExperimentConfig, trial: int) -> _SessionData:
    bounds = doppler_bounds(cfg.channel)
    n_key = math.ceil(cfg.simulated_minutes * 60.0 * bounds.f_p)
    n_total = cfg.calibration_samples + n_key
    params = replace(cfg.channel, n_samples=n_total)

    comps = draw_components(params, substream(cfg.master_seed, trial, "channel"))
    bob_true = synthesize_trace(comps, bounds.f_p, n_total, params=params,
                                seed=cfg.master_seed)
    alice = derive_alice_trace(bob_true, cfg.nr,
                               substream(cfg.master_seed, trial, "nonreciprocity"))
    bob_meas = apply_measurement_noise(bob_true, cfg.nr.snr_db,
                                       substream(cfg.master_seed, trial, "noise-bob"))

    m_cal = cfg.calibration_samples
    est = estimate_discrepancy(alice.samples[:m_cal], bob_meas.samples[:m_cal])
    alice_comp = compensate(alice, est)

    env_a = envelope(alice_comp)
    env_b = envelope(bob_meas)
    p_hat = _calibration_crossover(env_a[:m_cal], env_b[:m_cal], _segment_length(cfg))

    digest = hashlib.sha256(
        alice_comp.samples.tobytes() + bob_meas.samples.tobytes()).hexdigest()[:16]
    return _SessionData(
        env_a=env_a[m_cal:], env_b=env_b[m_cal:],
        bob_complex=bob_meas.samples[m_cal:],
        p_hat=p_hat, f_p=bounds.f_p, seg_len=_segment_length(cfg),
        n_total=n_total, trace_digest=digest,
    )


def _calibration_crossover(env_a_cal, env_b_cal, seg_len: int) -> float:
    """Measured single-threshold mismatch on the calibration window.

    Uses the same windowed median quantizer as the key stream, so the
    estimate reflects what the decoder will actually face.
    """
    n = len(env_b_cal) - len(env_b_cal) % seg_len
    mismatches = 0
    total = 0
    for start in range(0, n, seg_len):
        seg_b = env_b_cal[start:start + seg_len]
        seg_a = env_a_cal[start:start + seg_len]
        th = compute_thresholds(seg_b, 0.0, SINGLE_LOSSLESS)
        bits_b = quantize_lossless(seg_b, th).bits
        bits_a = quantize_lossless(seg_a, th).bits
        mismatches += int(np.sum(bits_a != bits_b))
        total += seg_len
    if total == 0:
        return 0.01
    floor = 1.0 / (2.0 * total)
    return float(min(max(mismatches / total, floor), 0.49))


def _iter_segments(data: _SessionData, cfg: ExperimentConfig):
    """Yield (window_id, slice) for each refresh window, tracking the
    Doppler-correlation refresh criterion alongside the region budget."""
    seg = data.seg_len
    n = len(data.env_b) - len(data.env_b) % seg
    prev_spectrum = None
    window_id = 0
    for start in range(0, n, seg):
        sl = slice(start, start + seg)
        try:
            spectrum = doppler_spectrum(data.bob_complex[sl])
            rho = 1.0 if prev_spectrum is None else doppler_correlation(prev_spectrum, spectrum)
            prev_spectrum = spectrum
        except ValueError:
            rho = 0.0
        # by construction a whole region budget elapsed since the last refresh
        if refresh_due(cfg.quant.region_budget, rho, cfg.quant.rho_threshold,
                       cfg.quant.region_budget):
            window_id += 1
        yield window_id, sl


def _run_indexing(cfg: ExperimentConfig, trial: int, data: _SessionData) -> SessionReport:
    quant = cfg.quant
    select_rng = substream(cfg.master_seed, trial, "segment-select")
    bits_a = []
    bits_b = []
    announced = 0
    discarded = 0
    for window_id, sl in _iter_segments(data, cfg):
        seg_a = data.env_a[sl]
        seg_b = data.env_b[sl]
        try:
            th = compute_thresholds(seg_a, quant.gamma, DUAL_LOSSY, window_id)
        except ValueError:  # degenerate (constant) window: nothing to quantize
            continue
        res = index_reconcile(seg_a, seg_b, th, quant.m, quant.fraction, select_rng)
        announced += len(res.l_b) + res.discarded
        discarded += res.discarded
        bits_a.append(res.bits_a.bits)
        bits_b.append(res.bits_b.bits)

    stream_a = np.concatenate(bits_a) if bits_a else np.empty(0, dtype=np.uint8)
    stream_b = np.concatenate(bits_b) if bits_b else np.empty(0, dtype=np.uint8)

    chunk = cfg.key_len + DIGEST_BITS
    outcomes: list[BlockOutcome] = []
    leaked = 0
    keys = 0
    for i in range(len(stream_b) // chunk):
        a_chunk = stream_a[i * chunk:(i + 1) * chunk]
        b_chunk = stream_b[i * chunk:(i + 1) * chunk]
        leaked += DIGEST_BITS
        ok = digest64(a_chunk) == digest64(b_chunk)
        if ok:
            km = KeyMaterial(BitString(b_chunk), leaked_bits=DIGEST_BITS, verified=True)
            privacy_amplify(km, derive_seed(cfg.master_seed, trial, "amplify-indexing", i),
                            cfg.key_len)
            keys += 1
        outcomes.append(BlockOutcome(block_id=i, verified=ok,
                                     key_lengths=(cfg.key_len,) if ok else ()))

    sim_seconds = data.n_total / data.f_p
    p_joint = float(np.mean((stream_a == 1) & (stream_b == 1))) if len(stream_a) else 0.0
    entropy = _stream_entropy(stream_b)
    return SessionReport(
        scheme=SCHEME_INDEXING,
        key_len=cfg.key_len,
        bmr=discarded / announced if announced else float("nan"),
        kgr_keys_per_min=measure_kgr(outcomes, cfg.key_len, sim_seconds),
        entropy_per_bit_mean=entropy,
        secret_bit_rate=secret_bit_rate(data.f_p, p_joint),
        blocks_attempted=len(outcomes),
        blocks_verified=sum(o.verified for o in outcomes),
        leaked_bits_total=leaked,
        config_fingerprint=cfg.fingerprint(),
        sigma2=cfg.nr.sigma2_true,
        f_p_hz=data.f_p,
        trial=trial,
        keys_generated=keys,
        simulated_seconds=sim_seconds,
        trace_digest=data.trace_digest,
    )


def _run_turbo(cfg: ExperimentConfig, trial: int, data: _SessionData) -> SessionReport:
    quant = cfg.quant
    bits_a = []
    bits_b = []
    for window_id, sl in _iter_segments(data, cfg):
        th = compute_thresholds(data.env_b[sl], quant.gamma, SINGLE_LOSSLESS, window_id)
        bits_b.append(quantize_lossless(data.env_b[sl], th).bits)
        bits_a.append(quantize_lossless(data.env_a[sl], th).bits)
    stream_a = np.concatenate(bits_a) if bits_a else np.empty(0, dtype=np.uint8)
    stream_b = np.concatenate(bits_b) if bits_b else np.empty(0, dtype=np.uint8)

    k = cfg.turbo.block_len
    n_blocks = len(stream_b) // k
    outcomes: list[BlockOutcome] = []
    leaked = 0
    keys = 0
    post_errors = 0
    verified_chunks: list[np.ndarray] = []
    pending = np.empty(0, dtype=np.uint8)
    for b in range(n_blocks):
        bob_blk = stream_b[b * k:(b + 1) * k]
        alice_blk = stream_a[b * k:(b + 1) * k]
        msg = bob_prepare(cfg.turbo, bob_blk, block_id=b)
        leaked += msg.parity_payload.size + DIGEST_BITS
        try:
            km = alice_reconcile(cfg.turbo, alice_blk, msg, data.p_hat)
            decoded = km.bits.bits
            ok = True
        except ReconciliationFailed as fail:
            decoded = fail.decoded
            ok = False
        post_errors += int(np.sum(decoded != bob_blk))
        emitted: list[int] = []
        if ok:
            verified_chunks.append(decoded)
            pending = np.concatenate([pending, decoded])
            while len(pending) >= cfg.key_len:
                chunk, pending = pending[:cfg.key_len], pending[cfg.key_len:]
                toeplitz_hash(chunk, derive_seed(cfg.master_seed, trial, "amplify-turbo", keys),
                              cfg.key_len)
                emitted.append(cfg.key_len)
                keys += 1
        outcomes.append(BlockOutcome(block_id=b, verified=ok, key_lengths=tuple(emitted)))

    sim_seconds = data.n_total / data.f_p
    p_joint = float(np.mean((stream_a == 1) & (stream_b == 1))) if len(stream_a) else 0.0
    verified_stream = np.concatenate(verified_chunks) if verified_chunks else \
        np.empty(0, dtype=np.uint8)
    return SessionReport(
        scheme=SCHEME_TURBO,
        key_len=cfg.key_len,
        bmr=measure_bmr(stream_a, stream_b) if len(stream_a) else float("nan"),
        kgr_keys_per_min=measure_kgr(outcomes, cfg.key_len, sim_seconds),
        entropy_per_bit_mean=_stream_entropy(verified_stream),
        secret_bit_rate=secret_bit_rate(data.f_p, p_joint),
        blocks_attempted=n_blocks,
        blocks_verified=sum(o.verified for o in outcomes),
        leaked_bits_total=leaked,
        config_fingerprint=cfg.fingerprint(),
        sigma2=cfg.nr.sigma2_true,
        f_p_hz=data.f_p,
        trial=trial,
        keys_generated=keys,
        simulated_seconds=sim_seconds,
        post_reconciliation_mismatch=post_errors / (n_blocks * k) if n_blocks else float("nan"),
        trace_digest=data.trace_digest,
    )


def _stream_entropy(bits: np.ndarray, window: int = 64) -> float:
    if len(bits) < window:
        return float("nan")
    return empirical_entropy(bits, window).mean


def run_session(cfg: ExperimentConfig, trial: int) -> list[SessionReport]:
    """Run one trial; returns one report per executed scheme.

    Deterministic in (master_seed, trial): every random draw comes from a
    sub-stream derived from them.  With scheme="both" the two reports are
    computed from byte-identical traces (see ``trace_digest``).
    """
    t0 = time.perf_counter()
    data = _prepare_session(cfg, trial)
    reports: list[SessionReport] = []
    if cfg.scheme in (SCHEME_INDEXING, SCHEME_BOTH):
        reports.append(_run_indexing(cfg, trial, data))
    if cfg.scheme in (SCHEME_TURBO, SCHEME_BOTH):
        reports.append(_run_turbo(cfg, trial, data))
    wall = time.perf_counter() - t0
    for r in reports:
        r.wall_seconds = wall
    return reports


# --------------------------------------------------------------------------
# sweeps and tables

CSV_COLUMNS = [
    "point_id", "trial", "scheme", "key_len", "sigma2", "f_P_hz", "bmr",
    "kgr_keys_per_min", "entropy_mean", "secret_bit_rate",
    "blocks_attempted", "blocks_verified", "leaked_bits", "timestamp_utc",
]

_MEAN_COLUMNS = [
    "bmr", "kgr_keys_per_min", "entropy_mean", "secret_bit_rate",
    "blocks_attempted", "blocks_verified", "leaked_bits",
]


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def _report_row(report: SessionReport, point_id: str, timestamp: str) -> dict[str, Any]:
    return {
        "point_id": point_id,
        "trial": report.trial,
        "scheme": report.scheme,
        "key_len": report.key_len,
        "sigma2": report.sigma2,
        "f_P_hz": report.f_p_hz,
        "bmr": report.bmr,
        "kgr_keys_per_min": report.kgr_keys_per_min,
        "entropy_mean": report.entropy_per_bit_mean,
        "secret_bit_rate": report.secret_bit_rate,
        "blocks_attempted": report.blocks_attempted,
        "blocks_verified": report.blocks_verified,
        "leaked_bits": report.leaked_bits_total,
        "timestamp_utc": timestamp,
    }


def _aggregate_row(rows: list[dict[str, Any]], timestamp: str) -> dict[str, Any]:
    first = rows[0]
    agg = dict(first)
    agg["trial"] = "mean"
    agg["timestamp_utc"] = timestamp
    for col in _MEAN_COLUMNS:
        values = [r[col] for r in rows]
        agg[col] = float(np.nanmean(values)) if values else float("nan")
    return agg


def rows_to_csv_text(rows: Iterable[dict[str, Any]], header: bool = True) -> str:
    lines = []
    if header:
        lines.append(",".join(CSV_COLUMNS))
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def run_sweep(cfg: ExperimentConfig, sigma2_grid: Sequence[float],
              key_lens: Sequence[int], out_path: str | Path,
              plot_path: str | Path | None = None) -> list[dict[str, Any]]:
    """Run the (sigma2 x key_len) grid, streaming rows to a CSV.

    The output file is opened before any simulation so unwritable paths
    fail fast; rows are flushed after every grid point, leaving a
    parseable file even if interrupted.  One aggregate row (trial
    "mean") follows each point's data rows.
    """
    if not sigma2_grid or not key_lens:
        raise ValueError("sweep grid is empty")
    out_path = Path(out_path)
    all_rows: list[dict[str, Any]] = []
    timestamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for sigma2 in sigma2_grid:
            for key_len in key_lens:
                point_id = f"s{sigma2:g}_k{key_len}"
                point_cfg = replace(cfg, nr=replace(cfg.nr, sigma2_true=sigma2),
                                    key_len=key_len)
                point_rows: dict[str, list[dict[str, Any]]] = {}
                for trial in range(cfg.trials):
                    for report in run_session(point_cfg, trial):
                        row = _report_row(report, point_id, timestamp)
                        all_rows.append(row)
                        fh.write(",".join(_fmt(row[c]) for c in CSV_COLUMNS) + "\n")
                        point_rows.setdefault(report.scheme, []).append(row)
                for scheme in sorted(point_rows):
                    agg = _aggregate_row(point_rows[scheme], timestamp)
                    all_rows.append(agg)
                    fh.write(",".join(_fmt(agg[c]) for c in CSV_COLUMNS) + "\n")
                fh.flush()
    if plot_path is not None:
        _write_plot(all_rows, plot_path)
    return all_rows


def _write_plot(rows: list[dict[str, Any]], path: str | Path) -> None:
    """Best-effort BMR/KGR-vs-sigma2 line plots; the CSV is the contract."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        data_rows = [r for r in rows if r["trial"] == "mean"]
        fig, (ax_bmr, ax_kgr) = plt.subplots(1, 2, figsize=(9, 3.5))
        for scheme in sorted({r["scheme"] for r in data_rows}):
            pts = sorted((r["sigma2"], r["bmr"], r["kgr_keys_per_min"])
                         for r in data_rows if r["scheme"] == scheme)
            xs = [p[0] for p in pts]
            ax_bmr.plot(xs, [p[1] for p in pts], marker="o", label=scheme)
            ax_kgr.plot(xs, [p[2] for p in pts], marker="o", label=scheme)
        for ax, ylabel in ((ax_bmr, "BMR"), (ax_kgr, "keys/min")):
            ax.set_xlabel("sigma2")
            ax.set_ylabel(ylabel)
            ax.set_xscale("log")
            ax.legend()
        fig.tight_layout()
        fig.savefig(str(path))
        plt.close(fig)
    except Exception as exc:  # pragma: no cover - plotting is best-effort
        import sys
        print(f"warning: plot generation failed: {exc}", file=sys.stderr)


@dataclass
class ComparisonResult:
    rows: list[dict[str, Any]]
    text: str


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0:
        return float("inf")
    return numerator / denominator


def emit_comparison(reports: Sequence[SessionReport] | Sequence[dict[str, Any]]) -> ComparisonResult:
    """Per-key-length scheme comparison: KGR and BMR side by side.

    Accepts SessionReports or parsed CSV rows; every key length must be
    covered by both schemes at matched points, otherwise the configs are
    unmatched and an error is raised.  Ratios are turbo over indexing,
    with zero indexing KGR rendered as inf.
    """
    rows_in: list[dict[str, Any]] = []
    for item in reports:
        if isinstance(item, SessionReport):
            rows_in.append(_report_row(item, item.point_id or f"s{item.sigma2:g}", ""))
        else:
            rows_in.append(dict(item))
    if not rows_in:
        raise ValueError("no reports to compare")

    key_lens = sorted({int(r["key_len"]) for r in rows_in})
    out_rows: list[dict[str, Any]] = []
    for key_len in key_lens:
        group = [r for r in rows_in if int(r["key_len"]) == key_len]
        by_scheme: dict[str, list[dict[str, Any]]] = {}
        for r in group:
            by_scheme.setdefault(r["scheme"], []).append(r)
        missing = {SCHEME_TURBO, SCHEME_INDEXING} - set(by_scheme)
        if missing:
            raise ValueError(
                f"unmatched configs: key_len={key_len} lacks scheme(s) {sorted(missing)}")
        points_t = {(r["point_id"], r["trial"]) for r in by_scheme[SCHEME_TURBO]}
        points_i = {(r["point_id"], r["trial"]) for r in by_scheme[SCHEME_INDEXING]}
        if points_t != points_i:
            raise ValueError(f"unmatched configs: key_len={key_len} points differ between schemes")
        kgr_t = float(np.nanmean([float(r["kgr_keys_per_min"]) for r in by_scheme[SCHEME_TURBO]]))
        kgr_i = float(np.nanmean([float(r["kgr_keys_per_min"]) for r in by_scheme[SCHEME_INDEXING]]))
        bmr_t = float(np.nanmean([float(r["bmr"]) for r in by_scheme[SCHEME_TURBO]]))
        bmr_i = float(np.nanmean([float(r["bmr"]) for r in by_scheme[SCHEME_INDEXING]]))
        out_rows.append({
            "key_len": key_len,
            "kgr_turbo": kgr_t,
            "kgr_indexing": kgr_i,
            "kgr_ratio": _ratio(kgr_t, kgr_i),
            "bmr_turbo": bmr_t,
            "bmr_indexing": bmr_i,
            "bmr_ratio": _ratio(bmr_t, bmr_i),
        })

    header = (f"{'key bits':>8} {'KGR turbo':>12} {'KGR indexing':>13} "
              f"{'ratio':>8} {'BMR turbo':>10} {'BMR indexing':>13}")
    lines = [header, "-" * len(header)]
    for r in out_rows:
        lines.append(
            f"{r['key_len']:>8d} {r['kgr_turbo']:>12.3f} {r['kgr_indexing']:>13.3f} "
            f"{_fmt_ratio(r['kgr_ratio']):>8} {r['bmr_turbo']:>10.4f} "
            f"{r['bmr_indexing']:>13.4f}")
    return ComparisonResult(rows=out_rows, text="\n".join(lines))


def _fmt_ratio(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return f"{value:.2f}"


def read_results_csv(path: str | Path) -> list[dict[str, Any]]:
    """Data rows (aggregates excluded) from a sweep CSV."""
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header in {path}")
        rows = []
        for row in reader:
            if row["trial"] == "mean":
                continue
            for col in ("key_len", "blocks_attempted", "blocks_verified", "leaked_bits"):
                row[col] = int(row[col])
            for col in ("sigma2", "f_P_hz", "bmr", "kgr_keys_per_min",
                        "entropy_mean", "secret_bit_rate"):
                row[col] = float(row[col])
            rows.append(row)
    return rows
