"""Physical-layer secret key generation over simulated V2V channels.

Library layout mirrors the pipeline: ``channel`` synthesizes the fading
process, ``reciprocity`` models and compensates the Alice/Bob
discrepancy, ``quantize`` turns envelopes into bits, ``turbo`` provides
the codec, ``reconcile`` runs parity-disclosure reconciliation plus
privacy amplification, ``metrics`` scores the result and ``harness``
drives whole sessions, sweeps and the CLI.
"""

from .channel import (
    ChannelTrace,
    DopplerBounds,
    MultipathComponent,
    V2VChannelParams,
    default_scenario,
    doppler_bounds,
    draw_components,
    envelope,
    sample_scatterer_speed,
    synthesize_trace,
    weibull_speed_percentile,
)
from .harness import (
    ExperimentConfig,
    QuantPolicy,
    emit_comparison,
    experiment_config_from_options,
    run_session,
    run_sweep,
)
from .metrics import (
    BlockOutcome,
    SessionReport,
    empirical_entropy,
    entropy_per_bit,
    estimate_pe,
    measure_bmr,
    measure_kgr,
    mismatch_prob,
    secret_bit_rate,
)
from .quantize import (
    BitString,
    DopplerSpectrum,
    Excursion,
    Thresholds,
    compute_thresholds,
    doppler_correlation,
    doppler_spectrum,
    find_excursions,
    index_reconcile,
    quantize_lossless,
    refresh_due,
)
from .reconcile import (
    KeyMaterial,
    ReconciliationFailed,
    ReconciliationMessage,
    alice_reconcile,
    bob_prepare,
    privacy_amplify,
    verify_keys,
)
from .reciprocity import (
    DiscrepancyEstimate,
    NonReciprocityModel,
    compensate,
    derive_alice_trace,
    estimate_discrepancy,
)
from .rng import derive_seed, substream
from .turbo import (
    LLR_MAX,
    RscSpec,
    TurboConfig,
    bcjr_decode,
    bits_to_llr,
    make_interleaver,
    rsc_encode,
    turbo_decode,
    turbo_encode,
)

__version__ = "0.1.0"
