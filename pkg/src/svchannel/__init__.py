"""Misalignment-aware Saleh-Valenzuela channel toolkit for 60 GHz fixed uplinks.

Simulates directional channel impulse responses and power delay profiles for
outdoor-to-indoor and outdoor-to-outdoor links as a function of the total
beam misalignment angle, extracts the model parameters back out of measured
or simulated traces, and scores measured-vs-simulated agreement.
"""

from .extraction import (
    ExtractedParameters,
    InsufficientDataError,
    InvalidFitError,
    MpcSet,
    aggregate_over_bin,
    detect_mpcs,
    estimate_arrival_rates,
    extract_parameters,
    fit_cluster_decay,
    fit_ray_decay,
    segment_clusters,
)
from .geometry import (
    AngularPose,
    MisalignmentBin,
    bin_for,
    is_extrapolated,
    total_misalignment,
)
from .metrics import (
    GofReport,
    Pdp,
    correlation,
    gof_report,
    ks_statistic,
    normalize_pdp,
    rms_delay_spread,
)
from .simulator import (
    PARAMETER_REGISTRY,
    SimConfig,
    apply_shadowing,
    cir_to_pdp,
    generate_cir,
    lookup_parameters,
    realization_rng,
    simulate_pdp,
)
from .sv_core import (
    Cir,
    RayTap,
    Scenario,
    SvParameterSet,
    ray_power,
    sample_cluster_gap,
    sample_phase,
    sample_ray_gap,
)
from .traceio import (
    TraceParseError,
    read_parameter_file,
    read_pdp_trace,
    write_parameter_file,
    write_pdp_trace,
)

__version__ = "0.1.0"
