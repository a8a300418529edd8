"""Nonlinear WDM fiber simulation with subcarrier multiplexing and
mismatched-decoding achievable-information-rate estimation."""

from ._kernels import NUMBA_ENABLED, backend_name
from .air import (
    AirEstimate,
    SeResult,
    air_awgn,
    air_particle,
    air_pn_per_pol,
    estimate_gain_noise,
    estimate_walk_variances,
    export_state_track,
    fit_awgn_moments,
    spectral_efficiency,
)
from .auxch import (
    AwgnParams,
    ParticleSet,
    PnParams,
    PpnParams,
    awgn_loglik,
    cscg_output_logpdf,
    pn_emission_loglik,
    pn_sample_transition,
    pn_transition_logpdf,
    ppn_emission_loglik,
    ppn_step,
)
from .core import (
    DcfSpec,
    LinkSpec,
    RunSeed,
    SampledField,
    SymbolGrid,
    dbm_to_watts,
    power_profile,
    watts_to_dbm,
)
from .experiments import (
    ExperimentConfig,
    ResultRow,
    SweepSummary,
    desk_scale,
    export_figure_data,
    load_config,
    run_point,
    run_sweep,
)
from .fiber import (
    ASE_OFF,
    AseModel,
    SsfmControl,
    add_ase,
    convergence_self_check,
    ssfm_propagate,
)
from .rx import DemuxSpec, dbp, demux, matched_filter_bank
from .tx import TxConfig, draw_cscg_symbols, scm_modulate, wdm_multiplex

__version__ = "0.1.0"
