"""Uplink mmWave massive MIMO estimation lab.

Parametric channel-covariance estimation (DNN angle/spread regression plus
power readout) against MUSIC and MaxBeam baselines, evaluated through Capon
and generalized-eigen beamformers with Monte Carlo metrics.
"""

__version__ = "0.1.0"

from .scenario import Scenario, ScenarioConfig, UserTap, sample_scenario, validate_config  # noqa: F401
from .beamspace import (  # noqa: F401
    SectorPlan,
    beam_angle,
    dft_column,
    project,
    reconstruct,
    sector_plan,
    steering_vector,
)
from .ccm import Ccm, ccm_discrete, ccm_from_params, ccm_rank1, factor, sample_channel  # noqa: F401
from .airlink import PilotBook, channel_estimate, generate_pilots, matched_filter, synthesize_rx  # noqa: F401
from .neural import Mlp, TrainConfig, architectures, grad_check, mlp_new, train  # noqa: F401
