"""Multi-pair massive-MIMO relay link: scaling algebra, Monte Carlo link
simulation and closed-form performance approximations under imperfect CSI."""

from .model import (NetworkParams, ScalingExponents, SinrScaleReport, BindingTerm,
                    csi_quality, scaling_exponent, is_favourable,
                    is_asymptotically_deterministic, linear_sinr_condition,
                    realize_parameters)
from .channel import (trial_stream, draw_channels, mmse_estimate_pilot,
                      mmse_estimate_direct, PilotConfig)
from .linksim import (SinrComponents, SampleSet, EmpiricalStats, simulate,
                      sinr_components, instantaneous_sinr, empirical_stats,
                      amplification_factor_sq)

__version__ = "0.1.0"
