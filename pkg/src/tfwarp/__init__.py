"""Time-frequency warped multicarrier waveform: design, transceiver and evaluation."""

from .channel import AciScenario, ChannelModel, apply_awgn, apply_multipath, compose_aci, derive_seed
from .metrics import (CcdfCurve, PsdEstimate, estimate_psd, oobe_metric, papr_ccdf, papr_db,
                      qam_ser_awgn, symbol_error_rate)
from .pulse import ConcentrationReport, rc_amplitude, rc_spectrum, solve_alpha, solve_alphas, time_concentration
from .transceiver import (Constellation, SampleBuffer, SymbolFrame, WaveformConfig, amplitude_equalization,
                          channel_frequency_response, demodulate, fde, modulate)
from .warping import (ConfigurationError, DiscreteWarpGrid, WarpKind, WarpSpec, build_discrete_grid,
                      eval_inverse, eval_w, eval_wdot)

__version__ = "0.1.0"
