"""Adaptive ML symbol-timing recovery for IEEE 802.15.6 narrowband frames."""

__version__ = "0.1.0"

from .frame import FrameBits, FrameLayout, Modulation, RegionKind, build_frame_bits, generate_m_sequence, region_of
from .mapping import SymbolStream, hard_demap_dbpsk, hard_demap_dqpsk, map_stream
from .waveform import (MatchedFilterBank, PulseShape, ReceivedSignal, add_noise, differential_observable,
                       matched_filter, observable_derivative, sample_at, shape, srrc_taps)
from .demapper import PriorLLRs, SoftIncrement, saturating_tanh, soft_increment_dbpsk, soft_increment_dqpsk
from .synchronizer import LoopConfig, Mode, TimingTrajectory, run_loop, s_curve, step, timing_error
from .crb import crb_reference

__all__ = [
    "FrameBits", "FrameLayout", "Modulation", "RegionKind", "build_frame_bits", "generate_m_sequence",
    "region_of", "SymbolStream", "hard_demap_dbpsk", "hard_demap_dqpsk", "map_stream",
    "MatchedFilterBank", "PulseShape", "ReceivedSignal", "add_noise", "differential_observable",
    "matched_filter", "observable_derivative", "sample_at", "shape", "srrc_taps", "PriorLLRs",
    "SoftIncrement", "saturating_tanh", "soft_increment_dbpsk", "soft_increment_dqpsk",
    "LoopConfig", "Mode", "TimingTrajectory", "run_loop", "s_curve", "step", "timing_error",
    "crb_reference",
]
