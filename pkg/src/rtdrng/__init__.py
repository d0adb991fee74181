"""rtdrng: a simulated tunnelling-diode true random number generator.

Pipeline: stochastic device switching under current pulses -> bit
acquisition -> optional bias feedback -> two-universal randomness
extraction -> SP 800-22 statistical validation.
"""

from .bits import BitStream, concat_streams, read_bits, write_bits
from .config import PipelineConfig, default_config, load_config
from .control import ControllerState, controller_update, default_controller, run_closed_loop
from .device import (
    Branch,
    BranchRangeError,
    DeviceParams,
    DeviceState,
    SweepTrace,
    branch_voltage,
    drift_step,
    iv_current,
    step_device,
    sweep_current,
    switching_hazard,
)
from .extractor import (
    ExtractorConfig,
    InsufficientEntropyError,
    choose_block_params,
    derive_seed,
    extract,
    min_entropy_estimate,
    seeded_hash_block,
)
from .pulses import (
    PulseConfig,
    PulseTrace,
    acquire_bits,
    h_fraction_histogram,
    run_pulse,
    trace_pulses,
    window_fractions,
)

__version__ = "0.1.0"

__all__ = [
    "BitStream",
    "concat_streams",
    "read_bits",
    "write_bits",
    "PipelineConfig",
    "default_config",
    "load_config",
    "ControllerState",
    "controller_update",
    "default_controller",
    "run_closed_loop",
    "Branch",
    "BranchRangeError",
    "DeviceParams",
    "DeviceState",
    "SweepTrace",
    "branch_voltage",
    "drift_step",
    "iv_current",
    "step_device",
    "sweep_current",
    "switching_hazard",
    "ExtractorConfig",
    "InsufficientEntropyError",
    "choose_block_params",
    "derive_seed",
    "extract",
    "min_entropy_estimate",
    "seeded_hash_block",
    "PulseConfig",
    "PulseTrace",
    "acquire_bits",
    "h_fraction_histogram",
    "run_pulse",
    "trace_pulses",
    "window_fractions",
    "__version__",
]
