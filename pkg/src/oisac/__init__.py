"""Two-phase LED optical integrated sensing and communication simulator."""

from .geometry import (
    CameraOffsets,
    ConfigError,
    DegenerateDepthError,
    Pose,
    Scenario,
    build_default_poses,
    load_scenario,
    scenario_from_dict,
)
from .channel import (
    ChannelState,
    RadiationPattern,
    compute_channel_state,
    lambert_mode,
    lambertian_pattern,
    received_intensity,
    reflected_intensity,
    superposed_intensity,
)

__version__ = "0.1.0"

__all__ = [
    "CameraOffsets",
    "ChannelState",
    "ConfigError",
    "DegenerateDepthError",
    "Pose",
    "RadiationPattern",
    "Scenario",
    "build_default_poses",
    "compute_channel_state",
    "lambert_mode",
    "lambertian_pattern",
    "load_scenario",
    "received_intensity",
    "reflected_intensity",
    "scenario_from_dict",
    "superposed_intensity",
    "__version__",
]
