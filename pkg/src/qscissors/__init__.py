"""Generalized n-photon quantum scissors for tele-amplification and relays."""

__version__ = "0.1.0"

from .fock import (  # noqa: E402
    DensityOperator,
    FockVector,
    MultimodeState,
    TruncationError,
    cat_state,
    coherent_state,
    smsv_state,
    state_fidelity,
    tmsv_state,
)
from .scissors import ScissorConfig, nqs_output, truncation_fidelity, x10_output  # noqa: E402
from .channels import RelayConfig, relay_output_rho  # noqa: E402
from .imperfections import DeviceProfile, simulate_noisy_nqs, simulate_noisy_relay  # noqa: E402

__all__ = [
    "DensityOperator",
    "DeviceProfile",
    "FockVector",
    "MultimodeState",
    "RelayConfig",
    "ScissorConfig",
    "TruncationError",
    "cat_state",
    "coherent_state",
    "nqs_output",
    "relay_output_rho",
    "simulate_noisy_nqs",
    "simulate_noisy_relay",
    "smsv_state",
    "state_fidelity",
    "tmsv_state",
    "truncation_fidelity",
    "x10_output",
]
