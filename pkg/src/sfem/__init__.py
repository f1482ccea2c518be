"""Episodic memory with stabilized strength dynamics and user feedback."""

from .network import NetworkConfig, NetworkInput, Polarity, SFEMNetwork, letters_network
from .strength import StrengthParams, closed_form_strength, terminal_value

__version__ = "0.1.0"

__all__ = [
    "NetworkConfig",
    "NetworkInput",
    "Polarity",
    "SFEMNetwork",
    "StrengthParams",
    "closed_form_strength",
    "letters_network",
    "terminal_value",
]
