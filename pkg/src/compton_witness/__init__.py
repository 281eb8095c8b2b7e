"""Compton scattering of polarization-entangled photon pairs as a quantum channel."""
from . import channel, kinematics, montecarlo, qcore, states, witness

__all__ = ["channel", "kinematics", "montecarlo", "qcore", "states", "witness"]
__version__ = "0.1.0"
