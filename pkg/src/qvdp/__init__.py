"""Coupled anharmonic quantum van der Pol oscillators.

Three tiers of description of the same two-oscillator system: the Lindblad
master equation on a truncated Fock space, a semiclassical Langevin model
derived from the truncated phase-space equation of motion, and the noiseless
mean-field equations.  A sweep harness and CLI reproduce the amplitude-death
and amplitude-revival phenomenology across parameter scans.
"""

__version__ = "0.1.0"

from .params import SystemParams, TruncationSpec

__all__ = ["SystemParams", "TruncationSpec", "__version__"]
