"""Pair entanglement of the spin-1/2 isotropic XY chain in a magnetic field."""
__version__ = "0.1.0"
