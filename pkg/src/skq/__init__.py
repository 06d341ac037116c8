"""Quasienergy spectra and ensemble dynamics of a kicked qubit driven by torus maps."""

__version__ = "0.1.0"
