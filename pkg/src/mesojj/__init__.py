"""Mesoscopic Josephson junctions, flux qubits and SET detectors."""

__version__ = "0.1.0"
