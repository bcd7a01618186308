"""Elastic scattering by polygonal density inclusions and corner-scattering diagnostics."""

__version__ = "0.1.0"
