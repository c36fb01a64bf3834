"""Mechanical deductions about Adams spectral sequences over F2."""

__version__ = "0.1.0"
