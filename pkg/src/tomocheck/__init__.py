"""Detecting systematic measurement errors in qubit state tomography."""
__version__ = "0.1.0"
