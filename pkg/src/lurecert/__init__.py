"""Absolute-stability certification and instability witness extraction
for Lur'e feedback systems with slope-restricted nonlinearities."""

__version__ = "0.1.0"
