"""Piecewise-smooth interval dynamics: symbolic map definitions, orbit
statistics, induced first-entry/return maps with distortion and
expansion certificates, empirical attractor classification, and
uniform-expansion certificates away from the critical set."""

__version__ = "0.1.0"
