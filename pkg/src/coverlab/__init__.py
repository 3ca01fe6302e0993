"""Cover times, late points, local random interlacements, and loop surgery
on the discrete torus (Z/NZ)^d, d >= 3."""

__version__ = "0.1.0"
