"""Analytic bitangent matrices of smooth plane quartics.

Builds, from the 28 gradients of odd genus-3 theta functions at z=0, the
8x8 rank-4 symmetric matrix of linear forms whose off-diagonal entries are
the bitangents of the underlying plane quartic, and recovers the quartic as
a 4x4 symmetric determinantal representation.
"""

__version__ = "0.1.0"
