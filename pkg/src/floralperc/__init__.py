"""floralperc: correlated bond-triangular (flower) percolation toolkit.

Simulation and exact enumeration for the flower percolation model, its
interface exploration process, and the numerically checkable fingerprints
of its conformally invariant scaling limit: crossing-probability formula,
driving-function statistics, arm exponents, and path regularity.
"""

__version__ = "0.1.0"
