"""kanlab: a numerical laboratory for Kan-like skew products on the cylinder.

Verifies the defining axioms of the map family, computes the two boundary
measures and the interior measure of maximal entropy, renders intermingled
basins, and runs the quantitative diagnostics (Lyapunov exponents, transfer
operator pressure, separated-set entropy, periodic-orbit approximations).
"""

from kanlab._backend import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
