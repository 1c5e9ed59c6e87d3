"""dselab: exact experiments on directional strips, sequence entropy and
Koopman-orbit compactness for lattice group actions.

All geometry and measure computations are exact over rationals; logarithms
are the only floating-point step.
"""

__version__ = "0.1.0"
