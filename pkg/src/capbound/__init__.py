"""Sharp p-capacity bounds in hyperbolic and Euclidean space.

Modules: numerics, hyperbolic, surface, anisotropic, flows, bounds, oracle,
validation and cli.
"""

__version__ = "0.1.0"
