"""Sub-Riemannian geodesic flows on the Heisenberg group H_{2n+1}."""

__version__ = "0.1.0"
