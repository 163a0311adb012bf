"""Center-manifold asymptotics for planar saddle-nodes x^2 y' = -(1 + a x) y + f(x, y)."""

__version__ = "0.1.0"
