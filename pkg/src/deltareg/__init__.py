"""Numerical calculus for mollifier-regularized distributions.

Quantifies how products such as delta**2 and the point value delta(0)
diverge as the regularization width eps -> 0, and applies this to
position-entangled two-particle states built from a delta ridge.
"""

__version__ = "0.1.0"
