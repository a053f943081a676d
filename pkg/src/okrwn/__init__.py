"""Convex-analytic toolkit: Legendre duality of test curves and rays,
weighted valuations and Okounkov bodies, toric Bergman kernels, Reinhardt
Chebyshev bodies and finite-dimensional norm filtrations."""

__version__ = "0.1.0"
