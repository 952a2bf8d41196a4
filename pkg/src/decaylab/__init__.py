"""Spectral laboratory for decay-weighted dispersive evolution problems.

Layers: grid (periodic spectral discretization), gsnorm (weighted norms),
symbol (phase-space weight and its checks), pdo (dense quantized
operators), cauchy (time stepping, plain and conjugated), examples
(closed-form solution families), cli (command-line harness).
"""

__version__ = "0.1.0"
