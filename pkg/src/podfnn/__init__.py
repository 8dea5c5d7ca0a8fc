"""POD-decoupled neural-network constitutive surrogates.

Sequence data generation from reference plasticity models, POD decoupling of
stress sequences, Levenberg-Marquardt network training, surrogate assembly,
and validation inside a miniature nonlinear finite element solver.
"""

__version__ = "0.1.0"
