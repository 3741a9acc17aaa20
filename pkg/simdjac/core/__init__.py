"""Vectorized batched 2x2 Hermitian eigensolver and one-sided Jacobi SVD."""

__version__ = "1.0.0"
