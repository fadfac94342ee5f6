"""Compiled kernels; see :mod:`psimt.kernels` for the selection logic."""
