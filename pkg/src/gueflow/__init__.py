"""Numerical toolkit for the GUE partition function with an essential singularity.

Submodules: ``hamiltonian`` (canonical Hamiltonians and constraint surface),
``lax`` (Lax matrix reconstruction and zero-curvature checks), ``seeds``
(small-u2 series), ``flows`` (adaptive integration), ``predictor`` (large-N
predictions), ``oracle`` (exact finite-N values) and ``cli``.
"""

__version__ = "0.1.0"
