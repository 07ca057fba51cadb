"""Numerical tolerances shared by every module."""

NORM_TOL = 1e-12          # state normalization
HERMITIAN_TOL = 1e-10     # density matrices
OBSERVABLE_TOL = 1e-12    # Hermiticity of operators
TRACE_TOL = 1e-10
EIGEN_FLOOR = -1e-10      # smallest admissible density-matrix eigenvalue
IMAG_TOL = 1e-10          # imaginary residue of an expectation value
DIRECTION_TOL = 1e-8      # unit-norm check for measurement directions
DEGENERATE_NORM = 1e-12   # superposition collapsing to zero
TANGLE_CLAMP = 1e-8       # negative residual tolerated before raising
CONCURRENCE_EIG_CLIP = 1e-10
DISTINCT_OPTIMA_TOL = 1e-6
MAX_QUBITS = 6
