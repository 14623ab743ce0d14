"""Restricting perturbations to banded Toeplitz matrices.

The same Grcar matrix, but now Delta must be a real Toeplitz matrix on the
band of A (one subdiagonal, three superdiagonals). Fewer degrees of freedom
mean a larger admissible perturbation.
"""

# %%
import numpy as np

from stabrad import StructureSpace, grcar, solve_delta
from stabrad.io import format_trace_table

A = grcar(10)
band = StructureSpace.toeplitz_band(10, 1, 3)
trace = solve_delta(A, band, 0.5)
print(format_trace_table(trace))

# %% Diagonal coefficients of the extremal perturbation
res = trace.result
Delta = res.state.sign * trace.final * res.ES
coeffs = [np.diagonal(Delta, d).mean() for d in range(-1, 4)]
print("||Delta||_F =", np.linalg.norm(Delta))
print("diagonals -1..3:", np.round(coeffs, 6))

# %% Compare with the sparsity structure
sparse = solve_delta(A, StructureSpace.sparsity_of(A), 0.5).final
print(f"Toeplitz radius {trace.final:.8f} > sparsity radius {sparse:.8f}")
