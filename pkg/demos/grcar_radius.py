"""Structured stability radius of a shifted Grcar matrix.

A = -Grcar(10) - I is Hurwitz but strongly non-normal. We ask how large a
real perturbation with the sparsity pattern of A may be before the
0.5-pseudospectrum of the perturbed matrix reaches the right half-plane.
"""

# %% The matrix and its spectrum
import numpy as np

from stabrad import StructureSpace, grcar, solve_delta, solve_eps, stability_radius
from stabrad.io import format_trace_table
from stabrad.linalg import rightmost_eigentriple

A = grcar(10, shift=1.0)
t = rightmost_eigentriple(A)
print("rightmost eigenvalue:", t.lam)
print("condition number kappa:", round(t.kappa, 3))

# %% Unstructured stability radius
# The distance to instability gives a cheap lower bound: any delta below
# eps* - eps is certainly admissible.
eps_star = stability_radius(A)
eps = 0.5
print(f"eps* = {eps_star:.10f}, so delta >= {eps_star - eps:.10f}")

# %% Outer Newton iteration on delta
S = StructureSpace.sparsity_of(A)
trace = solve_delta(A, S, eps)
print(format_trace_table(trace))
print(f"structured radius delta = {trace.final:.14e}")

# %% The dual problem recovers eps
dual = solve_eps(A, S, trace.final)
print(format_trace_table(dual))
print(f"eps recovered = {dual.final:.14e}")

# %% The extremal pair puts an eigenvalue on the imaginary axis
res = trace.result
Delta = res.state.sign * trace.final * res.ES
Theta = eps * res.E
w = np.linalg.eigvals(A + Delta + Theta)
print("max Re lambda(A + Delta + Theta) =", w.real.max())
