"""Transient bounds that hold uniformly over admissible perturbations.

For every Delta in S with ||Delta||_F <= delta_eps, two estimates hold:
||exp(t(A + Delta))|| <= |Gamma| / (2 pi eps), and the L2 gain of
y' = (A + Delta) y + f is at most 1 / eps. Here both are checked on samples.
"""

# %%
import numpy as np

from stabrad import StructureSpace, grcar, solve_delta
from stabrad.bounds import contour_bound, exp_norms, simulate, verify_l2_bound
from stabrad.pseudospectra import axis_sweep, enclosing_grid, resolvent_field

A = grcar(10)
S = StructureSpace.sparsity_of(A)
eps = 0.5
trace = solve_delta(A, S, eps)
delta = trace.final
Delta = trace.result.state.sign * delta * trace.result.ES

# %% Contour bound from the (eps + delta)-level set
field = resolvent_field(A, enclosing_grid(A, eps + delta, 201, 201))
cb = contour_bound(A, S, eps, delta, field)
ts = np.array([0.1, 0.5, 1, 2, 5, 10, 20])
print(f"|Gamma| = {cb.gamma_length:.4f}, bound = {cb.bound:.4f}")
print("||exp(t(A+Delta))||:", np.round(exp_norms(A + Delta, ts), 4))

# %% L2 gain on random structured perturbations with noisy input
report = verify_l2_bound(A, S, eps, delta, n_perturbations=50, n_steps=5000, extremal=Delta)
print(f"max observed gain {report.max_ratio:.4f} vs 1/eps = {report.bound}")

# %% A harmonic input at the worst frequency nearly attains the bound
M = A + Delta
omega, sigma = axis_sweep(M)
w = np.linalg.svd(M - 1j * omega * np.eye(10))[0][:, -1]
sim = simulate(M, "harmonic", 60.0, 20000, omega=omega, w=w)
print(f"omega* = {omega:.4f}: gain {sim.l2_output / sim.l2_input:.4f} (limit {1 / sigma:.4f})")
