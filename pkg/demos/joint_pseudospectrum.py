"""Monte Carlo view of the joint pseudospectrum.

Random Delta in S (||Delta||_F <= delta) and unstructured Theta
(||Theta||_F <= eps) give eigenvalues of A + Delta + Theta. Below the
structured radius no sample reaches the right half-plane; random sampling
also stays far from the worst case, which is why an optimizer is needed.
"""

# %%
import numpy as np

from stabrad import StructureSpace, grcar, solve_delta
from stabrad.pseudospectra import joint_pseudospectrum_sample

A = grcar(10)
S = StructureSpace.sparsity_of(A)
eps = 0.5
radius = solve_delta(A, S, eps).final

for frac in (0.5, 0.9, 1.0):
    clouds = joint_pseudospectrum_sample(A, S, eps, frac * radius, 400, rng_seed=1, fixed_radius=True)
    top = max(c.real.max() for c in clouds)
    print(f"delta = {frac:.1f} * radius: max Re over 400 samples = {top:+.4f}")

# %% The optimizer's extremal pair reaches the axis
trace = solve_delta(A, S, eps)
res = trace.result
worst = np.linalg.eigvals(A + res.state.sign * trace.final * res.ES + eps * res.E).real.max()
print(f"extremal pair: max Re = {worst:+.2e}")
