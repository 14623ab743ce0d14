"""Pseudospectra of A and of A + Delta, exported as CSV for plotting.

The 0.5-level set of A stays left of the imaginary axis; after adding the
extremal structured perturbation it touches the axis.
"""

# %%
import sys
from pathlib import Path

import numpy as np

from stabrad import StructureSpace, grcar, solve_delta
from stabrad.io import write_contours_csv, write_field_csv
from stabrad.pseudospectra import GridSpec, level_contours, resolvent_field

out = Path(sys.argv[1] if len(sys.argv) > 1 else "overlay_out")
out.mkdir(exist_ok=True)

A = grcar(10)
trace = solve_delta(A, StructureSpace.sparsity_of(A), 0.5)
Delta = trace.result.state.sign * trace.final * trace.result.ES

# %% Same window for both fields
grid = GridSpec(-4.0, 1.0, -3.5, 3.5, 151, 201)
for name, M in (("A", A), ("A_plus_Delta", A + Delta)):
    field = resolvent_field(M, grid)
    curves = level_contours(field, 0.5)
    right = max(c.real.max() for c in curves)
    print(f"{name:>13}: rightmost point of the 0.5-level set at Re = {right:+.5f}")
    write_field_csv(out / f"field_{name}.csv", field)
    write_contours_csv(out / f"contours_{name}.csv", {0.5: curves})

print("eigenvalues of A:", np.round(np.sort_complex(np.linalg.eigvals(A)), 3))
print("CSV files written to", out)
