"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL/SKIP line per
criterion is printed in the terminal summary. Criteria on the Tubular and
Tolosa matrices need ``STABRAD_DATA`` pointing at a directory with
``tub1000.mtx`` / ``tols4000.mtx``.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from stabrad import InnerOptions, StructureSpace, read_matrix_market, solve_delta, solve_eps, solve_inner
from stabrad import stability_radius
from stabrad.bounds import contour_bound, exp_norms, verify_l2_bound
from stabrad.inner import reduced_gradient
from stabrad.outer import phi_derivative, psi_derivative
from stabrad.pseudospectra import axis_sweep, enclosing_grid, resolvent_field
from stabrad.structures import real_basis

from helpers import KINDS, crandn, random_structure, skipped, verdict

DELTA_SPARSE = 8.5228382298260e-1
DELTA_TOEPLITZ = 9.0435429338e-1
EPS_STAR = 8.39282612e-1
# printed extremal Toeplitz coefficients, in units of 1e-2, diagonals -1..3
TOEPLITZ_COEFFS = np.array([3.295829030, 7.282237246, 2.619428085, -4.166704981, -4.668125451])
DATA = os.environ.get("STABRAD_DATA")


def data_file(name):
    if DATA and (Path(DATA) / name).exists():
        return Path(DATA) / name
    return None


def diagonal_coefficients(D, p, q):
    return np.array([np.diagonal(D, d).real.mean() for d in range(-p, q + 1)])


def test_criterion_01_grcar_sparsity_radius(grcar10, sparsity10):
    t0 = time.perf_counter()
    tr = solve_delta(grcar10, sparsity10, 0.5)
    elapsed = time.perf_counter() - t0
    re = [r.re_lambda for r in tr.rows]
    signs = re[0] < 0 and all(abs(b) < abs(a) for a, b in zip(re[1:], re[2:])) and all(r > 0 for r in re[1:])
    err = abs(tr.final - DELTA_SPARSE)
    ok = err <= 1e-6 and tr.iterations <= 8 and signs and elapsed < 30
    verdict(1, "Grcar sparsity radius", ok,
            f"delta={tr.final:.14e} |err|={err:.1e} iters={tr.iterations} time={elapsed:.2f}s")


def test_criterion_02_duality_round_trip(grcar10, sparsity10):
    tr = solve_eps(grcar10, sparsity10, DELTA_SPARSE)
    err = abs(tr.final - 0.5)
    verdict(2, "duality round trip", err <= 1e-8, f"eps={tr.final:.14e} |err|={err:.1e}")


def test_criterion_03_toeplitz_radius(grcar10, toeplitz10):
    tr = solve_delta(grcar10, toeplitz10, 0.5)
    res = tr.result
    err = abs(tr.final - DELTA_TOEPLITZ)
    # the printed coefficients are those of delta * P(E) (without the 1/||P(E)|| factor)
    printed = diagonal_coefficients(tr.final * toeplitz10.project(res.E), 1, 3) * 100
    coeff_err = min(np.abs(printed - TOEPLITZ_COEFFS).max(), np.abs(printed + TOEPLITZ_COEFFS).max())
    # the extremal perturbation itself has norm delta and the same direction
    D = res.state.sign * tr.final * res.ES
    unit = diagonal_coefficients(D, 1, 3)
    cos = abs(unit @ printed) / (np.linalg.norm(unit) * np.linalg.norm(printed))
    ok = err <= 1e-6 and coeff_err <= 1e-4 and abs(np.linalg.norm(D) - tr.final) < 1e-12 and cos > 1 - 1e-12
    verdict(3, "Toeplitz radius", ok,
            f"delta={tr.final:.12e} |err|={err:.1e} max coeff err={coeff_err:.1e} "
            f"||Delta||_F={np.linalg.norm(D):.10f}")


def test_criterion_04_stability_radius(grcar10):
    eps = stability_radius(grcar10)
    _, oracle = axis_sweep(grcar10, n_points=100001)
    diag = stability_radius(np.diag([-1.0, -2.0]))
    ok = abs(eps - EPS_STAR) <= 1e-6 and abs(eps - oracle) <= 1e-6 and abs(diag - 1) <= 1e-10
    verdict(4, "stability radius", ok,
            f"eps*={eps:.12e} oracle={oracle:.12e} diag(-1,-2)->{diag:.15f}")


def test_criterion_05_lower_bound(grcar10, sparsity10):
    worst = solve_delta(grcar10, sparsity10, 0.5).final - (EPS_STAR - 0.5)
    rng = np.random.default_rng(2024)
    for _ in range(20):
        A = rng.standard_normal((8, 8))
        A -= (np.linalg.eigvals(A).real.max() + rng.uniform(0.2, 1.0)) * np.eye(8)
        mask = rng.random((8, 8)) < 0.4
        mask[np.diag_indices(8)] = True
        S = StructureSpace.sparsity(list(zip(*np.nonzero(mask))), 8)
        eps_star = stability_radius(A)
        eps = rng.uniform(0.2, 0.8) * eps_star
        delta = solve_delta(A, S, eps).final
        worst = min(worst, delta - (eps_star - eps))
    verdict(5, "lower bound delta >= eps* - eps", worst >= -1e-8, f"min(delta - (eps* - eps))={worst:.3e}")


def test_criterion_06_tubular_dual_pair():
    path = data_file("tub1000.mtx")
    if path is None:
        skipped(6, "Tubular dual pair", "set STABRAD_DATA to a directory with tub1000.mtx")
    mm = read_matrix_market(path)
    A = mm.matrix.real
    S = StructureSpace.sparsity(mm.pattern, A.shape[0])
    eps = solve_eps(A, S, 0.1).final
    delta = solve_delta(A, S, eps).final
    ok = abs(eps - 1.12242717731e-1) <= 1e-5 and abs(delta - 0.1) <= 1e-6
    verdict(6, "Tubular dual pair", ok, f"eps={eps:.12e} delta={delta:.12e}")


def test_criterion_07_inner_flow_properties():
    rng = np.random.default_rng(7)
    eps, delta = 0.3, 0.5
    worst_norm = worst_drop = worst_grad = 0.0
    worst_align = 1.0
    failures = 0
    for i in range(50):
        kind = KINDS[i % len(KINDS)]
        n = int(rng.integers(4, 11))
        A = rng.standard_normal((n, n)) - 3 * np.eye(n)
        if kind == "full-complex":
            A = A + 1j * rng.standard_normal((n, n))
        S = random_structure(kind, n, rng)
        accepted = []
        opts = InnerOptions(tol_stat=1e-10, tol_inner=0.0, max_steps=20000, monitor=accepted.append)
        res = solve_inner(A, S, eps, delta, opts=opts)
        for s in accepted:
            worst_norm = max(worst_norm, abs(np.linalg.norm(s.u) - 1), abs(np.linalg.norm(s.v) - 1))
        re = [r for _, r, _ in res.decay_history]
        worst_drop = max(worst_drop, -min(np.diff(re), default=0.0))
        if not res.converged:
            failures += 1
            continue
        g = reduced_gradient(A, S, eps, delta, res.state)
        worst_grad = max(worst_grad, np.linalg.norm(g.Gtilde - eps * g.G))
        worst_align = min(worst_align, abs(np.vdot(res.state.E, res.triple.xy)))
    ok = worst_norm <= 1e-12 and worst_drop <= 1e-13 and worst_grad <= 1e-6 and worst_align >= 1 - 1e-6
    ok = ok and failures == 0
    verdict(7, "inner flow properties", ok,
            f"norm dev={worst_norm:.1e} max Re drop={worst_drop:.1e} ||Gt-eps G||={worst_grad:.1e} "
            f"alignment={worst_align:.10f} unconverged={failures}")


def test_criterion_08_derivatives():
    tight = InnerOptions(tol_stat=1e-12, tol_inner=0.0, max_steps=50000)
    rng = np.random.default_rng(8)
    h = 1e-5
    worst_phi = worst_psi = 0.0
    for i in range(10):
        n = 6
        A = rng.standard_normal((n, n)) - 3 * np.eye(n)
        S = random_structure(KINDS[i % len(KINDS)], n, rng)
        eps, delta = 0.3, 0.4
        mid = solve_inner(A, S, eps, delta, opts=tight)
        fd = (solve_inner(A, S, eps, delta - h, mid.state, tight).re_lambda
              - solve_inner(A, S, eps, delta + h, mid.state, tight).re_lambda) / (2 * h)
        worst_phi = max(worst_phi, abs(phi_derivative(mid.triple, S) / fd - 1))
        fd = (solve_inner(A, S, eps - h, delta, mid.state, tight).re_lambda
              - solve_inner(A, S, eps + h, delta, mid.state, tight).re_lambda) / (2 * h)
        worst_psi = max(worst_psi, abs(psi_derivative(mid.triple) / fd - 1))
    ok = worst_phi <= 1e-3 and worst_psi <= 1e-3
    verdict(8, "derivative formulas", ok, f"max rel err phi'={worst_phi:.1e} psi'={worst_psi:.1e}")


def test_criterion_09_projections():
    rng = np.random.default_rng(9)
    worst = 0.0
    for kind in KINDS:
        for n in range(1, 5):
            for _ in range(10):
                S = random_structure(kind, n, rng)
                Z, W = crandn(rng, n, n), crandn(rng, n, n)
                P = S.project(Z)
                B = real_basis(S)
                gram = np.array([[np.vdot(a, b).real for b in B] for a in B])
                c = np.linalg.solve(gram, [np.vdot(b, Z).real for b in B])
                oracle = np.tensordot(c, B, axes=1)
                errs = [
                    np.linalg.norm(S.project(P) - P),
                    abs(np.vdot(P, W).real - np.vdot(Z, S.project(W)).real),
                    abs(np.linalg.norm(Z) ** 2 - np.linalg.norm(P) ** 2 - np.linalg.norm(Z - P) ** 2),
                    np.linalg.norm(P - oracle),
                ]
                worst = max(worst, *errs)
    verdict(9, "projection properties", worst <= 1e-10, f"max deviation={worst:.1e}")


def test_criterion_10_bound_certification(grcar10, sparsity10):
    tr = solve_delta(grcar10, sparsity10, 0.5)
    delta = tr.final
    D = tr.result.state.sign * delta * tr.result.ES
    rep = verify_l2_bound(grcar10, sparsity10, 0.5, delta, n_perturbations=100, rng_seed=10, extremal=D)
    field = resolvent_field(grcar10, enclosing_grid(grcar10, 0.5 + delta, 201, 201))
    cb = contour_bound(grcar10, sparsity10, 0.5, delta, field)
    ts = np.sort(np.concatenate([[0.1, 1.0, 10.0], np.random.default_rng(10).uniform(0, 30, 17)]))
    peak = exp_norms(grcar10 + D, ts).max()
    ok = rep.ok and rep.max_ratio <= 2 * (1 + 5e-3) and peak <= cb.bound
    verdict(10, "bound certification", ok,
            f"max L2 ratio={rep.max_ratio:.4f} (<= {2 * 1.005:.3f}) max ||exp||={peak:.4f} <= {cb.bound:.4f}")


@pytest.mark.large
def test_optional_tolosa():
    path = data_file("tols4000.mtx")
    if path is None:
        skipped("T", "Tolosa-4000 radius", "set STABRAD_DATA to a directory with tols4000.mtx")
    mm = read_matrix_market(path)
    A = mm.matrix.real
    S = StructureSpace.sparsity(mm.pattern, A.shape[0])
    delta = solve_delta(A, S, 1e-3).final
    verdict("T", "Tolosa-4000 radius", abs(delta - 1.5550295513e-1) <= 1e-5, f"delta={delta:.12e}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
