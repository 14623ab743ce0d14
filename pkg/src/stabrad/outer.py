"""Outer iteration: Newton/bisection on the perturbation size.

``phi(delta)`` (fixed eps) and ``psi(eps)`` (fixed delta) are ``-Re lambda`` at
the extremal perturbation returned by the inner iteration. Both decrease
monotonically and have closed-form derivatives at converged inner solves:

    phi'(delta) = -kappa * ||P(x y^*)||_F,      psi'(eps) = -kappa.

The Newton iterate is replaced by the bracket midpoint whenever it leaves
the current sign bracket ``[lb, ub]``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NotHurwitz, ZeroStructuredGradient
from .inner import InnerOptions, InnerResult, solve_inner
from .linalg import all_eigenvalues, frobenius

__all__ = [
    "OuterConfig",
    "OuterRow",
    "OuterTrace",
    "phi_derivative",
    "psi_derivative",
    "check_hurwitz",
    "solve_radius",
    "solve_delta",
    "solve_eps",
    "stability_radius",
]

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITERATIONS = "max-iterations"


@dataclass(frozen=True)
class OuterConfig:
    """Parameters of :func:`solve_radius`.

    ``mode`` is ``"delta"`` (solve for the structured radius at fixed
    ``eps``) or ``"eps"`` (solve for eps at fixed ``delta``). ``start`` is the
    first parameter value: 0 in delta mode, 1e-2 in eps mode.
    """

    mode: str = "delta"
    eps: float | None = None
    delta: float | None = None
    tol0: float | None = None
    k_max: int = 20
    lb: float = 0.0
    ub: float = np.inf
    start: float | None = None
    tol_floor: float = 1e-8
    inner: InnerOptions = field(default_factory=InnerOptions)


@dataclass(frozen=True)
class OuterRow:
    k: int
    value: float
    re_lambda: float
    steps: int


@dataclass
class OuterTrace:
    mode: str
    fixed: float
    rows: list
    final: float
    bracket: tuple
    status: str
    result: InnerResult | None = None

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def iterations(self) -> int:
        return len(self.rows)


def phi_derivative(triple, S) -> float:
    """``-kappa ||P(x y^*)||_F``, the delta-derivative of phi."""
    nrm = frobenius(S.project(triple.xy))
    if nrm < 1e-14:
        raise ZeroStructuredGradient(f"||P(xy*)||_F = {nrm:.3g}; Newton step undefined")
    return -triple.kappa * nrm


def psi_derivative(triple) -> float:
    """``-kappa``, the eps-derivative of psi."""
    return -triple.kappa


def check_hurwitz(A, margin=1e-10):
    w = all_eigenvalues(A)
    alpha = float(w.real.max())
    if alpha >= 0:
        raise NotHurwitz(f"spectral abscissa {alpha:.6g} >= 0")
    if alpha > -margin:
        warnings.warn(f"spectral abscissa {alpha:.3g} is within {margin:g} of the imaginary axis")
    return alpha


def solve_radius(A, S, config: OuterConfig) -> OuterTrace:
    """Root of phi (delta mode) or psi (eps mode) by Newton/bisection.

    Each iteration runs the inner solver at the current parameter, warm-started
    from the previous extremizer, updates the sign bracket, and takes a Newton
    step. Iteration stops once the change of Re lambda between consecutive
    iterates drops below a tolerance that is divided by 100 after every
    iteration (floored at ``tol_floor``), or after ``k_max`` iterations.
    The last evaluated parameter is returned; with Re lambda > 0 it is an
    upper bound of the root.
    """
    A = np.asarray(A)
    check_hurwitz(A)
    mode = config.mode
    if mode == "delta":
        if config.eps is None or config.eps <= 0:
            raise ValueError("delta mode needs eps > 0")
        fixed = config.eps
        value = 0.0 if config.start is None else config.start
    elif mode == "eps":
        if config.delta is None or config.delta < 0:
            raise ValueError("eps mode needs delta >= 0")
        fixed = config.delta
        value = 1e-2 if config.start is None else config.start
    else:
        raise ValueError(f"unknown mode {mode!r}")

    lb, ub = config.lb, config.ub
    rows = []
    tol = None
    prev = None
    state = None
    status = MAX_ITERATIONS
    result = None
    k = 0
    while True:
        k += 1
        if mode == "delta":
            result = solve_inner(A, S, fixed, value, init=state, opts=config.inner)
        else:
            result = solve_inner(A, S, value, fixed, init=state, opts=config.inner)
        if not result.converged:
            log.warning("inner iteration did not converge at %s = %.10g", mode, value)
        re = result.re_lambda
        rows.append(OuterRow(k, float(value), float(re), result.steps))
        log.info("k=%d %s=%.14g Re(lambda)=%.10e steps=%d", k, mode, value, re, result.steps)
        if re > 0:
            ub = min(ub, value)
        else:
            lb = max(lb, value)

        if prev is not None:
            change = abs(re - prev)
            if tol is None:
                tol = config.tol0 if config.tol0 is not None else change / 10
            else:
                tol = max(1e-2 * tol, config.tol_floor)
                if change < tol:
                    status = CONVERGED
                    break
        if re == 0.0:
            status = CONVERGED
            break
        if k >= config.k_max:
            break

        try:
            if mode == "delta":
                slope = phi_derivative(result.triple, S)
            else:
                slope = psi_derivative(result.triple)
            new = value + re / slope
        except ZeroStructuredGradient:
            new = np.nan
        if not (lb <= new <= ub):
            new = 0.5 * (lb + ub) if np.isfinite(ub) else 2.0 * max(lb, value, 1e-8)
        prev = re
        value = float(new)
        state = result.state

    return OuterTrace(
        mode=mode,
        fixed=fixed,
        rows=rows,
        final=value,
        bracket=(float(lb), float(ub)),
        status=status,
        result=result,
    )


def solve_delta(A, S, eps, **kwargs) -> OuterTrace:
    """Structured eps-stability radius of ``A``."""
    return solve_radius(A, S, OuterConfig(mode="delta", eps=eps, **kwargs))


def solve_eps(A, S, delta, **kwargs) -> OuterTrace:
    """Smallest eps for which delta is the structured eps-stability radius."""
    return solve_radius(A, S, OuterConfig(mode="eps", delta=delta, **kwargs))


def stability_radius(A, **kwargs) -> float:
    """Unstructured stability radius, the zero of the eps-pseudospectral abscissa."""
    return solve_radius(A, None, OuterConfig(mode="eps", delta=0.0, **kwargs)).final
