"""Inner iteration: eigenvalue optimization at fixed (eps, delta).

For a rank-1 matrix ``E = u v^*`` of unit Frobenius norm the perturbed matrix is

    M(E) = A + eps * E + sign * delta * eta * P(E),    eta = 1 / ||P(E)||_F,

with ``P`` the orthogonal projection onto the structure space. The functional
``-Re lambda(M(E))`` is driven to a stationary point by a norm-constrained
gradient flow on the rank-1 manifold, written as coupled ODEs for ``u`` and
``v`` and integrated by a splitting method: an Euler step on the "horizontal"
part, renormalization, then an exact phase rotation.

A normalized Euler discretization of the flow on full matrices
``(E, E_S)`` is also provided (``integrator="full-euler"``) as a
cross-check of the rank-1 reduction.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import StabradError, ZeroStructuredPart
from .linalg import EigenTriple, frobenius, inner, rightmost_eigentriple

__all__ = [
    "InnerOptions",
    "RankOneState",
    "GradientPair",
    "InnerResult",
    "make_state",
    "perturbed_matrix",
    "functional",
    "reduced_gradient",
    "splitting_step",
    "full_flow_step",
    "flow_residual",
    "stationarity_residual",
    "solve_inner",
]

ZERO_PART = 1e-14

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InnerOptions:
    """Tuning knobs of :func:`solve_inner`.

    Step-size control is Armijo-like with monotone acceptance: a step is
    accepted iff Re lambda does not decrease; rejected steps halve ``h``;
    ``h`` grows by ``grow`` after two consecutive acceptances.
    ``monitor``, if given, is called with every accepted splitting state.
    """

    tol_inner: float = 1e-14
    tol_stat: float | None = None  # default 1e-8 * eps
    patience: int = 3
    max_steps: int = 5000
    h0: float = 0.1
    h_min: float = 1e-8
    h_max: float = 1.0
    shrink: float = 2.0
    grow: float = 1.2
    sign: int = 1
    try_both_signs: bool = False
    restarts: int = 1
    seed: int = 0
    integrator: str = "splitting"
    monitor: Callable[[RankOneState], None] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class RankOneState:
    u: np.ndarray
    v: np.ndarray
    triple: EigenTriple
    eta: float
    sign: int = 1

    @property
    def E(self):
        return np.outer(self.u, self.v.conj())

    @property
    def re_lambda(self) -> float:
        return self.triple.lam.real


@dataclass(frozen=True)
class GradientPair:
    G: np.ndarray
    Gtilde: np.ndarray
    gamma: complex


@dataclass
class InnerResult:
    state: RankOneState
    re_lambda: float
    steps: int
    converged: bool
    decay_history: list = field(default_factory=list)
    E: np.ndarray | None = None
    ES: np.ndarray | None = None
    residual: float = np.nan
    degenerate: bool = False

    @property
    def triple(self) -> EigenTriple:
        return self.state.triple


def _structured_unit(S, E):
    PE = S.project(E)
    nrm = frobenius(PE)
    if nrm < ZERO_PART:
        raise ZeroStructuredPart(
            f"structured part of the perturbation vanishes (||P(uv*)||_F = {nrm:.3g})"
        )
    return PE / nrm, 1.0 / nrm


def perturbed_matrix(A, S, eps, delta, u, v, sign=1):
    """``A + eps u v^* + sign delta eta P(u v^*)``, together with eta."""
    E = np.outer(u, np.conj(v))
    M = A + eps * E
    eta = np.inf
    if delta > 0:
        ES, eta = _structured_unit(S, E)
        M = M + sign * delta * ES
    elif S is not None:
        nrm = frobenius(S.project(E))
        eta = 1.0 / nrm if nrm > 0 else np.inf
    return M, eta


def make_state(A, S, eps, delta, u, v, sign=1) -> RankOneState:
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    M, eta = perturbed_matrix(A, S, eps, delta, u, v, sign)
    triple = rightmost_eigentriple(M, phase_anchor=u)
    return RankOneState(u=u, v=v, triple=triple, eta=eta, sign=sign)


def functional(A, S, eps, delta, state) -> float:
    """``-Re lambda`` of the perturbed matrix, recomputed from ``(u, v)``."""
    M, _ = perturbed_matrix(A, S, eps, delta, state.u, state.v, state.sign)
    return -rightmost_eigentriple(M).lam.real


def reduced_gradient(A, S, eps, delta, state) -> GradientPair:
    """Free gradient ``G = -x y^*`` and the rescaled reduced gradient.

    The reduced gradient accounts for the normalization of the structured
    part; it is ``eps * G`` when ``delta == 0``.
    """
    t = state.triple
    G = -np.outer(t.x, t.y.conj())
    if delta > 0:
        ES, eta = _structured_unit(S, state.E)
        sd = state.sign * delta
        PG = S.project(G)
        Gt = eps * G + sd * eta * PG - sd * eta * inner(G, ES).real * ES
    else:
        Gt = eps * G
    gamma = complex(np.vdot(state.u, Gt @ state.v))
    return GradientPair(G=G, Gtilde=Gt, gamma=gamma)


def flow_residual(state, grad) -> float:
    """Norm of the right-hand side of the two-vector ODE at ``state``."""
    u, v, Gt, g = state.u, state.v, grad.Gtilde, grad.gamma
    du = 0.5j * g.imag * u + g.real * u - Gt @ v
    dv = -0.5j * g.imag * v + g.real * v - Gt.conj().T @ u
    return float(np.sqrt(np.linalg.norm(du) ** 2 + np.linalg.norm(dv) ** 2))


def stationarity_residual(state, grad) -> float:
    """``||Gt - Re<Gt, E> E||_F``: zero iff E is a real multiple of Gt."""
    E = state.E
    return frobenius(grad.Gtilde - inner(grad.Gtilde, E).real * E)


def _rotation_trivial(A, S, delta, triple) -> bool:
    real_problem = np.isrealobj(A) and (delta == 0 or S.is_real)
    return real_problem and abs(triple.lam.imag) <= 1e-14 * max(1.0, abs(triple.lam))


def splitting_step(A, S, eps, delta, state, h, grad=None) -> RankOneState:
    """One step of the splitting integrator with step size ``h``.

    Euler step on ``u' = Re(g) u - Gt v``, ``v' = Re(g) v - Gt^* u``
    (``g = u^* Gt v``), renormalization, then the rotation
    ``u <- exp(i th h) u``, ``v <- exp(-i th h) v`` with ``th = Im(u^* Gt v) / 2``
    evaluated at the normalized vectors and the pre-step gradient.
    """
    if h == 0:
        return state
    if grad is None:
        grad = reduced_gradient(A, S, eps, delta, state)
    u, v, Gt, g = state.u, state.v, grad.Gtilde, grad.gamma
    uh = u + h * (g.real * u - Gt @ v)
    vh = v + h * (g.real * v - Gt.conj().T @ u)
    uc = uh / np.linalg.norm(uh)
    vc = vh / np.linalg.norm(vh)
    if not _rotation_trivial(A, S, delta, state.triple):
        theta = 0.5 * np.vdot(uc, Gt @ vc).imag
        uc = np.exp(1j * theta * h) * uc
        vc = np.exp(-1j * theta * h) * vc
    return make_state(A, S, eps, delta, uc, vc, state.sign)


def full_flow_step(A, S, eps, delta, E, ES, h):
    """Normalized Euler step of the flow on full matrices.

    ``eps E' = -G + Re<G, E> E`` and ``delta ES' = -P(G) + Re<P(G), ES> ES``
    with ``G = -x y^*`` taken at ``A + eps E + delta ES``; both factors are
    renormalized to unit Frobenius norm afterwards.
    """
    M = A + eps * E + (delta * ES if delta > 0 else 0)
    t = rightmost_eigentriple(M)
    G = -np.outer(t.x, t.y.conj())
    En = E + (h / eps) * (-G + inner(G, E).real * E)
    En = En / frobenius(En)
    if delta > 0:
        PG = S.project(G)
        ESn = ES + (h / delta) * (-PG + inner(PG, ES).real * ES)
        ESn = S.project(ESn)
        ESn = ESn / frobenius(ESn)
    else:
        ESn = ES
    return En, ESn


# ----------------------------------------------------------------------------
# drivers


def _initial_state(A, S, eps, delta, init, sign, rng=None):
    if rng is not None:
        n = A.shape[0]
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        return make_state(A, S, eps, delta, u, v, sign)
    if init is None:
        t0 = rightmost_eigentriple(A)
        return make_state(A, S, eps, delta, t0.x, t0.y, sign)
    return make_state(A, S, eps, delta, init.u, init.v, sign)


def _roundoff(state):
    return 64 * np.finfo(float).eps * max(1.0, abs(state.triple.lam))


def _run_splitting(A, S, eps, delta, state, opts):
    tol_stat = opts.tol_stat if opts.tol_stat is not None else 1e-8 * eps
    grad = reduced_gradient(A, S, eps, delta, state)
    h = opts.h0
    steps = 1
    streak = 0
    small = 0
    converged = False
    history = [(0, state.re_lambda, h)]
    while True:
        res = flow_residual(state, grad)
        if res <= tol_stat:
            converged = True
            break
        if steps >= opts.max_steps:
            break
        trial = splitting_step(A, S, eps, delta, state, h, grad)
        steps += 1
        gain = trial.re_lambda - state.re_lambda
        if gain >= -_roundoff(state):
            state = trial
            grad = reduced_gradient(A, S, eps, delta, state)
            history.append((steps - 1, state.re_lambda, h))
            if opts.monitor is not None:
                opts.monitor(state)
            streak += 1
            if streak >= 2:
                h = min(h * opts.grow, opts.h_max)
            small = small + 1 if abs(gain) < opts.tol_inner else 0
            if small >= opts.patience:
                converged = True
                break
        else:
            streak = 0
            if h <= opts.h_min:
                # cannot make progress: stationary up to roundoff in lambda
                converged = abs(gain) < max(opts.tol_inner, 1e2 * _roundoff(state))
                break
            h = max(h / opts.shrink, opts.h_min)
    return state, grad, steps, converged, history


def _run_full_euler(A, S, eps, delta, state, opts):
    tol_stat = opts.tol_stat if opts.tol_stat is not None else 1e-8 * eps
    E = state.E
    ES = state.sign * S.project(E) * state.eta if delta > 0 else np.zeros_like(E)
    h = opts.h0
    steps = 1

    def evaluate(E, ES):
        M = A + eps * E + (delta * ES if delta > 0 else 0)
        return rightmost_eigentriple(M)

    t = evaluate(E, ES)
    history = [(0, t.lam.real, h)]
    streak = small = 0
    converged = False

    def residual(t, E, ES):
        G = -np.outer(t.x, t.y.conj())
        r = frobenius(-G + inner(G, E).real * E) / eps
        if delta > 0:
            PG = S.project(G)
            r = np.hypot(r, frobenius(-PG + inner(PG, ES).real * ES) / delta)
        return r

    while True:
        if residual(t, E, ES) <= tol_stat:
            converged = True
            break
        if steps >= opts.max_steps:
            break
        En, ESn = full_flow_step(A, S, eps, delta, E, ES, h)
        tn = evaluate(En, ESn)
        steps += 1
        gain = tn.lam.real - t.lam.real
        if gain >= -64 * np.finfo(float).eps * max(1.0, abs(t.lam)):
            E, ES, t = En, ESn, tn
            history.append((steps - 1, t.lam.real, h))
            streak += 1
            if streak >= 2:
                h = min(h * opts.grow, opts.h_max)
            small = small + 1 if abs(gain) < opts.tol_inner else 0
            if small >= opts.patience:
                converged = True
                break
        else:
            streak = 0
            if h <= opts.h_min:
                converged = abs(gain) < max(opts.tol_inner, 1e-12)
                break
            h = max(h / opts.shrink, opts.h_min)

    # rank-1 representative: leading singular pair of E
    U, s, Vh = np.linalg.svd(E)
    u, v = U[:, 0], Vh[0].conj()
    final = RankOneState(u=u, v=v, triple=t, eta=state.eta, sign=state.sign)
    return final, E, ES, steps, converged, history


def _solve_one(A, S, eps, delta, state, opts):
    if opts.integrator == "splitting":
        state, grad, steps, converged, history = _run_splitting(A, S, eps, delta, state, opts)
        E = state.E
        ES = state.sign * state.eta * S.project(E) if delta > 0 else None
        stat = stationarity_residual(state, grad)
        # the vector flow is at rest while E is not aligned with Gt:
        # Gt v = 0 and u^* Gt = 0 with Gt != 0
        degenerate = converged and stat > 0.5 * frobenius(grad.Gtilde) > 0
        if degenerate:
            log.warning("inner flow stopped at a degenerate point (Gt v = 0, u* Gt = 0); try --restarts")
        return InnerResult(
            state=state,
            re_lambda=state.re_lambda,
            steps=steps,
            converged=converged and not degenerate,
            decay_history=history,
            E=E,
            ES=ES,
            residual=stat,
            degenerate=degenerate,
        )
    if opts.integrator == "full-euler":
        state, E, ES, steps, converged, history = _run_full_euler(A, S, eps, delta, state, opts)
        return InnerResult(
            state=state,
            re_lambda=state.re_lambda,
            steps=steps,
            converged=converged,
            decay_history=history,
            E=E,
            ES=ES if delta > 0 else None,
        )
    raise ValueError(f"unknown integrator {opts.integrator!r}")


def solve_inner(A, S, eps, delta, init=None, opts=None) -> InnerResult:
    """Maximize Re lambda over the rank-1 perturbations at fixed (eps, delta).

    Parameters
    ----------
    A : (n, n) ndarray
    S : StructureSpace
        Only used when ``delta > 0``.
    eps : float
        Size of the unstructured perturbation, > 0.
    delta : float
        Size of the structured perturbation, >= 0. With ``delta == 0`` this
        computes the eps-pseudospectral abscissa.
    init : RankOneState, optional
        Warm start; defaults to ``E = x y^*`` from the rightmost eigentriple of A.
    opts : InnerOptions, optional

    Returns
    -------
    InnerResult
        The best trajectory end point over the sign branches and restarts
        requested in ``opts``. ``converged`` is False when the step budget
        ran out; the best state found is returned regardless.
    """
    opts = opts or InnerOptions()
    A = np.asarray(A)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    signs = (opts.sign, -opts.sign) if (opts.try_both_signs and delta > 0) else (opts.sign,)
    rng = np.random.default_rng(opts.seed)
    best = None
    for sign in signs:
        for r in range(max(opts.restarts, 1)):
            try:
                start = _initial_state(A, S, eps, delta, init, sign, rng if r > 0 else None)
            except StabradError:
                if r == 0:
                    raise
                continue
            result = _solve_one(A, S, eps, delta, start, opts)
            if best is None or result.re_lambda > best.re_lambda:
                best = result
    return best


def with_options(opts, **changes):
    return replace(opts or InnerOptions(), **changes)
