"""Sampled certification of transient bounds.

Two time-uniform bounds hold for every structured perturbation ``Delta`` in S
with ``||Delta||_F`` up to the structured eps-stability radius:

* ``||exp(t (A + Delta))||_2 <= |Gamma| / (2 pi eps)`` where Gamma is the
  left-half-plane part of a contour around the (eps + delta)-pseudospectrum
  of A, closed by segments of the imaginary axis;
* the L2 input-output bound ``||y||_{L2(0,T)} <= ||f||_{L2(0,T)} / eps`` for
  ``y' = (A + Delta) y + f``, ``y(0) = 0``.

These routines evaluate the first bound from a resolvent grid and check
both on sampled perturbations. Results are sampled certification only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import shapely
from shapely.geometry import Polygon, box

from .errors import ContourEscapesWindow, OpenContour, StepSizeUnstable
from .pseudospectra import ResolventField, level_contours, make_rng, sample_structured

__all__ = [
    "ContourBound",
    "TransientSimulation",
    "L2Report",
    "contour_bound",
    "exp_norms",
    "simulate",
    "verify_l2_bound",
]

LABEL = "sampled certification"


@dataclass
class ContourBound:
    gamma_length: float
    eps: float
    bound: float
    contours: list  # closed polylines (complex arrays), first point == last point

    @property
    def contour(self):
        """The longest closed polyline of Gamma."""
        return max(self.contours, key=len)


def contour_bound(A, S, eps, delta, field: ResolventField) -> ContourBound:
    """Evaluate ``|Gamma| / (2 pi eps)`` from a resolvent grid.

    ``field`` must cover the (eps + delta)-pseudospectrum of ``A``; see
    :func:`stabrad.pseudospectra.enclosing_grid`. ``S`` is not used by the
    computation: the bound is valid for Delta in S with ``||Delta||_F <= delta``
    when delta does not exceed the structured radius (not checked here).

    Raises
    ------
    ContourEscapesWindow
        If the level set reaches the boundary of the grid window.
    OpenContour
        If clipping to the left half-plane leaves nothing to close.
    """
    level = eps + delta
    vals = field.values
    edges = np.concatenate([vals[0], vals[-1], vals[:, 0], vals[:, -1]])
    if np.any(edges <= level):
        raise ContourEscapesWindow(
            f"the {level:g}-pseudospectrum reaches the boundary of the grid window"
        )
    curves = level_contours(field, level)
    if not curves:
        raise ContourEscapesWindow(f"no {level:g}-level set inside the grid window")

    region = None
    for c in curves:
        if abs(c[0] - c[-1]) > 1e-9:
            raise ContourEscapesWindow("open level curve; enlarge the grid window")
        poly = Polygon(np.column_stack([c.real, c.imag]))
        if not poly.is_valid:
            poly = shapely.make_valid(poly)
        # even-odd combination turns nested curves into holes
        region = poly if region is None else region.symmetric_difference(poly)

    g = field.grid
    left = box(g.re_min - 1.0, g.im_min - 1.0, 0.0, g.im_max + 1.0)
    clipped = region.intersection(left)
    if clipped.is_empty or clipped.area == 0:
        raise OpenContour("the level set has no part in the closed left half-plane")

    contours = []
    for geom in getattr(clipped, "geoms", [clipped]):
        if geom.geom_type != "Polygon":
            continue
        for ring in [geom.exterior, *geom.interiors]:
            xy = np.asarray(ring.coords)
            contours.append(np.minimum(xy[:, 0], 0.0) + 1j * xy[:, 1])
    length = float(clipped.length)
    return ContourBound(gamma_length=length, eps=eps, bound=length / (2 * np.pi * eps), contours=contours)


def exp_norms(M, ts):
    """``||exp(t M)||_2`` for each ``t`` (scaling-and-squaring Pade)."""
    M = np.asarray(M)
    return np.array([np.linalg.norm(sla.expm(t * M), 2) for t in ts])


@dataclass
class TransientSimulation:
    time_grid: np.ndarray
    forcing: np.ndarray  # (n_steps + 1, n) or (m, n_steps + 1, n)
    solution: np.ndarray
    l2_input: np.ndarray
    l2_output: np.ndarray


@dataclass
class L2Report:
    eps: float
    delta: float
    n_samples: int
    max_ratio: float
    bound: float
    violations: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    tol_quad: float = 5e-3

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self):
        return {
            "label": LABEL,
            "eps": self.eps,
            "delta": self.delta,
            "n_samples": self.n_samples,
            "max_ratio": self.max_ratio,
            "bound": self.bound,
            "tol_quad": self.tol_quad,
            "violations": self.violations,
        }


def _forcing_fn(forcing, n, m, T, n_steps, rng, omega=None, w=None, hold=None):
    """Build ``f(t_index, stage_offset) -> (m, n)`` plus a flag for step-constant input."""
    h = T / n_steps
    if isinstance(forcing, str) and forcing == "noise":
        hold = hold or max(1, n_steps // 200)
        n_blocks = n_steps // hold + 1
        blocks = rng.standard_normal((m, n_blocks, n)) + 1j * rng.standard_normal((m, n_blocks, n))

        def f(k, _frac):
            return blocks[:, min(k // hold, n_blocks - 1)]

        return f, True
    if isinstance(forcing, str) and forcing == "harmonic":
        if omega is None:
            raise ValueError("harmonic forcing needs omega")
        vec = np.ones(n, dtype=complex) / np.sqrt(n) if w is None else np.asarray(w, dtype=complex)

        def f(k, frac):
            return np.broadcast_to(np.exp(1j * omega * (k + frac) * h) * vec, (m, n))

        return f, False
    if callable(forcing):
        def f(k, frac):
            return np.broadcast_to(np.asarray(forcing((k + frac) * h), dtype=complex), (m, n))

        return f, False
    samples = np.asarray(forcing, dtype=complex)
    if samples.shape != (n_steps + 1, n):
        raise ValueError(f"custom forcing samples must have shape {(n_steps + 1, n)}")

    def f(k, frac):
        lo = samples[min(k, n_steps)]
        hi = samples[min(k + 1, n_steps)]
        return np.broadcast_to((1 - frac) * lo + frac * hi, (m, n))

    return f, False


def simulate(Ms, forcing, T, n_steps, rng=None, omega=None, w=None, keep=None):
    """Integrate ``y' = M y + f``, ``y(0) = 0`` with classical RK4.

    ``Ms`` is a single matrix or a stack of shape (m, n, n); all systems are
    advanced together. ``forcing`` is ``"noise"`` (complex Gaussian,
    piecewise constant), ``"harmonic"`` (``exp(i omega t) w``), a callable of
    ``t``, or an array of samples on the time grid (linearly interpolated).

    L2 norms use the trapezoidal rule; for piecewise-constant noise the input
    norm is integrated exactly per step. Trajectories are stored only when
    ``keep`` is true (default: for a single matrix).
    """
    Ms = np.asarray(Ms, dtype=complex)
    single = Ms.ndim == 2
    if single:
        Ms = Ms[None]
    keep = single if keep is None else keep
    m, n, _ = Ms.shape
    rng = rng if rng is not None else make_rng(0)
    f, stepwise = _forcing_fn(forcing, n, m, T, n_steps, rng, omega, w)
    h = T / n_steps
    t = np.linspace(0.0, T, n_steps + 1)
    y = np.zeros((m, n), dtype=complex)
    ny2 = np.zeros((n_steps + 1, m))
    nf2 = np.zeros((n_steps + 1, m))
    if keep:
        ys = np.zeros((n_steps + 1, m, n), dtype=complex)
        fs = np.zeros((n_steps + 1, m, n), dtype=complex)

    def rhs(yy, ff):
        return np.einsum("mij,mj->mi", Ms, yy) + ff

    for k in range(n_steps):
        f0 = f(k, 0.0)
        fm = f(k, 0.5)
        f1 = f0 if stepwise else f(k, 1.0)
        nf2[k] = np.sum(np.abs(f0) ** 2, axis=1)
        k1 = rhs(y, f0)
        k2 = rhs(y + 0.5 * h * k1, fm)
        k3 = rhs(y + 0.5 * h * k2, fm)
        k4 = rhs(y + h * k3, f1)
        if keep:
            fs[k] = f0
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)) or np.abs(y).max() > 1e150:
            raise StepSizeUnstable(f"solution overflowed at t = {t[k + 1]:.4g}; increase n_steps")
        ny2[k + 1] = np.sum(np.abs(y) ** 2, axis=1)
        if keep:
            ys[k + 1] = y
    f_end = f(n_steps, 0.0)
    nf2[n_steps] = np.sum(np.abs(f_end) ** 2, axis=1)

    l2_out = np.sqrt(np.trapezoid(ny2, t, axis=0))
    if stepwise:
        l2_in = np.sqrt(h * nf2[:-1].sum(axis=0))
    else:
        l2_in = np.sqrt(np.trapezoid(nf2, t, axis=0))
    if keep:
        fs[n_steps] = f_end
        ys, fs = ys.transpose(1, 0, 2), fs.transpose(1, 0, 2)
    else:
        ys = fs = None
    if single:
        return TransientSimulation(t, fs[0] if keep else None, ys[0] if keep else None, l2_in[0], l2_out[0])
    return TransientSimulation(t, fs, ys, l2_in, l2_out)


def verify_l2_bound(
    A,
    S,
    eps_used,
    delta,
    n_perturbations=100,
    forcing="noise",
    T=50.0,
    n_steps=10000,
    rng_seed=0,
    extremal=None,
    omega=None,
    w=None,
    tol_quad=5e-3,
):
    """Check ``||y||_L2 <= ||f||_L2 / eps`` on sampled structured perturbations.

    Draws ``n_perturbations`` matrices Delta in S with ``||Delta||_F <= delta``
    (plus ``extremal`` if given), simulates each with its own forcing
    realization, and reports the largest observed ratio. A sample violates
    the bound if its ratio exceeds ``(1 + tol_quad) / eps_used``.
    """
    A = np.asarray(A)
    n = A.shape[0]
    rng = make_rng(rng_seed)
    deltas = [sample_structured(S, delta, rng) for _ in range(n_perturbations)]
    if extremal is not None:
        deltas.append(np.asarray(extremal))
    Ms = np.array([A + D for D in deltas], dtype=complex)
    sim = simulate(Ms, forcing, T, n_steps, rng=rng, omega=omega, w=w)
    ratios = sim.l2_output / sim.l2_input
    bound = 1.0 / eps_used
    limit = bound * (1 + tol_quad)
    violations = [
        {"sample": int(i), "ratio": float(r)} for i, r in enumerate(ratios) if r > limit
    ]
    return L2Report(
        eps=float(eps_used),
        delta=float(delta),
        n_samples=len(deltas),
        max_ratio=float(ratios.max()),
        bound=bound,
        violations=violations,
        ratios=[float(r) for r in ratios],
        tol_quad=tol_quad,
    )
