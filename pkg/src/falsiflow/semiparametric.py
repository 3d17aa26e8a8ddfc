"""Moment-restriction compatibility: the dual statistic over multipliers and
its primal LP oracle.

The model fixes the correspondence but restricts the latent distribution only
through E[m_i(U)] = 0.  Compatibility is decided by the finite-dimensional
concave program

    T(P) = sup_lambda  sum_y P(y) * min_u [ 1{y not admissible for u} - lambda'm(u) ],

maximized here by projected supergradient ascent with an exact LP refinement;
T(P) = 0 certifies compatibility, a positive value falsifies the model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import lp
from .correspondence import Correspondence
from .errors import Diverged, Infeasible, LpFailure, SupportMismatch, UnknownOutcome
from .measure import FiniteDistribution, Label

#: Dual values at or below this threshold are read as "compatible".
COMPATIBILITY_THRESHOLD = 1e-6


@dataclass(frozen=True)
class SemiparametricModel:
    """Correspondence plus a moment matrix over the latent grid.

    ``moments[i, j]`` is the i-th moment function evaluated at the j-th latent
    grid node; the restriction on the latent distribution is E[m_i] = 0 for
    every row.  ``truncated`` flags grids obtained by truncating an unbounded
    latent family.
    """

    correspondence: Correspondence
    moments: np.ndarray
    truncated: bool = False

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.moments, dtype=float))
        if m.size == 0:
            m = m.reshape(0, len(self.correspondence.latent_support))
        object.__setattr__(self, "moments", m)
        if m.shape[1] != len(self.correspondence.latent_support):
            raise SupportMismatch(
                f"moment matrix has {m.shape[1]} columns, "
                f"expected {len(self.correspondence.latent_support)} (one per latent node)"
            )
        if not np.isfinite(m).all():
            raise SupportMismatch("moment values must be finite")

    @property
    def n_moments(self) -> int:
        return self.moments.shape[0]

    def cost_matrix(self) -> np.ndarray:
        """1 where the outcome is inadmissible for the latent node, else 0."""
        return 1.0 - self.correspondence.adjacency_matrix().astype(float)


@dataclass
class AscentOptions:
    """Knobs of the projected supergradient ascent."""

    box: float = 1e3                 # sup-norm bound on the multiplier
    step_a: float = 1.0              # step size a / (k + b)
    step_b: float = 10.0
    max_iter: int = 100_000
    stall_tol: float = 1e-10         # stop when best improves less than this ...
    stall_window: int = 500          # ... over this many iterations
    threshold: float = COMPATIBILITY_THRESHOLD
    refine: bool = True              # exact LP polish of the running best


@dataclass(frozen=True)
class DualCertificate:
    T: float
    lambda_star: np.ndarray
    minimizer_map: dict[Label, Label]    # outcome -> latent node attaining the inner min
    trace: tuple[tuple[float, float, float], ...]  # (objective, step, supergradient norm)
    iterations: int
    threshold: float
    boundary_escalated: bool = False

    @property
    def compatible(self) -> bool:
        return self.T <= self.threshold

    def to_json(self) -> dict:
        return {
            "T": self.T,
            "lambda": [float(v) for v in self.lambda_star],
            "compatible": self.compatible,
            "threshold": self.threshold,
            "minimizers": {str(y): str(u) for y, u in self.minimizer_map.items()},
            "iterations": self.iterations,
        }


def _evaluate(model: SemiparametricModel, lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-outcome inner minimum and argmin indices at multiplier ``lam``."""
    cost = model.cost_matrix()
    penalty = -(lam @ model.moments) if model.n_moments else np.zeros(cost.shape[1])
    scores = cost + penalty[None, :]
    argmin = scores.argmin(axis=1)  # ties resolved at the smallest latent index
    return scores[np.arange(scores.shape[0]), argmin], argmin


def g_lambda(model: SemiparametricModel, y: Label, lam: Sequence[float]) -> tuple[float, Label]:
    """Inner minimum over latent nodes for a single outcome, with its argmin."""
    g = model.correspondence
    if y not in g.outcome_support:
        raise UnknownOutcome(f"outcome {y!r} is not in the model's outcome support")
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (model.n_moments,):
        raise SupportMismatch(f"multiplier has shape {lam.shape}, expected ({model.n_moments},)")
    values, argmin = _evaluate(model, lam)
    i = g.outcome_support.index(y)
    return float(values[i]), g.latent_support[int(argmin[i])]


def dual_objective(
    model: SemiparametricModel, p: FiniteDistribution, lam: Sequence[float]
) -> tuple[float, np.ndarray]:
    """Dual objective at ``lam`` and a supergradient of this concave function."""
    g = model.correspondence
    if p.support != g.outcome_support:
        raise SupportMismatch("p must live on the model's outcome support")
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (model.n_moments,):
        raise SupportMismatch(f"multiplier has shape {lam.shape}, expected ({model.n_moments},)")
    values, argmin = _evaluate(model, lam)
    weights = np.asarray(p.masses)
    value = float(weights @ values)
    if model.n_moments:
        grad = -(model.moments[:, argmin] @ weights)
    else:
        grad = np.zeros(0)
    return value, grad


def maximize_dual(
    model: SemiparametricModel, p: FiniteDistribution, opts: AscentOptions | None = None
) -> DualCertificate:
    """Maximize the dual objective over multipliers.

    Projected supergradient ascent inside a sup-norm box, tracking the running
    best; if the best sits on the box boundary the box is widened once by a
    factor of 10 and a persistent boundary hit raises :class:`Diverged`.  With
    ``refine`` the exact dual LP polishes the ascent result.
    """
    opts = opts or AscentOptions()
    g = model.correspondence
    if p.support != g.outcome_support:
        raise SupportMismatch("p must live on the model's outcome support")

    if model.n_moments == 0:
        value, _ = dual_objective(model, p, np.zeros(0))
        _, argmin = _evaluate(model, np.zeros(0))
        return DualCertificate(
            T=value,
            lambda_star=np.zeros(0),
            minimizer_map=_minimizer_map(model, argmin),
            trace=((value, 0.0, 0.0),),
            iterations=0,
            threshold=opts.threshold,
        )

    box = opts.box
    escalated = False
    while True:
        best, best_lam, trace, iters = _ascend(model, p, box, opts)
        on_boundary = np.abs(best_lam).max() >= box * (1.0 - 1e-12)
        if not on_boundary:
            break
        if escalated:
            raise Diverged(
                f"dual multiplier still active on the box boundary at {box}; "
                "the supremum appears not to be attained (Slater-type failure)",
                trace=trace,
            )
        escalated = True
        box *= 10.0

    if opts.refine:
        refined = _refine_lp(model, p)
        if refined is None:
            raise Diverged(
                "the exact dual program is unbounded; the supremum is not attained",
                trace=trace,
            )
        value, lam = refined
        if value > best:
            best, best_lam = value, lam

    _, argmin = _evaluate(model, best_lam)
    return DualCertificate(
        T=best,
        lambda_star=best_lam,
        minimizer_map=_minimizer_map(model, argmin),
        trace=tuple(trace),
        iterations=iters,
        threshold=opts.threshold,
        boundary_escalated=escalated,
    )


def _minimizer_map(model: SemiparametricModel, argmin: np.ndarray) -> dict[Label, Label]:
    g = model.correspondence
    return {y: g.latent_support[int(j)] for y, j in zip(g.outcome_support, argmin)}


def _ascend(model, p, box, opts):
    cost = model.cost_matrix()
    weights = np.asarray(p.masses)
    moments = model.moments
    lam = np.zeros(model.n_moments)
    best = -np.inf
    best_lam = lam.copy()
    trace: list[tuple[float, float, float]] = []
    history: list[float] = []
    iters = 0
    arange = np.arange(cost.shape[0])
    for k in range(opts.max_iter):
        scores = cost - (lam @ moments)[None, :]
        argmin = scores.argmin(axis=1)
        value = float(weights @ scores[arange, argmin])
        grad = -(moments[:, argmin] @ weights)
        if value > best:
            best, best_lam = value, lam.copy()
        step = opts.step_a / (k + opts.step_b)
        gnorm = float(np.linalg.norm(grad))
        trace.append((value, step, gnorm))
        history.append(best)
        iters = k + 1
        if k >= opts.stall_window and best - history[k - opts.stall_window] < opts.stall_tol:
            break
        lam = np.clip(lam + step * grad, -box, box)
    return best, best_lam, trace, iters


def _refine_lp(model: SemiparametricModel, p: FiniteDistribution):
    """Exact dual LP: max sum_y P(y) f_y  s.t.  f_y + lambda'm(u) <= cost(y, u).

    Returns (value, lambda) or None when unbounded.
    """
    g = model.correspondence
    n_y = len(g.outcome_support)
    d = model.n_moments
    cost = model.cost_matrix()
    weights = np.asarray(p.masses)

    rows = []
    rhs = []
    for i in range(n_y):
        for j in range(len(g.latent_support)):
            row = np.zeros(n_y + d)
            row[i] = 1.0
            row[n_y:] = model.moments[:, j]
            rows.append(row)
            rhs.append(cost[i, j])
    # free variables: shift by a large finite lower bound is avoided by
    # splitting into positive and negative parts
    a = np.array(rows)
    a2 = np.hstack([a, -a])
    c2 = np.concatenate([-weights, np.zeros(d), weights, np.zeros(d)])
    program = lp.LinearProgram(c=c2, a=a2, b=np.array(rhs), senses=("<=",) * len(rhs))
    sol = lp.solve(program)
    if sol.status is lp.Status.UNBOUNDED:
        return None
    if sol.status is not lp.Status.OPTIMAL:
        raise LpFailure(f"dual refinement LP returned {sol.status}")
    x = sol.x[: n_y + d] - sol.x[n_y + d :]
    return -float(sol.objective), x[n_y:]


def primal_lp(
    model: SemiparametricModel, p: FiniteDistribution
) -> tuple[float, np.ndarray]:
    """Minimal violation mass over couplings whose latent marginal satisfies
    the moment restrictions.

    Returns the optimum and an optimal joint-mass matrix pi[outcome, latent].
    Raises :class:`Infeasible` when no latent distribution on the grid meets
    the moments.
    """
    g = model.correspondence
    if p.support != g.outcome_support:
        raise SupportMismatch("p must live on the model's outcome support")
    n_y, n_u = len(g.outcome_support), len(g.latent_support)
    cost = model.cost_matrix()

    rows = []
    rhs = []
    senses = []
    for i in range(n_y):
        row = np.zeros(n_y * n_u)
        row[i * n_u : (i + 1) * n_u] = 1.0
        rows.append(row)
        rhs.append(p.masses[i])
        senses.append("=")
    for mi in model.moments:
        scale = np.abs(mi).max()
        scaled = mi / scale if scale > 0 else mi
        rows.append(np.tile(scaled, n_y))
        rhs.append(0.0)
        senses.append("=")
    program = lp.LinearProgram(
        c=cost.ravel(), a=np.array(rows), b=np.array(rhs), senses=tuple(senses)
    )
    sol = lp.solve(program)
    if sol.status is lp.Status.INFEASIBLE:
        raise Infeasible("no latent distribution on the grid satisfies the moment restrictions")
    if sol.status is not lp.Status.OPTIMAL:
        raise LpFailure(f"semiparametric primal LP returned {sol.status}")
    return float(sol.objective), sol.x.reshape(n_y, n_u)


def moment_diagnostics(model: SemiparametricModel) -> dict:
    """Boundedness report for the moment functions on the latent grid.

    Bounded moments on a finite grid satisfy the uniform-integrability,
    tightness and Slater requirements, so the dual value is conclusive; a grid
    obtained by truncating an unbounded latent family is flagged.
    """
    if model.n_moments == 0:
        return {
            "n_moments": 0,
            "max_moment_norm": 0.0,
            "bounded": True,
            "uniform_integrability": True,
            "tightness": True,
            "slater": True,
            "truncated_grid": model.truncated,
            "notes": ["no moment restrictions: the latent distribution is unrestricted"],
        }
    norms = np.linalg.norm(model.moments, axis=0)
    notes = []
    if model.truncated:
        notes.append(
            "grid truncates an unbounded latent family: conclusions hold for the "
            "truncated model only"
        )
    return {
        "n_moments": model.n_moments,
        "max_moment_norm": float(norms.max()),
        "bounded": True,
        "uniform_integrability": True,
        "tightness": True,
        "slater": True,
        "truncated_grid": model.truncated,
        "notes": notes,
    }
