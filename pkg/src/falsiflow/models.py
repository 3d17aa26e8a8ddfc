"""Concrete model instances: multiple-equilibria games, the binary-response
pilot, moment-inequality models, and seeded simulators.

Outcome and latent labels are canonical strings (tuples render as "(a,b)" with
no spaces) except for the search model, whose outcomes are effort levels and
stay numeric so half-line statistics can order them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .correspondence import Correspondence, capacity_fp
from .errors import (
    BadParameters,
    BadRule,
    GridTooCoarse,
    NotMonotone,
    SupportMismatch,
)
from .measure import DENOMINATOR, FiniteDistribution, Label, make_distribution
from .semiparametric import SemiparametricModel

#: Dummy outcome standing in for an empty image; always carries P-mass zero.
SLACK_OUTCOME = "__slack__"

#: Default node count per epsilon dimension (odd, so a node sits at 0).
DEFAULT_NODES = 41


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def tuple_label(*values) -> str:
    """Canonical string label for a tuple-valued outcome or latent point."""
    return "(" + ",".join(_fmt(v) for v in values) + ")"


@dataclass(frozen=True)
class LatentGrid:
    """Discretization of a continuous latent space."""

    nodes: tuple[Label, ...]
    coords: np.ndarray                      # one row of coordinates per node
    weights: FiniteDistribution | None = None
    truncated: bool = False
    step: float | None = None

    def __post_init__(self):
        coords = np.atleast_2d(np.asarray(self.coords, dtype=float))
        object.__setattr__(self, "coords", coords)
        if coords.shape[0] != len(self.nodes):
            raise SupportMismatch("one coordinate row per grid node required")
        if self.weights is not None and self.weights.support != self.nodes:
            raise SupportMismatch("grid weights must live on the grid nodes")


def uniform_grid_2d(lo: float, hi: float, cells: int) -> LatentGrid:
    """Cell-midpoint discretization of [lo, hi]^2 with equal cell masses.

    Midpoints make region masses of axis-aligned rectangles exact area ratios.
    """
    step = (hi - lo) / cells
    mids = lo + step * (np.arange(cells) + 0.5)
    coords = np.array([(a, b) for a in mids for b in mids])
    nodes = tuple(tuple_label(a, b) for a, b in coords)
    weights = make_distribution((n, 1.0 / len(nodes)) for n in nodes)
    return LatentGrid(nodes=nodes, coords=coords, weights=weights, step=step)


# ---------------------------------------------------------------------------
# Example games
# ---------------------------------------------------------------------------

LINE_NETWORK_OUTCOMES = ("(0,0,0)", "(0,1,1)", "(1,1,0)", "(1,1,1)")
LINE_NETWORK_REGIONS = ("000", "000|011", "000|110", "000|111")


def line_network_game(
    nu_region_masses: Sequence[float],
) -> tuple[Correspondence, FiniteDistribution]:
    """Three players on a line network; four latent regions of equilibrium sets.

    Region masses are (q_000, q_000|011, q_000|110, q_000|111) and must sum to 1.
    """
    if len(nu_region_masses) != 4:
        raise BadParameters("exactly 4 region masses required")
    nu = make_distribution(zip(LINE_NETWORK_REGIONS, nu_region_masses))
    g = Correspondence.from_map(
        {
            "000": ["(0,0,0)"],
            "000|011": ["(0,0,0)", "(0,1,1)"],
            "000|110": ["(0,0,0)", "(1,1,0)"],
            "000|111": ["(0,0,0)", "(1,1,1)"],
        },
        outcome_support=LINE_NETWORK_OUTCOMES,
    )
    return g, nu


ENTRY_OUTCOMES = ("(0,0)", "(0,1)", "(1,0)", "(1,1)")


def entry_equilibria(delta1: float, delta2: float, eps1: float, eps2: float) -> tuple[str, ...]:
    """Pure-strategy Nash equilibria of the two-firm entry game at one profit shifter."""
    eqs = []
    for y1 in (0, 1):
        for y2 in (0, 1):
            if y1 == int(delta2 * y2 + eps1 >= 0) and y2 == int(delta1 * y1 + eps2 >= 0):
                eqs.append(tuple_label(y1, y2))
    return tuple(eqs)


def entry_game(
    delta1: float,
    delta2: float,
    grid: LatentGrid | None = None,
    resolution: int = 40,
) -> tuple[Correspondence, FiniteDistribution]:
    """Two-firm entry game: regions of the profit-shifter grid, aggregated by
    equilibrium set, with the grid mass of each region as its latent weight.
    """
    if not (delta1 < 0 and delta2 < 0):
        raise BadParameters("monopoly profits must exceed duopoly profits (delta_i < 0)")
    if grid is None:
        grid = uniform_grid_2d(-2.0, 2.0, resolution)
    if grid.weights is None:
        raise BadParameters("the latent grid must carry weights")

    masses: dict[tuple[str, ...], int] = {}
    for node, (e1, e2) in zip(grid.nodes, grid.coords):
        eqs = entry_equilibria(delta1, delta2, e1, e2)
        if not eqs:
            raise BadParameters(f"no pure equilibrium at grid node {node}")
        masses[eqs] = masses.get(eqs, 0) + grid.weights.numerator(node)

    regions = sorted(masses, key=lambda eqs: tuple(ENTRY_OUTCOMES.index(y) for y in eqs))
    labels = ["{" + ",".join(eqs) + "}" for eqs in regions]
    nu = FiniteDistribution(tuple(labels), tuple(masses[eqs] for eqs in regions))
    g = Correspondence.from_map(
        {lab: list(eqs) for lab, eqs in zip(labels, regions)},
        outcome_support=ENTRY_OUTCOMES,
    )
    return g, nu


def search_game(
    alpha: Sequence[tuple[Label, float]], nu: FiniteDistribution
) -> tuple[Correspondence, FiniteDistribution]:
    """Search model: every gains-of-trade level admits zero effort or the
    symmetric equilibrium effort alpha(eps).

    ``alpha`` tabulates a strictly increasing map with values in [0, 1], keyed
    by the latent labels of ``nu``; outcomes are numeric effort levels.
    """
    labels = tuple(lab for lab, _ in alpha)
    values = [float(v) for _, v in alpha]
    if labels != nu.support:
        raise SupportMismatch("alpha must be tabulated on nu's support, in order")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise NotMonotone("alpha must be strictly increasing on the grid")
    if values and (values[0] < 0 or values[-1] > 1):
        raise NotMonotone("alpha values must lie in [0, 1]")
    outcomes = [0.0] + [v for v in values if v != 0.0]
    g = Correspondence.from_map(
        {lab: [0.0, v] if v != 0.0 else [0.0] for lab, v in zip(labels, values)},
        outcome_support=outcomes,
    )
    return g, nu


def interval_deficiency(
    g: Correspondence, nu: FiniteDistribution, p: FiniteDistribution
) -> tuple[int, tuple[Label, ...], str]:
    """Largest deficiency over interval outcome classes [min, y] and [y, max].

    Outcome labels must be totally ordered (numeric).  Returns the fixed-point
    maximum (at least 0, attained by the empty class), the maximizing class and
    its kind ("lower", "upper" or "empty").
    """
    order = sorted(range(len(g.outcome_support)), key=lambda i: g.outcome_support[i])
    best, best_bits, kind = 0, 0, "empty"
    for cut in range(len(order)):
        lower = sum(1 << i for i in order[: cut + 1])
        upper = sum(1 << i for i in order[cut:])
        for bits, name in ((lower, "lower"), (upper, "upper")):
            value = sum(
                n for i, n in enumerate(p.numerators) if bits >> i & 1
            ) - capacity_fp(g, nu, bits)
            if value > best:
                best, best_bits, kind = value, bits, name
    return best, g.labels_of(best_bits), kind


# ---------------------------------------------------------------------------
# Semiparametric instances
# ---------------------------------------------------------------------------

PILOT_OUTCOMES = ("(0,-1)", "(0,1)", "(1,-1)", "(1,1)")


def binary_response_pilot(
    eta: float, epsilon_grid: Sequence[float] | None = None
) -> SemiparametricModel:
    """Binary response with a conditional median restriction.

    Outcomes are (Z, X) with Z = 1{X + eps <= 0}; the latent grid is
    {-1, 1} x epsilon_grid and the two moment rows encode
    Pr(eps <= 0 | X = x) = eta for x = -1, 1.
    """
    if not 0.0 < eta < 1.0:
        raise BadParameters("eta must lie strictly inside (0, 1)")
    if epsilon_grid is None:
        epsilon_grid = np.linspace(-2.0, 2.0, DEFAULT_NODES)
    eps = np.asarray([round(float(e), 12) for e in epsilon_grid])
    for low, high, what in ((-np.inf, -1, "eps <= -1"), (-1, 0, "-1 < eps <= 0"),
                            (0, 1, "0 < eps <= 1"), (1, np.inf, "eps > 1")):
        if not ((eps > low) & (eps <= high)).any():
            raise GridTooCoarse(f"epsilon grid has no node with {what}")

    latents, mapping, m_plus, m_minus = [], {}, [], []
    for x in (-1, 1):
        for e in eps:
            lab = tuple_label(x, e)
            latents.append(lab)
            z = 1 if e <= -x else 0
            mapping[lab] = [tuple_label(z, x)]
            m_plus.append(((1 if e <= 0 else 0) - eta) * (1 + x))
            m_minus.append(((1 if e <= 0 else 0) - eta) * (1 - x))
    g = Correspondence.from_map(mapping, outcome_support=PILOT_OUTCOMES)
    return SemiparametricModel(correspondence=g, moments=np.array([m_plus, m_minus]))


def pilot_distribution(p_given_x1: float, p_given_xm1: float) -> FiniteDistribution:
    """Outcome distribution with X uniform on {-1, 1} and given Pr(Z=1 | X=x)."""
    return make_distribution(
        [
            ("(0,-1)", 0.5 * (1 - p_given_xm1)),
            ("(0,1)", 0.5 * (1 - p_given_x1)),
            ("(1,-1)", 0.5 * p_given_xm1),
            ("(1,1)", 0.5 * p_given_x1),
        ]
    )


def moment_inequality_model(
    outcomes: Sequence[Label],
    phi_values: Sequence[Sequence[float]],
    latent_grid: Sequence[Sequence[float]],
) -> SemiparametricModel:
    """Moment-inequality model E[phi_i(Y)] <= 0 in correspondence form.

    ``phi_values[k][i]`` is phi_i at outcome k; latent grid nodes are vectors u
    with image {y : u_i >= phi_i(y) for all i} and moments m(u) = u.  Nodes
    dominating no outcome map to the zero-mass slack outcome.
    """
    phi = np.atleast_2d(np.asarray(phi_values, dtype=float))
    grid = np.atleast_2d(np.asarray(latent_grid, dtype=float))
    if phi.shape[0] != len(outcomes):
        raise BadParameters("one phi row per outcome required")
    if grid.shape[1] != phi.shape[1]:
        raise BadParameters("latent grid dimension must match the number of phi components")

    support = tuple(outcomes) + (SLACK_OUTCOME,)
    mapping: dict[Label, list[Label]] = {}
    nodes = []
    covered = np.zeros(len(outcomes), dtype=bool)
    for row in grid:
        lab = tuple_label(*row) if row.size > 1 else _fmt(row[0])
        nodes.append(lab)
        dominated = (row[None, :] >= phi).all(axis=1)
        covered |= dominated
        admissible = [outcomes[k] for k in np.flatnonzero(dominated)]
        mapping[lab] = admissible if admissible else [SLACK_OUTCOME]
    if not covered.all():
        missing = [outcomes[k] for k in np.flatnonzero(~covered)]
        raise GridTooCoarse(f"no grid node dominates the phi values of outcomes {missing}")
    g = Correspondence.from_map(mapping, outcome_support=support)
    return SemiparametricModel(correspondence=g, moments=grid.T.copy())


def with_slack(p: FiniteDistribution) -> FiniteDistribution:
    """Extend an outcome distribution with the zero-mass slack outcome."""
    if SLACK_OUTCOME in p.support:
        return p
    return FiniteDistribution(p.support + (SLACK_OUTCOME,), p.numerators + (0,))


def example4_instance(
    m: int, p: FiniteDistribution | None = None
) -> tuple[SemiparametricModel, FiniteDistribution]:
    """Two-point latent family {1, 1-m} with E[U] = 0 and every real outcome
    admissible for u = 1 only.

    The zero-mean restriction forces latent mass 1/m onto 1-m, whose image is
    the zero-mass slack outcome, so the minimal violation mass is exactly 1/m;
    the infimum over the untruncated family would approach 0 without attaining it.
    """
    if m < 2:
        raise BadParameters("m must be an integer >= 2")
    if p is None:
        p = make_distribution([("y0", 1.0)])
    if SLACK_OUTCOME in p.support:
        raise BadParameters("p must live on real outcomes only")
    support = p.support + (SLACK_OUTCOME,)
    g = Correspondence.from_map(
        {"1": list(p.support), _fmt(1 - m): [SLACK_OUTCOME]},
        outcome_support=support,
    )
    model = SemiparametricModel(
        correspondence=g,
        moments=np.array([[1.0, float(1 - m)]]),
        truncated=True,
    )
    return model, with_slack(p)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SelectionRule:
    """Equilibrium-picking rule used by the simulator."""

    name: str = "first"                      # "first" | "uniform-random" | "custom"
    mapping: Mapping[Label, Label] | None = None

    def __post_init__(self):
        if self.name not in ("first", "uniform-random", "custom"):
            raise BadRule(f"unknown selection rule {self.name!r}")
        if self.name == "custom" and self.mapping is None:
            raise BadRule("custom rules require a latent -> outcome mapping")


def simulate(
    g: Correspondence,
    nu: FiniteDistribution,
    rule: SelectionRule,
    n: int,
    seed: int,
) -> list[Label]:
    """Draw n outcomes: latent points by inverse CDF on the fixed-point masses,
    then one admissible outcome per draw according to the selection rule.

    Identical (inputs, seed) give identical output sequences.
    """
    if nu.support != g.latent_support:
        raise SupportMismatch("nu must live on the latent support of the correspondence")
    choices: list[tuple[Label, ...]] = []
    for u in g.latent_support:
        admissible = g.outcomes_of(u)
        if rule.name == "first":
            choices.append((admissible[0],))
        elif rule.name == "custom":
            y = rule.mapping.get(u)
            if y is None or y not in admissible:
                raise BadRule(f"custom rule maps {u!r} to inadmissible outcome {y!r}")
            choices.append((y,))
        else:
            choices.append(admissible)
    if n == 0:
        return []
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    cum = np.cumsum(nu.numerators)
    draws = rng.integers(0, DENOMINATOR, size=n)
    latent_idx = np.searchsorted(cum, draws, side="right")
    out: list[Label] = []
    for j in latent_idx:
        opts = choices[j]
        out.append(opts[0] if len(opts) == 1 else opts[rng.integers(len(opts))])
    return out


def sample_distribution(p: FiniteDistribution, n: int, seed: int) -> list[Label]:
    """Draw n i.i.d. outcomes directly from a finite distribution."""
    identity = Correspondence.from_map({y: [y] for y in p.support}, outcome_support=p.support)
    nu = FiniteDistribution(p.support, p.numerators)
    return simulate(identity, nu, SelectionRule("first"), n, seed)
