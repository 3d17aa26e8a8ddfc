"""Set-valued model correspondences, capacity functionals and Core utilities.

A :class:`Correspondence` links a finite latent support to a finite outcome
support; the induced capacity of an outcome set A is the latent mass whose
image touches A.  A distribution of outcomes is compatible with the model
exactly when no outcome set carries more probability than its capacity; the
brute-force maximizer of that deficiency is the falsification witness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Iterator, Mapping, Sequence

import numpy as np

from .errors import EmptyImage, SupportMismatch, SupportTooLarge, TooManySelections
from .measure import DENOMINATOR, FiniteDistribution, Label

#: Guard on exhaustive subset enumeration.
BRUTEFORCE_MAX_OUTCOMES = 20

#: Guard on selection enumeration (product of image sizes).
MAX_SELECTIONS = 10**6


@dataclass(frozen=True)
class Correspondence:
    """Bipartite relation between latent and outcome supports.

    ``image`` holds, for each latent label (in ``latent_support`` order), the
    bitset of admissible outcome indices.  Images must be nonempty.
    """

    latent_support: tuple[Label, ...]
    outcome_support: tuple[Label, ...]
    image: tuple[int, ...]

    def __post_init__(self):
        if len(self.image) != len(self.latent_support):
            raise SupportMismatch("one image bitset per latent label required")
        full = (1 << len(self.outcome_support)) - 1
        for u, bits in zip(self.latent_support, self.image):
            if bits == 0:
                raise EmptyImage(f"latent point {u!r} has an empty outcome set")
            if bits & ~full:
                raise SupportMismatch(f"latent point {u!r} references outcome indices out of range")

    @staticmethod
    def from_map(
        mapping: Mapping[Label, Sequence[Label]],
        outcome_support: Sequence[Label] | None = None,
    ) -> "Correspondence":
        """Build from {latent label: admissible outcome labels}."""
        latents = tuple(mapping.keys())
        if outcome_support is None:
            seen: dict[Label, None] = {}
            for ys in mapping.values():
                for y in ys:
                    seen.setdefault(y)
            outcome_support = tuple(seen)
        outcome_support = tuple(outcome_support)
        index = {y: i for i, y in enumerate(outcome_support)}
        image = []
        for u in latents:
            bits = 0
            for y in mapping[u]:
                if y not in index:
                    raise SupportMismatch(f"outcome {y!r} of latent {u!r} not in the outcome support")
                bits |= 1 << index[y]
            image.append(bits)
        return Correspondence(latents, outcome_support, tuple(image))

    def outcomes_of(self, u: Label) -> tuple[Label, ...]:
        bits = self.image[self.latent_support.index(u)]
        return self.labels_of(bits)

    def labels_of(self, bits: int) -> tuple[Label, ...]:
        return tuple(y for i, y in enumerate(self.outcome_support) if bits >> i & 1)

    def bitset_of(self, labels: Sequence[Label]) -> int:
        index = {y: i for i, y in enumerate(self.outcome_support)}
        bits = 0
        for y in labels:
            if y not in index:
                raise SupportMismatch(f"unknown outcome label {y!r}")
            bits |= 1 << index[y]
        return bits

    def extend_outcomes(self, extra: Sequence[Label]) -> "Correspondence":
        """Append outcome labels with empty preimage (capacity 0)."""
        new = [y for y in extra if y not in set(self.outcome_support)]
        if not new:
            return self
        return Correspondence(self.latent_support, self.outcome_support + tuple(new), self.image)

    def adjacency_matrix(self) -> np.ndarray:
        """Boolean matrix, entry [i, j] true when outcome i is admissible for latent j."""
        mat = np.zeros((len(self.outcome_support), len(self.latent_support)), dtype=bool)
        for j, bits in enumerate(self.image):
            for i in range(len(self.outcome_support)):
                if bits >> i & 1:
                    mat[i, j] = True
        return mat

    def to_json(self) -> dict:
        return {
            "latent": [str(u) for u in self.latent_support],
            "outcomes": [str(y) for y in self.outcome_support],
            "G": {str(u): [str(y) for y in self.outcomes_of(u)] for u in self.latent_support},
        }

    @staticmethod
    def from_json(obj: dict) -> "Correspondence":
        mapping = {u: obj["G"][u] for u in obj["latent"]}
        return Correspondence.from_map(mapping, outcome_support=obj["outcomes"])


def preimage(g: Correspondence, a: int | Sequence[Label]) -> tuple[Label, ...]:
    """Latent labels whose image intersects the outcome set ``a``.

    ``a`` is a bitset over outcome indices or a sequence of outcome labels.
    """
    bits = a if isinstance(a, int) else g.bitset_of(a)
    return tuple(u for u, img in zip(g.latent_support, g.image) if img & bits)


def capacity(g: Correspondence, nu: FiniteDistribution, a: int | Sequence[Label]) -> float:
    """The Choquet capacity of outcome set ``a``: latent mass whose image touches it."""
    return capacity_fp(g, nu, a) / DENOMINATOR


def capacity_fp(g: Correspondence, nu: FiniteDistribution, a: int | Sequence[Label]) -> int:
    if nu.support != g.latent_support:
        raise SupportMismatch("nu must live on the latent support of the correspondence")
    bits = a if isinstance(a, int) else g.bitset_of(a)
    return sum(n for n, img in zip(nu.numerators, g.image) if img & bits)


@dataclass(frozen=True)
class DeficiencyReport:
    """Exhaustive maximum of P(A) - capacity(A) with a canonical witness."""

    value: float          # clamped at 0
    raw: float            # unclamped maximum
    value_fp: int
    raw_fp: int
    witness_bits: int
    witness: tuple[Label, ...]


def _subset_sum_transform(point_masses: np.ndarray, k: int) -> np.ndarray:
    """In-place zeta transform: out[A] = sum of point_masses over subsets of A."""
    arr = point_masses.copy()
    for bit in range(k):
        step = 1 << bit
        view = arr.reshape(-1, 2 * step)
        view[:, step:] += view[:, :step]
    return arr


def deficiency_table(
    g: Correspondence, nu: FiniteDistribution, p: FiniteDistribution
) -> np.ndarray:
    """Fixed-point deficiency P(A) - capacity(A) for every outcome subset A.

    Index ``A`` is the outcome-index bitset.  Exact int64 arithmetic.
    """
    k = len(g.outcome_support)
    if k > BRUTEFORCE_MAX_OUTCOMES:
        raise SupportTooLarge(f"{k} outcomes exceeds the brute-force guard ({BRUTEFORCE_MAX_OUTCOMES})")
    if p.support != g.outcome_support:
        raise SupportMismatch("p must live on the outcome support of the correspondence")
    if nu.support != g.latent_support:
        raise SupportMismatch("nu must live on the latent support of the correspondence")

    size = 1 << k
    p_point = np.zeros(size, dtype=np.int64)
    for i, n in enumerate(p.numerators):
        p_point[1 << i] = n
    p_of = _subset_sum_transform(p_point, k)

    # capacity(A) = 1 - mass of latents whose whole image avoids A
    inside = np.zeros(size, dtype=np.int64)
    for n, img in zip(nu.numerators, g.image):
        inside[img] += n
    h = _subset_sum_transform(inside, k)          # h[B] = nu{u : image(u) subset of B}
    flip = (size - 1) ^ np.arange(size)
    cap = DENOMINATOR - h[flip]
    return p_of - cap


def _canonical_argmax(table: np.ndarray) -> int:
    """Maximizer bitset with smallest cardinality, ties by lexicographic index order."""
    best = int(table.max())
    candidates = np.flatnonzero(table == best)
    popcounts = np.array([int(a).bit_count() for a in candidates])
    candidates = candidates[popcounts == popcounts.min()]

    def lex_key(mask: int) -> tuple:
        return tuple(i for i in range(64) if mask >> i & 1)

    return int(min((int(a) for a in candidates), key=lex_key))


def core_deficiency_bruteforce(
    g: Correspondence, nu: FiniteDistribution, p: FiniteDistribution
) -> DeficiencyReport:
    """Exhaustively maximize P(A) - capacity(A) over all outcome subsets.

    The maximum is nonnegative (the empty set attains 0); a strictly positive
    value falsifies the model and the witness is the canonical maximizer.
    """
    table = deficiency_table(g, nu, p)
    raw = int(table.max())
    bits = _canonical_argmax(table)
    value = max(raw, 0)
    return DeficiencyReport(
        value=value / DENOMINATOR,
        raw=raw / DENOMINATOR,
        value_fp=value,
        raw_fp=raw,
        witness_bits=bits,
        witness=g.labels_of(bits),
    )


def enumerate_selections(g: Correspondence) -> Iterator[dict[Label, Label]]:
    """Yield every single-valued map u -> y with y admissible for u.

    Lexicographic over the per-latent outcome index choices.
    """
    choices = []
    count = 1
    for bits in g.image:
        opts = [i for i in range(len(g.outcome_support)) if bits >> i & 1]
        count *= len(opts)
        if count > MAX_SELECTIONS:
            raise TooManySelections(f"more than {MAX_SELECTIONS} selections")
        choices.append(opts)
    for combo in itertools.product(*choices):
        yield {u: g.outcome_support[i] for u, i in zip(g.latent_support, combo)}


@dataclass(frozen=True)
class MinimaxReport:
    """Diagnostic comparison of the selection minimax with the capacity deficiency."""

    lhs: float
    rhs: float
    lhs_fp: int
    rhs_fp: int
    equal: bool
    best_selection: dict[Label, Label]


def selection_minimax_check(
    g: Correspondence, nu: FiniteDistribution, p: FiniteDistribution
) -> MinimaxReport:
    """Compare min over selections of the worst-set excess with the capacity bound.

    lhs = min_s max_A [P(A) - (nu s^{-1})(A)]; rhs is the brute-force deficiency.
    Reported, not asserted: the equality is known to hold only under conditions
    on the instance.
    """
    rhs = core_deficiency_bruteforce(g, nu, p)
    best_fp = None
    best_sel: dict[Label, Label] = {}
    index = {y: i for i, y in enumerate(g.outcome_support)}
    for sel in enumerate_selections(g):
        push = [0] * len(g.outcome_support)
        for n, u in zip(nu.numerators, g.latent_support):
            push[index[sel[u]]] += n
        tv = sum(max(pn - qn, 0) for pn, qn in zip(p.numerators, push))
        if best_fp is None or tv < best_fp:
            best_fp, best_sel = tv, sel
    assert best_fp is not None
    return MinimaxReport(
        lhs=best_fp / DENOMINATOR,
        rhs=rhs.value,
        lhs_fp=best_fp,
        rhs_fp=rhs.value_fp,
        equal=best_fp == rhs.value_fp,
        best_selection=best_sel,
    )
