"""Finite probability distributions in exact fixed-point arithmetic.

Masses are stored as 64-bit integer numerators over the fixed denominator
``DENOMINATOR`` = 10**9.  This makes compatibility verdicts (module
``transport``) exact integer comparisons instead of float-tolerance calls.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .errors import (
    DuplicateLabel,
    EmptyData,
    MassSumOutOfTolerance,
    NegativeMass,
    SupportMismatch,
)

#: Fixed-point denominator for all probability masses.
DENOMINATOR = 10**9

#: Tolerance on the pre-rounding sum of input masses (matches the resolution).
SUM_TOLERANCE = 1e-9

Label = Hashable


@dataclass(frozen=True)
class FiniteDistribution:
    """A labeled finite support with nonnegative fixed-point masses summing to one.

    ``support`` preserves insertion order; ``numerators`` are integer masses
    over :data:`DENOMINATOR`.  Instances are immutable and safe to share.
    """

    support: tuple[Label, ...]
    numerators: tuple[int, ...]

    def __post_init__(self):
        if len(self.support) != len(self.numerators):
            raise SupportMismatch("support and mass lists differ in length")
        if len(set(self.support)) != len(self.support):
            raise DuplicateLabel("support labels must be distinct")
        if any(n < 0 for n in self.numerators):
            raise NegativeMass("fixed-point masses must be nonnegative")
        if sum(self.numerators) != DENOMINATOR:
            raise MassSumOutOfTolerance(
                f"fixed-point masses sum to {sum(self.numerators)}, expected {DENOMINATOR}"
            )

    def __len__(self):
        return len(self.support)

    @property
    def masses(self) -> tuple[float, ...]:
        return tuple(n / DENOMINATOR for n in self.numerators)

    def index(self, label: Label) -> int:
        return self.support.index(label)

    def numerator(self, label: Label) -> int:
        """Integer mass of ``label`` (0 if absent)."""
        try:
            return self.numerators[self.support.index(label)]
        except ValueError:
            return 0

    def mass(self, label: Label) -> float:
        return self.numerator(label) / DENOMINATOR

    def to_json(self) -> dict:
        return {
            "support": [str(lab) for lab in self.support],
            "mass": list(self.numerators),
            "denominator": DENOMINATOR,
        }

    @staticmethod
    def from_json(obj: dict) -> "FiniteDistribution":
        denom = obj.get("denominator", DENOMINATOR)
        if denom != DENOMINATOR:
            # rescale exactly where possible, otherwise round
            numers = _round_preserving_sum(
                [m / denom for m in obj["mass"]]
            )
        else:
            numers = [int(m) for m in obj["mass"]]
        return FiniteDistribution(tuple(obj["support"]), tuple(numers))


def _round_preserving_sum(values: Sequence[float]) -> list[int]:
    """Round probabilities to fixed point; assign the residual to the largest mass."""
    numers = [round(v * DENOMINATOR) for v in values]
    residual = DENOMINATOR - sum(numers)
    if residual:
        k = max(range(len(numers)), key=lambda i: (numers[i], -i))
        numers[k] += residual
        if numers[k] < 0:
            raise MassSumOutOfTolerance("rounding residual exceeds the largest mass")
    return numers


def make_distribution(pairs: Iterable[tuple[Label, float]]) -> FiniteDistribution:
    """Build a distribution from (label, mass) pairs.

    Masses must be nonnegative and sum to 1 within 1e-9 before fixed-point
    rounding; a rounding residual is absorbed by the largest mass.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyData("cannot build a distribution from an empty list")
    labels = [lab for lab, _ in pairs]
    if len(set(labels)) != len(labels):
        raise DuplicateLabel(f"duplicate labels in {labels}")
    values = [float(m) for _, m in pairs]
    if any(v < 0 for v in values):
        raise NegativeMass(f"negative mass in {values}")
    total = sum(values)
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise MassSumOutOfTolerance(f"masses sum to {total!r}, expected 1 within {SUM_TOLERANCE}")
    return FiniteDistribution(tuple(labels), tuple(_round_preserving_sum(values)))


def empirical(observations: Sequence[Label]) -> FiniteDistribution:
    """Empirical distribution of a sample: mass of each label is count/n.

    Support is the distinct observed labels in first-appearance order.
    """
    if not observations:
        raise EmptyData("empirical distribution of an empty sample")
    counts: dict[Label, int] = {}
    for y in observations:
        counts[y] = counts.get(y, 0) + 1
    n = len(observations)
    return make_distribution((lab, c / n) for lab, c in counts.items())


def total_variation(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """Total variation distance: the largest excess of p over q on any subset.

    Equals sum_y max(p(y) - q(y), 0) on finite supports.
    """
    return total_variation_fp(p, q) / DENOMINATOR


def total_variation_fp(p: FiniteDistribution, q: FiniteDistribution) -> int:
    """Exact fixed-point total variation (integer numerator)."""
    labels = list(p.support) + [lab for lab in q.support if lab not in set(p.support)]
    return sum(max(p.numerator(lab) - q.numerator(lab), 0) for lab in labels)


def align(p: FiniteDistribution, support: Sequence[Label]) -> FiniteDistribution:
    """Re-express ``p`` on ``support`` (in that order), zero-filling missing labels.

    Every label of ``p`` must appear in ``support``.
    """
    missing = [lab for lab in p.support if lab not in set(support)]
    if missing:
        raise SupportMismatch(f"labels {missing} not present in the target support")
    return FiniteDistribution(tuple(support), tuple(p.numerator(lab) for lab in support))
