"""Symmetric finite-range step laws on the integer lattice and their moments.

A step law puts weight ``zeta0`` on staying put and weight ``zeta[s][r-1]/2``
on each of the two moves ``+-r*e_s`` along axis ``s``.  The law is symmetric
by construction, so its mean is exactly zero.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from .errors import (
    DegenerateLazy,
    NegativeWeight,
    NonNormalized,
    Reducible,
    ZeroTopWeight,
)

NORMALIZATION_TOL = 1e-12
ZERO_WEIGHT_TOL = 1e-15


class WalkClass(enum.Enum):
    APERIODIC = "aperiodic"
    BIPARTITE = "bipartite"


@dataclass(frozen=True)
class StepLaw:
    """Validated symmetric finite-range increment law on Z^d.

    Attributes:
        d: lattice dimension.
        zeta0: probability of not moving, in [0, 1).
        weights: per-axis tuples; ``weights[s][r-1]`` is the total weight of
            the pair ``+-r*e_s`` (split evenly between the two signs).
    """

    d: int
    zeta0: float
    weights: tuple[tuple[float, ...], ...]

    @property
    def ranges(self) -> tuple[int, ...]:
        """Maximal range t_s per axis."""
        return tuple(len(w) for w in self.weights)

    @property
    def max_range(self) -> int:
        return max(self.ranges)

    def atoms(self):
        """Yield (point, probability) in the fixed canonical order.

        Order: axis-major, increasing r, minus before plus, lazy atom last.
        Only atoms with strictly positive probability are yielded.
        """
        for s in range(self.d):
            for r, w in enumerate(self.weights[s], start=1):
                if w > 0.0:
                    minus = tuple(-r if t == s else 0 for t in range(self.d))
                    plus = tuple(r if t == s else 0 for t in range(self.d))
                    yield minus, w / 2.0
                    yield plus, w / 2.0
        if self.zeta0 > 0.0:
            yield (0,) * self.d, self.zeta0


@dataclass(frozen=True)
class Moments:
    """Per-axis even moments of a step law and the derived trace scalars."""

    gamma2: tuple[float, ...]
    gamma4: tuple[float, ...]
    gamma6: tuple[float, ...]
    det_gamma2: float
    tr_g4g2m2: float
    tr_g6g2m3: float
    tr_g4sq_g2m4: float

    @property
    def d(self) -> int:
        return len(self.gamma2)


def validate(d: int, zeta0: float, weights) -> StepLaw:
    """Validate a raw step-law candidate and return the normalized law.

    ``weights`` is a sequence of per-axis sequences: ``weights[s][r-1]`` is
    the weight of the pair ``+-r*e_s``.  The weight sum is checked against 1
    to 1e-12 and then the law is renormalized exactly by dividing by the sum.

    Raises:
        NegativeWeight: some weight is negative.
        DegenerateLazy: zeta0 is not below 1.
        ZeroTopWeight: the top range on some axis has zero weight.
        Reducible: supported ranges on some axis have gcd > 1.
        NonNormalized: weights do not sum to 1 within tolerance.
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    zeta0 = float(zeta0)
    if zeta0 < 0.0:
        raise NegativeWeight(f"zeta0 = {zeta0} is negative")
    if zeta0 >= 1.0:
        raise DegenerateLazy(f"zeta0 = {zeta0} leaves no mass for moves")
    rows = [tuple(float(w) for w in axis) for axis in weights]
    if len(rows) != d:
        raise ValueError(f"expected {d} axis weight rows, got {len(rows)}")

    tiny = []
    for s, row in enumerate(rows):
        if not row:
            raise ZeroTopWeight(f"axis {s}: no ranges declared")
        for r, w in enumerate(row, start=1):
            if w < 0.0:
                raise NegativeWeight(f"axis {s}, range {r}: weight {w} < 0")
            if 0.0 < w < ZERO_WEIGHT_TOL:
                tiny.append((s, r))
    if tiny:
        warnings.warn(
            f"weights below {ZERO_WEIGHT_TOL} treated as zero at {tiny}",
            stacklevel=2,
        )
        rows = [
            tuple(0.0 if 0.0 < w < ZERO_WEIGHT_TOL else w for w in row)
            for row in rows
        ]

    total = zeta0 + sum(w for row in rows for w in row)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NonNormalized(f"weights sum to {total!r}, expected 1")

    for s, row in enumerate(rows):
        if row[-1] <= 0.0:
            raise ZeroTopWeight(f"axis {s}: top range {len(row)} has weight 0")
        support = [r for r, w in enumerate(row, start=1) if w > 0.0]
        if math.gcd(*support) != 1:
            raise Reducible(
                f"axis {s}: gcd of supported ranges {support} is > 1"
            )

    zeta0 /= total
    rows = tuple(tuple(w / total for w in row) for row in rows)
    return StepLaw(d=d, zeta0=zeta0, weights=rows)


def classify(law: StepLaw) -> WalkClass:
    """Bipartite iff the law cannot stay put and every supported range is odd."""
    if law.zeta0 > 0.0:
        return WalkClass.APERIODIC
    for row in law.weights:
        for r, w in enumerate(row, start=1):
            if w > 0.0 and r % 2 == 0:
                return WalkClass.APERIODIC
    return WalkClass.BIPARTITE


def moments(law: StepLaw) -> Moments:
    """Per-axis moments zeta_s(k) = sum_r zeta_{s,r} r^k for k = 2, 4, 6."""

    def axis_moment(row, k):
        return math.fsum(w * float(r) ** k for r, w in enumerate(row, start=1))

    g2 = tuple(axis_moment(row, 2) for row in law.weights)
    g4 = tuple(axis_moment(row, 4) for row in law.weights)
    g6 = tuple(axis_moment(row, 6) for row in law.weights)
    det = math.prod(g2)
    return Moments(
        gamma2=g2,
        gamma4=g4,
        gamma6=g6,
        det_gamma2=det,
        tr_g4g2m2=math.fsum(a / b**2 for a, b in zip(g4, g2)),
        tr_g6g2m3=math.fsum(a / b**3 for a, b in zip(g6, g2)),
        tr_g4sq_g2m4=math.fsum(a**2 / b**4 for a, b in zip(g4, g2)),
    )


def law_from_dict(spec: dict) -> StepLaw:
    """Build a validated law from its JSON form.

    Expected shape: ``{"d": int, "zeta0": number, "axes": [[w1, ..., wt], ...]}``.
    """
    return validate(int(spec["d"]), spec.get("zeta0", 0.0), spec["axes"])


def law_to_dict(law: StepLaw) -> dict:
    return {
        "d": law.d,
        "zeta0": law.zeta0,
        "axes": [list(row) for row in law.weights],
    }


def lazy_simple_law(d: int, sigma: float) -> StepLaw:
    """The nearest-neighbour law: stay with prob sigma, else +-e_s uniformly."""
    return validate(d, sigma, [[(1.0 - sigma) / d] for _ in range(d)])
