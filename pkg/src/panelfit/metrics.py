"""Entity profiles as points: map barycenters and similarity-adapted vectors.

Two profile representations, both scale invariant in the publication
counts:

* barycenter: the count-weighted mean of an entity's journal coordinates
  on a 2D map, compared by plain Euclidean distance;
* similarity-adapted publication vector: the count vector pushed through
  the journal similarity matrix and L1-normalized, compared by Euclidean
  distance in R^N.

Distances carry full precision end to end; rounding to three decimals is
strictly a display concern so that argmins never flip from formatting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import EntityProfile
from .errors import (
    LayoutMismatchError,
    MatrixMismatchError,
    MissingCoordinateError,
    PanelfitError,
    ValidationError,
)
from .layout import MapLayout
from .simgraph import SimilarityMatrix

SPARSE_SUPPORT_FRACTION = 0.25


@dataclass(frozen=True)
class Barycenter:
    c1: float
    c2: float
    entity_id: str
    layout_run: str

    @property
    def xy(self) -> tuple[float, float]:
        return (self.c1, self.c2)


@dataclass(frozen=True, eq=False)
class Sapv:
    """L1-normalized similarity-adapted publication vector."""

    values: np.ndarray
    entity_id: str
    matrix_fingerprint: str

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    level: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValidationError(f"confidence interval has lo {self.lo} > hi {self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class DistanceResult:
    method: str
    a: str
    b: str
    d: float
    ci: ConfidenceInterval | None = None


def barycenter(profile: EntityProfile, layout: MapLayout) -> Barycenter:
    """Count-weighted mean location of the profile's journals."""
    if profile.total <= 0:
        raise ValidationError(f"entity {profile.entity_id!r} has no publications")
    cx = 0.0
    cy = 0.0
    for jid in sorted(profile.counts):
        m = profile.counts[jid]
        if m == 0:
            continue
        if not layout.has(jid):
            raise MissingCoordinateError(jid)
        x, y = layout.xy(jid)
        cx += m * x
        cy += m * y
    return Barycenter(cx / profile.total, cy / profile.total,
                      profile.entity_id, layout.run_id)


def distance2d(p: Barycenter, q: Barycenter) -> float:
    """Euclidean distance between two barycenters of the same layout run."""
    if p.layout_run != q.layout_run:
        raise LayoutMismatchError(
            f"barycenters of {p.entity_id!r} and {q.entity_id!r} come from "
            f"different layouts; distances are only comparable within one map"
        )
    return float(np.hypot(p.c1 - q.c1, p.c2 - q.c2))


def sapv(profile: EntityProfile, sim: SimilarityMatrix) -> Sapv:
    """Similarity-adapted publication vector of a profile.

    The unnormalized vector is the similarity matrix applied to the count
    vector; only the rows of journals the entity actually published in
    contribute, so the cost is O(|support| * N). The result is divided by
    its L1 norm, which makes profiles of different sizes comparable.
    """
    if profile.total <= 0:
        raise ValidationError(f"entity {profile.entity_id!r} has no publications")
    support = profile.journals
    bad = [j for j in support if not 0 <= j < sim.n]
    if bad:
        raise ValidationError(f"profile journals {bad} are outside the matrix")
    ids, rows = sim.rows(support)
    weights = np.array([profile.counts[int(j)] for j in ids], dtype=np.float64)
    numerator = weights @ rows
    l1 = float(numerator.sum())
    if l1 <= 0:
        raise PanelfitError(
            "similarity-adapted vector collapsed to zero; the matrix diagonal "
            "convention guarantees this cannot happen for a valid profile"
        )
    values = numerator / l1
    values.flags.writeable = False
    return Sapv(values=values, entity_id=profile.entity_id,
                matrix_fingerprint=sim.fingerprint)


def _check_same_space(a: Sapv, b: Sapv) -> None:
    if a.values.shape != b.values.shape:
        raise MatrixMismatchError(
            f"vector lengths differ: {a.values.shape[0]} vs {b.values.shape[0]}"
        )
    if a.matrix_fingerprint != b.matrix_fingerprint:
        raise MatrixMismatchError(
            f"vectors of {a.entity_id!r} and {b.entity_id!r} come from "
            f"different similarity matrices"
        )


def _distance_nd_dense(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b))


def _distance_nd_sparse(a: np.ndarray, b: np.ndarray, union: np.ndarray) -> float:
    diff = a[union] - b[union]
    return float(np.sqrt(np.dot(diff, diff)))


def distance_nd(a: Sapv, b: Sapv) -> float:
    """Euclidean distance between two similarity-adapted vectors.

    When both vectors have narrow support, the sum runs over the union of
    their nonzero positions only; elsewhere both coordinates are zero.
    """
    _check_same_space(a, b)
    n = a.values.shape[0]
    union = np.union1d(a.support, b.support)
    if union.size < SPARSE_SUPPORT_FRACTION * n:
        return _distance_nd_sparse(a.values, b.values, union)
    return _distance_nd_dense(a.values, b.values)
