"""Bootstrap machinery for distance confidence intervals and ellipses.

A bootstrap sample of an entity redraws its publications with replacement
(at publication granularity, so the same paper can be picked twice) and
keeps the total fixed. Replications of a pair are resampled independently
on both sides, their profile statistics recomputed, and the distances
collected; the confidence interval is read off the order statistics
(percentile method, no interpolation, so endpoints are always observed
distances).

Every replication draws from a counter-based random stream keyed by
(seed, entity id, replication index). That makes the r-th draw a pure
function of those three values: results are bit-identical no matter how
replications are scheduled across threads, and the resamples behind a
distance CI are the same ones behind the entity's barycenter cloud.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .corpus import EntityProfile
from .errors import ValidationError
from .layout import MapLayout
from .metrics import (
    ConfidenceInterval,
    DistanceResult,
    barycenter,
    distance2d,
    distance_nd,
    sapv,
)
from .simgraph import SimilarityMatrix
from .tabular import write_table

DEFAULT_REPLICATIONS = 1000
DEFAULT_CONFIDENCE = 0.95
METHODS = ("barycenter", "sapv")

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class BootstrapConfig:
    replications: int = DEFAULT_REPLICATIONS
    confidence: float = DEFAULT_CONFIDENCE
    seed: int = 0

    def __post_init__(self):
        if self.replications < 2:
            raise ValidationError("bootstrap needs at least 2 replications")
        if not 0.0 < self.confidence < 1.0:
            raise ValidationError("confidence level must lie strictly between 0 and 1")


@dataclass(frozen=True)
class ConfidenceEllipse:
    """Ellipse covering a fixed share of a 2D point cloud.

    Orientation and axis ratio come from the eigen-decomposition of the
    sample covariance; the scale is the smallest that puts the target
    number of points inside or on the boundary (empirical coverage, not a
    chi-square quantile).
    """

    center: tuple[float, float]
    semi_axes: tuple[float, float]
    rotation: float
    coverage_count: int
    level: float


def replication_rng(seed: int, entity_id: str, replication: int) -> np.random.Generator:
    """Counter-based stream for one (seed, entity, replication) triple."""
    digest = hashlib.sha256(entity_id.encode("utf-8")).digest()
    words = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
    seq = np.random.SeedSequence(entropy=int(seed) & _MASK64,
                                 spawn_key=words + (int(replication),))
    return np.random.Generator(np.random.Philox(seq))


def worker_count(threads: int | None = None) -> int:
    """Resolve the parallelism cap (argument, then PANELFIT_THREADS, then CPUs)."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("PANELFIT_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def bootstrap_sample(profile: EntityProfile, rng: np.random.Generator) -> EntityProfile:
    """Redraw the profile's publications with replacement; total unchanged."""
    if profile.total <= 0:
        raise ValidationError(f"entity {profile.entity_id!r} has no publications")
    idx = rng.integers(0, profile.total, size=profile.total)
    return EntityProfile.from_pubs(profile.entity_id,
                                   (profile.pubs[int(i)] for i in idx))


class _BarycenterResampler:
    """Replicates an entity's barycenter from precomputed pub coordinates."""

    def __init__(self, profile: EntityProfile, layout: MapLayout):
        self.t = profile.total
        coords = np.empty((self.t, 2), dtype=np.float64)
        for i, (_, jid) in enumerate(profile.pubs):
            coords[i] = layout.xy(jid)
        self.coords = coords

    def replicate(self, rng: np.random.Generator) -> np.ndarray:
        idx = rng.integers(0, self.t, size=self.t)
        return self.coords[idx].mean(axis=0)

    @staticmethod
    def distance(a: np.ndarray, b: np.ndarray) -> float:
        return float(np.hypot(a[0] - b[0], a[1] - b[1]))


class _SapvResampler:
    """Replicates an entity's similarity-adapted vector.

    The similarity rows of the entity's support journals are extracted
    once; each replication is a bincount plus one row-weighted sum.
    """

    def __init__(self, profile: EntityProfile, sim: SimilarityMatrix):
        ids, rows = sim.rows(profile.journals)
        self.rows = rows
        pos_of = {int(j): i for i, j in enumerate(ids)}
        self.positions = np.array([pos_of[jid] for _, jid in profile.pubs], dtype=np.int64)
        self.t = profile.total
        self.k = ids.size

    def replicate(self, rng: np.random.Generator) -> np.ndarray:
        idx = rng.integers(0, self.t, size=self.t)
        counts = np.bincount(self.positions[idx], minlength=self.k).astype(np.float64)
        numer = counts @ self.rows
        return numer / numer.sum()

    @staticmethod
    def distance(a: np.ndarray, b: np.ndarray) -> float:
        return float(np.linalg.norm(a - b))


def _run_replications(
    b: int,
    threads: int | None,
    body: Callable[[int], None],
) -> None:
    """Execute body(r) for r in 0..B-1, chunked over a thread pool.

    Each replication is a pure function of its index, so the chunking
    cannot change any value, only the wall time.
    """
    workers = worker_count(threads)
    if workers <= 1 or b < 4:
        for r in range(b):
            body(r)
        return
    chunk = math.ceil(b / workers)

    def run_range(lo: int) -> None:
        for r in range(lo, min(lo + chunk, b)):
            body(r)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_range, lo) for lo in range(0, b, chunk)]
        for fut in futures:
            fut.result()


@dataclass(frozen=True, eq=False)
class BootstrapDistance:
    """A distance with its CI plus the raw replication distances."""

    result: DistanceResult
    samples: np.ndarray


def bootstrap_distance_ci(
    a: EntityProfile,
    b: EntityProfile,
    method: str,
    cfg: BootstrapConfig,
    *,
    matrix: SimilarityMatrix | None = None,
    layout: MapLayout | None = None,
    threads: int | None = None,
) -> BootstrapDistance:
    """Distance between two entities with a bootstrap percentile CI.

    Each replication independently resamples both entities, recomputes
    their profiles' statistic and takes the distance. The reported d is
    the empirical (non-bootstrap) distance.
    """
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; expected one of {METHODS}")
    if method == "barycenter":
        if layout is None:
            raise ValidationError("barycenter bootstrap needs a map layout")
        empirical = distance2d(barycenter(a, layout), barycenter(b, layout))
        res_a = _BarycenterResampler(a, layout)
        res_b = _BarycenterResampler(b, layout)
        dist = _BarycenterResampler.distance
    else:
        if matrix is None:
            raise ValidationError("sapv bootstrap needs a similarity matrix")
        empirical = distance_nd(sapv(a, matrix), sapv(b, matrix))
        res_a = _SapvResampler(a, matrix)
        res_b = _SapvResampler(b, matrix)
        dist = _SapvResampler.distance

    out = np.empty(cfg.replications, dtype=np.float64)

    def body(r: int) -> None:
        ra = res_a.replicate(replication_rng(cfg.seed, a.entity_id, r))
        rb = res_b.replicate(replication_rng(cfg.seed, b.entity_id, r))
        out[r] = dist(ra, rb)

    _run_replications(cfg.replications, threads, body)
    ci = percentile_ci(out, cfg.confidence)
    result = DistanceResult(method=method, a=a.entity_id, b=b.entity_id,
                            d=empirical, ci=ci)
    return BootstrapDistance(result=result, samples=out)


def bootstrap_barycenters(
    profile: EntityProfile,
    cfg: BootstrapConfig,
    layout: MapLayout,
    threads: int | None = None,
) -> np.ndarray:
    """Cloud of replicated barycenters (B x 2), in replication order.

    Uses the same per-replication streams as the distance bootstrap, so
    the cloud for an entity matches the resamples behind its distance CIs
    at the same seed.
    """
    res = _BarycenterResampler(profile, layout)
    out = np.empty((cfg.replications, 2), dtype=np.float64)

    def body(r: int) -> None:
        out[r] = res.replicate(replication_rng(cfg.seed, profile.entity_id, r))

    _run_replications(cfg.replications, threads, body)
    return out


def _order_index(q: float, b: int) -> int:
    """1-based ceil(q*b), snapping float representation error at integers."""
    return max(1, min(b, math.ceil(q * b - 1e-9)))


def percentile_ci(samples: Sequence[float] | np.ndarray, level: float) -> ConfidenceInterval:
    """Percentile CI from order statistics (nearest rank, no interpolation)."""
    arr = np.sort(np.asarray(samples, dtype=np.float64))
    if arr.size == 0:
        raise ValidationError("cannot take a percentile interval of zero samples")
    if not 0.0 < level < 1.0:
        raise ValidationError("confidence level must lie strictly between 0 and 1")
    alpha = (1.0 - level) / 2.0
    lo = arr[_order_index(alpha, arr.size) - 1]
    hi = arr[_order_index(1.0 - alpha, arr.size) - 1]
    return ConfidenceInterval(lo=float(lo), hi=float(hi), level=level)


def ci_overlap(x: ConfidenceInterval, y: ConfidenceInterval) -> bool:
    """Closed-interval overlap test (touching endpoints count as overlap)."""
    if x.level != y.level:
        raise ValidationError(
            f"cannot compare intervals at different levels ({x.level} vs {y.level})"
        )
    return x.lo <= y.hi and y.lo <= x.hi


def confidence_ellipse(points: Sequence | np.ndarray, level: float) -> ConfidenceEllipse:
    """Empirical-coverage ellipse around a 2D point cloud.

    Shape from the covariance eigenvectors, scale from the order statistic
    of Mahalanobis radii: with B points, exactly ceil(level*B) of them lie
    inside or on the boundary (more only under exact radius ties).
    Degenerate clouds (collinear or identical points) collapse one or both
    semi-axes to zero.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError("expected an array of 2D points")
    b = pts.shape[0]
    if b < 3:
        raise ValidationError("need at least 3 points for a confidence ellipse")
    if not 0.0 < level < 1.0:
        raise ValidationError("confidence level must lie strictly between 0 and 1")

    center = pts.mean(axis=0)
    dev = pts - center
    cov = dev.T @ dev / (b - 1)
    evals, evecs = np.linalg.eigh(cov)
    evals = np.maximum(evals, 0.0)
    tol = float(evals[1]) * 1e-12

    proj = dev @ evecs
    r2 = np.zeros(b, dtype=np.float64)
    live = [dim for dim in (0, 1) if evals[dim] > tol]
    for dim in live:
        r2 += proj[:, dim] ** 2 / evals[dim]
    radii = np.sqrt(r2)

    k = _order_index(level, b)
    scale = float(np.partition(radii, k - 1)[k - 1])
    coverage = int(np.count_nonzero(radii <= scale))

    major = scale * math.sqrt(evals[1]) if evals[1] > tol else 0.0
    minor = scale * math.sqrt(evals[0]) if evals[0] > tol else 0.0
    rotation = float(math.atan2(evecs[1, 1], evecs[0, 1]))
    return ConfidenceEllipse(
        center=(float(center[0]), float(center[1])),
        semi_axes=(major, minor),
        rotation=rotation,
        coverage_count=coverage,
        level=level,
    )


def write_histogram(path: str | Path, samples: np.ndarray) -> None:
    """Export replication distances as (replication_index, distance) rows."""
    rows = [(str(i), repr(float(d))) for i, d in enumerate(samples)]
    write_table(path, ("replication_index", "distance"), rows)
