"""2D journal map coordinates.

Production maps come from an external layout tool and are ingested from a
delimited file. For synthetic fixtures there is a small built-in layout
optimizer: it minimizes the similarity-weighted sum of squared distances
subject to the average inter-point distance being 1, via iterative
majorization. The built-in path is a desk-scale convenience; real analyses
should supply a precomputed map.

Distances only mean anything within one layout, so every layout carries a
run id derived from its coordinate content and downstream comparisons
check it.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import LoadError, ValidationError
from .simgraph import JournalIndex, SimilarityMatrix
from .tabular import read_table, write_table

VOS_SCALE_GUARD = 5_000


@dataclass(frozen=True)
class MapLayout:
    """journal_id -> (x, y) in dimensionless map units."""

    coords: Mapping[int, tuple[float, float]]
    run_id: str
    missing: frozenset[int] = frozenset()
    objective_trace: tuple[float, ...] = ()

    @staticmethod
    def _run_id(coords: Mapping[int, tuple[float, float]]) -> str:
        h = hashlib.sha256()
        for jid in sorted(coords):
            x, y = coords[jid]
            h.update(jid.to_bytes(8, "little", signed=True))
            h.update(np.float64(x).tobytes())
            h.update(np.float64(y).tobytes())
        return h.hexdigest()[:16]

    @classmethod
    def from_coords(
        cls,
        coords: Mapping[int, tuple[float, float]],
        missing: frozenset[int] = frozenset(),
        objective_trace: tuple[float, ...] = (),
    ) -> "MapLayout":
        for jid, (x, y) in coords.items():
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValidationError(f"journal {jid} has a non-finite coordinate")
        return cls(dict(coords), cls._run_id(coords), missing, objective_trace)

    def has(self, journal_id: int) -> bool:
        return journal_id in self.coords

    def xy(self, journal_id: int) -> tuple[float, float]:
        return self.coords[journal_id]

    def __len__(self) -> int:
        return len(self.coords)


def load_layout(path: str | Path, index: JournalIndex, rules=()) -> MapLayout:
    """Read journal coordinates from a delimited file.

    Every row's title must resolve to an index journal; duplicate rows are
    accepted only when their coordinates agree exactly. Index journals not
    present in the file are flagged as missing so that computations that
    touch them fail fast rather than silently shifting weights.
    """
    from .corpus import Removed, resolve_journal

    coords: dict[int, tuple[float, float]] = {}
    for row in read_table(path, required=("journal_title", "x", "y")):
        title = row["journal_title"].strip()
        res = resolve_journal(title, rules, index)
        if isinstance(res, Removed):
            raise LoadError(
                f"line {row.line}: map journal {title!r} does not resolve to the index"
            )
        try:
            x = float(row["x"])
            y = float(row["y"])
        except ValueError:
            raise LoadError(f"line {row.line}: non-numeric coordinate for {title!r}")
        if not (math.isfinite(x) and math.isfinite(y)):
            raise LoadError(f"line {row.line}: non-finite coordinate for {title!r}")
        if res in coords and coords[res] != (x, y):
            raise LoadError(
                f"line {row.line}: journal {title!r} repeats with conflicting coordinates"
            )
        coords[res] = (x, y)

    missing = frozenset(j for j in range(index.n) if j not in coords)
    return MapLayout.from_coords(coords, missing=missing)


def save_layout(layout: MapLayout, index: JournalIndex, path: str | Path) -> None:
    """Re-export a layout in the same delimited format (values exact via repr)."""
    rows = [
        (index.title_of(jid), repr(layout.coords[jid][0]), repr(layout.coords[jid][1]))
        for jid in sorted(layout.coords)
    ]
    write_table(path, ("journal_title", "x", "y"), rows)


def _pair_distances(positions: np.ndarray, iu) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2))[iu]


def _objective(weights_upper: np.ndarray, positions: np.ndarray, iu) -> float:
    dist = _pair_distances(positions, iu)
    avg = dist.mean()
    if avg == 0:
        return math.inf
    return float((weights_upper * (dist / avg) ** 2).sum())


def layout_objective(sim: SimilarityMatrix, positions: np.ndarray) -> float:
    """Similarity-weighted sum of squared distances at average distance 1.

    Scale-invariant: positions are implicitly rescaled so the mean
    pairwise distance is 1 before summing s_jk * d_jk^2.
    """
    n = positions.shape[0]
    if n < 2:
        return 0.0
    w = np.asarray(sim.csr.todense())
    np.fill_diagonal(w, 0.0)
    iu = np.triu_indices(n, k=1)
    return _objective(w[iu], positions, iu)


def vos_layout(
    sim: SimilarityMatrix,
    dims: int = 2,
    seed: int = 0,
    max_iter: int = 500,
    tol: float = 1e-9,
) -> MapLayout:
    """Built-in desk-scale map layout by iterative majorization.

    Deterministic for a given seed; the recorded objective trace is
    non-increasing. Refuses matrices above the scale guard, where a
    precomputed map should be supplied instead.
    """
    n = sim.n
    if n > VOS_SCALE_GUARD:
        raise ValidationError(
            f"built-in layout is limited to N <= {VOS_SCALE_GUARD} journals "
            f"(got {n}); supply a precomputed map file instead"
        )
    if dims < 2:
        raise ValidationError("layout needs at least 2 dimensions")

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    x = rng.standard_normal((n, dims))
    if n == 1:
        return MapLayout.from_coords({0: (0.0, 0.0)}, objective_trace=(0.0,))

    w = np.asarray(sim.csr.todense())
    np.fill_diagonal(w, 0.0)
    iu = np.triu_indices(n, k=1)
    w_upper = w[iu]
    trace = [_objective(w_upper, x, iu)]

    if w.sum() > 0:
        lap_s = np.diag(w.sum(axis=1)) - w
        damping = float(w.sum() / (n * (n - 1)))
        system = lap_s + damping * np.eye(n)
        for _ in range(max_iter):
            diff = x[:, None, :] - x[None, :, :]
            dist = np.sqrt((diff ** 2).sum(axis=2))
            with np.errstate(divide="ignore"):
                b = np.where(dist > 1e-12, 1.0 / dist, 0.0)
            np.fill_diagonal(b, 0.0)
            lap_b = np.diag(b.sum(axis=1)) - b
            candidate = np.linalg.solve(system, 0.5 * (lap_b @ x) + damping * x)

            best = trace[-1]
            accepted = None
            for _ in range(6):
                q = _objective(w_upper, candidate, iu)
                if q <= best:
                    accepted = (candidate, q)
                    break
                candidate = 0.5 * (candidate + x)
            if accepted is None:
                break
            x, q = accepted
            trace.append(q)
            if len(trace) > 1 and abs(trace[-2] - q) <= tol * max(abs(trace[-2]), 1.0):
                break

    x = x - x.mean(axis=0)
    avg = _pair_distances(x, iu).mean()
    if avg > 0:
        x = x / avg
    coords = {j: (float(x[j, 0]), float(x[j, 1])) for j in range(n)}
    return MapLayout.from_coords(coords, objective_trace=tuple(trace))
