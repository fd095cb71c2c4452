"""Evaluative outputs: distance tables, fit summaries, overlap statistics.

The central artifact is the distance table of one method: panel and panel
members as rows, department and research groups as columns. Per group
column the closest member is flagged, and every other member whose CI
overlaps the closest one's CI is flagged as a viable alternative. The
average and standard deviation of the per-group shortest distances
summarize how well the panel covers the groups.

All flags are decided at full precision; the 3-decimal rendering exists
only in the display variants.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import EntityProfile
from .errors import ValidationError
from .layout import MapLayout
from .metrics import (
    Barycenter,
    DistanceResult,
    barycenter,
    distance2d,
    distance_nd,
    sapv,
)
from .resample import (
    BootstrapConfig,
    ConfidenceEllipse,
    bootstrap_distance_ci,
    ci_overlap,
)
from .simgraph import JournalIndex, SimilarityMatrix
from .tabular import write_table

OVERLAY_SCHEMA = "panelfit-overlay/1"


@dataclass(frozen=True)
class StudySet:
    """The entities of one evaluation: panel, members, groups, department."""

    panel_id: str
    member_ids: tuple[str, ...]
    department_id: str
    group_ids: tuple[str, ...]
    profiles: Mapping[str, EntityProfile]

    def __post_init__(self):
        if not self.member_ids:
            raise ValidationError("a study needs at least one panel member")
        if not self.group_ids:
            raise ValidationError("a study needs at least one research group")
        for eid in self.row_ids + self.column_ids:
            if eid not in self.profiles:
                raise ValidationError(f"no profile for entity {eid!r}")

    @property
    def row_ids(self) -> tuple[str, ...]:
        return (self.panel_id,) + self.member_ids

    @property
    def column_ids(self) -> tuple[str, ...]:
        return (self.department_id,) + self.group_ids


@dataclass(frozen=True)
class CellFlags:
    is_shortest: bool = False
    overlaps_shortest: bool = False


@dataclass(frozen=True)
class DistanceTable:
    method: str
    panel_id: str
    member_ids: tuple[str, ...]
    department_id: str
    group_ids: tuple[str, ...]
    cells: Mapping[tuple[str, str], DistanceResult]
    flags: Mapping[tuple[str, str], CellFlags]
    has_ci: bool

    @property
    def row_ids(self) -> tuple[str, ...]:
        return (self.panel_id,) + self.member_ids

    @property
    def column_ids(self) -> tuple[str, ...]:
        return (self.department_id,) + self.group_ids

    def cell(self, row_id: str, col_id: str) -> DistanceResult:
        return self.cells[(row_id, col_id)]

    def shortest_members(self, group_id: str) -> tuple[str, ...]:
        return tuple(m for m in self.member_ids
                     if self.flags[(m, group_id)].is_shortest)


@dataclass(frozen=True)
class FitSummary:
    avg_shortest: float
    sd_shortest: float
    per_group_shortest: Mapping[str, tuple[tuple[str, ...], float]]


@dataclass(frozen=True)
class OverlapStats:
    method: str
    numerator: int
    denominator: int

    @property
    def percentage(self) -> float:
        if self.denominator == 0:
            return 0.0
        return 100.0 * self.numerator / self.denominator


@dataclass(frozen=True)
class MethodComparison:
    pearson_r: float
    spearman_rho: float
    n_pairs: int


def build_distance_table(
    study: StudySet,
    method: str,
    *,
    matrix: SimilarityMatrix | None = None,
    layout: MapLayout | None = None,
    cfg: BootstrapConfig | None = None,
    threads: int | None = None,
    sapv_cache: dict | None = None,
    barycenter_cache: dict | None = None,
) -> DistanceTable:
    """All pairwise distances between rows and columns, flags per group.

    With a bootstrap config each cell carries a CI; without one only the
    empirical distances and the shortest flags are produced. Flags are
    computed at full precision; per group the minimum-distance member is
    marked (all of them, under exact ties) and the other members are
    marked when their CI overlaps a shortest cell's CI.

    The optional caches persist per-entity vectors/points across calls
    (what-if recomputation); they must belong to the same matrix/layout.
    """
    if method == "barycenter":
        if layout is None:
            raise ValidationError("barycenter tables need a map layout")
        points = barycenter_cache if barycenter_cache is not None else {}
        for eid in study.row_ids + study.column_ids:
            if eid not in points:
                points[eid] = barycenter(study.profiles[eid], layout)

        def empirical(row: str, col: str) -> float:
            return distance2d(points[row], points[col])
    elif method == "sapv":
        if matrix is None:
            raise ValidationError("sapv tables need a similarity matrix")
        vectors = sapv_cache if sapv_cache is not None else {}
        for eid in study.row_ids + study.column_ids:
            if eid not in vectors:
                vectors[eid] = sapv(study.profiles[eid], matrix)

        def empirical(row: str, col: str) -> float:
            return distance_nd(vectors[row], vectors[col])
    else:
        raise ValidationError(f"unknown method {method!r}")

    cells: dict[tuple[str, str], DistanceResult] = {}
    for row in study.row_ids:
        for col in study.column_ids:
            if cfg is None:
                cells[(row, col)] = DistanceResult(
                    method=method, a=row, b=col, d=empirical(row, col)
                )
            else:
                boot = bootstrap_distance_ci(
                    study.profiles[row], study.profiles[col], method, cfg,
                    matrix=matrix, layout=layout, threads=threads,
                )
                cells[(row, col)] = boot.result

    flags = _compute_flags(study.member_ids, study.group_ids, cells, cfg is not None)
    return DistanceTable(
        method=method,
        panel_id=study.panel_id,
        member_ids=study.member_ids,
        department_id=study.department_id,
        group_ids=study.group_ids,
        cells=cells,
        flags=flags,
        has_ci=cfg is not None,
    )


def _compute_flags(
    member_ids: Sequence[str],
    group_ids: Sequence[str],
    cells: Mapping[tuple[str, str], DistanceResult],
    has_ci: bool,
) -> dict[tuple[str, str], CellFlags]:
    flags: dict[tuple[str, str], CellFlags] = {}
    for group in group_ids:
        dmin = min(cells[(m, group)].d for m in member_ids)
        shortest = [m for m in member_ids if cells[(m, group)].d == dmin]
        shortest_cis = [cells[(m, group)].ci for m in shortest] if has_ci else []
        for m in member_ids:
            if m in shortest:
                flags[(m, group)] = CellFlags(is_shortest=True)
                continue
            overlaps = False
            if has_ci:
                own = cells[(m, group)].ci
                overlaps = any(ci_overlap(own, s) for s in shortest_cis)
            flags[(m, group)] = CellFlags(is_shortest=False, overlaps_shortest=overlaps)
    return flags


def fit_summary(table: DistanceTable) -> FitSummary:
    """Mean and population SD of the per-group shortest distances."""
    if not table.group_ids:
        raise ValidationError("distance table has no group columns")
    per_group: dict[str, tuple[tuple[str, ...], float]] = {}
    minima = []
    for group in table.group_ids:
        members = table.shortest_members(group)
        d = table.cell(members[0], group).d
        per_group[group] = (members, d)
        minima.append(d)
    arr = np.asarray(minima, dtype=np.float64)
    return FitSummary(
        avg_shortest=float(arr.mean()),
        sd_shortest=float(arr.std(ddof=0)),
        per_group_shortest=per_group,
    )


def overlap_percentage(
    table: DistanceTable,
    *,
    include_panel_row: bool = False,
    include_department_column: bool = False,
) -> OverlapStats:
    """Share of non-shortest cells whose CI overlaps the shortest cell's CI.

    Denominator: all (member, group) cells except each group's shortest
    cell(s). The panel row and the department column are excluded by
    default; the flags fold them in, treating the department like an
    extra column and the panel like an extra non-shortest row.
    """
    if not table.has_ci:
        raise ValidationError("overlap statistics need a table with confidence intervals")

    numerator = 0
    denominator = 0
    columns = list(table.group_ids)
    if include_department_column:
        columns.append(table.department_id)

    for col in columns:
        dmin = min(table.cell(m, col).d for m in table.member_ids)
        shortest = [m for m in table.member_ids if table.cell(m, col).d == dmin]
        shortest_cis = [table.cell(m, col).ci for m in shortest]
        rows = [m for m in table.member_ids if m not in shortest]
        if include_panel_row:
            rows.append(table.panel_id)
        for row in rows:
            denominator += 1
            own = table.cell(row, col).ci
            if any(ci_overlap(own, s) for s in shortest_cis):
                numerator += 1
    return OverlapStats(method=table.method, numerator=numerator, denominator=denominator)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0:
        raise ValidationError("correlation is undefined for constant distances")
    return float(xc @ yc) / denom


def compare_methods(table_bary: DistanceTable, table_sapv: DistanceTable) -> MethodComparison:
    """Pearson and Spearman correlation of the two methods' distances.

    Computed over the (member, group) pairs only; Spearman uses average
    ranks for ties.
    """
    if (table_bary.member_ids != table_sapv.member_ids
            or table_bary.group_ids != table_sapv.group_ids):
        raise ValidationError("method comparison needs tables over the same entities")
    pairs = [(m, g) for m in table_bary.member_ids for g in table_bary.group_ids]
    if len(pairs) < 2:
        raise ValidationError("method comparison needs at least 2 paired distances")
    x = np.array([table_bary.cell(m, g).d for m, g in pairs])
    y = np.array([table_sapv.cell(m, g).d for m, g in pairs])
    rho = _pearson(_average_ranks(x), _average_ranks(y))
    return MethodComparison(pearson_r=_pearson(x, y), spearman_rho=rho, n_pairs=len(pairs))


def export_overlay(
    profiles: Sequence[EntityProfile],
    labels: Mapping[str, str],
    index: JournalIndex,
    layout: MapLayout,
    barycenters: Mapping[str, Barycenter],
    ellipses: Mapping[str, ConfidenceEllipse] | None = None,
) -> dict:
    """Structured overlay-map document for a renderer.

    Journal nodes carry per-entity publication counts (node size), each
    entity its barycenter and, when available, its confidence ellipse.
    """
    ellipses = ellipses or {}
    entities = []
    node_sizes: dict[int, dict[str, int]] = {}
    for prof in profiles:
        bc = barycenters.get(prof.entity_id)
        if bc is None:
            raise ValidationError(f"no barycenter supplied for {prof.entity_id!r}")
        if bc.layout_run != layout.run_id:
            raise ValidationError(
                f"barycenter of {prof.entity_id!r} belongs to a different layout run"
            )
        ell = ellipses.get(prof.entity_id)
        entities.append({
            "entity_id": prof.entity_id,
            "label": labels.get(prof.entity_id, prof.entity_id),
            "total": prof.total,
            "barycenter": [bc.c1, bc.c2],
            "ellipse": None if ell is None else {
                "center": [ell.center[0], ell.center[1]],
                "semi_axes": [ell.semi_axes[0], ell.semi_axes[1]],
                "rotation": ell.rotation,
                "coverage_count": ell.coverage_count,
                "level": ell.level,
            },
        })
        for jid, m in prof.counts.items():
            if m > 0:
                node_sizes.setdefault(jid, {})[prof.entity_id] = m

    nodes = []
    for jid in sorted(node_sizes):
        if not layout.has(jid):
            raise ValidationError(
                f"journal {index.title_of(jid)!r} has no coordinates in this layout"
            )
        x, y = layout.xy(jid)
        nodes.append({
            "journal_id": jid,
            "title": index.title_of(jid),
            "x": x,
            "y": y,
            "sizes": node_sizes[jid],
        })
    return {
        "schema": OVERLAY_SCHEMA,
        "layout_run": layout.run_id,
        "entities": entities,
        "nodes": nodes,
    }


def format_distance(d: float) -> str:
    """Display rounding; never used for comparisons."""
    return f"{d:.3f}"


def summary_line(fit: FitSummary) -> str:
    return (f"Average shortest distances is {format_distance(fit.avg_shortest)} "
            f"(SD {format_distance(fit.sd_shortest)})")


def _cell_display(table: DistanceTable, row: str, col: str) -> str:
    text = format_distance(table.cell(row, col).d)
    flag = table.flags.get((row, col))
    if flag is not None and flag.is_shortest:
        return f"[{text}]"
    if flag is not None and flag.overlaps_shortest:
        return f"({text})"
    return text


def write_table_files(table: DistanceTable, out_dir: Path, labels: Mapping[str, str]) -> None:
    """Write the long-format (full precision) and display variants."""
    rows = []
    for row_id in table.row_ids:
        for col_id in table.column_ids:
            cell = table.cell(row_id, col_id)
            flag = table.flags.get((row_id, col_id))
            rows.append((
                row_id,
                col_id,
                repr(cell.d),
                "" if cell.ci is None else repr(cell.ci.lo),
                "" if cell.ci is None else repr(cell.ci.hi),
                "" if flag is None else str(flag.is_shortest).lower(),
                "" if flag is None else str(flag.overlaps_shortest).lower(),
            ))
    write_table(
        out_dir / f"distance_table_{table.method}.csv",
        ("row_entity", "col_entity", "distance", "ci_lo", "ci_hi",
         "is_shortest", "overlaps_shortest"),
        rows,
    )

    header = ["entity"] + [labels.get(c, c) for c in table.column_ids]
    display_rows = []
    for row_id in table.row_ids:
        display_rows.append(
            [labels.get(row_id, row_id)]
            + [_cell_display(table, row_id, col_id) for col_id in table.column_ids]
        )
    write_table(out_dir / f"distance_table_{table.method}_display.csv",
                header, display_rows)


def write_report_bundle(
    out_dir: str | Path,
    *,
    tables: Mapping[str, DistanceTable],
    summaries: Mapping[str, FitSummary],
    overlaps: Mapping[str, OverlapStats],
    comparison: MethodComparison | None,
    overlay: dict | None,
    manifest: dict,
    labels: Mapping[str, str] | None = None,
) -> Path:
    """Write the report bundle directory; returns its path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    labels = labels or {}

    for method, table in tables.items():
        write_table_files(table, out, labels)
        fit = summaries[method]
        payload = {
            "method": method,
            "avg_shortest": fit.avg_shortest,
            "sd_shortest": fit.sd_shortest,
            "sd_kind": "population",
            "per_group_shortest": {
                g: {"members": list(members), "distance": d}
                for g, (members, d) in fit.per_group_shortest.items()
            },
        }
        (out / f"fit_summary_{method}.json").write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8"
        )
        (out / f"fit_summary_{method}.txt").write_text(
            summary_line(fit) + "\n", encoding="utf-8"
        )
        stats = overlaps.get(method)
        if stats is not None:
            (out / f"overlap_stats_{method}.json").write_text(
                json.dumps({
                    "method": method,
                    "numerator": stats.numerator,
                    "denominator": stats.denominator,
                    "percentage": stats.percentage,
                }, indent=2) + "\n", encoding="utf-8"
            )

    if comparison is not None:
        (out / "method_comparison.json").write_text(
            json.dumps({
                "pearson_r": comparison.pearson_r,
                "spearman_rho": comparison.spearman_rho,
                "n_pairs": comparison.n_pairs,
            }, indent=2) + "\n", encoding="utf-8"
        )
    if overlay is not None:
        (out / "overlay.json").write_text(
            json.dumps(overlay, indent=2) + "\n", encoding="utf-8"
        )
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return out
