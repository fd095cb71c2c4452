"""Dataset assembly and the end-to-end report computation.

Loads the corpus files against a persisted similarity matrix (and an
optional map), builds every entity's profile, and exposes the study
structure the distance tables are computed over. Both the CLI and the
HTTP service go through this module so their outputs agree.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from . import __version__
from .analysis import (
    DistanceTable,
    FitSummary,
    MethodComparison,
    OverlapStats,
    StudySet,
    build_distance_table,
    compare_methods,
    export_overlay,
    fit_summary,
    overlap_percentage,
)
from .corpus import (
    AliasRule,
    Entity,
    EntityKind,
    EntityProfile,
    LoadReport,
    PublicationRecord,
    build_profile,
    load_alias_rules,
    load_entities,
    load_publications,
)
from .errors import ValidationError
from .layout import MapLayout, load_layout
from .metrics import barycenter
from .resample import BootstrapConfig, bootstrap_barycenters, confidence_ellipse
from .simgraph import SimilarityMatrix, load_matrix

DEFAULT_SEED = 1729  # fixed so casual runs reproduce; override with --seed


@dataclass
class Dataset:
    """Everything a report or service run needs, loaded once."""

    matrix: SimilarityMatrix
    layout: MapLayout | None
    entities: dict[str, Entity]
    profiles: dict[str, EntityProfile]
    study: StudySet
    rules: list[AliasRule]
    publications: list[PublicationRecord]
    load_report: LoadReport

    @property
    def index(self):
        return self.matrix.index

    def labels(self) -> dict[str, str]:
        return {eid: ent.label for eid, ent in self.entities.items()}


def load_dataset(
    pubs_path: str | Path,
    entities_path: str | Path,
    matrix_path: str | Path,
    aliases_path: str | Path | None = None,
    map_path: str | Path | None = None,
) -> Dataset:
    """Load and cross-validate all inputs into a ready-to-compute dataset."""
    matrix = load_matrix(matrix_path)
    rules = load_alias_rules(aliases_path) if aliases_path else []
    layout = load_layout(map_path, matrix.index, rules) if map_path else None

    records, report = load_publications(pubs_path)
    entity_list = load_entities(entities_path)
    entities = {e.entity_id: e for e in entity_list}

    panels = [e for e in entity_list if e.kind is EntityKind.PANEL]
    departments = [e for e in entity_list if e.kind is EntityKind.DEPARTMENT]
    if len(panels) != 1:
        raise ValidationError(f"expected exactly one panel entity, found {len(panels)}")
    if len(departments) != 1:
        raise ValidationError(
            f"expected exactly one department entity, found {len(departments)}"
        )
    panel, department = panels[0], departments[0]
    _check_members(panel, entities, EntityKind.PANEL_MEMBER)
    _check_members(department, entities, EntityKind.RESEARCH_GROUP)

    profiles: dict[str, EntityProfile] = {}
    for ent in entity_list:
        profiles[ent.entity_id] = build_profile(ent, records, rules, matrix.index, report)

    study = StudySet(
        panel_id=panel.entity_id,
        member_ids=panel.member_ids,
        department_id=department.entity_id,
        group_ids=department.member_ids,
        profiles=profiles,
    )
    return Dataset(
        matrix=matrix,
        layout=layout,
        entities=entities,
        profiles=profiles,
        study=study,
        rules=rules,
        publications=records,
        load_report=report,
    )


def _check_members(union: Entity, entities: Mapping[str, Entity],
                   expected: EntityKind) -> None:
    for mid in union.member_ids:
        member = entities.get(mid)
        if member is None:
            raise ValidationError(
                f"{union.kind.value} {union.entity_id!r} references unknown entity {mid!r}"
            )
        if member.kind is not expected:
            raise ValidationError(
                f"{union.kind.value} {union.entity_id!r} member {mid!r} has kind "
                f"{member.kind.value}, expected {expected.value}"
            )


@dataclass
class ReportOutputs:
    tables: dict[str, DistanceTable]
    summaries: dict[str, FitSummary]
    overlaps: dict[str, OverlapStats]
    comparison: MethodComparison | None
    overlay: dict | None


def run_report(
    dataset: Dataset,
    methods: tuple[str, ...],
    cfg: BootstrapConfig | None,
    threads: int | None = None,
) -> ReportOutputs:
    """Compute tables, summaries, overlap stats, comparison and overlay."""
    if "barycenter" in methods and dataset.layout is None:
        raise ValidationError("barycenter method requested but no map layout is loaded")

    tables: dict[str, DistanceTable] = {}
    summaries: dict[str, FitSummary] = {}
    overlaps: dict[str, OverlapStats] = {}
    for method in methods:
        table = build_distance_table(
            dataset.study, method,
            matrix=dataset.matrix, layout=dataset.layout,
            cfg=cfg, threads=threads,
        )
        tables[method] = table
        summaries[method] = fit_summary(table)
        if cfg is not None:
            overlaps[method] = overlap_percentage(table)

    comparison = None
    if "barycenter" in tables and "sapv" in tables:
        comparison = compare_methods(tables["barycenter"], tables["sapv"])

    overlay = None
    if "barycenter" in methods and dataset.layout is not None:
        overlay = build_overlay(dataset, list(dataset.study.row_ids
                                              + dataset.study.column_ids), cfg, threads)
    return ReportOutputs(tables=tables, summaries=summaries, overlaps=overlaps,
                         comparison=comparison, overlay=overlay)


def build_overlay(
    dataset: Dataset,
    entity_ids: list[str],
    cfg: BootstrapConfig | None,
    threads: int | None = None,
) -> dict:
    """Overlay document for the given entities (ellipses when cfg given)."""
    if dataset.layout is None:
        raise ValidationError("overlay export needs a map layout")
    profiles = [dataset.profiles[eid] for eid in entity_ids]
    barys = {eid: barycenter(dataset.profiles[eid], dataset.layout)
             for eid in entity_ids}
    ellipses = None
    if cfg is not None:
        ellipses = {}
        for eid in entity_ids:
            cloud = bootstrap_barycenters(dataset.profiles[eid], cfg,
                                          dataset.layout, threads)
            ellipses[eid] = confidence_ellipse(cloud, cfg.confidence)
    return export_overlay(profiles, dataset.labels(), dataset.index,
                          dataset.layout, barys, ellipses)


def file_digest(path: str | Path) -> dict:
    data = Path(path).read_bytes()
    return {
        "path": str(path),
        "sha256": hashlib.sha256(data).hexdigest(),
        "bytes": len(data),
    }


def build_manifest(
    inputs: Mapping[str, str | Path],
    cfg: BootstrapConfig | None,
    methods: tuple[str, ...],
) -> dict:
    """Run manifest embedded in every report bundle for auditability."""
    manifest = {
        "tool": "panelfit",
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "methods": list(methods),
        "inputs": {name: file_digest(p) for name, p in inputs.items() if p},
    }
    if cfg is not None:
        manifest["bootstrap"] = {
            "replications": cfg.replications,
            "confidence": cfg.confidence,
            "seed": cfg.seed,
        }
    return manifest
