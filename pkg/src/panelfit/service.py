"""HTTP API for interactive what-if panel composition.

The service loads one dataset at startup and answers pure queries over
it: the entity catalog, distance tables for arbitrary panel compositions,
overlay-map documents, and the full batch report. A what-if request names
the member and group sets; the panel union profile is rebuilt from the
members (joint publications deduplicated) and the table recomputed.
Without bootstrap this works from cached per-entity vectors and responds
at interactive latency; confidence intervals are opt-in per request
because resampling dominates the cost.

All endpoints live under /v1 and return JSON. Responses are pure
functions of (dataset, request, seed).
"""

from __future__ import annotations

from typing import Literal

from fastapi import APIRouter, FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import __version__
from .analysis import (
    DistanceTable,
    FitSummary,
    StudySet,
    build_distance_table,
    fit_summary,
)
from .corpus import EntityKind, union_profile
from .errors import PanelfitError
from .pipeline import Dataset, build_overlay, run_report
from .resample import BootstrapConfig


class BootstrapParams(BaseModel):
    replications: int | None = None
    confidence: float | None = None
    seed: int | None = None


class WhatIfRequest(BaseModel):
    panel_member_ids: list[str] = Field(min_length=1)
    group_ids: list[str] = Field(min_length=1)
    method: Literal["barycenter", "sapv", "both"] = "both"
    bootstrap: BootstrapParams | None = None


def _error(status: int, code: str, message: str, **extra) -> HTTPException:
    return HTTPException(status_code=status,
                         detail={"code": code, "message": message, **extra})


def _ci_json(ci) -> list[float] | None:
    return None if ci is None else [ci.lo, ci.hi]


def table_to_json(table: DistanceTable) -> dict:
    cells: dict[str, dict[str, dict]] = {}
    for row in table.row_ids:
        cells[row] = {}
        for col in table.column_ids:
            cell = table.cell(row, col)
            flag = table.flags.get((row, col))
            cells[row][col] = {
                "d": cell.d,
                "ci": _ci_json(cell.ci),
                "is_shortest": None if flag is None else flag.is_shortest,
                "overlaps_shortest": None if flag is None else flag.overlaps_shortest,
            }
    return {
        "method": table.method,
        "panel_id": table.panel_id,
        "member_ids": list(table.member_ids),
        "department_id": table.department_id,
        "group_ids": list(table.group_ids),
        "has_ci": table.has_ci,
        "cells": cells,
    }


def fit_to_json(fit: FitSummary) -> dict:
    return {
        "avg_shortest": fit.avg_shortest,
        "sd_shortest": fit.sd_shortest,
        "per_group_shortest": {
            g: {"members": list(members), "distance": d}
            for g, (members, d) in fit.per_group_shortest.items()
        },
    }


class _State:
    """Shared immutable dataset plus per-entity computation caches."""

    def __init__(self, dataset: Dataset, default_cfg: BootstrapConfig):
        self.dataset = dataset
        self.default_cfg = default_cfg
        self.sapv_cache: dict = {}
        self.barycenter_cache: dict = {}
        self.union_cache: dict = {}

    def panel_profile(self, member_ids: tuple[str, ...]):
        """Union profile for a member set; reuses the corpus panel identity
        when the sets coincide so results line up with batch reports."""
        ds = self.dataset
        key = frozenset(member_ids)
        if key == frozenset(ds.study.member_ids):
            return ds.profiles[ds.study.panel_id]
        cached = self.union_cache.get(key)
        if cached is None:
            eid = "panel[" + "+".join(sorted(member_ids)) + "]"
            cached = union_profile(eid, [ds.profiles[m] for m in member_ids])
            self.union_cache[key] = cached
        return cached

    def department_profile(self, group_ids: tuple[str, ...]):
        ds = self.dataset
        key = frozenset(group_ids)
        if key == frozenset(ds.study.group_ids):
            return ds.profiles[ds.study.department_id]
        cached = self.union_cache.get(key)
        if cached is None:
            eid = "groups[" + "+".join(sorted(group_ids)) + "]"
            cached = union_profile(eid, [ds.profiles[g] for g in group_ids])
            self.union_cache[key] = cached
        return cached


def _validate_ids(state: _State, ids: list[str], expected: EntityKind) -> None:
    ds = state.dataset
    valid = sorted(e.entity_id for e in ds.entities.values() if e.kind is expected)
    for eid in ids:
        ent = ds.entities.get(eid)
        if ent is None:
            raise _error(404, "unknown_entity", f"entity {eid!r} does not exist",
                         valid_ids=valid)
        if ent.kind is not expected:
            raise _error(422, "wrong_kind",
                         f"entity {eid!r} has kind {ent.kind.value}, "
                         f"expected {expected.value}", valid_ids=valid)


def create_app(dataset: Dataset, default_cfg: BootstrapConfig | None = None) -> FastAPI:
    state = _State(dataset, default_cfg or BootstrapConfig())
    app = FastAPI(title="panelfit", version=__version__)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    v1 = APIRouter(prefix="/v1")

    @v1.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "version": __version__,
            "entities": len(dataset.entities),
            "journals": dataset.matrix.n,
            "map_loaded": dataset.layout is not None,
        }

    @v1.get("/entities")
    def entities() -> dict:
        catalog = []
        for ent in dataset.entities.values():
            profile = dataset.profiles.get(ent.entity_id)
            catalog.append({
                "entity_id": ent.entity_id,
                "kind": ent.kind.value,
                "label": ent.label,
                "member_ids": list(ent.member_ids),
                "publications": 0 if profile is None else profile.total,
                "journals": 0 if profile is None else len(profile.journals),
            })
        return {"entities": catalog}

    @v1.post("/whatif")
    def whatif(request: WhatIfRequest) -> dict:
        _validate_ids(state, request.panel_member_ids, EntityKind.PANEL_MEMBER)
        _validate_ids(state, request.group_ids, EntityKind.RESEARCH_GROUP)
        members = tuple(dict.fromkeys(request.panel_member_ids))
        groups = tuple(dict.fromkeys(request.group_ids))

        panel = state.panel_profile(members)
        department = state.department_profile(groups)
        profiles = dict(dataset.profiles)
        profiles[panel.entity_id] = panel
        profiles[department.entity_id] = department
        study = StudySet(
            panel_id=panel.entity_id,
            member_ids=members,
            department_id=department.entity_id,
            group_ids=groups,
            profiles=profiles,
        )

        cfg = None
        if request.bootstrap is not None:
            base = state.default_cfg
            cfg = BootstrapConfig(
                replications=request.bootstrap.replications or base.replications,
                confidence=request.bootstrap.confidence or base.confidence,
                seed=base.seed if request.bootstrap.seed is None else request.bootstrap.seed,
            )

        methods = ("barycenter", "sapv") if request.method == "both" else (request.method,)
        if "barycenter" in methods and dataset.layout is None:
            raise _error(409, "map_unavailable",
                         "barycenter method needs a map layout; start the service "
                         "with a map file or request method=sapv")

        out: dict = {"methods": {}, "seed": None if cfg is None else cfg.seed}
        try:
            for method in methods:
                table = build_distance_table(
                    study, method,
                    matrix=dataset.matrix, layout=dataset.layout, cfg=cfg,
                    sapv_cache=state.sapv_cache,
                    barycenter_cache=state.barycenter_cache,
                )
                out["methods"][method] = {
                    "table": table_to_json(table),
                    "fit_summary": fit_to_json(fit_summary(table)),
                }
        except PanelfitError as exc:
            raise _error(422, "computation_failed", str(exc))
        out["bootstrap"] = None if cfg is None else {
            "replications": cfg.replications,
            "confidence": cfg.confidence,
            "seed": cfg.seed,
        }
        return out

    @v1.get("/overlay")
    def overlay(
        entities: str = Query(..., description="comma-separated entity ids"),
        ellipses: bool = True,
        replications: int | None = None,
        seed: int | None = None,
    ) -> dict:
        if dataset.layout is None:
            raise _error(409, "map_unavailable",
                         "overlay needs a map layout; start the service with a map file")
        ids = [e.strip() for e in entities.split(",") if e.strip()]
        if not ids:
            raise _error(422, "empty_request", "no entity ids supplied")
        valid = sorted(dataset.entities)
        for eid in ids:
            if eid not in dataset.entities:
                raise _error(404, "unknown_entity", f"entity {eid!r} does not exist",
                             valid_ids=valid)
        cfg = None
        if ellipses:
            base = state.default_cfg
            cfg = BootstrapConfig(
                replications=replications or base.replications,
                confidence=base.confidence,
                seed=base.seed if seed is None else seed,
            )
        try:
            return build_overlay(dataset, ids, cfg)
        except PanelfitError as exc:
            raise _error(422, "computation_failed", str(exc))

    @v1.get("/report")
    def report(bootstrap: bool = False, seed: int | None = None) -> dict:
        base = state.default_cfg
        cfg = None
        if bootstrap:
            cfg = BootstrapConfig(replications=base.replications,
                                  confidence=base.confidence,
                                  seed=base.seed if seed is None else seed)
        methods = ("barycenter", "sapv") if dataset.layout is not None else ("sapv",)
        try:
            outputs = run_report(dataset, methods, cfg)
        except PanelfitError as exc:
            raise _error(422, "computation_failed", str(exc))
        return {
            "methods": {
                m: {
                    "table": table_to_json(outputs.tables[m]),
                    "fit_summary": fit_to_json(outputs.summaries[m]),
                    "overlap_stats": None if m not in outputs.overlaps else {
                        "numerator": outputs.overlaps[m].numerator,
                        "denominator": outputs.overlaps[m].denominator,
                        "percentage": outputs.overlaps[m].percentage,
                    },
                }
                for m in methods
            },
            "comparison": None if outputs.comparison is None else {
                "pearson_r": outputs.comparison.pearson_r,
                "spearman_rho": outputs.comparison.spearman_rho,
                "n_pairs": outputs.comparison.n_pairs,
            },
            "overlay": outputs.overlay,
            "bootstrap": None if cfg is None else {
                "replications": cfg.replications,
                "confidence": cfg.confidence,
                "seed": cfg.seed,
            },
        }

    app.include_router(v1)
    return app
