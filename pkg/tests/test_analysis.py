"""Distance tables, fit summaries, overlap stats, method comparison, overlay."""

from __future__ import annotations

import json

import numpy as np
import pytest
from scipy import stats

from conftest import profile_of
from panelfit.analysis import (
    StudySet,
    build_distance_table,
    compare_methods,
    export_overlay,
    fit_summary,
    format_distance,
    overlap_percentage,
    summary_line,
)
from panelfit.corpus import union_profile
from panelfit.errors import ValidationError
from panelfit.layout import MapLayout
from panelfit.metrics import barycenter
from panelfit.resample import BootstrapConfig, ci_overlap, confidence_ellipse
from panelfit.simgraph import JournalIndex


@pytest.fixture
def grid_layout():
    return MapLayout.from_coords({
        0: (0.0, 0.0), 1: (1.0, 0.0), 2: (2.0, 0.0), 3: (3.0, 0.0),
    })


def make_study(member_counts: dict, group_counts: dict) -> StudySet:
    profiles = {}
    for eid, counts in {**member_counts, **group_counts}.items():
        profiles[eid] = profile_of(eid, counts)
    profiles["PANEL"] = union_profile(
        "PANEL", [profiles[m] for m in member_counts]
    )
    profiles["DEPT"] = union_profile(
        "DEPT", [profiles[g] for g in group_counts]
    )
    return StudySet(
        panel_id="PANEL",
        member_ids=tuple(member_counts),
        department_id="DEPT",
        group_ids=tuple(group_counts),
        profiles=profiles,
    )


def test_shortest_member_flagged(grid_layout):
    # group at x=0; PM2 at x=1 is closer than PM1 at x=2
    study = make_study(
        {"PM1": {2: 1}, "PM2": {1: 1}},
        {"G1": {0: 1}},
    )
    table = build_distance_table(study, "barycenter", layout=grid_layout)
    assert table.flags[("PM2", "G1")].is_shortest
    assert not table.flags[("PM1", "G1")].is_shortest
    assert table.shortest_members("G1") == ("PM2",)


def test_exactly_one_shortest_unless_tied(grid_layout):
    study = make_study(
        {"PM1": {2: 1}, "PM2": {2: 1}},  # same profile -> exact tie
        {"G1": {0: 1}},
    )
    table = build_distance_table(study, "barycenter", layout=grid_layout)
    assert table.shortest_members("G1") == ("PM1", "PM2")


def test_overlap_flag_from_cis(grid_layout, tiny_similarity):
    study = make_study(
        {"PM1": {0: 3, 1: 1}, "PM2": {1: 2, 2: 2}},
        {"G1": {0: 2, 1: 2}},
    )
    cfg = BootstrapConfig(replications=200, seed=3)
    table = build_distance_table(study, "barycenter", layout=grid_layout, cfg=cfg)
    shortest = table.shortest_members("G1")[0]
    other = next(m for m in table.member_ids if m != shortest)
    expected = ci_overlap(table.cell(other, "G1").ci, table.cell(shortest, "G1").ci)
    assert table.flags[(other, "G1")].overlaps_shortest == expected
    assert not table.flags[(shortest, "G1")].overlaps_shortest


def test_display_rounding_never_changes_flags(grid_layout):
    # distances 2.0001 vs 2.0002 round to the same 3-decimal display
    layout = MapLayout.from_coords({
        0: (0.0, 0.0), 1: (2.0001, 0.0), 2: (2.0002, 0.0),
    })
    study = make_study({"PM1": {1: 1}, "PM2": {2: 1}}, {"G1": {0: 1}})
    table = build_distance_table(study, "barycenter", layout=layout)
    d1 = table.cell("PM1", "G1").d
    d2 = table.cell("PM2", "G1").d
    assert format_distance(d1) == format_distance(d2)
    assert table.flags[("PM1", "G1")].is_shortest
    assert not table.flags[("PM2", "G1")].is_shortest


def test_flags_match_full_precision_argmin_on_random_fixtures(tiny_similarity):
    rng = np.random.default_rng(9)
    for _ in range(20):
        coords = {j: (float(rng.normal()), float(rng.normal())) for j in range(3)}
        layout = MapLayout.from_coords(coords)
        members = {f"PM{i}": {int(j): int(rng.integers(1, 6))
                              for j in rng.choice(3, 2, replace=False)}
                   for i in range(4)}
        groups = {f"G{i}": {int(j): int(rng.integers(1, 6))
                            for j in rng.choice(3, 2, replace=False)}
                  for i in range(3)}
        study = make_study(members, groups)
        table = build_distance_table(study, "barycenter", layout=layout)
        for g in study.group_ids:
            dmin = min(table.cell(m, g).d for m in study.member_ids)
            oracle = {m for m in study.member_ids if table.cell(m, g).d == dmin}
            assert set(table.shortest_members(g)) == oracle


def test_fit_summary_hand_computed(grid_layout):
    # minima 0.1 and 0.3 -> avg 0.2, population sd 0.1
    layout = MapLayout.from_coords({
        0: (0.0, 0.0), 1: (0.1, 0.0), 2: (1.0, 0.0), 3: (1.3, 0.0), 4: (9.0, 0.0),
    })
    study = make_study(
        {"PM1": {1: 1}, "PM2": {3: 1}},
        {"G1": {0: 1}, "G2": {2: 1}},
    )
    table = build_distance_table(study, "barycenter", layout=layout)
    fit = fit_summary(table)
    assert fit.avg_shortest == pytest.approx(0.2, abs=1e-12)
    assert fit.sd_shortest == pytest.approx(0.1, abs=1e-12)
    assert fit.per_group_shortest["G1"][0] == ("PM1",)


def test_fit_summary_single_group_sd_zero(grid_layout):
    study = make_study({"PM1": {1: 1}, "PM2": {2: 1}}, {"G1": {0: 1}})
    table = build_distance_table(study, "barycenter", layout=grid_layout)
    assert fit_summary(table).sd_shortest == 0.0


def test_summary_line_format():
    study = make_study({"PM1": {1: 1}}, {"G1": {0: 1}})
    layout = MapLayout.from_coords({0: (0.0, 0.0), 1: (0.132, 0.0)})
    table = build_distance_table(study, "barycenter", layout=layout)
    line = summary_line(fit_summary(table))
    assert line == "Average shortest distances is 0.132 (SD 0.000)"


def _bootstrap_table(study, layout, seed=5, reps=150):
    cfg = BootstrapConfig(replications=reps, seed=seed)
    return build_distance_table(study, "barycenter", layout=layout, cfg=cfg)


def brute_force_overlap(table, include_panel=False, include_dept=False):
    numerator = 0
    denominator = 0
    cols = list(table.group_ids) + ([table.department_id] if include_dept else [])
    for g in cols:
        dmin = min(table.cell(m, g).d for m in table.member_ids)
        shortest = [m for m in table.member_ids if table.cell(m, g).d == dmin]
        rows = [m for m in table.member_ids if m not in shortest]
        if include_panel:
            rows.append(table.panel_id)
        for m in rows:
            denominator += 1
            if any(ci_overlap(table.cell(m, g).ci, table.cell(s, g).ci)
                   for s in shortest):
                numerator += 1
    return numerator, denominator


def test_overlap_percentage_matches_recount(grid_layout):
    rng = np.random.default_rng(30)
    coords = {j: (float(rng.normal()), float(rng.normal())) for j in range(4)}
    layout = MapLayout.from_coords(coords)
    members = {f"PM{i}": {int(j): int(rng.integers(1, 8))
                          for j in rng.choice(4, 2, replace=False)}
               for i in range(4)}
    groups = {f"G{i}": {int(j): int(rng.integers(1, 8))
                        for j in rng.choice(4, 2, replace=False)}
              for i in range(6)}
    study = make_study(members, groups)
    table = _bootstrap_table(study, layout)
    stats_ = overlap_percentage(table)
    num, den = brute_force_overlap(table)
    assert (stats_.numerator, stats_.denominator) == (num, den)
    assert stats_.percentage == pytest.approx(100.0 * num / den)

    with_flags = overlap_percentage(table, include_panel_row=True,
                                    include_department_column=True)
    num2, den2 = brute_force_overlap(table, include_panel=True, include_dept=True)
    assert (with_flags.numerator, with_flags.denominator) == (num2, den2)


def test_overlap_percentage_zero_when_disjoint():
    # far-apart groups with tight single-journal members: zero-width CIs
    layout = MapLayout.from_coords({
        0: (0.0, 0.0), 1: (10.0, 0.0), 2: (20.0, 0.0), 3: (30.0, 0.0),
    })
    study = make_study(
        {"PM1": {0: 1}, "PM2": {1: 1}, "PM3": {2: 1}},
        {"G1": {3: 1}},
    )
    table = _bootstrap_table(study, layout, reps=100)
    stats_ = overlap_percentage(table)
    assert stats_.numerator == 0
    assert stats_.percentage == 0.0


def test_overlap_needs_cis(grid_layout):
    study = make_study({"PM1": {1: 1}, "PM2": {2: 1}}, {"G1": {0: 1}})
    table = build_distance_table(study, "barycenter", layout=grid_layout)
    with pytest.raises(ValidationError):
        overlap_percentage(table)


def _tables_for_comparison(rng, n_members=4, n_groups=5):
    coords = {j: (float(rng.normal()), float(rng.normal())) for j in range(6)}
    layout = MapLayout.from_coords(coords)
    from conftest import random_similarity
    sim = random_similarity(rng, 6, density=0.5)
    members = {f"PM{i}": {int(j): int(rng.integers(1, 8))
                          for j in rng.choice(6, 3, replace=False)}
               for i in range(n_members)}
    groups = {f"G{i}": {int(j): int(rng.integers(1, 8))
                        for j in rng.choice(6, 3, replace=False)}
              for i in range(n_groups)}
    study = make_study(members, groups)
    tb = build_distance_table(study, "barycenter", layout=layout)
    ts = build_distance_table(study, "sapv", matrix=sim)
    return tb, ts


def test_compare_methods_perfect_linear(grid_layout):
    study = make_study({"PM1": {1: 1}, "PM2": {2: 1}}, {"G1": {0: 1}, "G2": {3: 1}})
    table = build_distance_table(study, "barycenter", layout=grid_layout)
    # a table against itself is trivially r = rho = 1
    cmp = compare_methods(table, table)
    assert cmp.pearson_r == pytest.approx(1.0, abs=1e-12)
    assert cmp.spearman_rho == pytest.approx(1.0, abs=1e-12)
    assert cmp.n_pairs == 4


def test_compare_methods_matches_scipy_oracle():
    rng = np.random.default_rng(44)
    tb, ts = _tables_for_comparison(rng)
    cmp = compare_methods(tb, ts)
    pairs = [(m, g) for m in tb.member_ids for g in tb.group_ids]
    x = np.array([tb.cell(m, g).d for m, g in pairs])
    y = np.array([ts.cell(m, g).d for m, g in pairs])
    assert cmp.pearson_r == pytest.approx(stats.pearsonr(x, y)[0], abs=1e-12)
    assert cmp.spearman_rho == pytest.approx(stats.spearmanr(x, y)[0], abs=1e-12)


def test_compare_methods_invariance_under_monotone_maps():
    rng = np.random.default_rng(45)
    tb, ts = _tables_for_comparison(rng)
    base = compare_methods(tb, ts)

    from dataclasses import replace
    scaled_cells = {k: replace(c, d=2.5 * c.d) for k, c in ts.cells.items()}
    ts_scaled = replace(ts, cells=scaled_cells)
    scaled = compare_methods(tb, ts_scaled)
    assert scaled.pearson_r == pytest.approx(base.pearson_r, abs=1e-12)
    assert scaled.spearman_rho == pytest.approx(base.spearman_rho, abs=1e-12)

    cubed_cells = {k: replace(c, d=c.d ** 3) for k, c in ts.cells.items()}
    ts_cubed = replace(ts, cells=cubed_cells)
    cubed = compare_methods(tb, ts_cubed)
    assert cubed.spearman_rho == pytest.approx(base.spearman_rho, abs=1e-12)


def test_compare_methods_antitone_gives_minus_one():
    rng = np.random.default_rng(46)
    tb, _ = _tables_for_comparison(rng)
    from dataclasses import replace
    flipped_cells = {k: replace(c, d=-c.d) for k, c in tb.cells.items()}
    tb_flipped = replace(tb, cells=flipped_cells)
    cmp = compare_methods(tb, tb_flipped)
    assert cmp.spearman_rho == pytest.approx(-1.0, abs=1e-12)


def test_export_overlay_structure_and_roundtrip(grid_layout):
    index = JournalIndex(["J0", "J1", "J2", "J3"])
    profiles = [profile_of("G1", {0: 5}), profile_of("PM1", {1: 2, 2: 1})]
    barys = {p.entity_id: barycenter(p, grid_layout) for p in profiles}
    rng = np.random.default_rng(2)
    cloud = rng.normal(size=(100, 2))
    ellipses = {"G1": confidence_ellipse(cloud, 0.95)}
    doc = export_overlay(profiles, {"G1": "Group One"}, index, grid_layout,
                         barys, ellipses)

    node_g1 = next(n for n in doc["nodes"] if n["journal_id"] == 0)
    assert node_g1["sizes"] == {"G1": 5}
    ent_g1 = next(e for e in doc["entities"] if e["entity_id"] == "G1")
    assert ent_g1["label"] == "Group One"
    assert ent_g1["ellipse"]["coverage_count"] == 95

    again = json.loads(json.dumps(doc))
    assert again == doc  # float values survive the round trip exactly

    ent_pm1 = next(e for e in doc["entities"] if e["entity_id"] == "PM1")
    assert ent_pm1["ellipse"] is None


def test_export_overlay_zero_size_ellipse(grid_layout):
    index = JournalIndex(["J0", "J1", "J2", "J3"])
    profiles = [profile_of("E", {0: 2})]
    barys = {"E": barycenter(profiles[0], grid_layout)}
    pts = np.tile([0.0, 0.0], (50, 1))
    ellipses = {"E": confidence_ellipse(pts, 0.95)}
    doc = export_overlay(profiles, {}, index, grid_layout, barys, ellipses)
    assert doc["entities"][0]["ellipse"]["semi_axes"] == [0.0, 0.0]


def test_export_overlay_layout_mismatch_rejected(grid_layout):
    index = JournalIndex(["J0", "J1", "J2", "J3"])
    other_layout = MapLayout.from_coords({0: (9.0, 9.0)})
    profiles = [profile_of("E", {0: 2})]
    barys = {"E": barycenter(profiles[0], other_layout)}
    with pytest.raises(ValidationError, match="layout"):
        export_overlay(profiles, {}, index, grid_layout, barys)
