"""Bootstrap resampling, percentile CIs, overlap tests, and ellipses."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import profile_of, random_similarity
from panelfit.errors import ValidationError
from panelfit.layout import MapLayout
from panelfit.metrics import (
    ConfidenceInterval,
    barycenter,
    distance2d,
    distance_nd,
    sapv,
)
from panelfit.resample import (
    BootstrapConfig,
    bootstrap_barycenters,
    bootstrap_distance_ci,
    bootstrap_sample,
    ci_overlap,
    confidence_ellipse,
    percentile_ci,
    replication_rng,
    write_histogram,
)


@pytest.fixture
def square_layout():
    return MapLayout.from_coords({
        0: (0.0, 0.0), 1: (1.0, 0.0), 2: (1.0, 1.0), 3: (0.0, 1.0),
    })


def test_single_publication_resamples_identically():
    p = profile_of("E", {2: 1})
    for r in range(5):
        rng = replication_rng(7, "E", r)
        assert bootstrap_sample(p, rng) == p


def test_resample_preserves_total():
    p = profile_of("E", {0: 3, 1: 2, 3: 4})
    for r in range(20):
        s = bootstrap_sample(p, replication_rng(1, "E", r))
        assert s.total == p.total
        assert sum(s.counts.values()) == p.total


def test_resample_expected_counts_monte_carlo():
    p = profile_of("E", {0: 3, 1: 1})
    reps = 10_000
    total0 = 0
    for r in range(reps):
        s = bootstrap_sample(p, replication_rng(42, "E", r))
        total0 += s.counts.get(0, 0)
    mean0 = total0 / reps
    # per-sample count of journal 0 is Binomial(4, 3/4)
    sigma = np.sqrt(4 * 0.75 * 0.25 / reps)
    assert abs(mean0 - 3.0) <= 3 * sigma


def test_replication_streams_are_stable_and_distinct():
    draws_a = replication_rng(9, "E", 0).integers(0, 1000, 8)
    draws_a2 = replication_rng(9, "E", 0).integers(0, 1000, 8)
    draws_b = replication_rng(9, "E", 1).integers(0, 1000, 8)
    draws_c = replication_rng(9, "F", 0).integers(0, 1000, 8)
    assert np.array_equal(draws_a, draws_a2)
    assert not np.array_equal(draws_a, draws_b)
    assert not np.array_equal(draws_a, draws_c)


def test_percentile_ci_order_statistics():
    samples = list(range(1, 1001))
    ci = percentile_ci(samples, 0.95)
    assert (ci.lo, ci.hi) == (25, 975)


def test_percentile_ci_constant_samples():
    ci = percentile_ci([3.25] * 50, 0.95)
    assert ci.lo == ci.hi == 3.25


def test_percentile_ci_permutation_invariant():
    rng = np.random.default_rng(3)
    samples = rng.normal(size=200)
    ci1 = percentile_ci(samples, 0.9)
    ci2 = percentile_ci(rng.permutation(samples), 0.9)
    assert (ci1.lo, ci1.hi) == (ci2.lo, ci2.hi)


def test_percentile_ci_endpoints_are_observed_values():
    rng = np.random.default_rng(4)
    samples = rng.normal(size=777)
    ci = percentile_ci(samples, 0.95)
    assert ci.lo in samples
    assert ci.hi in samples


def test_percentile_ci_empty_rejected():
    with pytest.raises(ValidationError):
        percentile_ci([], 0.95)


def test_ci_overlap_cases():
    make = lambda lo, hi: ConfidenceInterval(lo, hi, 0.95)
    assert not ci_overlap(make(0, 1), make(2, 3))
    assert ci_overlap(make(0, 2), make(1, 3))
    assert ci_overlap(make(0, 1), make(1, 2))  # touching counts as overlap
    with pytest.raises(ValidationError):
        ci_overlap(make(0, 1), ConfidenceInterval(0, 1, 0.9))


def test_bootstrap_same_single_journal_zero_ci(square_layout):
    a = profile_of("a", {0: 4})
    b = profile_of("b", {0: 9})
    cfg = BootstrapConfig(replications=100, seed=5)
    boot = bootstrap_distance_ci(a, b, "barycenter", cfg, layout=square_layout)
    assert boot.result.d == 0.0
    assert (boot.result.ci.lo, boot.result.ci.hi) == (0.0, 0.0)


def test_bootstrap_single_publication_entities_zero_width(square_layout, tiny_similarity):
    a = profile_of("a", {0: 1})
    b = profile_of("b", {1: 1})
    cfg = BootstrapConfig(replications=200, seed=6)
    for method, kwargs in (
        ("barycenter", {"layout": square_layout}),
        ("sapv", {"matrix": tiny_similarity}),
    ):
        boot = bootstrap_distance_ci(a, b, method, cfg, **kwargs)
        assert boot.result.ci.width == 0.0
        assert np.all(boot.samples == boot.result.d)


def test_bootstrap_bit_identical_across_runs_and_threads(square_layout):
    a = profile_of("a", {0: 5, 1: 3, 2: 2})
    b = profile_of("b", {1: 4, 3: 6})
    cfg = BootstrapConfig(replications=300, seed=11)
    runs = [
        bootstrap_distance_ci(a, b, "barycenter", cfg, layout=square_layout, threads=t)
        for t in (1, 4, 1)
    ]
    for other in runs[1:]:
        assert np.array_equal(runs[0].samples, other.samples)
        assert (runs[0].result.ci.lo, runs[0].result.ci.hi) == \
               (other.result.ci.lo, other.result.ci.hi)


def test_bootstrap_matches_straightforward_reimplementation(square_layout, tiny_similarity):
    a = profile_of("a", {0: 4, 1: 2})
    b = profile_of("b", {1: 3, 2: 5})
    cfg = BootstrapConfig(replications=60, seed=13)

    boot = bootstrap_distance_ci(a, b, "barycenter", cfg, layout=square_layout)
    oracle = []
    for r in range(cfg.replications):
        sa = bootstrap_sample(a, replication_rng(cfg.seed, "a", r))
        sb = bootstrap_sample(b, replication_rng(cfg.seed, "b", r))
        oracle.append(distance2d(barycenter(sa, square_layout),
                                 barycenter(sb, square_layout)))
    assert np.allclose(boot.samples, oracle, rtol=1e-12, atol=1e-15)
    ci = percentile_ci(oracle, cfg.confidence)
    assert boot.result.ci.lo == pytest.approx(ci.lo, rel=1e-12)
    assert boot.result.ci.hi == pytest.approx(ci.hi, rel=1e-12)

    a3 = profile_of("a", {0: 4, 1: 2})
    b3 = profile_of("b", {1: 3, 2: 5})
    boot_s = bootstrap_distance_ci(a3, b3, "sapv", cfg, matrix=tiny_similarity)
    oracle_s = []
    for r in range(cfg.replications):
        sa = bootstrap_sample(a3, replication_rng(cfg.seed, "a", r))
        sb = bootstrap_sample(b3, replication_rng(cfg.seed, "b", r))
        oracle_s.append(distance_nd(sapv(sa, tiny_similarity),
                                    sapv(sb, tiny_similarity)))
    assert np.allclose(boot_s.samples, oracle_s, rtol=1e-12, atol=1e-15)


def test_bootstrap_histogram_export(tmp_path, square_layout):
    a = profile_of("a", {0: 3, 1: 1})
    b = profile_of("b", {2: 2, 3: 2})
    cfg = BootstrapConfig(replications=50, seed=2)
    boot = bootstrap_distance_ci(a, b, "barycenter", cfg, layout=square_layout)
    out = tmp_path / "hist.csv"
    write_histogram(out, boot.samples)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "replication_index,distance"
    assert len(lines) == 51
    values = [float(line.split(",")[1]) for line in lines[1:]]
    assert np.allclose(values, boot.samples)


def test_barycenter_cloud_inside_convex_hull(square_layout):
    from scipy.spatial import Delaunay
    p = profile_of("E", {0: 3, 1: 2, 2: 4, 3: 1})
    cfg = BootstrapConfig(replications=500, seed=8)
    cloud = bootstrap_barycenters(p, cfg, square_layout)
    hull = Delaunay(np.array([square_layout.xy(j) for j in range(4)]))
    assert np.all(hull.find_simplex(cloud) >= 0)


def test_ellipse_identical_points_degenerate():
    pts = np.tile([2.0, -1.0], (10, 1))
    ell = confidence_ellipse(pts, 0.95)
    assert ell.center == (2.0, -1.0)
    assert ell.semi_axes == (0.0, 0.0)
    assert ell.coverage_count == 10


def test_ellipse_collinear_points_zero_minor_axis():
    t = np.linspace(-1, 1, 40)
    pts = np.stack([t, 2 * t], axis=1)
    ell = confidence_ellipse(pts, 0.9)
    assert ell.semi_axes[1] == 0.0
    assert ell.semi_axes[0] > 0.0


def test_ellipse_isotropic_cloud_nearly_circular():
    rng = np.random.default_rng(15)
    pts = rng.normal(size=(1000, 2))
    ell = confidence_ellipse(pts, 0.95)
    a, b = ell.semi_axes
    assert abs(a - b) / a < 0.10


@pytest.mark.parametrize("level,b", [(0.95, 1000), (0.9, 500), (0.5, 101)])
def test_ellipse_coverage_exact(level, b):
    rng = np.random.default_rng(16)
    pts = rng.normal(size=(b, 2)) @ np.array([[2.0, 0.3], [0.1, 0.7]])
    ell = confidence_ellipse(pts, level)
    expected = int(np.ceil(level * b - 1e-9))
    assert ell.coverage_count == expected


def test_ellipse_coverage_verified_geometrically():
    rng = np.random.default_rng(17)
    pts = rng.normal(size=(1000, 2)) * np.array([3.0, 0.5]) + np.array([1.0, 2.0])
    ell = confidence_ellipse(pts, 0.95)
    c = np.array(ell.center)
    cos_r, sin_r = np.cos(ell.rotation), np.sin(ell.rotation)
    rot = np.array([[cos_r, sin_r], [-sin_r, cos_r]])
    local = (pts - c) @ rot.T
    a, b = ell.semi_axes
    q = (local[:, 0] / a) ** 2 + (local[:, 1] / b) ** 2
    assert int(np.count_nonzero(q <= 1.0 + 1e-9)) == 950


def test_ellipse_needs_three_points():
    with pytest.raises(ValidationError):
        confidence_ellipse(np.zeros((2, 2)), 0.95)


def test_config_validation():
    with pytest.raises(ValidationError):
        BootstrapConfig(replications=1)
    with pytest.raises(ValidationError):
        BootstrapConfig(confidence=1.0)
    cfg = BootstrapConfig()
    assert cfg.replications == 1000
    assert cfg.confidence == 0.95
