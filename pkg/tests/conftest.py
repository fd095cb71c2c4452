"""Shared fixtures: a small synthetic corpus with two journal communities."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from scipy import sparse

from panelfit.corpus import EntityProfile
from panelfit.pipeline import load_dataset
from panelfit.simgraph import (
    JournalIndex,
    SimilarityMatrix,
    build_citation_matrix,
    cosine_similarity,
    persist_matrix,
)

JOURNALS = [
    "Journal of Alpha Studies",   # community A
    "Beta Letters",               # community A
    "Gamma Reports",              # community A
    "Delta Review",               # community B
    "Epsilon Annals",             # community B
    "Zeta Notes",                 # community B
]

# citing, cited, count; two tight communities with one weak cross link
EDGES = [
    ("Journal of Alpha Studies", "Journal of Alpha Studies", 30),
    ("Journal of Alpha Studies", "Beta Letters", 20),
    ("Journal of Alpha Studies", "Gamma Reports", 12),
    ("Beta Letters", "Journal of Alpha Studies", 18),
    ("Beta Letters", "Beta Letters", 25),
    ("Beta Letters", "Gamma Reports", 10),
    ("Gamma Reports", "Journal of Alpha Studies", 9),
    ("Gamma Reports", "Beta Letters", 11),
    ("Gamma Reports", "Gamma Reports", 22),
    ("Delta Review", "Delta Review", 28),
    ("Delta Review", "Epsilon Annals", 17),
    ("Delta Review", "Zeta Notes", 9),
    ("Epsilon Annals", "Delta Review", 14),
    ("Epsilon Annals", "Epsilon Annals", 31),
    ("Epsilon Annals", "Zeta Notes", 12),
    ("Zeta Notes", "Delta Review", 8),
    ("Zeta Notes", "Epsilon Annals", 13),
    ("Zeta Notes", "Zeta Notes", 19),
    ("Gamma Reports", "Delta Review", 2),
    ("Delta Review", "Gamma Reports", 1),
]

PUBS_ROWS = [
    # pub_id, journal_title, year, doc_type, entity_ids
    ("p01", "Journal of Alpha Studies", "2010", "article", "G1"),
    ("p02", "Journal of Alpha Studies", "2011", "article", "G1"),
    ("p03", "Beta Letters", "2011", "letter", "G1"),
    ("p04", "Gamma Reports", "2012", "review", "G1;G2"),          # joint pub
    ("p05", "Gamma Reports", "2012", "article", "G2"),
    ("p06", "Delta Review", "2013", "article", "G2"),
    ("p07", "Epsilon Annals", "2013", "note", "G2"),
    ("p08", "Delta Review", "2009", "article", "G3"),
    ("p09", "Epsilon Annals", "2010", "proceedings_paper", "G3"),
    ("p10", "Zeta Notes", "2011", "article", "G3"),
    ("p11", "Zeta Notes", "2012", "article", "G3"),
    ("p12", "Alpha Studies Quarterly", "2008", "article", "PM1"),  # renamed journal
    ("p13", "Journal of Alpha Studies", "2012", "article", "PM1"),
    ("p14", "Beta Letters", "2013", "article", "PM1"),
    ("p15", "Beta Bulletin", "2010", "article", "PM2"),            # merged journal
    ("p16", "Gamma Reports", "2011", "article", "PM2"),
    ("p17", "Delta Review", "2012", "article", "PM2"),
    ("p18", "Delta Review", "2011", "article", "PM3"),
    ("p19", "Epsilon Annals", "2012", "article", "PM3"),
    ("p20", "Zeta Notes", "2013", "article", "PM3"),
    ("p21", "Zeta Notes", "2010", "article", "PM4"),
    ("p22", "Epsilon Annals", "2011", "article", "PM4"),
    ("p23", "Discontinued Journal", "2012", "article", "PM4"),     # removed journal
    ("p24", "Gamma Reports", "2013", "editorial", "G1"),           # excluded doc type
    ("p25", "Old Omega Journal", "2009", "article", "G2"),         # split resolution
]

ENTITIES_ROWS = [
    ("G1", "research_group", "Group One", ""),
    ("G2", "research_group", "Group Two", ""),
    ("G3", "research_group", "Group Three", ""),
    ("PM1", "panel_member", "Member One", ""),
    ("PM2", "panel_member", "Member Two", ""),
    ("PM3", "panel_member", "Member Three", ""),
    ("PM4", "panel_member", "Member Four", ""),
    ("PANEL", "panel", "Whole Panel", "PM1;PM2;PM3;PM4"),
    ("DEPT", "department", "All Groups", "G1;G2;G3"),
]

ALIAS_ROWS = [
    ("rename", "Alpha Studies Quarterly", "Journal of Alpha Studies"),
    ("merge", "Beta Bulletin", "Beta Letters"),
    ("split_resolution", "Old Omega Journal", "Gamma Reports"),
    ("removed", "Discontinued Journal", ""),
]

MAP_ROWS = [
    ("Journal of Alpha Studies", "0.0", "0.0"),
    ("Beta Letters", "0.4", "0.1"),
    ("Gamma Reports", "0.2", "0.5"),
    ("Delta Review", "3.0", "2.8"),
    ("Epsilon Annals", "3.4", "3.1"),
    ("Zeta Notes", "2.9", "3.3"),
]


def write_delimited(path: Path, header, rows, delimiter=",", directive=None):
    lines = []
    if directive:
        lines.append(directive)
    sep = delimiter
    lines.append(sep.join(header))
    for row in rows:
        lines.append(sep.join(str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def build_fixture_files(root: Path) -> dict[str, Path]:
    root.mkdir(parents=True, exist_ok=True)
    paths = {
        "edges": write_delimited(root / "edges.csv",
                                 ("citing_title", "cited_title", "count"), EDGES),
        "pubs": write_delimited(root / "pubs.csv",
                                ("pub_id", "journal_title", "year", "doc_type",
                                 "entity_ids"), PUBS_ROWS),
        "entities": write_delimited(root / "entities.csv",
                                    ("entity_id", "kind", "label", "member_ids"),
                                    ENTITIES_ROWS),
        "aliases": write_delimited(root / "aliases.csv",
                                   ("rule_kind", "source_title", "target_title"),
                                   ALIAS_ROWS),
        "map": write_delimited(root / "map.csv", ("journal_title", "x", "y"), MAP_ROWS),
    }
    index = JournalIndex.from_titles(JOURNALS)
    cm = build_citation_matrix(EDGES, index)
    sim = cosine_similarity(cm)
    matrix_path = root / "matrix.pnlf"
    persist_matrix(sim, matrix_path, precision="f64")
    paths["matrix"] = matrix_path
    return paths


@pytest.fixture(scope="session")
def fixture_paths(tmp_path_factory) -> dict[str, Path]:
    return build_fixture_files(tmp_path_factory.mktemp("corpus"))


@pytest.fixture(scope="session")
def dataset(fixture_paths):
    return load_dataset(
        fixture_paths["pubs"], fixture_paths["entities"], fixture_paths["matrix"],
        aliases_path=fixture_paths["aliases"], map_path=fixture_paths["map"],
    )


@pytest.fixture
def tiny_similarity() -> SimilarityMatrix:
    values = np.array([
        [1.0, 0.5, 0.0],
        [0.5, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ])
    return SimilarityMatrix(sparse.csr_matrix(values), JournalIndex(["A", "B", "C"]))


def profile_of(entity_id: str, counts: dict[int, int]) -> EntityProfile:
    return EntityProfile.from_counts(entity_id, counts)


def random_similarity(rng: np.random.Generator, n: int,
                      density: float = 0.3) -> SimilarityMatrix:
    """Random symmetric similarity matrix with unit diagonal."""
    raw = sparse.random(n, n, density=density, random_state=rng,
                        data_rvs=lambda k: rng.uniform(0.05, 1.0, size=k))
    sym = (raw + raw.T) * 0.5
    sym = sym.tocoo()
    off = sym.row != sym.col
    core = sparse.coo_matrix((np.clip(sym.data[off], 0, 1),
                              (sym.row[off], sym.col[off])), shape=(n, n))
    full = (core + sparse.identity(n, format="coo")).tocsr()
    titles = [f"Journal {i:04d}" for i in range(n)]
    return SimilarityMatrix(full, JournalIndex(titles))
