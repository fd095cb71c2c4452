"""Publication ingestion and entity profile construction.

A profile is the per-journal publication count vector of an entity. Union
entities (a whole panel, a whole department) are counted over the
deduplicated union of their members' publications: a paper co-authored by
two members contributes once, which is why a union's total is at most the
sum of its members' totals.

Journal titles are matched case-insensitively after whitespace collapsing
and run through the alias rules (renames, merges, split resolutions) before
hitting the journal index. Titles that match nothing are removed from the
sample with a warning, and their publications do not count toward profiles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, EmptyProfileError, LoadError, ValidationError
from .simgraph import JournalIndex, normalize_title
from .tabular import read_table

INCLUDED_DOC_TYPES = ("article", "letter", "note", "proceedings_paper", "review")


class DocType(str, Enum):
    ARTICLE = "article"
    LETTER = "letter"
    NOTE = "note"
    PROCEEDINGS_PAPER = "proceedings_paper"
    REVIEW = "review"
    OTHER = "other"


class EntityKind(str, Enum):
    RESEARCH_GROUP = "research_group"
    PANEL_MEMBER = "panel_member"
    PANEL = "panel"
    DEPARTMENT = "department"


UNION_KINDS = (EntityKind.PANEL, EntityKind.DEPARTMENT)


class RuleKind(str, Enum):
    RENAME = "rename"
    MERGE = "merge"
    SPLIT_RESOLUTION = "split_resolution"
    REMOVED = "removed"


@dataclass(frozen=True)
class PublicationRecord:
    pub_id: str
    journal_title: str
    year: int
    doc_type: DocType
    entity_ids: frozenset[str]
    excluded: bool = False


@dataclass(frozen=True)
class Entity:
    entity_id: str
    kind: EntityKind
    label: str
    member_ids: tuple[str, ...] = ()

    @property
    def is_union(self) -> bool:
        return self.kind in UNION_KINDS


@dataclass(frozen=True)
class AliasRule:
    rule_kind: RuleKind
    source_title: str
    target_title: str


@dataclass(frozen=True)
class Removed:
    """Resolution outcome for titles dropped from the sample."""

    title: str
    reason: str


@dataclass
class LoadReport:
    included: int = 0
    excluded: int = 0
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class EntityProfile:
    """Journal count vector of one entity.

    ``pubs`` is the publication multiset behind the counts, as sorted
    (pub_id, journal_id) pairs; profiles built from a corpus list each
    publication once, while bootstrap resamples may repeat entries.
    """

    entity_id: str
    counts: Mapping[int, int]
    total: int
    pubs: tuple[tuple[str, int], ...]

    @classmethod
    def from_pubs(cls, entity_id: str, pubs: Iterable[tuple[str, int]]) -> "EntityProfile":
        ordered = tuple(sorted(pubs))
        counts: dict[int, int] = {}
        for _, jid in ordered:
            counts[jid] = counts.get(jid, 0) + 1
        return cls(entity_id=entity_id, counts=counts, total=len(ordered), pubs=ordered)

    @classmethod
    def from_counts(cls, entity_id: str, counts: Mapping[int, int]) -> "EntityProfile":
        """Fabricate a profile straight from counts (synthetic data, tests)."""
        pubs = []
        for jid in sorted(counts):
            m = counts[jid]
            if m < 0:
                raise ValidationError(f"negative count for journal {jid}")
            pubs.extend((f"{entity_id}:{jid}:{i}", jid) for i in range(m))
        return cls.from_pubs(entity_id, pubs)

    @property
    def distinct_pub_ids(self) -> frozenset[str]:
        return frozenset(pid for pid, _ in self.pubs)

    @property
    def journals(self) -> tuple[int, ...]:
        return tuple(sorted(j for j, m in self.counts.items() if m > 0))

    def scaled(self, factor: int) -> "EntityProfile":
        """Profile with every count multiplied by a positive integer."""
        if factor < 1:
            raise ValidationError("scale factor must be a positive integer")
        return EntityProfile.from_counts(
            self.entity_id, {j: m * factor for j, m in self.counts.items()}
        )


def load_publications(path: str | Path) -> tuple[list[PublicationRecord], LoadReport]:
    """Read a publications file.

    Rows whose doc_type is outside the five included kinds are retained
    but flagged excluded. Duplicate pub_ids are merged when their fields
    agree (their entity sets are unioned) and rejected otherwise.
    """
    report = LoadReport()
    by_id: dict[str, PublicationRecord] = {}
    order: list[str] = []
    allowed = {d.value for d in DocType if d is not DocType.OTHER}

    for row in read_table(path, required=("pub_id", "journal_title", "year",
                                          "doc_type", "entity_ids")):
        pub_id = row["pub_id"].strip()
        if not pub_id:
            raise LoadError(f"line {row.line}: empty pub_id")
        title = row["journal_title"].strip()
        if not title:
            raise LoadError(f"line {row.line}: missing journal_title")
        try:
            year = int(row["year"].strip())
        except ValueError:
            raise LoadError(f"line {row.line}: year {row['year']!r} is not an integer")
        raw_type = row["doc_type"].strip().lower()
        if raw_type in allowed:
            doc_type, excluded = DocType(raw_type), False
        else:
            doc_type, excluded = DocType.OTHER, True
        entity_ids = frozenset(
            e.strip() for e in row["entity_ids"].split(";") if e.strip()
        )
        if not entity_ids:
            raise LoadError(f"line {row.line}: publication {pub_id!r} credits no entity")

        record = PublicationRecord(pub_id, title, year, doc_type, entity_ids, excluded)
        prior = by_id.get(pub_id)
        if prior is None:
            by_id[pub_id] = record
            order.append(pub_id)
        else:
            same = (
                normalize_title(prior.journal_title) == normalize_title(title)
                and prior.year == year
                and prior.doc_type == doc_type
            )
            if not same:
                raise LoadError(
                    f"line {row.line}: pub_id {pub_id!r} repeats with conflicting fields"
                )
            by_id[pub_id] = PublicationRecord(
                pub_id, prior.journal_title, year, doc_type,
                prior.entity_ids | entity_ids, prior.excluded,
            )

    records = [by_id[p] for p in order]
    for rec in records:
        if rec.excluded:
            report.excluded += 1
        else:
            report.included += 1
    return records, report


def load_entities(path: str | Path) -> list[Entity]:
    entities = []
    seen: set[str] = set()
    for row in read_table(path, required=("entity_id", "kind", "label", "member_ids")):
        entity_id = row["entity_id"].strip()
        if not entity_id:
            raise LoadError(f"line {row.line}: empty entity_id")
        if entity_id in seen:
            raise LoadError(f"line {row.line}: duplicate entity_id {entity_id!r}")
        seen.add(entity_id)
        try:
            kind = EntityKind(row["kind"].strip().lower())
        except ValueError:
            raise LoadError(f"line {row.line}: unknown entity kind {row['kind']!r}")
        members = tuple(m.strip() for m in row["member_ids"].split(";") if m.strip())
        if kind in UNION_KINDS and not members:
            raise LoadError(
                f"line {row.line}: {kind.value} entity {entity_id!r} needs member_ids"
            )
        if kind not in UNION_KINDS and members:
            raise LoadError(
                f"line {row.line}: atomic entity {entity_id!r} must not list members"
            )
        entities.append(Entity(entity_id, kind, row["label"].strip() or entity_id, members))
    return entities


def load_alias_rules(path: str | Path) -> list[AliasRule]:
    rules = []
    for row in read_table(path, required=("rule_kind", "source_title", "target_title")):
        try:
            kind = RuleKind(row["rule_kind"].strip().lower())
        except ValueError:
            raise LoadError(f"line {row.line}: unknown rule kind {row['rule_kind']!r}")
        source = row["source_title"].strip()
        target = row["target_title"].strip()
        if not source:
            raise LoadError(f"line {row.line}: alias rule without source_title")
        if kind is RuleKind.REMOVED:
            if target:
                raise LoadError(
                    f"line {row.line}: removed rule for {source!r} must not name a target"
                )
        elif not target:
            raise LoadError(f"line {row.line}: {kind.value} rule for {source!r} needs a target")
        rules.append(AliasRule(kind, source, target))
    check_rules_acyclic(rules)
    return rules


def _rule_map(rules: Sequence[AliasRule]) -> dict[str, AliasRule]:
    mapping: dict[str, AliasRule] = {}
    for rule in rules:
        key = normalize_title(rule.source_title)
        if key in mapping:
            raise ConfigError(f"conflicting alias rules for source title {rule.source_title!r}")
        mapping[key] = rule
    return mapping


def check_rules_acyclic(rules: Sequence[AliasRule]) -> None:
    """Reject alias files whose source->target chains cycle."""
    mapping = _rule_map(rules)
    for start in mapping:
        seen = {start}
        key = start
        while key in mapping:
            rule = mapping[key]
            if rule.rule_kind is RuleKind.REMOVED:
                break
            key = normalize_title(rule.target_title)
            if key in seen:
                raise ConfigError(
                    f"alias rules cycle starting from {mapping[start].source_title!r}"
                )
            seen.add(key)


def apply_rules(title: str, rules: Sequence[AliasRule]) -> str | Removed:
    """Chase alias chains; returns the terminal title (or a Removed marker)."""
    mapping = _rule_map(rules)
    current = title
    key = normalize_title(title)
    seen = {key}
    while key in mapping:
        rule = mapping[key]
        if rule.rule_kind is RuleKind.REMOVED:
            return Removed(title=title, reason="removed by alias rule")
        current = rule.target_title
        key = normalize_title(current)
        if key in seen:
            raise ConfigError(f"alias rules cycle while resolving {title!r}")
        seen.add(key)
    return current


def resolve_journal(
    title: str, rules: Sequence[AliasRule], index: JournalIndex
) -> int | Removed:
    """Map a raw title to a journal id, chasing alias chains.

    Returns the canonical journal id, or a Removed marker when the title
    was explicitly removed or matches nothing in the index.
    """
    final = apply_rules(title, rules)
    if isinstance(final, Removed):
        return final
    jid = index.id_of(final)
    if jid is None:
        return Removed(title=title, reason="no matching journal in the index")
    return jid


def build_profile(
    entity: Entity,
    pubs: Sequence[PublicationRecord],
    rules: Sequence[AliasRule],
    index: JournalIndex,
    report: LoadReport | None = None,
) -> EntityProfile:
    """Count an entity's included publications per resolved journal.

    For union entities the member publications are deduplicated by pub_id
    before counting. Publications in removed journals are dropped (and
    logged on ``report``), shrinking the total accordingly.
    """
    credited = set(entity.member_ids) if entity.is_union else {entity.entity_id}
    resolved_cache: dict[str, int | Removed] = {}
    kept: list[tuple[str, int]] = []
    seen_pubs: set[str] = set()

    for rec in pubs:
        if rec.excluded or rec.pub_id in seen_pubs:
            continue
        if not (credited & rec.entity_ids):
            continue
        seen_pubs.add(rec.pub_id)
        key = normalize_title(rec.journal_title)
        if key not in resolved_cache:
            resolved_cache[key] = resolve_journal(rec.journal_title, rules, index)
        res = resolved_cache[key]
        if isinstance(res, Removed):
            if report is not None:
                report.warnings.append(
                    f"publication {rec.pub_id!r}: journal {rec.journal_title!r} "
                    f"removed ({res.reason})"
                )
            continue
        kept.append((rec.pub_id, res))

    if not kept:
        raise EmptyProfileError(entity.entity_id, "no usable publications after resolution")
    return EntityProfile.from_pubs(entity.entity_id, kept)


def union_profile(entity_id: str, members: Sequence[EntityProfile]) -> EntityProfile:
    """Deduplicated union of already-built member profiles."""
    merged: dict[str, int] = {}
    for prof in members:
        for pid, jid in prof.pubs:
            merged[pid] = jid
    if not merged:
        raise EmptyProfileError(entity_id, "union of members has no publications")
    return EntityProfile.from_pubs(entity_id, merged.items())
