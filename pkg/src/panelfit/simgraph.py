"""Journal similarity matrix built from aggregated journal-journal citations.

The pipeline: ingest an edge list of (citing_title, cited_title, count),
normalize each journal's outgoing citation row, and score every journal
pair by the cosine similarity of their citing distributions. Because
cosine is invariant to positive per-row scaling, building from the raw
counts and from the row-normalized counts yields the same matrix.

The result is symmetric, valued in [0, 1], with diagonal fixed at 1
(journals that cite nothing are similar only to themselves). Matrices
persist to a binary container with bit-exact round-trip; see
``persist_matrix`` for the format.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import sparse

from .errors import LoadError, ValidationError
from .tabular import read_table

MAGIC = b"PNLF-SIM1"
_PRECISIONS = {4: "<f4", 8: "<f8"}


def normalize_title(title: str) -> str:
    """Canonical form used for all journal title matching.

    Case-insensitive with runs of whitespace collapsed; no other
    normalization is applied.
    """
    return " ".join(title.split()).casefold()


class JournalIndex:
    """Canonical journal identities: dense ids 0..N-1 in a fixed order."""

    def __init__(self, titles: Sequence[str]):
        self._titles = list(titles)
        self._by_norm: dict[str, int] = {}
        for jid, title in enumerate(self._titles):
            key = normalize_title(title)
            if not key:
                raise ValidationError(f"journal id {jid} has an empty title")
            if key in self._by_norm:
                raise ValidationError(f"duplicate journal title after normalization: {title!r}")
            self._by_norm[key] = jid

    @classmethod
    def from_titles(cls, titles: Iterable[str]) -> "JournalIndex":
        """Build an index from raw titles, deduplicated and sorted canonically."""
        seen: dict[str, str] = {}
        for title in titles:
            key = normalize_title(title)
            if key and key not in seen:
                seen[key] = " ".join(title.split())
        return cls([seen[k] for k in sorted(seen)])

    def __len__(self) -> int:
        return len(self._titles)

    def __iter__(self) -> Iterator[str]:
        return iter(self._titles)

    @property
    def n(self) -> int:
        return len(self._titles)

    def id_of(self, title: str) -> int | None:
        return self._by_norm.get(normalize_title(title))

    def title_of(self, journal_id: int) -> str:
        return self._titles[journal_id]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, JournalIndex) and self._titles == other._titles


@dataclass
class CitationMatrix:
    """Sparse citing->cited counts plus the index they are expressed in."""

    counts: sparse.csr_matrix
    index: JournalIndex
    grand_total: int

    @property
    def n(self) -> int:
        return self.index.n


def build_citation_matrix(
    edges: Iterable[tuple[str, str, int]],
    index: JournalIndex,
    rules=None,
) -> CitationMatrix:
    """Accumulate an edge stream into a citation matrix.

    Duplicate (citing, cited) edges are summed. Every title must resolve
    to a journal in ``index``; alias ``rules`` (see corpus.resolve_journal)
    are applied when given. Counts must be positive integers.
    """
    from .corpus import Removed, resolve_journal

    rows: list[int] = []
    cols: list[int] = []
    data: list[int] = []

    def resolve(title: str) -> int:
        if rules is not None:
            res = resolve_journal(title, rules, index)
            if isinstance(res, Removed):
                raise ValidationError(
                    f"citation edge title {title!r} resolves to a removed journal"
                )
            return res
        jid = index.id_of(title)
        if jid is None:
            raise ValidationError(f"citation edge title {title!r} is not in the journal index")
        return jid

    total = 0
    for citing, cited, count in edges:
        if int(count) != count or count <= 0:
            raise ValidationError(
                f"citation count for ({citing!r}, {cited!r}) must be a positive integer, "
                f"got {count!r}"
            )
        rows.append(resolve(citing))
        cols.append(resolve(cited))
        data.append(int(count))
        total += int(count)

    n = index.n
    mat = sparse.coo_matrix(
        (np.asarray(data, dtype=np.int64), (rows, cols)), shape=(n, n)
    ).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return CitationMatrix(counts=mat, index=index, grand_total=total)


def read_edge_file(path: str | Path) -> Iterator[tuple[str, str, int]]:
    """Stream (citing_title, cited_title, count) from a delimited file."""
    for row in read_table(path, required=("citing_title", "cited_title", "count")):
        raw = row["count"].strip()
        try:
            count = int(raw)
        except ValueError:
            raise LoadError(f"line {row.line}: citation count {raw!r} is not an integer")
        yield row["citing_title"].strip(), row["cited_title"].strip(), count


def normalize_citing(cm: CitationMatrix) -> sparse.csr_matrix:
    """Divide each citing row by its row sum; zero rows stay zero."""
    m = cm.counts.astype(np.float64)
    sums = np.asarray(m.sum(axis=1)).ravel()
    scale = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
    return sparse.diags(scale).dot(m).tocsr()


def cosine_similarity(cm: CitationMatrix, *, drop_diagonal: bool = False) -> "SimilarityMatrix":
    """Cosine similarity between citing distributions.

    ``drop_diagonal`` zeroes the self-citation cells of the citation
    matrix before scoring (sensitivity check); by default self-citations
    are part of the citing vector. Journals with an all-zero citing row
    get similarity 0 to every other journal and 1 to themselves.
    """
    m = cm.counts.astype(np.float64).tocsr()
    if drop_diagonal:
        m = m.tocoo()
        off = m.row != m.col
        m = sparse.coo_matrix(
            (m.data[off], (m.row[off], m.col[off])), shape=m.shape
        ).tocsr()

    norms = np.sqrt(np.asarray(m.multiply(m).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    unit = sparse.diags(scale).dot(m).tocsr()

    gram = unit.dot(unit.T)
    gram = ((gram + gram.T) * 0.5).tocoo()
    np.clip(gram.data, 0.0, 1.0, out=gram.data)
    off_diag = gram.row != gram.col
    cleaned = sparse.coo_matrix(
        (gram.data[off_diag], (gram.row[off_diag], gram.col[off_diag])),
        shape=gram.shape,
    )
    full = (cleaned + sparse.identity(cm.n, dtype=np.float64, format="coo")).tocsr()
    return SimilarityMatrix(full, cm.index)


class SimilarityMatrix:
    """Symmetric journal-pair similarities in [0, 1], diagonal 1.

    Stored sparse (explicit zeros eliminated) with cached dense-row
    extraction, which is the hot path for similarity-adapted vectors:
    those only ever touch the rows of journals an entity published in,
    and bootstrap resampling reuses the same rows a thousand times.
    """

    def __init__(self, matrix: sparse.spmatrix, index: JournalIndex):
        m = sparse.csr_matrix(matrix, dtype=np.float64, copy=True)
        if m.shape != (index.n, index.n):
            raise ValidationError(
                f"matrix shape {m.shape} does not match index size {index.n}"
            )
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        self._m = m
        self.index = index
        self._row_cache: dict[int, np.ndarray] = {}
        self.fingerprint = self._fingerprint()

    def _fingerprint(self) -> str:
        h = hashlib.sha256()
        for title in self.index:
            h.update(title.encode("utf-8"))
            h.update(b"\x00")
        h.update(self._m.indptr.astype("<i8").tobytes())
        h.update(self._m.indices.astype("<i8").tobytes())
        h.update(self._m.data.astype("<f8").tobytes())
        return h.hexdigest()[:16]

    @property
    def n(self) -> int:
        return self.index.n

    @property
    def csr(self) -> sparse.csr_matrix:
        return self._m

    @property
    def nnz(self) -> int:
        return self._m.nnz

    def value(self, j: int, k: int) -> float:
        return float(self._m[j, k])

    def row(self, journal_id: int) -> np.ndarray:
        """Dense similarity row for one journal (cached, read-only)."""
        if not 0 <= journal_id < self.n:
            raise ValidationError(f"journal id {journal_id} out of range 0..{self.n - 1}")
        cached = self._row_cache.get(journal_id)
        if cached is None:
            cached = np.asarray(self._m.getrow(journal_id).todense()).ravel()
            cached.flags.writeable = False
            self._row_cache[journal_id] = cached
        return cached

    def rows(self, journals: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
        """Dense sub-block of similarity rows.

        Returns (sorted journal ids, |journals| x N array). Row order
        follows the sorted ids so callers can align count vectors.
        """
        ids = np.asarray(sorted(set(int(j) for j in journals)), dtype=np.int64)
        if ids.size == 0:
            return ids, np.zeros((0, self.n))
        block = np.empty((ids.size, self.n), dtype=np.float64)
        for i, jid in enumerate(ids):
            block[i, :] = self.row(int(jid))
        return ids, block


def persist_matrix(sim: SimilarityMatrix, path: str | Path, *, precision: str = "f32") -> None:
    """Write the matrix container.

    Layout: magic ``PNLF-SIM1``; header of N (u64 LE), precision flag
    (one byte, the value itemsize 4 or 8), and index byte-length (u64 LE);
    the journal index as length-prefixed (u32 LE) UTF-8 titles in id
    order; then the CSR payload of row pointers ((N+1) x u64 LE), column
    indices (nnz x u32 LE) and values (nnz x f32/f64 LE).

    f32 persistence quantizes values once; a matrix loaded from an f32
    file re-persists bit-identically.
    """
    if precision not in ("f32", "f64"):
        raise ValidationError(f"precision must be 'f32' or 'f64', got {precision!r}")
    itemsize = 4 if precision == "f32" else 8
    m = sim.csr

    index_blob = bytearray()
    for title in sim.index:
        raw = title.encode("utf-8")
        index_blob += struct.pack("<I", len(raw)) + raw

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QBQ", sim.n, itemsize, len(index_blob)))
        fh.write(bytes(index_blob))
        fh.write(m.indptr.astype("<u8").tobytes())
        fh.write(m.indices.astype("<u4").tobytes())
        fh.write(m.data.astype(_PRECISIONS[itemsize]).tobytes())


def load_matrix(path: str | Path) -> SimilarityMatrix:
    """Read a matrix container written by :func:`persist_matrix`."""
    blob = Path(path).read_bytes()
    view = memoryview(blob)

    def take(nbytes: int, what: str) -> memoryview:
        nonlocal view
        if len(view) < nbytes:
            raise LoadError(f"{path}: truncated while reading {what}")
        chunk, view = view[:nbytes], view[nbytes:]
        return chunk

    if bytes(take(len(MAGIC), "magic")) != MAGIC:
        raise LoadError(f"{path}: bad magic bytes (not a similarity matrix container)")
    n, itemsize, index_len = struct.unpack("<QBQ", take(17, "header"))
    if itemsize not in _PRECISIONS:
        raise LoadError(f"{path}: unknown precision flag {itemsize}")

    index_view = take(index_len, "journal index")
    titles: list[str] = []
    pos = 0
    while pos < index_len:
        if pos + 4 > index_len:
            raise LoadError(f"{path}: corrupt journal index block")
        (length,) = struct.unpack_from("<I", index_view, pos)
        pos += 4
        if pos + length > index_len:
            raise LoadError(f"{path}: corrupt journal index block")
        titles.append(bytes(index_view[pos:pos + length]).decode("utf-8"))
        pos += length
    if len(titles) != n:
        raise LoadError(
            f"{path}: header says N={n} but the embedded index holds {len(titles)} titles"
        )

    indptr = np.frombuffer(take(8 * (n + 1), "row pointers"), dtype="<u8").astype(np.int64)
    if indptr[0] != 0 or np.any(np.diff(indptr) < 0):
        raise LoadError(f"{path}: row pointer array is not monotone")
    nnz = int(indptr[-1])
    indices = np.frombuffer(take(4 * nnz, "column indices"), dtype="<u4").astype(np.int32)
    if nnz and indices.max() >= n:
        raise LoadError(f"{path}: column index out of range for N={n}")
    data = np.frombuffer(take(itemsize * nnz, "values"), dtype=_PRECISIONS[itemsize])
    if len(view) != 0:
        raise LoadError(f"{path}: {len(view)} trailing bytes after payload")

    matrix = sparse.csr_matrix(
        (data.astype(np.float64), indices, indptr), shape=(n, n)
    )
    return SimilarityMatrix(matrix, JournalIndex(titles))
