"""Interaction data: loading, deduplication, binarization, k-core pruning.

Raw interaction logs are delimited text files with a declared column schema.
They are reduced to a deduplicated list of :class:`InteractionRecord` and,
after preprocessing, packed into an :class:`InteractionMatrix` (binary
user-item matrix in CSR form with bidirectional identifier maps).
"""

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

_logger = logging.getLogger(__name__)


class CorpusError(ValueError):
    """Raised for unreadable, malformed, or empty interaction data."""


@dataclass(frozen=True)
class InteractionRecord:
    """One (user, item) interaction, optionally with rating and timestamp."""

    user: object
    item: object
    rating: Optional[float] = None
    timestamp: Optional[int] = None


@dataclass(frozen=True)
class ColumnSchema:
    """Maps raw file columns onto record fields.

    Columns are addressed by position (int) or, when ``header`` is true,
    by column name (str). ``rating`` and ``timestamp`` are optional.
    """

    user: object
    item: object
    rating: object = None
    timestamp: object = None
    delimiter: str = ","
    header: bool = False

    def resolve(self, header_row: Optional[Sequence[str]]):
        """Return positional indices for (user, item, rating, timestamp)."""

        def col(spec):
            if spec is None:
                return None
            if isinstance(spec, int):
                return spec
            if header_row is None:
                raise CorpusError(
                    f"column {spec!r} addressed by name but the schema declares no header"
                )
            try:
                return header_row.index(spec)
            except ValueError:
                raise CorpusError(f"column {spec!r} not found in header {header_row}")

        return col(self.user), col(self.item), col(self.rating), col(self.timestamp)


#: Schemas for common raw layouts.
MOVIELENS_100K_SCHEMA = ColumnSchema(user=0, item=1, rating=2, timestamp=3, delimiter="\t")
MOVIELENS_1M_SCHEMA = ColumnSchema(user=0, item=1, rating=2, timestamp=3, delimiter="::")


def load_interactions(path, schema: ColumnSchema) -> list[InteractionRecord]:
    """Load and deduplicate interaction records from a delimited text file.

    Duplicate (user, item) pairs keep the highest rating; rating ties keep
    the latest timestamp. Raises :class:`CorpusError` on unreadable files,
    malformed rows (with line number), or an empty result.
    """
    path = Path(path)
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc

    best: dict[tuple, InteractionRecord] = {}
    n_rows = 0
    with fh:
        if len(schema.delimiter) == 1:
            rows = csv.reader(fh, delimiter=schema.delimiter)
        else:
            # csv only supports single-char delimiters (e.g. MovieLens-1M "::").
            rows = (line.rstrip("\r\n").split(schema.delimiter) for line in fh)
        rows = iter(enumerate(rows, start=1))

        header_row = None
        if schema.header:
            try:
                _, header_row = next(rows)
            except StopIteration:
                raise CorpusError(f"{path}: empty result")
        u_col, i_col, r_col, t_col = schema.resolve(header_row)

        for lineno, row in rows:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                user = row[u_col].strip()
                item = row[i_col].strip()
                rating = float(row[r_col]) if r_col is not None else None
                timestamp = int(float(row[t_col])) if t_col is not None else None
            except (IndexError, ValueError) as exc:
                raise CorpusError(f"{path}: malformed row at line {lineno}: {exc}") from exc
            if not user or not item:
                raise CorpusError(f"{path}: malformed row at line {lineno}: empty identifier")
            n_rows += 1
            rec = InteractionRecord(user, item, rating, timestamp)
            prev = best.get((user, item))
            if prev is None or _dedup_wins(rec, prev):
                best[(user, item)] = rec

    if not best:
        raise CorpusError(f"{path}: empty result")
    records = list(best.values())
    _logger.info("loaded %s: %d rows, %d unique interactions", path, n_rows, len(records))
    return records


def _dedup_wins(new: InteractionRecord, old: InteractionRecord) -> bool:
    new_r = -np.inf if new.rating is None else new.rating
    old_r = -np.inf if old.rating is None else old.rating
    if new_r != old_r:
        return new_r > old_r
    new_t = -np.inf if new.timestamp is None else new.timestamp
    old_t = -np.inf if old.timestamp is None else old.timestamp
    return new_t > old_t


def binarize(
    records: Sequence[InteractionRecord],
    threshold_fraction: float = 0.6,
    scale_max: float = 5.0,
    inclusive: bool = True,
) -> list[InteractionRecord]:
    """Keep records whose rating clears ``threshold_fraction * scale_max``.

    The comparison is inclusive by default (rating >= threshold); set
    ``inclusive=False`` for a strict comparison. Ratings are dropped from
    the returned records. Every record must carry a rating.
    """
    if not 0 < threshold_fraction <= 1:
        raise ValueError("threshold_fraction must be in (0, 1]")
    threshold = threshold_fraction * scale_max
    kept = []
    for rec in records:
        if rec.rating is None:
            raise CorpusError(f"record ({rec.user}, {rec.item}) has no rating to binarize")
        keep = rec.rating >= threshold if inclusive else rec.rating > threshold
        if keep:
            kept.append(InteractionRecord(rec.user, rec.item, None, rec.timestamp))
    _logger.info(
        "binarize: kept %d/%d records at threshold %s (%s)",
        len(kept), len(records), threshold, "inclusive" if inclusive else "strict",
    )
    return kept


def k_core(records: Sequence[InteractionRecord], k: int = 5) -> list[InteractionRecord]:
    """Prune to the maximal k-core: every user and item keeps >= k interactions.

    Removal iterates to a fixpoint; the result is order-independent. An
    empty fixpoint is returned as an empty list with a warning, not an error.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    kept = list(records)
    while kept:
        user_deg = Counter(r.user for r in kept)
        item_deg = Counter(r.item for r in kept)
        filtered = [r for r in kept if user_deg[r.user] >= k and item_deg[r.item] >= k]
        if len(filtered) == len(kept):
            break
        kept = filtered
    if not kept:
        _logger.warning("k_core(k=%d): empty fixpoint, no interactions survive", k)
    return kept


@dataclass
class InteractionMatrix:
    """Binary user-item interactions in CSR form with identifier maps.

    ``matrix`` rows have strictly ascending item indices; ``user_ids`` /
    ``item_ids`` map dense indices back to the opaque identifiers and
    ``user_index`` / ``item_index`` are their inverses.
    """

    matrix: sp.csr_matrix
    user_ids: list
    item_ids: list
    user_index: dict = field(repr=False, default=None)
    item_index: dict = field(repr=False, default=None)

    def __post_init__(self):
        if self.user_index is None:
            self.user_index = {u: i for i, u in enumerate(self.user_ids)}
        if self.item_index is None:
            self.item_index = {it: i for i, it in enumerate(self.item_ids)}

    @property
    def n_users(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_items(self) -> int:
        return self.matrix.shape[1]

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    def row_items(self, user: int) -> np.ndarray:
        """Sorted item indices the user interacted with."""
        return self.matrix.indices[self.matrix.indptr[user] : self.matrix.indptr[user + 1]]

    @classmethod
    def from_records(cls, records: Sequence[InteractionRecord]) -> "InteractionMatrix":
        """Build a matrix with dense indices assigned by first appearance."""
        if not records:
            raise CorpusError("cannot build a matrix from zero records")
        user_index: dict = {}
        item_index: dict = {}
        rows, cols = [], []
        for rec in records:
            rows.append(user_index.setdefault(rec.user, len(user_index)))
            cols.append(item_index.setdefault(rec.item, len(item_index)))
        shape = (len(user_index), len(item_index))
        mat = sp.csr_matrix(
            (np.ones(len(rows)), (np.asarray(rows), np.asarray(cols))), shape=shape
        )
        mat.sum_duplicates()
        mat.data[:] = 1.0
        mat.sort_indices()
        return cls(mat, list(user_index), list(item_index), user_index, item_index)

    def with_matrix(self, matrix: sp.csr_matrix) -> "InteractionMatrix":
        """A view-like copy sharing this matrix's identifier maps."""
        return InteractionMatrix(
            matrix, self.user_ids, self.item_ids, self.user_index, self.item_index
        )


def dump_interactions(matrix: InteractionMatrix, path, manifest: Optional[dict] = None) -> None:
    """Write the canonical ``user,item`` CSV plus a sidecar JSON manifest."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user", "item"])
        for u in range(matrix.n_users):
            uid = matrix.user_ids[u]
            for i in matrix.row_items(u):
                writer.writerow([uid, matrix.item_ids[i]])
    sidecar = {
        "users": matrix.n_users,
        "items": matrix.n_items,
        "interactions": matrix.nnz,
    }
    if manifest:
        sidecar.update(manifest)
    with open(path.with_suffix(".json"), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dumped(path) -> InteractionMatrix:
    """Load a canonical dump written by :func:`dump_interactions`."""
    records = load_interactions(path, ColumnSchema(user="user", item="item", header=True))
    return InteractionMatrix.from_records(records)
