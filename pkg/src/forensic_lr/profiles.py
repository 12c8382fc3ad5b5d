"""Binary-locus profiles, databases of profiles and their sufficient statistics.

Databases are assumed to hold individuals distinct from both the suspect
and the perpetrator. That cannot be checked from the data and is left to
the caller. Duplicate rows are counted as separate individuals.
"""

from __future__ import annotations

import csv
import enum
import io
import os
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ValidationError

__all__ = [
    "Profile",
    "Database",
    "LocusCounts",
    "LocusMatch",
    "summarize",
    "match_mask",
    "is_match",
    "read_profile_csv",
    "read_database_csv",
    "write_database_csv",
    "format_database_csv",
]


def _as_state(value) -> int:
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)) and value in (0, 1):
        return int(value)
    raise ValidationError(f"locus state must be 0 or 1, got {value!r}")


@dataclass(frozen=True)
class Profile:
    """States ``a_k`` in {0, 1} of the K loci of one individual."""

    states: tuple[int, ...]

    def __post_init__(self) -> None:
        states = tuple(_as_state(v) for v in self.states)
        if not states:
            raise ValidationError("a profile needs at least one locus")
        object.__setattr__(self, "states", states)

    @property
    def num_loci(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, k: int) -> int:
        return self.states[k]


class Database:
    """``L`` profiles stacked as an ``(L, K)`` array of 0/1 values.

    ``L = 0`` is allowed; the number of loci must then be given explicitly
    (or is inferred as 0 when it does not matter).
    """

    def __init__(self, rows: Union[np.ndarray, Iterable[Sequence[int]]], num_loci: int | None = None):
        if isinstance(rows, np.ndarray):
            arr = rows
        else:
            rows = [tuple(r) for r in rows]
            widths = {len(r) for r in rows}
            if len(widths) > 1:
                raise ValidationError(f"ragged database: row lengths {sorted(widths)}")
            if rows:
                arr = np.array(rows)
            else:
                arr = np.zeros((0, num_loci or 0), dtype=np.uint8)
        if arr.ndim != 2:
            raise ValidationError(f"database must be two-dimensional, got shape {arr.shape}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValidationError("database entries must all be 0 or 1")
        if num_loci is not None and arr.shape[1] != num_loci:
            if arr.shape[0] == 0:
                arr = np.zeros((0, num_loci), dtype=np.uint8)
            else:
                raise ValidationError(f"database has {arr.shape[1]} loci, expected {num_loci}")
        self._rows = np.ascontiguousarray(arr, dtype=np.uint8)
        self._rows.setflags(write=False)

    @classmethod
    def empty(cls, num_loci: int) -> "Database":
        return cls(np.zeros((0, num_loci), dtype=np.uint8))

    @property
    def rows(self) -> np.ndarray:
        """Read-only ``(L, K)`` uint8 array."""
        return self._rows

    @property
    def num_rows(self) -> int:
        return self._rows.shape[0]

    @property
    def num_loci(self) -> int:
        return self._rows.shape[1]

    def __len__(self) -> int:
        return self.num_rows

    def profiles(self) -> list[Profile]:
        return [Profile(tuple(int(v) for v in row)) for row in self._rows]

    def concat(self, other: "Database") -> "Database":
        if self.num_loci != other.num_loci:
            raise ValidationError("cannot concatenate databases with different numbers of loci")
        return Database(np.vstack([self._rows, other._rows]))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Database) and np.array_equal(self._rows, other._rows) \
            and self.num_loci == other.num_loci

    def __repr__(self) -> str:
        return f"Database(L={self.num_rows}, K={self.num_loci})"


@dataclass(frozen=True)
class LocusCounts:
    """Per-locus count ``n_k`` of state-1 observations out of ``L`` rows."""

    n: tuple[int, ...]
    L: int

    def __post_init__(self) -> None:
        n = tuple(int(v) for v in self.n)
        L = int(self.L)
        if L < 0:
            raise ValidationError(f"L must be non-negative, got {L}")
        bad = [k for k, v in enumerate(n) if not 0 <= v <= L]
        if bad:
            raise ValidationError(f"counts out of range [0, {L}] at loci {bad}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", L)

    @classmethod
    def empty(cls, num_loci: int) -> "LocusCounts":
        return cls((0,) * num_loci, 0)

    @property
    def num_loci(self) -> int:
        return len(self.n)

    def __add__(self, other: "LocusCounts") -> "LocusCounts":
        if self.num_loci != other.num_loci:
            raise ValidationError("cannot add counts over different numbers of loci")
        return LocusCounts(tuple(a + b for a, b in zip(self.n, other.n)), self.L + other.L)


def summarize(db: Database) -> LocusCounts:
    """Sufficient statistics of a database: ``n_k = sum_l a_kl`` and ``L``."""
    n = db.rows.sum(axis=0, dtype=np.int64)
    return LocusCounts(tuple(int(v) for v in n), db.num_rows)


class LocusMatch(str, enum.Enum):
    MATCH_1 = "match-at-1"
    MATCH_0 = "match-at-0"
    MISMATCH = "mismatch"


def match_mask(r: Profile, s: Profile) -> tuple[LocusMatch, ...]:
    """Classify every locus of perpetrator ``r`` against suspect ``s``."""
    if len(r) != len(s):
        raise ValidationError(f"profiles have different lengths: {len(r)} vs {len(s)}")
    out = []
    for rk, sk in zip(r, s):
        if rk != sk:
            out.append(LocusMatch.MISMATCH)
        else:
            out.append(LocusMatch.MATCH_1 if sk == 1 else LocusMatch.MATCH_0)
    return tuple(out)


def is_match(mask: Sequence[LocusMatch]) -> bool:
    return all(m is not LocusMatch.MISMATCH for m in mask)


# --- CSV ------------------------------------------------------------------
# Header `locus_1,...,locus_K`, then one row of 0/1 values per individual.


def _parse_csv(text: str, source: str) -> tuple[list[str], list[tuple[int, ...]]]:
    reader = csv.reader(io.StringIO(text))
    lines = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not lines:
        raise ValidationError(f"{source}: missing header row")
    header = [h.strip() for h in lines[0]]
    if any(not h for h in header):
        raise ValidationError(f"{source}: empty column name in header")
    rows = []
    for lineno, row in enumerate(lines[1:], start=2):
        if len(row) != len(header):
            raise ValidationError(
                f"{source}: row {lineno} has {len(row)} values, header has {len(header)}"
            )
        try:
            rows.append(tuple(_parse_cell(c) for c in row))
        except ValidationError as exc:
            raise ValidationError(f"{source}: row {lineno}: {exc}") from None
    return header, rows


def _parse_cell(cell: str) -> int:
    cell = cell.strip()
    if cell not in ("0", "1"):
        raise ValidationError(f"locus state must be 0 or 1, got {cell!r}")
    return int(cell)


def _read_text(path: Union[str, os.PathLike]) -> str:
    try:
        with open(path, newline="") as f:
            return f.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {os.fspath(path)}: {exc.strerror}") from None


def read_database_csv(path: Union[str, os.PathLike]) -> Database:
    header, rows = _parse_csv(_read_text(path), os.fspath(path))
    if not rows:
        return Database.empty(len(header))
    return Database(rows)


def read_profile_csv(path: Union[str, os.PathLike]) -> Profile:
    header, rows = _parse_csv(_read_text(path), os.fspath(path))
    if len(rows) != 1:
        raise ValidationError(f"{os.fspath(path)}: expected exactly one profile row, found {len(rows)}")
    return Profile(rows[0])


def format_database_csv(db: Database) -> str:
    lines = [",".join(f"locus_{k + 1}" for k in range(db.num_loci))]
    lines.extend(",".join("1" if v else "0" for v in row) for row in db.rows)
    return "\n".join(lines) + "\n"


def write_database_csv(db: Database, path: Union[str, os.PathLike]) -> None:
    with open(path, "w", newline="") as f:
        f.write(format_database_csv(db))
