"""Grade-labeled text corpora: loading, validation, cleaning, splitting.

A corpus is a list of documents, each labeled with one of the seven
curriculum grade levels (7 through 12 plus the 12.5 exam level).  The
on-disk format is UTF-8 JSON lines with fields ``id``, ``grade``,
``text`` and optional ``source``.
"""

from __future__ import annotations

import enum
import json
import random
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache, total_ordering

from .errors import DegenerateInputError, FormatError, ValidationError


@total_ordering
class GradeLevel(enum.Enum):
    """The closed seven-value grade scale; no other values construct."""

    GRADE_7 = 7.0
    GRADE_8 = 8.0
    GRADE_9 = 9.0
    GRADE_10 = 10.0
    GRADE_11 = 11.0
    GRADE_12 = 12.0
    GRADE_12_5 = 12.5

    @property
    def label(self) -> str:
        """Canonical string form: ``"7"`` .. ``"12"`` and ``"12.5"``."""
        v = self.value
        return str(int(v)) if v == int(v) else str(v)

    @classmethod
    def from_string(cls, s: str) -> "GradeLevel":
        try:
            return cls(float(s))
        except (TypeError, ValueError):
            valid = ", ".join(g.label for g in cls)
            raise ValidationError(f"invalid grade {s!r}: must be one of {valid}") from None

    @classmethod
    def from_value(cls, v: float) -> "GradeLevel":
        return cls.from_string(str(v))

    def __lt__(self, other):
        if isinstance(other, GradeLevel):
            return self.value < other.value
        return NotImplemented


GRADES: tuple[GradeLevel, ...] = tuple(sorted(GradeLevel, key=lambda g: g.value))


@dataclass(frozen=True)
class Document:
    """One grade-labeled text with identity and provenance."""

    id: str
    text: str
    grade: GradeLevel
    source: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValidationError("document id must be non-empty")
        if not self.text.strip():
            raise ValidationError(f"document {self.id!r}: text is empty")
        if not isinstance(self.grade, GradeLevel):
            raise ValidationError(f"document {self.id!r}: grade must be a GradeLevel")


@dataclass(frozen=True)
class Corpus:
    """An immutable ordered collection of documents with distinct ids."""

    documents: tuple[Document, ...]

    def __post_init__(self):
        object.__setattr__(self, "documents", tuple(self.documents))
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValidationError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, i):
        return self.documents[i]


@dataclass(frozen=True)
class CleanReport:
    """Record of the non-Latin tokens removed from one document."""

    doc_id: str
    removed_tokens: tuple[tuple[str, tuple[int, int]], ...]
    had_non_latin: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "doc_id": self.doc_id,
                "removed_tokens": [
                    {"surface": s, "start": a, "end": b} for s, (a, b) in self.removed_tokens
                ],
                "had_non_latin": self.had_non_latin,
            },
            ensure_ascii=False,
        )


def _iter_lines(stream):
    for raw in stream:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield raw


def load_corpus(stream, format: str = "jsonl") -> Corpus:
    """Read a corpus from a line stream of JSON records.

    Each line must decode to an object with string fields ``id``, ``grade``
    and ``text`` (``source`` optional).  Grades must be one of the seven
    recognized values.  Malformed lines, bad grades, and duplicate ids all
    raise with the offending line number.
    """
    if format != "jsonl":
        raise ValidationError(f"unsupported corpus format {format!r}")
    docs = []
    seen_ids = set()
    for lineno, line in enumerate(_iter_lines(stream), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"malformed corpus record: {exc.msg}", line=lineno) from None
        if not isinstance(record, dict):
            raise FormatError("corpus record is not an object", line=lineno)
        for key in ("id", "grade", "text"):
            if key not in record:
                raise FormatError(f"corpus record missing field {key!r}", line=lineno)
        doc_id = str(record["id"])
        if doc_id in seen_ids:
            raise ValidationError(f"duplicate document id {doc_id!r} at line {lineno}")
        seen_ids.add(doc_id)
        grade = GradeLevel.from_string(str(record["grade"]))
        try:
            doc = Document(
                id=doc_id,
                text=record["text"],
                grade=grade,
                source=str(record.get("source", "")),
            )
        except ValidationError as exc:
            raise ValidationError(f"{exc} (line {lineno})") from None
        docs.append(doc)
    return Corpus(tuple(docs))


def dump_corpus(corpus: Corpus, fp) -> None:
    """Write a corpus back out as JSON lines; inverse of :func:`load_corpus`."""
    for doc in corpus:
        record = {"id": doc.id, "grade": doc.grade.label, "text": doc.text}
        if doc.source:
            record["source"] = doc.source
        fp.write(json.dumps(record, ensure_ascii=False) + "\n")


@lru_cache(maxsize=4096)
def _is_non_latin_letter(ch: str) -> bool:
    if not ch.isalpha():
        return False
    return "LATIN" not in unicodedata.name(ch, "")


def clean_document(doc: Document) -> tuple[Document, CleanReport]:
    """Remove whole tokens containing non-Latin letters; renormalize spacing.

    Digits and punctuation are preserved.  Raises if cleaning empties the
    text.  Idempotent: cleaning a cleaned document removes nothing.
    """
    kept = []
    removed = []
    pos = 0
    text = doc.text
    n = len(text)
    while pos < n:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        start = pos
        while pos < n and not text[pos].isspace():
            pos += 1
        token = text[start:pos]
        if any(_is_non_latin_letter(c) for c in token):
            removed.append((token, (start, pos)))
        else:
            kept.append(token)
    cleaned = " ".join(kept)
    report = CleanReport(
        doc_id=doc.id,
        removed_tokens=tuple(removed),
        had_non_latin=bool(removed),
    )
    if not cleaned:
        raise DegenerateInputError(
            f"document {doc.id!r}: cleaning removed every token"
        )
    if cleaned == doc.text:
        return doc, report
    return Document(id=doc.id, text=cleaned, grade=doc.grade, source=doc.source), report


def histogram(corpus: Corpus) -> dict[GradeLevel, int]:
    """Per-grade document counts; absent grades map to 0."""
    counts = {g: 0 for g in GRADES}
    for doc in corpus:
        counts[doc.grade] += 1
    return counts


def stratified_split(corpus: Corpus, test_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Deterministic per-grade split into (train, test).

    Each grade contributes ``round(test_fraction * count)`` documents to the
    test half.  Output order follows the original corpus order; the same
    seed always produces the same split.
    """
    if not (0.0 < test_fraction < 1.0):
        raise ValidationError(f"test_fraction must be in (0, 1), got {test_fraction}")
    by_grade: dict[GradeLevel, list[int]] = {g: [] for g in GRADES}
    for idx, doc in enumerate(corpus):
        by_grade[doc.grade].append(idx)
    rng = random.Random(seed)
    test_indices = set()
    for grade in GRADES:
        indices = by_grade[grade]
        if not indices:
            continue
        n_test = round(test_fraction * len(indices))
        shuffled = indices[:]
        rng.shuffle(shuffled)
        test_indices.update(shuffled[:n_test])
    train = tuple(doc for i, doc in enumerate(corpus) if i not in test_indices)
    test = tuple(doc for i, doc in enumerate(corpus) if i in test_indices)
    return Corpus(train), Corpus(test)
