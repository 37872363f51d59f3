"""Labeled text corpora: loading, cleaning, sampling, dedup keys, persistence.

Corpora are immutable once built; every transformation returns a new one.
Supported file formats are CSV (header row, RFC-4180 quoting) and JSONL
(one object per line). Input records need `text` and `label`; `id`,
`origin` and `sources` are honored when present and written back out.
"""

from __future__ import annotations

import csv
import json
import os
import random
import re
from dataclasses import dataclass, replace
from typing import Iterable, Iterator

from .errors import CorpusError

ORIGINS = ("original", "dag", "dam", "dagam")
FORMATS = ("csv", "jsonl")

# How many source ids each provenance kind requires.
_SOURCE_COUNTS = {"original": 0, "dag": 3, "dam": 1, "dagam": 3}

_ASCII_WS_RE = re.compile(r"[ \t\n\r\f\v]+")
_ANY_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class Document:
    """One labeled text sample with identity and provenance."""

    id: str
    text: str
    label: str
    origin: str = "original"
    sources: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "sources", tuple(self.sources))
        if not self.text:
            raise ValueError(f"document {self.id!r}: text is empty")
        if self.origin not in ORIGINS:
            raise ValueError(f"document {self.id!r}: unknown origin {self.origin!r}")
        expected = _SOURCE_COUNTS[self.origin]
        if len(self.sources) != expected:
            raise ValueError(
                f"document {self.id!r}: origin {self.origin!r} requires "
                f"{expected} source id(s), got {len(self.sources)}"
            )


class Corpus:
    """Ordered document collection with a label -> positions index.

    Iteration order is creation order and never changes; the index maps
    every label to the positions of its documents, covering each document
    exactly once.
    """

    def __init__(self, documents: Iterable[Document]):
        self.documents: tuple[Document, ...] = tuple(documents)
        index: dict[str, list[int]] = {}
        for pos, doc in enumerate(self.documents):
            index.setdefault(doc.label, []).append(pos)
        self.class_index: dict[str, tuple[int, ...]] = {
            label: tuple(positions) for label, positions in index.items()
        }

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __getitem__(self, pos: int) -> Document:
        return self.documents[pos]

    def class_counts(self) -> dict[str, int]:
        return {label: len(ps) for label, ps in self.class_index.items()}


def clean_text(text: str) -> str:
    """Keep printable ASCII only, collapse whitespace runs, trim ends.

    ASCII control whitespace becomes a plain space first so words split
    across lines stay split; non-ASCII characters (whitespace included)
    are dropped outright. Idempotent.
    """
    text = _ASCII_WS_RE.sub(" ", text)
    text = "".join(ch for ch in text if " " <= ch <= "~")
    return _ASCII_WS_RE.sub(" ", text).strip()


def clean_english(doc: Document) -> Document | None:
    """Normalize a document to printable ASCII; None means drop it."""
    cleaned = clean_text(doc.text)
    if not cleaned:
        return None
    if cleaned == doc.text:
        return doc
    return replace(doc, text=cleaned)


def clean_corpus(corpus: Corpus) -> Corpus:
    """Apply clean_english to every document, dropping emptied ones."""
    kept = (clean_english(doc) for doc in corpus)
    return Corpus(doc for doc in kept if doc is not None)


def dedup_key(text: str) -> str:
    """Equality key for duplicate detection.

    Whitespace-normalized, case-sensitive exact text. Idempotent and
    invariant under surrounding whitespace.
    """
    return _ANY_WS_RE.sub(" ", text).strip()


def stratified_half(corpus: Corpus, seed: int) -> Corpus:
    """Keep about half of each class, uniformly without replacement.

    Per class of size k, exactly floor(k/2) documents are kept, plus one
    more when k is odd and a seed-derived coin lands heads. Output order
    follows the input order. Deterministic in (corpus, seed): each class
    gets its own substream keyed by label, so results do not depend on
    class iteration order.
    """
    if len(corpus) == 0:
        raise CorpusError("cannot sample an empty corpus")
    keep: set[int] = set()
    for label, positions in corpus.class_index.items():
        rng = random.Random(f"{seed}|half|{label}")
        k = len(positions)
        n_keep = k // 2
        if k % 2 == 1 and rng.random() < 0.5:
            n_keep += 1
        keep.update(rng.sample(positions, n_keep))
    return Corpus(corpus[pos] for pos in sorted(keep))


def load_corpus(path: str, fmt: str) -> Corpus:
    """Load a labeled corpus, preserving record order.

    Records lacking an id get "<basename>:<ordinal>" with 0-based record
    ordinals. Raises CorpusError for unreadable files, unparsable rows
    (named by row/line), missing fields, and files with no records.
    """
    _check_format(fmt)
    basename = os.path.basename(path)
    try:
        if fmt == "csv":
            docs = _load_csv(path, basename)
        else:
            docs = _load_jsonl(path, basename)
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    if not docs:
        raise CorpusError(f"{path}: no records")
    return Corpus(docs)


def write_corpus(corpus: Corpus, path: str, fmt: str) -> None:
    """Persist a corpus with full provenance.

    CSV columns: text,label,origin,sources,id (sources semicolon-joined);
    JSONL keys: text,label,id,origin,sources. Loading the written file
    reproduces every field. Refuses to write an empty corpus.
    """
    _check_format(fmt)
    if len(corpus) == 0:
        raise CorpusError(f"refusing to write an empty corpus to {path}")
    try:
        if fmt == "csv":
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["text", "label", "origin", "sources", "id"])
                for doc in corpus:
                    writer.writerow(
                        [doc.text, doc.label, doc.origin, ";".join(doc.sources), doc.id]
                    )
        else:
            with open(path, "w", encoding="utf-8") as fh:
                for doc in corpus:
                    record = {
                        "text": doc.text,
                        "label": doc.label,
                        "id": doc.id,
                        "origin": doc.origin,
                        "sources": list(doc.sources),
                    }
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    except OSError as exc:
        raise CorpusError(f"cannot write {path}: {exc}") from exc


def _check_format(fmt: str) -> None:
    if fmt not in FORMATS:
        raise CorpusError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")


def _document_from_record(
    record: dict, basename: str, ordinal: int, where: str, path: str
) -> Document:
    text = record.get("text")
    label = record.get("label")
    if text is None:
        raise CorpusError(f"{path}: {where}: missing field 'text'")
    if label is None:
        raise CorpusError(f"{path}: {where}: missing field 'label'")
    if not isinstance(text, str):
        raise CorpusError(f"{path}: {where}: 'text' must be a string")
    doc_id = record.get("id") or f"{basename}:{ordinal}"
    origin = record.get("origin") or "original"
    sources = record.get("sources") or ()
    if isinstance(sources, str):
        sources = tuple(s for s in sources.split(";") if s)
    try:
        return Document(
            id=str(doc_id),
            text=text,
            label=str(label),
            origin=str(origin),
            sources=tuple(str(s) for s in sources),
        )
    except ValueError as exc:
        raise CorpusError(f"{path}: {where}: {exc}") from exc


def _load_csv(path: str, basename: str) -> list[Document]:
    docs: list[Document] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CorpusError(f"{path}: empty file")
        missing = {"text", "label"} - set(reader.fieldnames)
        if missing:
            raise CorpusError(
                f"{path}: header lacks required column(s): {', '.join(sorted(missing))}"
            )
        try:
            for ordinal, row in enumerate(reader):
                docs.append(
                    _document_from_record(
                        row, basename, ordinal, f"row {ordinal + 2}", path
                    )
                )
        except csv.Error as exc:
            raise CorpusError(f"{path}: row {reader.line_num}: {exc}") from exc
    return docs


def _load_jsonl(path: str, basename: str) -> list[Document]:
    docs: list[Document] = []
    ordinal = 0
    with open(path, encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {line_num}: invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}: line {line_num}: expected a JSON object")
            docs.append(
                _document_from_record(record, basename, ordinal, f"line {line_num}", path)
            )
            ordinal += 1
    return docs
