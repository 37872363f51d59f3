"""Augmentation strategies and orchestration.

Three strategies over a labeled base corpus:

- dag: sample three same-class documents, concatenate, summarize, label.
- dam: emit character-order-changed copies of every base document.
- dagam: both at once, either as a union of independent dag and dam
  outputs, or composed (scrambled variants of the summaries).

Multipliers n_g / n_m scale augmented volume to n times the base, per
class. Every sample draws its randomness from a substream keyed by
(seed, strategy, label, ordinal), so output is identical for any worker
count. Duplicates are removed after generation: first against the base
corpus, then within the augmented output, first occurrence kept.
"""

from __future__ import annotations

import logging
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, TypeVar

from .coc import CocParams, apply_coc
from .corpus import Corpus, Document, clean_corpus, dedup_key, stratified_half
from .errors import CorpusError, PlanError
from .summarize import (
    DEFAULT_MAX_TOKENS,
    DEFAULT_MIN_TOKENS,
    PROTOCOL_BATCH_CAP,
    SummarizerBackend,
    SummaryRequest,
    summarize_batch,
)

log = logging.getLogger(__name__)

STRATEGIES = ("original", "dag", "dam", "dagam")
DAGAM_MODES = ("union", "composed")
SAMPLINGS = ("train_all", "train_half")
SMALL_CLASS_POLICIES = ("skip_warn", "fail")

TRIPLET_SIZE = 3
MAX_SEED = 2**64 - 1

_T = TypeVar("_T")
_R = TypeVar("_R")

# strategy -> (generation on, modification on); multipliers must agree.
_STRATEGY_FLAGS = {
    "original": (False, False),
    "dag": (True, False),
    "dam": (False, True),
    "dagam": (True, True),
}


@dataclass(frozen=True)
class AugmentationPlan:
    """What to run: strategy, multipliers, sampling, and determinism seed."""

    strategy: str
    n_g: int = 0
    n_m: int = 0
    dagam_mode: str = "union"
    sampling: str = "train_all"
    seed: int = 0
    coc: CocParams = field(default_factory=CocParams)
    small_class_policy: str = "skip_warn"

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise PlanError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.dagam_mode not in DAGAM_MODES:
            raise PlanError(f"unknown dagam_mode {self.dagam_mode!r}")
        if self.sampling not in SAMPLINGS:
            raise PlanError(f"unknown sampling {self.sampling!r}")
        if self.small_class_policy not in SMALL_CLASS_POLICIES:
            raise PlanError(f"unknown small_class_policy {self.small_class_policy!r}")
        if self.n_g < 0 or self.n_m < 0:
            raise PlanError("multipliers must be non-negative integers")
        if not 0 <= self.seed <= MAX_SEED:
            raise PlanError("seed must fit in 64 unsigned bits")
        expected = _STRATEGY_FLAGS[self.strategy]
        if (self.n_g > 0, self.n_m > 0) != expected:
            raise PlanError(
                f"strategy {self.strategy!r} is inconsistent with multipliers "
                f"n_g={self.n_g}, n_m={self.n_m}"
            )


@dataclass
class DuplicateCounts:
    vs_original: int = 0
    within_augmented: int = 0

    @property
    def total(self) -> int:
        return self.vs_original + self.within_augmented

    def as_dict(self) -> dict:
        return {
            "vs_original": self.vs_original,
            "within_augmented": self.within_augmented,
            "total": self.total,
        }


@dataclass
class AugmentationReport:
    """Accounting for one pipeline run; generated - removed == emitted."""

    base_count: int = 0
    planned_counts: dict = field(default_factory=dict)
    generated_counts: dict = field(default_factory=dict)
    duplicates_removed: DuplicateCounts = field(default_factory=DuplicateCounts)
    skipped_classes: list = field(default_factory=list)
    backend_stats: dict = field(default_factory=dict)
    seed: int = 0
    emitted_count: int = 0

    def validate(self) -> None:
        generated = sum(self.generated_counts.values())
        if generated - self.duplicates_removed.total != self.emitted_count:
            raise ValueError(
                f"inconsistent accounting: generated {generated} - removed "
                f"{self.duplicates_removed.total} != emitted {self.emitted_count}"
            )

    def as_dict(self) -> dict:
        return {
            "base_count": self.base_count,
            "planned_counts": self.planned_counts,
            "generated_counts": self.generated_counts,
            "duplicates_removed": self.duplicates_removed.as_dict(),
            "skipped_classes": list(self.skipped_classes),
            "backend_stats": dict(self.backend_stats),
            "seed": self.seed,
            "emitted_count": self.emitted_count,
        }


def derive_rng(seed: int, *tags: object) -> random.Random:
    """Deterministic substream keyed by (seed, tags); scheduling-independent."""
    return random.Random("|".join([str(seed), *map(str, tags)]))


def plan_counts(
    corpus: Corpus, n: int, needs_triplets: bool, policy: str = "skip_warn"
) -> tuple[dict[str, int], list[str]]:
    """Per-class augmented volume: n times the class size.

    Classes too small to sample a triplet are skipped with a warning or
    fail the call, per policy. Returns (label -> count, skipped labels).
    """
    if n < 1:
        raise PlanError(f"multiplier must be >= 1, got {n}")
    if policy not in SMALL_CLASS_POLICIES:
        raise PlanError(f"unknown small_class_policy {policy!r}")
    planned: dict[str, int] = {}
    skipped: list[str] = []
    for label, positions in corpus.class_index.items():
        k = len(positions)
        if needs_triplets and k < TRIPLET_SIZE:
            if policy == "fail":
                raise PlanError(
                    f"class {label!r} has {k} sample(s); "
                    f"triplet sampling needs at least {TRIPLET_SIZE}"
                )
            skipped.append(label)
            log.warning(
                "skipping class %r: %d sample(s), need %d for triplets",
                label, k, TRIPLET_SIZE,
            )
            continue
        planned[label] = n * k
    return planned, skipped


def sample_triplet(
    positions: Sequence[int], rng: random.Random
) -> tuple[int, int, int]:
    """Three distinct positions, uniform without replacement."""
    if len(positions) < TRIPLET_SIZE:
        raise ValueError(
            f"need at least {TRIPLET_SIZE} positions, got {len(positions)}"
        )
    i, j, k = rng.sample(list(positions), TRIPLET_SIZE)
    return i, j, k


_TERMINATORS = (".", "!", "?")


def build_dag_input(d1: Document, d2: Document, d3: Document) -> str:
    """Concatenate three same-class texts, each sentence-terminated."""
    if not (d1.label == d2.label == d3.label):
        raise ValueError(
            f"triplet labels differ: {d1.label!r}, {d2.label!r}, {d3.label!r}"
        )
    parts = []
    for doc in (d1, d2, d3):
        text = doc.text.strip()
        if not text.endswith(_TERMINATORS):
            text += "."
        parts.append(text)
    return " ".join(parts)


def _pmap(fn: Callable[[_T], _R], items: Sequence[_T], workers: int) -> list[_R]:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _batched_summaries(
    backend: SummarizerBackend,
    requests: list[SummaryRequest],
    batch_size: int,
    workers: int,
) -> list:
    chunks = [requests[i : i + batch_size] for i in range(0, len(requests), batch_size)]
    results = _pmap(lambda chunk: summarize_batch(backend, chunk), chunks, workers)
    return [resp for chunk in results for resp in chunk]


def run_dag(
    base: Corpus,
    n_g: int,
    backend: SummarizerBackend,
    seed: int,
    *,
    policy: str = "skip_warn",
    batch_size: int = PROTOCOL_BATCH_CAP,
    workers: int = 1,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    min_tokens: int = DEFAULT_MIN_TOKENS,
) -> tuple[list[Document], list[str]]:
    """Generate n_g summaries per base document, class by class.

    Triplets are drawn with replacement across draws (never within one),
    so multipliers above 1 reuse source documents. Pre-dedup output size
    equals the plan total. Returns (documents, skipped class labels).
    """
    if n_g < 1:
        raise PlanError(f"n_g must be >= 1 for generation, got {n_g}")
    planned, skipped = plan_counts(base, n_g, needs_triplets=True, policy=policy)
    requests: list[SummaryRequest] = []
    meta: list[tuple[str, tuple[str, str, str]]] = []
    for label, count in planned.items():
        positions = base.class_index[label]
        for ordinal in range(count):
            rng = derive_rng(seed, "dag", label, ordinal)
            i, j, k = sample_triplet(positions, rng)
            d1, d2, d3 = base[i], base[j], base[k]
            requests.append(
                SummaryRequest(
                    id=f"dag:{label}:{ordinal}",
                    text=build_dag_input(d1, d2, d3),
                    max_tokens=max_tokens,
                    min_tokens=min_tokens,
                )
            )
            meta.append((label, (d1.id, d2.id, d3.id)))
    responses = _batched_summaries(backend, requests, batch_size, workers)
    docs = [
        Document(
            id=req.id,
            text=resp.summary,
            label=label,
            origin="dag",
            sources=sources,
        )
        for req, resp, (label, sources) in zip(requests, responses, meta)
    ]
    return docs, skipped


def run_dam(
    base: Corpus,
    n_m: int,
    coc: CocParams,
    seed: int,
    *,
    workers: int = 1,
) -> list[Document]:
    """Emit n_m scrambled copies of every base document.

    Copies of one document use distinct substreams, so they generally
    differ; copies with nothing eligible to scramble reproduce the source
    text and are removed later by dedup.
    """
    if n_m < 1:
        raise PlanError(f"n_m must be >= 1 for modification, got {n_m}")
    tasks: list[tuple[str, int, int]] = []
    for label, positions in base.class_index.items():
        for slot, pos in enumerate(positions):
            for copy in range(n_m):
                tasks.append((label, pos, slot * n_m + copy))

    def make(task: tuple[str, int, int]) -> Document:
        label, pos, ordinal = task
        source = base[pos]
        rng = derive_rng(seed, "dam", label, ordinal)
        return Document(
            id=f"dam:{label}:{ordinal}",
            text=apply_coc(source.text, coc, rng),
            label=label,
            origin="dam",
            sources=(source.id,),
        )

    return _pmap(make, tasks, workers)


def run_dagam(
    base: Corpus,
    plan: AugmentationPlan,
    backend: SummarizerBackend,
    *,
    batch_size: int = PROTOCOL_BATCH_CAP,
    workers: int = 1,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    min_tokens: int = DEFAULT_MIN_TOKENS,
) -> tuple[list[Document], list[str]]:
    """Combined strategy.

    union: independent dag and dam outputs side by side (origins kept).
    composed: n_m scrambled variants of each of the n_g summaries, each
    emitted with origin dagam and the summary's triplet provenance.
    """
    if plan.strategy != "dagam":
        raise PlanError(f"run_dagam requires strategy 'dagam', got {plan.strategy!r}")
    dag_docs, skipped = run_dag(
        base,
        plan.n_g,
        backend,
        plan.seed,
        policy=plan.small_class_policy,
        batch_size=batch_size,
        workers=workers,
        max_tokens=max_tokens,
        min_tokens=min_tokens,
    )
    if plan.dagam_mode == "union":
        dam_docs = run_dam(base, plan.n_m, plan.coc, plan.seed, workers=workers)
        return dag_docs + dam_docs, skipped

    tasks: list[tuple[Document, int]] = []
    counters: Counter[str] = Counter()
    for doc in dag_docs:
        for _ in range(plan.n_m):
            ordinal = counters[doc.label]
            counters[doc.label] += 1
            tasks.append((doc, ordinal))

    def variant(task: tuple[Document, int]) -> Document:
        summary, ordinal = task
        rng = derive_rng(plan.seed, "dagam", summary.label, ordinal)
        return Document(
            id=f"dagam:{summary.label}:{ordinal}",
            text=apply_coc(summary.text, plan.coc, rng),
            label=summary.label,
            origin="dagam",
            sources=summary.sources,
        )

    return _pmap(variant, tasks, workers), skipped


def dedup_merge(
    original: Corpus, augmented: Sequence[Document]
) -> tuple[Corpus, AugmentationReport]:
    """Drop duplicate augmented documents, then append survivors.

    A document is dropped when its dedup key matches any original (counted
    vs_original) or any earlier surviving augmented document (counted
    within_augmented). The report carries everything computable here;
    the pipeline fills in plan- and backend-level fields.
    """
    seen_original = {dedup_key(doc.text) for doc in original}
    dupes = DuplicateCounts()
    survivors: list[Document] = []
    seen_augmented: set[str] = set()
    for doc in augmented:
        key = dedup_key(doc.text)
        if key in seen_original:
            dupes.vs_original += 1
        elif key in seen_augmented:
            dupes.within_augmented += 1
        else:
            seen_augmented.add(key)
            survivors.append(doc)
    merged = Corpus(list(original) + survivors)
    report = AugmentationReport(
        base_count=len(original),
        generated_counts=dict(Counter(doc.origin for doc in augmented)),
        duplicates_removed=dupes,
        emitted_count=len(survivors),
    )
    report.validate()
    return merged, report


def run_pipeline(
    corpus: Corpus,
    plan: AugmentationPlan,
    backend: SummarizerBackend,
    *,
    batch_size: int = PROTOCOL_BATCH_CAP,
    workers: int = 1,
    summary_max_tokens: int = DEFAULT_MAX_TOKENS,
    summary_min_tokens: int = DEFAULT_MIN_TOKENS,
) -> tuple[Corpus, AugmentationReport]:
    """Clean, sample, augment, dedup; returns the merged corpus and report."""
    base = clean_corpus(corpus)
    if len(base) == 0:
        raise CorpusError("every document was emptied by cleaning")
    if plan.sampling == "train_half":
        base = stratified_half(base, plan.seed)

    augmented: list[Document] = []
    skipped: list[str] = []
    planned: dict[str, dict[str, int]] = {}
    if plan.strategy == "dag":
        augmented, skipped = run_dag(
            base, plan.n_g, backend, plan.seed,
            policy=plan.small_class_policy, batch_size=batch_size, workers=workers,
            max_tokens=summary_max_tokens, min_tokens=summary_min_tokens,
        )
        planned["dag"] = plan_counts(base, plan.n_g, True, plan.small_class_policy)[0]
    elif plan.strategy == "dam":
        augmented = run_dam(base, plan.n_m, plan.coc, plan.seed, workers=workers)
        planned["dam"] = plan_counts(base, plan.n_m, False)[0]
    elif plan.strategy == "dagam":
        augmented, skipped = run_dagam(
            base, plan, backend,
            batch_size=batch_size, workers=workers,
            max_tokens=summary_max_tokens, min_tokens=summary_min_tokens,
        )
        dag_planned = plan_counts(base, plan.n_g, True, plan.small_class_policy)[0]
        if plan.dagam_mode == "union":
            planned["dag"] = dag_planned
            planned["dam"] = plan_counts(base, plan.n_m, False)[0]
        else:
            planned["dagam"] = {
                label: count * plan.n_m for label, count in dag_planned.items()
            }

    merged, report = dedup_merge(base, augmented)
    report.planned_counts = planned
    report.skipped_classes = skipped
    report.seed = plan.seed
    stats = dict(getattr(backend, "stats", {}))
    report.backend_stats = {"backend": getattr(backend, "name", "unknown"), **stats}
    report.validate()
    return merged, report
