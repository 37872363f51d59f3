"""Summarization behind a backend-neutral batch interface.

Two backends ship: a deterministic extractive scorer (hermetic, used by
default and in tests) and an HTTP client for an external abstractive
service speaking the wire protocol in schemas/summarize-protocol.schema.json:

    POST /v1/summarize_batch   {"requests":[{id,text,max_tokens,min_tokens},...]}
                               -> 200 {"responses":[{id,summary},...]}
    GET  /v1/health            -> 200 {"status":"ok","model":...}

Batches are capped at 64 requests on the wire.
"""

from __future__ import annotations

import re
import threading
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import httpx

from .errors import BackendError, MalformedResponseError

DEFAULT_MAX_TOKENS = 60
DEFAULT_MIN_TOKENS = 10
PROTOCOL_BATCH_CAP = 64

_WORD_RE = re.compile(r"[a-z0-9]+")
_SENTENCE_END_RE = re.compile(r"(?<=[.!?])\s+")

STOP_WORDS = frozenset(
    """i me my myself we our ours ourselves you your yours yourself yourselves
    he him his himself she her hers herself it its itself they them their
    theirs themselves what which who whom this that these those am is are was
    were be been being have has had having do does did doing a an the and but
    if or because as until while of at by for with about against between into
    through during before after above below to from up down in out on off over
    under again further then once here there when where why how all any both
    each few more most other some such no nor not only own same so than too
    very s t can will just don should now""".split()
)


@dataclass(frozen=True)
class SummaryRequest:
    """One text to summarize; max/min_tokens bound the whitespace-token count."""

    id: str
    text: str
    max_tokens: int = DEFAULT_MAX_TOKENS
    min_tokens: int = DEFAULT_MIN_TOKENS

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError(f"request {self.id!r}: text is empty")
        if self.max_tokens < 1:
            raise ValueError(f"request {self.id!r}: max_tokens must be >= 1")
        if not 0 <= self.min_tokens <= self.max_tokens:
            raise ValueError(f"request {self.id!r}: need 0 <= min_tokens <= max_tokens")


@dataclass(frozen=True)
class SummaryResponse:
    id: str
    summary: str


@runtime_checkable
class SummarizerBackend(Protocol):
    """A named batch summarizer. Responses may arrive in any order."""

    name: str

    def summarize_batch(
        self, requests: Sequence[SummaryRequest]
    ) -> list[SummaryResponse]: ...


def summarize_batch(
    backend: SummarizerBackend, requests: Sequence[SummaryRequest]
) -> list[SummaryResponse]:
    """Run a batch through a backend, enforcing the caller-visible contract.

    Requires distinct request ids; returns exactly one response per
    request, reordered to input order, each with a non-empty summary.
    Violations raise MalformedResponseError.
    """
    requests = list(requests)
    ids = [req.id for req in requests]
    if len(set(ids)) != len(ids):
        raise ValueError("request ids must be distinct")
    if not requests:
        return []
    by_id: dict[str, SummaryResponse] = {}
    for resp in backend.summarize_batch(requests):
        if resp.id in by_id:
            raise MalformedResponseError(
                f"backend {backend.name!r} answered id {resp.id!r} more than once"
            )
        by_id[resp.id] = resp
    missing = [i for i in ids if i not in by_id]
    extra = [i for i in by_id if i not in set(ids)]
    if missing or extra:
        raise MalformedResponseError(
            f"backend {backend.name!r} id mismatch: missing {missing or 'none'}, "
            f"unexpected {extra or 'none'}"
        )
    ordered = [by_id[i] for i in ids]
    for resp in ordered:
        if not resp.summary:
            raise MalformedResponseError(f"empty summary for request {resp.id!r}")
    return ordered


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!' or '?' followed by whitespace; keep terminators.

    A trailing unterminated fragment counts as a sentence.
    """
    return [s for s in _SENTENCE_END_RE.split(text.strip()) if s]


def extractive_summarize(
    text: str,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    min_tokens: int = DEFAULT_MIN_TOKENS,
) -> str:
    """Deterministic term-frequency extractive summary.

    Each sentence scores the sum of in-document frequencies of its
    non-stop words, divided by its word count. Sentences are taken
    greedily by score (ties to the earlier sentence) until the next one
    would push the whitespace-token total past max_tokens; the top
    sentence is always taken, even alone over budget. Output preserves
    original sentence order. min_tokens is validated but the greedy rule
    is budget-driven; the floor only matters to abstractive backends.
    """
    if not 0 <= min_tokens <= max_tokens:
        raise ValueError("need 0 <= min_tokens <= max_tokens")
    if not text or not text.strip():
        raise ValueError("cannot summarize empty text")
    sentences = split_sentences(text)
    freq = Counter(w for w in _WORD_RE.findall(text.lower()) if w not in STOP_WORDS)

    def score(sentence: str) -> float:
        words = _WORD_RE.findall(sentence.lower())
        if not words:
            return 0.0
        return sum(freq[w] for w in words if w not in STOP_WORDS) / len(words)

    ranked = sorted(range(len(sentences)), key=lambda i: (-score(sentences[i]), i))
    chosen = [ranked[0]]
    used = len(sentences[ranked[0]].split())
    for i in ranked[1:]:
        cost = len(sentences[i].split())
        if used + cost > max_tokens:
            break
        chosen.append(i)
        used += cost
    return " ".join(sentences[i] for i in sorted(chosen))


class ExtractiveBackend:
    """Hermetic in-process backend over extractive_summarize."""

    name = "extractive"

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.stats = {"batches": 0, "requests": 0, "retries": 0}

    def summarize_batch(
        self, requests: Sequence[SummaryRequest]
    ) -> list[SummaryResponse]:
        responses = [
            SummaryResponse(
                id=req.id,
                summary=extractive_summarize(req.text, req.max_tokens, req.min_tokens),
            )
            for req in requests
        ]
        with self._lock:
            self.stats["batches"] += 1
            self.stats["requests"] += len(requests)
        return responses


class HttpBackend:
    """Client for the summarization wire protocol.

    Retries transient failures (connection errors, timeouts, 5xx) with
    exponential backoff; oversize request lists are chunked into wire
    batches of at most batch_size, with at most max_in_flight batches
    outstanding at once. Safe for concurrent use.
    """

    name = "http"

    def __init__(
        self,
        endpoint: str,
        *,
        batch_size: int = PROTOCOL_BATCH_CAP,
        retries: int = 3,
        max_in_flight: int = 4,
        timeout: float = 30.0,
        backoff_base: float = 0.25,
    ) -> None:
        if not 1 <= batch_size <= PROTOCOL_BATCH_CAP:
            raise ValueError(f"batch_size must be in [1, {PROTOCOL_BATCH_CAP}]")
        if retries < 0:
            raise ValueError("retries must be >= 0")
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        self.endpoint = endpoint.rstrip("/")
        self.batch_size = batch_size
        self.retries = retries
        self.max_in_flight = max_in_flight
        self.backoff_base = backoff_base
        self._client = httpx.Client(timeout=timeout)
        self._lock = threading.Lock()
        self.stats = {"batches": 0, "requests": 0, "retries": 0}

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "HttpBackend":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    def health(self) -> dict:
        try:
            response = self._client.get(f"{self.endpoint}/v1/health")
        except httpx.HTTPError as exc:
            raise BackendError(f"summarizer unreachable at {self.endpoint}: {exc}") from exc
        if response.status_code != 200:
            raise BackendError(f"summarizer not ready: status {response.status_code}")
        return response.json()

    def summarize_batch(
        self, requests: Sequence[SummaryRequest]
    ) -> list[SummaryResponse]:
        requests = list(requests)
        if len(requests) <= self.batch_size:
            return self._post_batch(requests)
        chunks = [
            requests[i : i + self.batch_size]
            for i in range(0, len(requests), self.batch_size)
        ]
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            results = list(pool.map(self._post_batch, chunks))
        return [resp for batch in results for resp in batch]

    def _post_batch(self, requests: Sequence[SummaryRequest]) -> list[SummaryResponse]:
        if not requests:
            return []
        url = f"{self.endpoint}/v1/summarize_batch"
        payload = {
            "requests": [
                {
                    "id": req.id,
                    "text": req.text,
                    "max_tokens": req.max_tokens,
                    "min_tokens": req.min_tokens,
                }
                for req in requests
            ]
        }
        attempt = 0
        while True:
            attempt += 1
            try:
                response = self._client.post(url, json=payload)
            except httpx.HTTPError as exc:
                if attempt > self.retries:
                    raise BackendError(f"summarizer unreachable at {url}: {exc}") from exc
                self._note_retry(attempt)
                continue
            if response.status_code >= 500:
                # Includes 503 while the model loads; worth waiting out.
                if attempt > self.retries:
                    raise BackendError(
                        f"summarizer failed with status {response.status_code} "
                        f"after {attempt} attempt(s)"
                    )
                self._note_retry(attempt)
                continue
            if response.status_code != 200:
                raise BackendError(
                    f"summarizer rejected batch: status {response.status_code}: "
                    f"{response.text[:200]}"
                )
            with self._lock:
                self.stats["batches"] += 1
                self.stats["requests"] += len(requests)
            return self._parse_batch(requests, response)

    def _note_retry(self, attempt: int) -> None:
        with self._lock:
            self.stats["retries"] += 1
        time.sleep(self.backoff_base * 2 ** (attempt - 1))

    def _parse_batch(
        self, requests: Sequence[SummaryRequest], response: httpx.Response
    ) -> list[SummaryResponse]:
        try:
            body = response.json()
        except ValueError as exc:
            raise MalformedResponseError(f"summarizer returned non-JSON: {exc}") from exc
        items = body.get("responses") if isinstance(body, dict) else None
        if not isinstance(items, list):
            raise MalformedResponseError("summarizer response lacks a 'responses' list")
        by_id: dict[str, str] = {}
        for item in items:
            if (
                not isinstance(item, dict)
                or not isinstance(item.get("id"), str)
                or not isinstance(item.get("summary"), str)
            ):
                raise MalformedResponseError(f"malformed response item: {item!r}")
            if item["id"] in by_id:
                raise MalformedResponseError(f"response id {item['id']!r} repeated")
            by_id[item["id"]] = item["summary"]
        wanted = [req.id for req in requests]
        if set(by_id) != set(wanted):
            raise MalformedResponseError(
                f"response ids {sorted(by_id)} do not match request ids {sorted(wanted)}"
            )
        out = []
        for req_id in wanted:
            if not by_id[req_id]:
                raise MalformedResponseError(f"empty summary for request {req_id!r}")
            out.append(SummaryResponse(id=req_id, summary=by_id[req_id]))
        return out


def http_summarize(
    endpoint: str,
    requests: Sequence[SummaryRequest],
    *,
    batch_size: int = PROTOCOL_BATCH_CAP,
    retries: int = 3,
    max_in_flight: int = 4,
    timeout: float = 30.0,
) -> list[SummaryResponse]:
    """One-shot batch call against a summarization service."""
    with HttpBackend(
        endpoint,
        batch_size=batch_size,
        retries=retries,
        max_in_flight=max_in_flight,
        timeout=timeout,
    ) as backend:
        return summarize_batch(backend, requests)
