"""Command-line entry point.

    dagam augment --config cfg.json [--seed N] [--workers N] [--mode union|composed]
    dagam stats --input PATH [--format csv|jsonl]
    dagam validate --augmented PATH --original PATH

Configuration is one JSON file with flat keys; flags override the file,
and the DAGAM_SEED environment variable overrides the configured seed
(an explicit --seed outranks both). Exit codes: 0 success, 1 usage or
config error, 2 I/O, 3 backend, 4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import statistics
import sys
from dataclasses import dataclass

from .augment import (
    DAGAM_MODES,
    AugmentationPlan,
    build_dag_input,
    run_pipeline,
)
from .coc import CocParams, is_coc_image
from .corpus import (
    Corpus,
    clean_english,
    dedup_key,
    load_corpus,
    write_corpus,
)
from .errors import BackendError, ConfigError, CorpusError, DagamError
from .summarize import (
    DEFAULT_MAX_TOKENS,
    DEFAULT_MIN_TOKENS,
    PROTOCOL_BATCH_CAP,
    ExtractiveBackend,
    HttpBackend,
)

SEED_ENV_VAR = "DAGAM_SEED"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_BACKEND = 3
EXIT_VALIDATION = 4

_CONFIG_KEYS = {
    "input_path", "input_format", "output_path", "output_format",
    "strategy", "n_g", "n_m", "dagam_mode", "sampling", "seed",
    "selection_rate", "min_word_len", "max_retries", "small_class_policy",
    "backend", "endpoint", "batch_size", "retries", "report_path",
    "summary_max_tokens", "summary_min_tokens",
}


@dataclass
class PipelineConfig:
    input_path: str
    input_format: str
    output_path: str
    output_format: str
    plan: AugmentationPlan
    backend: str = "extractive"
    endpoint: str | None = None
    batch_size: int = PROTOCOL_BATCH_CAP
    retries: int = 3
    report_path: str | None = None
    summary_max_tokens: int = DEFAULT_MAX_TOKENS
    summary_min_tokens: int = DEFAULT_MIN_TOKENS


def _infer_format(path: str) -> str:
    if path.endswith(".csv"):
        return "csv"
    if path.endswith(".jsonl"):
        return "jsonl"
    raise ConfigError(f"cannot infer format of {path!r}; pass an explicit format")


def _resolve_seed(config_seed: object, flag_seed: int | None) -> int:
    if flag_seed is not None:
        return flag_seed
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            return int(env_seed, 10)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be a decimal integer, got {env_seed!r}") from exc
    if config_seed is None:
        return 0
    if not isinstance(config_seed, int) or isinstance(config_seed, bool):
        raise ConfigError(f"seed must be an integer, got {config_seed!r}")
    return config_seed


def load_config(
    path: str,
    *,
    seed_override: int | None = None,
    mode_override: str | None = None,
) -> PipelineConfig:
    """Parse and validate the pipeline config file, applying overrides."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown config key(s): {', '.join(sorted(unknown))}")

    def require(key: str) -> object:
        if key not in raw or raw[key] is None:
            raise ConfigError(f"{path}: missing required key {key!r}")
        return raw[key]

    input_path = str(require("input_path"))
    output_path = str(require("output_path"))
    input_format = str(raw.get("input_format") or _infer_format(input_path))
    output_format = str(raw.get("output_format") or _infer_format(output_path))

    try:
        coc = CocParams(
            selection_rate=raw.get("selection_rate", 0.2),
            min_word_len=raw.get("min_word_len", 4),
            max_retries=raw.get("max_retries", 3),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: bad scrambling parameters: {exc}") from exc

    plan = AugmentationPlan(
        strategy=str(require("strategy")),
        n_g=raw.get("n_g", 0),
        n_m=raw.get("n_m", 0),
        dagam_mode=mode_override or raw.get("dagam_mode", "union"),
        sampling=raw.get("sampling", "train_all"),
        seed=_resolve_seed(raw.get("seed"), seed_override),
        coc=coc,
        small_class_policy=raw.get("small_class_policy", "skip_warn"),
    )

    backend = raw.get("backend", "extractive")
    if backend not in ("extractive", "http"):
        raise ConfigError(f"{path}: backend must be 'extractive' or 'http'")
    endpoint = raw.get("endpoint")
    if (backend == "http") != (endpoint is not None):
        raise ConfigError(f"{path}: endpoint must be set exactly when backend is 'http'")
    batch_size = raw.get("batch_size", PROTOCOL_BATCH_CAP)
    if not isinstance(batch_size, int) or not 1 <= batch_size <= PROTOCOL_BATCH_CAP:
        raise ConfigError(f"{path}: batch_size must be in [1, {PROTOCOL_BATCH_CAP}]")
    retries = raw.get("retries", 3)
    if not isinstance(retries, int) or retries < 0:
        raise ConfigError(f"{path}: retries must be a non-negative integer")

    return PipelineConfig(
        input_path=input_path,
        input_format=input_format,
        output_path=output_path,
        output_format=output_format,
        plan=plan,
        backend=backend,
        endpoint=endpoint,
        batch_size=batch_size,
        retries=retries,
        report_path=raw.get("report_path"),
        summary_max_tokens=raw.get("summary_max_tokens", DEFAULT_MAX_TOKENS),
        summary_min_tokens=raw.get("summary_min_tokens", DEFAULT_MIN_TOKENS),
    )


def cmd_augment(config: PipelineConfig, workers: int = 1) -> int:
    """Load, clean, sample, augment, dedup, write; report as JSON."""
    corpus = load_corpus(config.input_path, config.input_format)
    if config.backend == "http":
        backend = HttpBackend(
            config.endpoint or "",
            batch_size=config.batch_size,
            retries=config.retries,
            max_in_flight=max(1, workers),
        )
    else:
        backend = ExtractiveBackend()
    try:
        merged, report = run_pipeline(
            corpus,
            config.plan,
            backend,
            batch_size=config.batch_size,
            workers=workers,
            summary_max_tokens=config.summary_max_tokens,
            summary_min_tokens=config.summary_min_tokens,
        )
    finally:
        close = getattr(backend, "close", None)
        if close is not None:
            close()
    write_corpus(merged, config.output_path, config.output_format)
    payload = json.dumps(report.as_dict(), indent=2)
    if config.report_path:
        try:
            with open(config.report_path, "w", encoding="utf-8") as fh:
                fh.write(payload + "\n")
        except OSError as exc:
            raise CorpusError(f"cannot write report {config.report_path}: {exc}") from exc
    else:
        print(payload)
    return EXIT_OK


def cmd_stats(input_path: str, fmt: str | None = None) -> int:
    """Corpus shape: totals, per-class counts, small classes, token lengths."""
    corpus = load_corpus(input_path, fmt or _infer_format(input_path))
    lengths = [len(doc.text.split()) for doc in corpus]
    counts = corpus.class_counts()
    print(
        json.dumps(
            {
                "total_documents": len(corpus),
                "per_class_counts": counts,
                "small_classes": [label for label, n in counts.items() if n < 3],
                "mean_token_length": round(statistics.mean(lengths), 3),
                "median_token_length": statistics.median(lengths),
            },
            indent=2,
        )
    )
    return EXIT_OK


def validate_merged(augmented: Corpus, original: Corpus) -> list[str]:
    """Machine-check an augment run's output against its input.

    Checks provenance closure, label conservation, scramble invariants
    for dam/dagam records at word granularity, and global dedup-key
    uniqueness. Returns human-readable violation strings.
    """
    base: dict[str, object] = {}
    for doc in original:
        cleaned = clean_english(doc)
        if cleaned is not None:
            base[cleaned.id] = cleaned
    original_labels = {doc.label for doc in original}

    violations: list[str] = []
    seen_keys: dict[str, str] = {}
    for doc in augmented:
        key = dedup_key(doc.text)
        if key in seen_keys:
            violations.append(f"{doc.id}: dedup key collides with {seen_keys[key]}")
        else:
            seen_keys[key] = doc.id
        if doc.origin == "original":
            continue
        if doc.label not in original_labels:
            violations.append(f"{doc.id}: label {doc.label!r} not in the original corpus")
        unknown = [s for s in doc.sources if s not in base]
        if unknown:
            violations.append(f"{doc.id}: unknown source id(s): {', '.join(unknown)}")
            continue
        sources = [base[s] for s in doc.sources]
        mismatched = [s.id for s in sources if s.label != doc.label]
        if mismatched:
            violations.append(
                f"{doc.id}: label {doc.label!r} differs from source(s): {', '.join(mismatched)}"
            )
        if doc.origin == "dam":
            violations.extend(_check_dam_record(doc, sources[0]))
        elif doc.origin == "dagam":
            violations.extend(_check_dagam_record(doc, sources))
    return violations


def _check_dam_record(doc, source) -> list[str]:
    out_tokens = doc.text.split()
    src_tokens = source.text.split()
    if len(out_tokens) != len(src_tokens):
        return [
            f"{doc.id}: {len(out_tokens)} token(s) but source {source.id} "
            f"has {len(src_tokens)}"
        ]
    return [
        f"{doc.id}: token {i} {out!r} is not a scramble of {src!r}"
        for i, (src, out) in enumerate(zip(src_tokens, out_tokens))
        if not is_coc_image(src, out)
    ]


def _check_dagam_record(doc, sources) -> list[str]:
    # The intermediate summary is not persisted; with the extractive
    # backend every summary token is verbatim from the combined input,
    # so each output token must scramble from some token there.
    pool = set(build_dag_input(*sources).split())
    return [
        f"{doc.id}: token {token!r} matches no source word"
        for token in doc.text.split()
        if not any(is_coc_image(src, token) for src in pool)
    ]


def cmd_validate(augmented_path: str, original_path: str) -> int:
    augmented = load_corpus(augmented_path, _infer_format(augmented_path))
    original = load_corpus(original_path, _infer_format(original_path))
    violations = validate_merged(augmented, original)
    print(json.dumps({"checked": len(augmented), "violations": violations}, indent=2))
    return EXIT_OK if not violations else EXIT_VALIDATION


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dagam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_augment = sub.add_parser("augment", help="run an augmentation pipeline")
    p_augment.add_argument("--config", required=True, help="JSON config file")
    p_augment.add_argument("--seed", type=int, default=None, help="override the seed")
    p_augment.add_argument(
        "--workers", type=int, default=os.cpu_count() or 1,
        help="worker threads (default: available parallelism)",
    )
    p_augment.add_argument("--mode", choices=DAGAM_MODES, default=None,
                           help="override dagam_mode")

    p_stats = sub.add_parser("stats", help="print corpus statistics as JSON")
    p_stats.add_argument("--input", required=True)
    p_stats.add_argument("--format", choices=["csv", "jsonl"], default=None)

    p_validate = sub.add_parser("validate", help="check augmented output invariants")
    p_validate.add_argument("--augmented", required=True)
    p_validate.add_argument("--original", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "augment":
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            config = load_config(
                args.config, seed_override=args.seed, mode_override=args.mode
            )
            return cmd_augment(config, workers=args.workers)
        if args.command == "stats":
            return cmd_stats(args.input, args.format)
        return cmd_validate(args.augmented, args.original)
    except BackendError as exc:
        print(f"error: backend: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except CorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DagamError as exc:
        # ConfigError, PlanError, and anything else config-born.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
