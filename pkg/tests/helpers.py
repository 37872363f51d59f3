"""Corpus builders shared by the test modules."""

import random

from dagam.corpus import Corpus, Document

VOCAB = [
    "market", "prices", "crude", "barrel", "energy", "committee", "question",
    "network", "storage", "signal", "travel", "window", "garden", "planet",
    "picture", "student", "teacher", "history", "science", "library",
    "message", "channel", "economy", "pattern", "quarter", "station",
    "village", "weather", "project", "country",
]


def make_text(rng: random.Random, sentences: int = 2, words: tuple = (4, 8)) -> str:
    parts = []
    for _ in range(sentences):
        n = rng.randint(*words)
        parts.append(" ".join(rng.choice(VOCAB) for _ in range(n)) + ".")
    return " ".join(parts)


def make_corpus(class_sizes: dict, seed: int = 0, sentences: int = 2) -> Corpus:
    """Synthetic labeled corpus with the given per-class sizes."""
    rng = random.Random(seed)
    docs = []
    i = 0
    for label, count in class_sizes.items():
        for _ in range(count):
            docs.append(
                Document(id=f"doc:{i}", text=make_text(rng, sentences), label=label)
            )
            i += 1
    return Corpus(docs)
