"""Turn grounding-score matrices into labeled salience-classification data.

Three sampling strategies produce (salient, non-salient) sentence sets per
document; the builder assembles them into train/dev/test example splits.
"""

from __future__ import annotations

import json
import random
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import DocumentPair
from .grounding import GroundingScoreMatrix

STRATEGIES = ("aggregate", "topk_bottomk", "random_negative")

SPLIT_FRACTIONS = (0.6, 0.2)  # train, dev; test takes the remainder


@dataclass(frozen=True)
class SalienceExample:
    doc_id: str
    sent_id: int
    text: str
    label: str  # "salient" | "non_salient"
    aggregate_score: float | None = None


@dataclass(frozen=True)
class SamplingConfig:
    strategy: str = "aggregate"
    k_multiplier: int = 3
    k: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown sampling strategy {self.strategy!r}")
        if self.k_multiplier < 1 or self.k < 1:
            raise ValueError("k_multiplier and k must be >= 1")


@dataclass
class DatasetSplits:
    train: list[SalienceExample]
    dev: list[SalienceExample]
    test: list[SalienceExample]

    def counts(self) -> dict[str, int]:
        return {"train": len(self.train), "dev": len(self.dev), "test": len(self.test)}


def aggregate_salience(matrix: GroundingScoreMatrix) -> list[tuple[int, float]]:
    """Mean grounding score of each source sentence across the scored
    summary sentences; skipped sentences on either side are excluded."""
    summary_ids = matrix.scored_summary_ids()
    if not summary_ids:
        raise ValueError(f"{matrix.doc_id}: no scored summary sentences")
    return [
        (i, sum(matrix.scores[i][j] for j in summary_ids) / len(summary_ids))
        for i in matrix.scored_source_ids()
    ]


def _rank(scored: Sequence[tuple[int, float]]) -> list[int]:
    # Best first; ties go to the earlier sentence.
    return [i for i, _ in sorted(scored, key=lambda pair: (-pair[1], pair[0]))]


def select_aggregate(scored: Sequence[tuple[int, float]], n: int,
                     k_multiplier: int = 3) -> tuple[set[int], set[int]]:
    """Label the top k*n sentences salient and the bottom k*n non-salient.

    When fewer than 2*k*n sentences are available, every sentence is
    labeled instead: top half (rounding up) salient, rest non-salient.
    """
    if not scored:
        raise ValueError("no scored sentences")
    if n < 1:
        raise ValueError("n must be >= 1")
    ranking = _rank(scored)
    m = len(ranking)
    quota = k_multiplier * n
    if m >= 2 * quota:
        return set(ranking[:quota]), set(ranking[-quota:])
    top = (m + 1) // 2
    return set(ranking[:top]), set(ranking[top:])


def _column_ranking(matrix: GroundingScoreMatrix, j: int, source_ids: Sequence[int]) -> list[int]:
    return [i for i in sorted(source_ids, key=lambda i: (-matrix.scores[i][j], i))]


def select_topk_bottomk(matrix: GroundingScoreMatrix, k: int = 3) -> tuple[set[int], set[int]]:
    """Per summary sentence, its top-k sources are salient and bottom-k
    non-salient; ids landing in both sets stay salient."""
    source_ids = matrix.scored_source_ids()
    summary_ids = matrix.scored_summary_ids()
    if not summary_ids:
        raise ValueError(f"{matrix.doc_id}: no scored summary sentences")
    salient: set[int] = set()
    non_salient: set[int] = set()
    for j in summary_ids:
        ranking = _column_ranking(matrix, j, source_ids)
        salient.update(ranking[:k])
        non_salient.update(ranking[-k:])
    return salient, non_salient - salient


def select_random_negative(matrix: GroundingScoreMatrix, k: int,
                           seed: int) -> tuple[set[int], set[int]]:
    """Top-k positives per summary sentence; negatives sampled uniformly
    without replacement from the remaining scored sentences, matched in
    size (or the whole pool when it is smaller)."""
    source_ids = matrix.scored_source_ids()
    summary_ids = matrix.scored_summary_ids()
    if not summary_ids:
        raise ValueError(f"{matrix.doc_id}: no scored summary sentences")
    salient: set[int] = set()
    for j in summary_ids:
        salient.update(_column_ranking(matrix, j, source_ids)[:k])
    pool = sorted(set(source_ids) - salient)
    size = min(len(salient), len(pool))
    rng = random.Random(seed)
    return salient, set(rng.sample(pool, size))


def _doc_seed(doc_id: str, seed: int) -> int:
    # Stable across runs and platforms, unlike hash().
    return seed ^ zlib.crc32(doc_id.encode("utf-8"))


def select_for_document(matrix: GroundingScoreMatrix,
                        config: SamplingConfig) -> tuple[set[int], set[int]]:
    if config.strategy == "aggregate":
        scored = aggregate_salience(matrix)
        return select_aggregate(scored, len(matrix.scored_summary_ids()), config.k_multiplier)
    if config.strategy == "topk_bottomk":
        return select_topk_bottomk(matrix, config.k)
    return select_random_negative(matrix, config.k, _doc_seed(matrix.doc_id, config.seed))


def build_dataset(corpus: Sequence[DocumentPair],
                  matrices: Mapping[str, GroundingScoreMatrix],
                  config: SamplingConfig) -> DatasetSplits:
    """Apply the configured selection to every document and split the pooled
    sentence examples 60/20/20 with a seeded shuffle.

    The split unit is the sentence example, not the document.
    """
    examples: list[SalienceExample] = []
    for pair in sorted(corpus, key=lambda p: p.doc_id):
        matrix = matrices.get(pair.doc_id)
        if matrix is None:
            raise ValueError(f"no grounding matrix for doc_id {pair.doc_id!r}")
        aggregate = dict(aggregate_salience(matrix)) if config.strategy == "aggregate" else {}
        salient, non_salient = select_for_document(matrix, config)
        for sent_id in sorted(salient | non_salient):
            examples.append(SalienceExample(
                doc_id=pair.doc_id,
                sent_id=sent_id,
                text=pair.source[sent_id].text,
                label="salient" if sent_id in salient else "non_salient",
                aggregate_score=aggregate.get(sent_id),
            ))
    rng = random.Random(config.seed)
    rng.shuffle(examples)
    total = len(examples)
    train_end = int(total * SPLIT_FRACTIONS[0])
    dev_end = train_end + int(total * SPLIT_FRACTIONS[1])
    return DatasetSplits(
        train=examples[:train_end],
        dev=examples[train_end:dev_end],
        test=examples[dev_end:],
    )


# --- dataset file format (JSON lines) ---------------------------------------
# {doc_id, sent_id, text, label, aggregate_score, strategy, method, split}


def write_dataset(splits: DatasetSplits, method: str, strategy: str,
                  path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for split_name in ("train", "dev", "test"):
            for ex in getattr(splits, split_name):
                fh.write(json.dumps({
                    "doc_id": ex.doc_id,
                    "sent_id": ex.sent_id,
                    "text": ex.text,
                    "label": ex.label,
                    "aggregate_score": ex.aggregate_score,
                    "strategy": strategy,
                    "method": method,
                    "split": split_name,
                }, ensure_ascii=False, sort_keys=True) + "\n")


def read_dataset(path: str | Path) -> DatasetSplits:
    splits = DatasetSplits(train=[], dev=[], test=[])
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            example = SalienceExample(
                doc_id=rec["doc_id"], sent_id=rec["sent_id"], text=rec["text"],
                label=rec["label"], aggregate_score=rec.get("aggregate_score"),
            )
            getattr(splits, rec["split"]).append(example)
    return splits
