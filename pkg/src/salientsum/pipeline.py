"""Stage-oriented orchestration with cached, hash-stamped artifacts.

Each stage reads the previous stage's JSONL artifacts, writes its own, and
records a manifest (configuration hash, input/output content hashes,
timestamp). Reruns with unchanged configuration and inputs are no-ops;
changing the configuration against an existing artifacts directory is an
error unless forced.

The configuration hash covers only semantic settings (method, backends,
seeds, hyperparameters), never filesystem paths, so the same configuration
materialized in two different directories yields byte-identical artifacts.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Mapping, Sequence

import yaml

from . import backends as mock_backends
from .abstraction import GenerationConfig, SummaryResult, read_summaries, summarize, write_summaries
from .classifier import (
    TrainConfig,
    compress_document,
    compression_ratio,
    evaluate_accuracy,
    load_model,
    save_model,
    train,
)
from .corpus import DocumentPair, corpus_stats, preprocess_corpus, read_preprocessed, read_raw_corpus, write_preprocessed
from .evaluation import (
    RougeScore,
    build_report,
    nli_perplexity_analysis,
    plot_histogram,
    random_extractor,
    textrank_extractor,
    write_histogram_csv,
    write_report,
)
from .grounding import METHODS, GroundingScoreMatrix, ScoreCache, ScoringBackends, score_matrix
from .salience import STRATEGIES, SamplingConfig, build_dataset, read_dataset, write_dataset

CACHE_ENV_VAR = "SALIENTSUM_CACHE_DIR"

STAGES = ("ingest", "score", "build-dataset", "train", "compress",
          "summarize", "evaluate", "nli-analyze")
CORE_STAGES = STAGES[:-1]

# CLI spellings for sampling strategies.
STRATEGY_ALIASES = {"aggregate": "aggregate", "topk": "topk_bottomk",
                    "randomneg": "random_negative"}


class PipelineError(Exception):
    """Base class for orchestration failures."""


class ConfigError(PipelineError):
    """Invalid or conflicting configuration (CLI exit code 3)."""


class MissingArtifactError(PipelineError):
    """An upstream artifact is absent (CLI exit code 2)."""


def _resolve(base: Path, value: str | None) -> Path | None:
    if value is None:
        return None
    path = Path(value)
    return path if path.is_absolute() else base / path


@dataclass(frozen=True)
class PipelineConfig:
    """One file drives every stage; defaults mirror the shipped training and
    generation settings."""

    raw_corpus: Path
    artifacts: Path
    cache: Path | None = None
    nli_pairs: Path | None = None
    nli_plot: Path | None = None
    method: str = "bleu"
    backend_names: Mapping[str, str] = field(default_factory=lambda: dict(_DEFAULT_BACKENDS))
    sampling: SamplingConfig = SamplingConfig()
    training: TrainConfig = TrainConfig()
    generation: GenerationConfig = GenerationConfig()
    threshold: float = 0.5
    seed: int = 0
    nli_sample_per_class: int = 50
    nli_num_bins: int = 20
    random_baseline_seeds: int = 10

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown grounding method {self.method!r}; "
                              f"choose from {', '.join(METHODS)}")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("threshold must be in (0, 1)")
        unknown = set(self.backend_names) - set(_DEFAULT_BACKENDS)
        if unknown:
            raise ConfigError(f"unknown backend roles: {', '.join(sorted(unknown))}")

    @classmethod
    def from_dict(cls, data: Mapping, base_dir: str | Path = ".") -> "PipelineConfig":
        base = Path(base_dir)
        known = {"paths", "grounding", "backends", "sampling", "training",
                 "generation", "threshold", "seed", "nli", "evaluation"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")
        paths = data.get("paths", {})
        if "raw_corpus" not in paths or "artifacts" not in paths:
            raise ConfigError("config must set paths.raw_corpus and paths.artifacts")
        backend_names = dict(_DEFAULT_BACKENDS)
        backend_names.update(data.get("backends", {}))
        sampling_data = dict(data.get("sampling", {}))
        if "strategy" in sampling_data:
            sampling_data["strategy"] = STRATEGY_ALIASES.get(
                sampling_data["strategy"], sampling_data["strategy"])
        nli = data.get("nli", {})
        evaluation = data.get("evaluation", {})
        try:
            return cls(
                raw_corpus=_resolve(base, paths["raw_corpus"]),
                artifacts=_resolve(base, paths["artifacts"]),
                cache=_resolve(base, paths.get("cache")),
                nli_pairs=_resolve(base, paths.get("nli_pairs")),
                nli_plot=_resolve(base, paths.get("nli_plot")),
                method=data.get("grounding", {}).get("method", "bleu"),
                backend_names=backend_names,
                sampling=SamplingConfig(**sampling_data),
                training=TrainConfig(**data.get("training", {})),
                generation=GenerationConfig(**data.get("generation", {})),
                threshold=data.get("threshold", 0.5),
                seed=data.get("seed", 0),
                nli_sample_per_class=nli.get("sample_per_class", 50),
                nli_num_bins=nli.get("num_bins", 20),
                random_baseline_seeds=evaluation.get("random_baseline_seeds", 10),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_yaml(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"could not parse {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a mapping")
        return cls.from_dict(data, base_dir=path.parent)

    def semantic_dict(self) -> dict:
        """Everything that determines artifact content; no paths."""
        return {
            "method": self.method,
            "backends": dict(sorted(self.backend_names.items())),
            "sampling": dataclasses.asdict(self.sampling),
            "training": dataclasses.asdict(self.training),
            "generation": dataclasses.asdict(self.generation),
            "threshold": self.threshold,
            "seed": self.seed,
            "nli": {"sample_per_class": self.nli_sample_per_class,
                    "num_bins": self.nli_num_bins},
            "evaluation": {"random_baseline_seeds": self.random_baseline_seeds},
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.semantic_dict(), sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def cache_dir(self) -> Path:
        env = os.environ.get(CACHE_ENV_VAR)
        if env:
            return Path(env)
        if self.cache is not None:
            return self.cache
        return self.artifacts / "cache"


_DEFAULT_BACKENDS = {
    "likelihood": "uniform",
    "embedding": "hash",
    "entailment": "constant",
    "classifier": "bow",
    "summarizer": "mock",
}


def _build_likelihood(name: str):
    if name == "uniform":
        return mock_backends.UniformLikelihoodBackend()
    if name == "overlap":
        return mock_backends.OverlapLikelihoodBackend()
    if name == "causal-lm":
        from . import integration
        return integration.CausalLmLikelihoodBackend()
    raise ConfigError(f"unknown likelihood backend {name!r}")


def _build_embedding(name: str):
    if name == "hash":
        return mock_backends.HashEmbeddingBackend()
    if name == "encoder":
        from . import integration
        return integration.EncoderEmbeddingBackend()
    raise ConfigError(f"unknown embedding backend {name!r}")


def _build_entailment(name: str):
    if name == "constant":
        return mock_backends.ConstantEntailmentBackend()
    if name == "nli":
        from . import integration
        return integration.NliEntailmentBackend()
    raise ConfigError(f"unknown entailment backend {name!r}")


def _build_summarizer(name: str):
    if name == "mock":
        return mock_backends.MockSummarizer()
    if name == "seq2seq":
        from . import integration
        return integration.Seq2SeqSummarizerBackend()
    raise ConfigError(f"unknown summarizer backend {name!r}")


def _build_classifier(name: str):
    from .classifier import BagOfWordsBackend
    if name == "bow":
        return BagOfWordsBackend()
    if name == "encoder":
        raise ConfigError(
            "encoder classifier fine-tuning is integration-only; drive it "
            "through salientsum.integration.EncoderClassifierBackend rather "
            "than the artifact pipeline")
    raise ConfigError(f"unknown classifier backend {name!r}")


@dataclass
class StageResult:
    stage: str
    skipped: bool
    outputs: list[Path]
    messages: list[str] = field(default_factory=list)


# --- artifact bookkeeping ----------------------------------------------------


def _hash_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _manifest_path(config: PipelineConfig, stage: str) -> Path:
    return config.artifacts / "manifests" / f"{stage}.json"


def _write_manifest(config: PipelineConfig, stage: str,
                    inputs: Mapping[str, str], outputs: Sequence[Path]) -> None:
    path = _manifest_path(config, stage)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "stage": stage,
        "config_hash": config.config_hash(),
        "inputs": dict(sorted(inputs.items())),
        "outputs": {str(p.relative_to(config.artifacts)): _hash_file(p)
                    for p in sorted(outputs)},
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _up_to_date(config: PipelineConfig, stage: str,
                inputs: Mapping[str, str]) -> bool:
    path = _manifest_path(config, stage)
    if not path.exists():
        return False
    manifest = json.loads(path.read_text(encoding="utf-8"))
    if manifest.get("config_hash") != config.config_hash():
        raise ConfigError(
            f"artifacts for stage {stage!r} were produced by a different "
            "configuration; rerun with --force to overwrite")
    if manifest.get("inputs") != dict(sorted(inputs.items())):
        return False
    for rel, expected in manifest.get("outputs", {}).items():
        out = config.artifacts / rel
        if not out.exists() or _hash_file(out) != expected:
            return False
    return True


def _require(path: Path, produced_by: str | None) -> Path:
    if not path.exists():
        if produced_by:
            raise MissingArtifactError(
                f"missing artifact {path.name}; run {produced_by} first")
        raise MissingArtifactError(f"missing input file: {path}")
    return path


# --- stage implementations ---------------------------------------------------


def _stage_ingest(config: PipelineConfig, jobs: int) -> tuple[list[Path], list[str]]:
    raw = _require(config.raw_corpus, None)
    pairs = preprocess_corpus(read_raw_corpus(raw))
    out = config.artifacts / "corpus.jsonl"
    write_preprocessed(pairs, out)
    stats = corpus_stats(pairs)
    return [out], [
        f"{stats.pair_count} document pairs; "
        f"avg {stats.avg_source_words:.1f} source words, "
        f"avg {stats.avg_summary_words:.1f} summary words"
    ]


def _scoring_backends(config: PipelineConfig) -> ScoringBackends:
    names = config.backend_names
    built = ScoringBackends()
    try:
        if config.method == "perplexity":
            built.likelihood = _build_likelihood(names["likelihood"])
        elif config.method == "similarity":
            built.embedding = _build_embedding(names["embedding"])
        elif config.method == "entailment":
            built.entailment = _build_entailment(names["entailment"])
    except RuntimeError as exc:  # missing optional dependency
        raise ConfigError(str(exc)) from exc
    return built


def matrix_to_record(matrix: GroundingScoreMatrix) -> dict:
    return {
        "doc_id": matrix.doc_id,
        "method": matrix.method,
        "scores": [list(row) for row in matrix.scores],
        "skipped_source": sorted(matrix.skipped_source),
        "skipped_summary": sorted(matrix.skipped_summary),
    }


def matrix_from_record(record: Mapping) -> GroundingScoreMatrix:
    return GroundingScoreMatrix(
        doc_id=record["doc_id"],
        method=record["method"],
        scores=tuple(tuple(row) for row in record["scores"]),
        skipped_source=frozenset(record["skipped_source"]),
        skipped_summary=frozenset(record["skipped_summary"]),
    )


def _stage_score(config: PipelineConfig, jobs: int) -> tuple[list[Path], list[str]]:
    corpus_path = _require(config.artifacts / "corpus.jsonl", "ingest")
    pairs = read_preprocessed(corpus_path)
    backends = _scoring_backends(config)
    cache_dir = config.cache_dir()
    cache_dir.mkdir(parents=True, exist_ok=True)
    cache = ScoreCache(cache_dir / f"scores-{config.method}.jsonl")

    def score_one(pair: DocumentPair) -> GroundingScoreMatrix:
        return score_matrix(pair, config.method, backends=backends, cache=cache)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            matrices = list(pool.map(score_one, pairs))
    else:
        matrices = [score_one(pair) for pair in pairs]
    matrices.sort(key=lambda m: m.doc_id)
    out = config.artifacts / "scores.jsonl"
    with open(out, "w", encoding="utf-8") as fh:
        for matrix in matrices:
            fh.write(json.dumps(matrix_to_record(matrix), sort_keys=True) + "\n")
    return [out], [f"scored {len(matrices)} documents with {config.method}"]


def _read_matrices(path: Path) -> dict[str, GroundingScoreMatrix]:
    matrices = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                matrix = matrix_from_record(json.loads(line))
                matrices[matrix.doc_id] = matrix
    return matrices


def _stage_build_dataset(config: PipelineConfig, jobs: int) -> tuple[list[Path], list[str]]:
    corpus_path = _require(config.artifacts / "corpus.jsonl", "ingest")
    scores_path = _require(config.artifacts / "scores.jsonl", "score")
    pairs = read_preprocessed(corpus_path)
    matrices = _read_matrices(scores_path)
    splits = build_dataset(pairs, matrices, config.sampling)
    out = config.artifacts / "dataset.jsonl"
    write_dataset(splits, config.method, config.sampling.strategy, out)
    counts = splits.counts()
    return [out], [f"dataset sizes: train={counts['train']} "
                   f"dev={counts['dev']} test={counts['test']}"]


def _stage_train(config: PipelineConfig, jobs: int) -> tuple[list[Path], list[str]]:
    dataset_path = _require(config.artifacts / "dataset.jsonl", "build-dataset")
    splits = read_dataset(dataset_path)
    backend = _build_classifier(config.backend_names["classifier"])
    model = train(backend, splits.train, splits.dev, config.training)
    metrics = {"dev_accuracy_per_epoch": model.dev_accuracy_per_epoch}
    if splits.test:
        metrics["test_accuracy"] = evaluate_accuracy(model, splits.test)
    model_dir = config.artifacts / "model"
    save_model(model, model_dir, config.training, metrics=metrics)
    outputs = [model_dir / "manifest.json", model_dir / "weights.json"]
    message = (f"test accuracy {metrics['test_accuracy']:.4f}"
               if "test_accuracy" in metrics else "trained")
    return outputs, [message]


def _stage_compress(config: PipelineConfig, jobs: int) -> tuple[list[Path], list[str]]:
    corpus_path = _require(config.artifacts / "corpus.jsonl", "ingest")
    _require(config.artifacts / "model" / "weights.json", "train")
    model = load_model(config.artifacts / "model")
    pairs = read_preprocessed(corpus_path)
    out = config.artifacts / "compressed.jsonl"
    ratios = []
    with open(out, "w", encoding="utf-8") as fh:
        for pair in pairs:
            compressed = compress_document(model, pair.source,
                                           config.threshold, pair.doc_id)
            ratio = compression_ratio(pair.source, compressed)
            ratios.append(ratio)
            fh.write(json.dumps({
                "doc_id": pair.doc_id,
                "kept_ids": list(compressed.kept_ids),
                "text": compressed.text,
                "compression_ratio": ratio,
            }, sort_keys=True, ensure_ascii=False) + "\n")
    return [out], [f"mean compression ratio {statistics.fmean(ratios):.4f}"]


def _read_compressed(path: Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _stage_summarize(config: PipelineConfig, jobs: int) -> tuple[list[Path], list[str]]:
    compressed_path = _require(config.artifacts / "compressed.jsonl", "compress")
    try:
        backend = _build_summarizer(config.backend_names["summarizer"])
    except RuntimeError as exc:
        raise ConfigError(str(exc)) from exc
    records = _read_compressed(compressed_path)
    results = [
        summarize(backend, rec["text"], config.generation,
                  doc_id=rec["doc_id"], system="extract+abstract")
        for rec in records
    ]
    out = config.artifacts / "summaries.jsonl"
    write_summaries(results, out)
    return [out], [f"summarized {len(results)} documents"]


def _mean_scores(reports: Sequence[Mapping[str, RougeScore]]) -> dict[str, RougeScore]:
    return {
        metric: RougeScore(
            recall=statistics.fmean(r[metric].recall for r in reports),
            precision=statistics.fmean(r[metric].precision for r in reports),
            f1=statistics.fmean(r[metric].f1 for r in reports),
        )
        for metric in ("rouge1", "rouge2", "rougeL")
    }


def _stage_evaluate(config: PipelineConfig, jobs: int) -> tuple[list[Path], list[str]]:
    corpus_path = _require(config.artifacts / "corpus.jsonl", "ingest")
    compressed_path = _require(config.artifacts / "compressed.jsonl", "compress")
    summaries_path = _require(config.artifacts / "summaries.jsonl", "summarize")
    pairs = read_preprocessed(corpus_path)
    by_doc = {p.doc_id: p for p in pairs}
    compressed = {r["doc_id"]: r for r in _read_compressed(compressed_path)}
    pipeline_summaries = {r.doc_id: r.summary_text for r in read_summaries(summaries_path)}

    kept_counts = {doc_id: max(1, len(rec["kept_ids"]))
                   for doc_id, rec in compressed.items()}
    systems: dict[str, dict[str, str]] = {
        "extract+abstract": pipeline_summaries,
        "textrank_extractor": {
            p.doc_id: textrank_extractor(p.source, kept_counts[p.doc_id],
                                         doc_id=p.doc_id).text
            for p in pairs
        },
    }
    seed_names = []
    for offset in range(config.random_baseline_seeds):
        name = f"random_extractor[seed={config.seed + offset}]"
        seed_names.append(name)
        systems[name] = {
            p.doc_id: random_extractor(p.source, kept_counts[p.doc_id],
                                       seed=config.seed + offset,
                                       doc_id=p.doc_id).text
            for p in pairs
        }
    ratios = {doc_id: rec["compression_ratio"] for doc_id, rec in compressed.items()}
    report = build_report(pairs, systems, compression_ratios=ratios)
    # collapse the per-seed random baselines into one mean entry
    report.per_system["random_extractor"] = _mean_scores(
        [report.per_system.pop(name) for name in seed_names])
    for name in seed_names:
        report.per_document.pop(name, None)
    json_out = config.artifacts / "report.json"
    table_out = config.artifacts / "report.txt"
    write_report(report, json_out, table_out)
    r1 = report.per_system["extract+abstract"]["rouge1"]
    return [json_out, table_out], [
        f"pipeline ROUGE-1 R/P/F1 = {r1.recall:.4f}/{r1.precision:.4f}/{r1.f1:.4f}"
    ]


def _stage_nli_analyze(config: PipelineConfig, jobs: int) -> tuple[list[Path], list[str]]:
    if config.nli_pairs is None:
        raise MissingArtifactError(
            "nli-analyze needs paths.nli_pairs in the config: a JSONL file "
            "of {premise, hypothesis, label} records")
    pairs_path = _require(config.nli_pairs, None)
    labeled = []
    with open(pairs_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rec = json.loads(line)
                labeled.append((rec["premise"], rec["hypothesis"], rec["label"]))
    try:
        backend = _build_likelihood(config.backend_names["likelihood"])
    except RuntimeError as exc:
        raise ConfigError(str(exc)) from exc
    stats = nli_perplexity_analysis(labeled, backend, config.nli_sample_per_class,
                                    seed=config.seed, num_bins=config.nli_num_bins)
    csv_out = config.artifacts / "nli_histogram.csv"
    write_histogram_csv(stats, csv_out)
    stats_out = config.artifacts / "nli_stats.json"
    with open(stats_out, "w", encoding="utf-8") as fh:
        json.dump({
            "medians": stats.medians,
            "quartiles": {k: list(v) for k, v in stats.quartiles.items()},
            "counts": {k: len(v) for k, v in stats.perplexities.items()},
            "failures": stats.failures,
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs, messages = [csv_out, stats_out], [
        "medians: " + ", ".join(f"{k}={v:.3f}" for k, v in sorted(stats.medians.items()))
    ]
    if config.nli_plot is not None:
        try:
            plot_histogram(stats, config.nli_plot)
            messages.append(f"plot written to {config.nli_plot}")
        except RuntimeError as exc:
            messages.append(f"plot skipped: {exc}")
    return outputs, messages


_STAGE_FUNCTIONS: dict[str, Callable[[PipelineConfig, int], tuple[list[Path], list[str]]]] = {
    "ingest": _stage_ingest,
    "score": _stage_score,
    "build-dataset": _stage_build_dataset,
    "train": _stage_train,
    "compress": _stage_compress,
    "summarize": _stage_summarize,
    "evaluate": _stage_evaluate,
    "nli-analyze": _stage_nli_analyze,
}

# Input files each stage depends on, with the stage that produces them;
# checked before the up-to-date test so dependency errors come first.
_STAGE_INPUTS: dict[str, Callable[[PipelineConfig], dict[Path, str | None]]] = {
    "ingest": lambda c: {c.raw_corpus: None},
    "score": lambda c: {c.artifacts / "corpus.jsonl": "ingest"},
    "build-dataset": lambda c: {c.artifacts / "corpus.jsonl": "ingest",
                                c.artifacts / "scores.jsonl": "score"},
    "train": lambda c: {c.artifacts / "dataset.jsonl": "build-dataset"},
    "compress": lambda c: {c.artifacts / "corpus.jsonl": "ingest",
                           c.artifacts / "model" / "weights.json": "train"},
    "summarize": lambda c: {c.artifacts / "compressed.jsonl": "compress"},
    "evaluate": lambda c: {c.artifacts / "corpus.jsonl": "ingest",
                           c.artifacts / "compressed.jsonl": "compress",
                           c.artifacts / "summaries.jsonl": "summarize"},
    "nli-analyze": lambda c: ({c.nli_pairs: None} if c.nli_pairs else {}),
}


def run_stage(stage: str, config: PipelineConfig, force: bool = False,
              jobs: int = 1) -> StageResult:
    """Execute one stage, or skip it when its manifest shows the same
    configuration, inputs, and outputs."""
    if stage not in _STAGE_FUNCTIONS:
        raise ConfigError(f"unknown stage {stage!r}; choose from {', '.join(STAGES)}")
    if jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    config.artifacts.mkdir(parents=True, exist_ok=True)
    for path, producer in _STAGE_INPUTS[stage](config).items():
        _require(path, producer)
    input_hashes = {str(p): _hash_file(p)
                    for p in _STAGE_INPUTS[stage](config)}
    if not force and _up_to_date(config, stage, input_hashes):
        return StageResult(stage=stage, skipped=True, outputs=[],
                           messages=["up to date"])
    outputs, messages = _STAGE_FUNCTIONS[stage](config, jobs)
    _write_manifest(config, stage, input_hashes, outputs)
    return StageResult(stage=stage, skipped=False, outputs=outputs,
                       messages=messages)


def run_all(config: PipelineConfig, force: bool = False, jobs: int = 1,
            stages: Sequence[str] = CORE_STAGES) -> list[StageResult]:
    return [run_stage(stage, config, force=force, jobs=jobs) for stage in stages]
