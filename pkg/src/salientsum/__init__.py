"""Low-resource long-document summarization by salience compression.

Ground summary sentences in source sentences with a scoring method
(conditional perplexity, entailment, embedding similarity, or sentence
BLEU), label the best and worst grounded sentences to build a salience
dataset, train a sentence classifier, compress documents to their salient
core, and hand the compressed text to a pluggable abstractive summarizer.
Evaluation covers ROUGE against gold summaries, random and graph-centrality
extractor baselines, and perplexity-distribution analysis over labeled
premise/hypothesis pairs.
"""

from .abstraction import (
    GenerationConfig,
    SummarizerBackend,
    SummaryResult,
    export_finetuning,
    summarize,
    truncate_input,
)
from .backends import (
    ConstantEntailmentBackend,
    HashEmbeddingBackend,
    MockSummarizer,
    OverlapLikelihoodBackend,
    TableEmbeddingBackend,
    TableEntailmentBackend,
    UniformLikelihoodBackend,
)
from .classifier import (
    BagOfWordsBackend,
    BagOfWordsModel,
    ClassifierBackend,
    CompressedDocument,
    TrainConfig,
    compress_document,
    compression_ratio,
    evaluate_accuracy,
    load_model,
    save_model,
    train,
)
from .corpus import (
    DEFAULT_MIN_WORDS,
    CorpusStats,
    DocumentPair,
    Sentence,
    clean_sentence,
    corpus_stats,
    filter_short,
    make_pair,
    split_sentences,
)
from .evaluation import (
    EvalReport,
    NliPerplexityStats,
    RougeScore,
    build_report,
    human_agreement_recall,
    nli_perplexity_analysis,
    random_extractor,
    recall_vs_gold,
    rouge_l,
    rouge_n,
    textrank_extractor,
    textrank_scores,
)
from .grounding import (
    METHODS,
    EmbeddingBackend,
    EntailmentBackend,
    GroundingScoreMatrix,
    ScoreCache,
    ScoringBackends,
    TokenLikelihoodBackend,
    conditional_perplexity,
    f_bleu,
    f_entailment,
    f_perplexity,
    f_similarity,
    score_matrix,
)
from .pipeline import (
    ConfigError,
    MissingArtifactError,
    PipelineConfig,
    PipelineError,
    StageResult,
    run_all,
    run_stage,
)
from .salience import (
    SPLIT_FRACTIONS,
    STRATEGIES,
    DatasetSplits,
    SalienceExample,
    SamplingConfig,
    aggregate_salience,
    build_dataset,
    select_aggregate,
    select_for_document,
    select_random_negative,
    select_topk_bottomk,
)
from .synthetic import SyntheticCorpus, generate_corpus, write_raw_jsonl

__version__ = "0.1.0"

__all__ = [
    "BagOfWordsBackend",
    "BagOfWordsModel",
    "ClassifierBackend",
    "CompressedDocument",
    "ConfigError",
    "ConstantEntailmentBackend",
    "CorpusStats",
    "DatasetSplits",
    "DEFAULT_MIN_WORDS",
    "DocumentPair",
    "EmbeddingBackend",
    "EntailmentBackend",
    "EvalReport",
    "GenerationConfig",
    "GroundingScoreMatrix",
    "HashEmbeddingBackend",
    "METHODS",
    "MissingArtifactError",
    "MockSummarizer",
    "NliPerplexityStats",
    "OverlapLikelihoodBackend",
    "PipelineConfig",
    "PipelineError",
    "RougeScore",
    "SPLIT_FRACTIONS",
    "STRATEGIES",
    "SalienceExample",
    "SamplingConfig",
    "ScoreCache",
    "ScoringBackends",
    "Sentence",
    "StageResult",
    "SummarizerBackend",
    "SummaryResult",
    "SyntheticCorpus",
    "TableEmbeddingBackend",
    "TableEntailmentBackend",
    "TokenLikelihoodBackend",
    "TrainConfig",
    "UniformLikelihoodBackend",
    "aggregate_salience",
    "build_dataset",
    "build_report",
    "clean_sentence",
    "compress_document",
    "compression_ratio",
    "conditional_perplexity",
    "corpus_stats",
    "evaluate_accuracy",
    "export_finetuning",
    "f_bleu",
    "f_entailment",
    "f_perplexity",
    "f_similarity",
    "filter_short",
    "generate_corpus",
    "human_agreement_recall",
    "load_model",
    "make_pair",
    "nli_perplexity_analysis",
    "random_extractor",
    "recall_vs_gold",
    "rouge_l",
    "rouge_n",
    "run_all",
    "run_stage",
    "save_model",
    "score_matrix",
    "select_aggregate",
    "select_for_document",
    "select_random_negative",
    "select_topk_bottomk",
    "split_sentences",
    "summarize",
    "textrank_extractor",
    "textrank_scores",
    "train",
    "truncate_input",
    "write_raw_jsonl",
]
