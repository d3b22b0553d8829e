"""Run compress -> abstract -> evaluate against baselines, end to end in
memory, and print the results table.

The mock summarizer echoes a token-budgeted prefix of its input, so the
numbers isolate the quality of content selection. Swap in
salientsum.integration.Seq2SeqSummarizerBackend for real generation.

    python3 demos/05_summarize_and_evaluate.py
"""

import statistics

from salientsum.abstraction import GenerationConfig, summarize
from salientsum.backends import MockSummarizer
from salientsum.classifier import BagOfWordsBackend, TrainConfig, compress_document, compression_ratio, train
from salientsum.evaluation import build_report, random_extractor, textrank_extractor
from salientsum.grounding import score_matrix
from salientsum.salience import SamplingConfig, build_dataset
from salientsum.synthetic import generate_corpus


def main() -> None:
    corpus = generate_corpus(num_docs=12, sentences_per_doc=20,
                             planted_per_doc=3, seed=3)
    matrices = {pair.doc_id: score_matrix(pair, "bleu") for pair in corpus.pairs}
    splits = build_dataset(corpus.pairs, matrices, SamplingConfig())
    model = train(BagOfWordsBackend(), splits.train, splits.dev, TrainConfig(epochs=4))

    summarizer = MockSummarizer()
    generation = GenerationConfig()
    systems = {"extract+abstract": {}, "textrank_extractor": {}, "random_extractor": {}}
    ratios = {}
    for pair in corpus.pairs:
        compressed = compress_document(model, pair.source, 0.5, pair.doc_id)
        ratios[pair.doc_id] = compression_ratio(pair.source, compressed)
        count = max(1, len(compressed.kept_ids))
        result = summarize(summarizer, compressed, generation)
        systems["extract+abstract"][pair.doc_id] = result.summary_text
        systems["textrank_extractor"][pair.doc_id] = (
            textrank_extractor(pair.source, count, doc_id=pair.doc_id).text)
        systems["random_extractor"][pair.doc_id] = (
            random_extractor(pair.source, count, seed=0, doc_id=pair.doc_id).text)

    report = build_report(corpus.pairs, systems, compression_ratios=ratios)
    print(report.render_table())
    print(f"\nmean compression ratio: "
          f"{statistics.fmean(ratios.values()):.3f} "
          f"(fraction of source words removed before abstraction)")


if __name__ == "__main__":
    main()
