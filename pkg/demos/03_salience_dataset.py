"""Turn grounding scores into a labeled salience dataset.

Uses the planted-salience synthetic corpus: each gold summary is a light
paraphrase of known source sentences, so we can check that the selection
rules actually recover the planted sentences.

    python3 demos/03_salience_dataset.py
"""

from salientsum.grounding import score_matrix
from salientsum.salience import (
    SamplingConfig,
    aggregate_salience,
    build_dataset,
    select_for_document,
)
from salientsum.synthetic import generate_corpus


def main() -> None:
    corpus = generate_corpus(num_docs=12, sentences_per_doc=20,
                             planted_per_doc=3, seed=7)
    matrices = {pair.doc_id: score_matrix(pair, "bleu") for pair in corpus.pairs}

    print("=== per-document selection (aggregate strategy) ===")
    recovered = planted_total = 0
    sampling = SamplingConfig(strategy="aggregate")
    for pair in corpus.pairs[:3]:
        matrix = matrices[pair.doc_id]
        salient, non_salient = select_for_document(matrix, sampling)
        planted = set(corpus.planted[pair.doc_id])
        print(f"  {pair.doc_id}: planted={sorted(planted)} "
              f"salient={sorted(salient)} non_salient={sorted(non_salient)[:6]}...")
        top = sorted(aggregate_salience(matrix), key=lambda p: -p[1])[:3]
        print("    highest aggregate scores: "
              + ", ".join(f"s{i}={v:.3f}" for i, v in top))
    for pair in corpus.pairs:
        salient, _ = select_for_document(matrices[pair.doc_id], sampling)
        planted = set(corpus.planted[pair.doc_id])
        recovered += len(planted & salient)
        planted_total += len(planted)
    print(f"  planted sentences recovered: {recovered}/{planted_total}")

    print("\n=== dataset assembly with a sentence-level split ===")
    for strategy in ("aggregate", "topk_bottomk", "random_negative"):
        splits = build_dataset(corpus.pairs, matrices,
                               SamplingConfig(strategy=strategy, seed=0))
        counts = splits.counts()
        positives = sum(1 for ex in splits.train if ex.label == "salient")
        print(f"  {strategy:16s} train={counts['train']:3d} (pos={positives:3d}) "
              f"dev={counts['dev']:3d} test={counts['test']:3d}")

    splits = build_dataset(corpus.pairs, matrices, SamplingConfig())
    example = splits.train[0]
    print("\n  first training example:")
    print(f"    doc={example.doc_id} sent={example.sent_id} label={example.label}")
    print(f"    text: {example.text}")


if __name__ == "__main__":
    main()
