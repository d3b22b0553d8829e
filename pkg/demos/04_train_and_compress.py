"""Train the salience classifier and compress documents with it.

    python3 demos/04_train_and_compress.py
"""

from salientsum.classifier import (
    BagOfWordsBackend,
    TrainConfig,
    compress_document,
    compression_ratio,
    evaluate_accuracy,
    train,
)
from salientsum.grounding import score_matrix
from salientsum.salience import SamplingConfig, build_dataset
from salientsum.synthetic import generate_corpus


def main() -> None:
    corpus = generate_corpus(num_docs=15, sentences_per_doc=24,
                             planted_per_doc=3, seed=1)
    matrices = {pair.doc_id: score_matrix(pair, "bleu") for pair in corpus.pairs}
    splits = build_dataset(corpus.pairs, matrices, SamplingConfig())
    print(f"dataset: {splits.counts()}")

    # A short training run keeps the probabilities away from 0/1 so the
    # threshold sweep below has something to cut through.
    config = TrainConfig(epochs=2, seed=0)
    model = train(BagOfWordsBackend(steps_per_epoch=12), splits.train,
                  splits.dev, config)
    print("dev accuracy per epoch: "
          + ", ".join(f"{a:.3f}" for a in model.dev_accuracy_per_epoch))
    print(f"test accuracy: {evaluate_accuracy(model, splits.test):.3f}")

    pair = corpus.pairs[0]
    print(f"\n=== compressing {pair.doc_id} "
          f"({len(pair.source)} sentences) ===")
    for threshold in (0.1, 0.5, 0.95):
        compressed = compress_document(model, pair.source, threshold, pair.doc_id)
        ratio = compression_ratio(pair.source, compressed)
        print(f"  threshold {threshold:.2f}: kept {len(compressed.kept_ids):2d} "
              f"sentences {list(compressed.kept_ids)}; "
              f"compression ratio {ratio:.3f}")
    planted = sorted(corpus.planted[pair.doc_id])
    kept = compress_document(model, pair.source, 0.5, pair.doc_id).kept_ids
    print(f"  planted sentences {planted} vs kept at 0.5: "
          f"{sorted(set(planted) & set(kept))} recovered")


if __name__ == "__main__":
    main()
