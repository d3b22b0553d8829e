"""Score how well each source sentence grounds each summary sentence.

Four interchangeable scoring functions are shown: sentence BLEU (no model
needed), language-model perplexity, embedding cosine similarity, and
entailment probability — the last three through deterministic mock
backends so the demo runs offline.

    python3 demos/02_grounding_scores.py
"""

from salientsum.backends import (
    ConstantEntailmentBackend,
    HashEmbeddingBackend,
    OverlapLikelihoodBackend,
)
from salientsum.corpus import make_pair
from salientsum.grounding import (
    ScoringBackends,
    conditional_perplexity,
    f_perplexity,
    score_matrix,
)

SOURCE = (
    "The survey team measured mass balance across the upper basin this season. "
    "Lunch was served at the field station before noon. "
    "Meltwater discharge in the outlet stream doubled compared to last year. "
    "The measured ablation rate exceeded every previous record in the series."
)
SUMMARY = (
    "Mass balance measurements covered the upper basin. "
    "The ablation rate broke the previous records."
)


def show_matrix(matrix) -> None:
    print(f"  method={matrix.method}  m={matrix.m}  n={matrix.n}  "
          f"skipped_source={sorted(matrix.skipped_source)}")
    for i, row in enumerate(matrix.scores):
        cells = "  ".join(f"{value:8.4f}" for value in row)
        print(f"    s{i}: {cells}")


def main() -> None:
    pair = make_pair("demo-doc", SOURCE, SUMMARY)

    print("=== sentence BLEU grounding (self-contained) ===")
    show_matrix(score_matrix(pair, "bleu"))

    print("\n=== perplexity grounding (overlap mock LM) ===")
    backends = ScoringBackends(likelihood=OverlapLikelihoodBackend())
    show_matrix(score_matrix(pair, "perplexity", backends=backends))
    ppl = conditional_perplexity(backends.likelihood,
                                 pair.source[0].text, pair.summary[0].text)
    print(f"  example: perplexity of summary[0] given source[0] = {ppl:.3f}; "
          f"score f = -ln(ppl) = {f_perplexity(ppl):.3f}")

    print("\n=== similarity grounding (hashed-embedding mock) ===")
    show_matrix(score_matrix(
        pair, "similarity", backends=ScoringBackends(embedding=HashEmbeddingBackend())))

    print("\n=== entailment grounding (constant mock) ===")
    show_matrix(score_matrix(
        pair, "entailment",
        backends=ScoringBackends(entailment=ConstantEntailmentBackend(value=0.5))))

    print("\nSwap in pretrained backends from salientsum.integration for real "
          "scores; every scorer keeps the same matrix contract.")


if __name__ == "__main__":
    main()
