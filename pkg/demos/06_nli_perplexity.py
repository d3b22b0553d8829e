"""Perplexity distributions of hypothesis-given-premise by relation class.

A language model should find hypotheses that follow from their premise
easier to predict. Here a word-overlap mock stands in for the LM: the
entailment-style pairs share words with their premise and land at lower
perplexity, while unrelated hypotheses land higher.

    python3 demos/06_nli_perplexity.py
"""

import tempfile
from pathlib import Path

from salientsum.backends import OverlapLikelihoodBackend
from salientsum.evaluation import nli_perplexity_analysis, write_histogram_csv


def synthetic_pairs(per_class: int = 40):
    pairs = []
    for i in range(per_class):
        premise = f"the gauge at station {i} recorded rising discharge all week"
        pairs.append((premise, f"the discharge at station {i} was rising", "entailment"))
        pairs.append((premise, f"the crew {i} might resurvey the moraine later", "neutral"))
        pairs.append((premise, f"quartz specimens {i} belong in drawer nine", "contradiction"))
    return pairs


def main() -> None:
    backend = OverlapLikelihoodBackend(p_known=0.6, p_novel=0.05)
    stats = nli_perplexity_analysis(synthetic_pairs(), backend,
                                    sample_per_class=30, seed=0, num_bins=12)

    print("=== per-class perplexity summaries ===")
    for cls in ("entailment", "neutral", "contradiction"):
        q1, q3 = stats.quartiles[cls]
        print(f"  {cls:13s} median={stats.medians[cls]:7.2f} "
              f"IQR=[{q1:7.2f}, {q3:7.2f}] n={len(stats.perplexities[cls])}")
    print("  ordering: entailment < neutral "
          f"-> {stats.medians['entailment'] < stats.medians['neutral']}")

    print("\n=== shared-bin histograms (counts per class) ===")
    for cls, counts in stats.histograms.items():
        bars = " ".join(f"{c:2d}" for c in counts)
        print(f"  {cls:13s} {bars}")

    out = Path(tempfile.mkdtemp()) / "nli_histogram.csv"
    write_histogram_csv(stats, out)
    print(f"\nplot-ready CSV written to {out}")
    print("first lines:")
    for line in out.read_text().splitlines()[:4]:
        print(f"  {line}")


if __name__ == "__main__":
    main()
