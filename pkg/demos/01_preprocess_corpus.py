"""Segment, clean, and summarize a tiny raw corpus.

Run from the repository root after installing the package:

    python3 demos/01_preprocess_corpus.py
"""

from salientsum.corpus import clean_sentence, corpus_stats, make_pair, split_sentences

RAW_DOCUMENT = (
    "Dr. Alvarez presented the glacier survey on Jan. 12. The terminus retreated "
    "41 meters since the prior visit! Was the retreat uniform across the basin? "
    "No. 4 stakes recorded ablation above 2.1 m w.e. The U.S. team will return in "
    "spring to re-survey the accumulation zone."
)

RAW_SUMMARY = (
    "The glacier terminus retreated 41 meters. Ablation exceeded 2.1 m w.e. at "
    "several stakes."
)


def main() -> None:
    print("=== sentence segmentation ===")
    for sentence in split_sentences(RAW_DOCUMENT):
        print(f"  [{sentence.sent_id}] ({sentence.word_count:2d} words) {sentence.text}")

    print("\n=== cleaning ===")
    noisy = "Snow   depth § reached\t1.9 m — a record ☃"
    print(f"  raw:     {noisy!r}")
    print(f"  cleaned: {clean_sentence(noisy)!r}")

    print("\n=== document/summary pairing and corpus statistics ===")
    pair = make_pair("glacier-survey-01", RAW_DOCUMENT, RAW_SUMMARY, split="train")
    stats = corpus_stats([pair])
    print(f"  {stats.pair_count} pair; avg source words {stats.avg_source_words:.1f}; "
          f"avg summary words {stats.avg_summary_words:.1f}")
    print(f"  source sentences: {len(pair.source)}; summary sentences: {len(pair.summary)}")


if __name__ == "__main__":
    main()
