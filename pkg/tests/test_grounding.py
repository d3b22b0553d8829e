import math

import pytest

from salientsum.backends import (
    ConstantEntailmentBackend,
    HashEmbeddingBackend,
    OverlapLikelihoodBackend,
    TableEmbeddingBackend,
    TableEntailmentBackend,
    UniformLikelihoodBackend,
)
from salientsum.corpus import Sentence, make_pair
from salientsum.grounding import (
    GroundingScoreMatrix,
    ScoreCache,
    ScoringBackends,
    conditional_perplexity,
    f_bleu,
    f_entailment,
    f_perplexity,
    f_similarity,
    score_matrix,
)

# Frozen expected values, computed by hand/brute force before implementation.
BLEU_CAT_SAT = 0.20687381245863395  # s="the cat sat on the mat", t="the cat sat"
BLEU_DISJOINT_5 = 0.030213753973567684  # disjoint vocab, both 5 words


def test_uniform_backend_perplexity_is_reciprocal_p():
    backend = UniformLikelihoodBackend(p=0.25)
    assert conditional_perplexity(backend, "any context", "one two three") == pytest.approx(4.0, abs=1e-9)


def test_perplexity_independent_of_context():
    backend = UniformLikelihoodBackend(p=0.1)
    a = conditional_perplexity(backend, "short", "t1 t2 t3 t4 t5")
    b = conditional_perplexity(backend, "a much longer context string here", "t1 t2 t3 t4 t5")
    assert a == pytest.approx(b, abs=1e-12)
    assert a == pytest.approx(10.0, abs=1e-9)


def test_perplexity_certain_backend_is_one():
    backend = UniformLikelihoodBackend(p=1.0)
    assert conditional_perplexity(backend, "s", "t") == pytest.approx(1.0, abs=1e-12)


def test_perplexity_empty_target_is_error():
    backend = UniformLikelihoodBackend()
    with pytest.raises(ValueError, match="empty target"):
        conditional_perplexity(backend, "context", "")


def test_perplexity_head_truncates_long_context():
    backend = UniformLikelihoodBackend(p=0.5, max_context_tokens=10)
    long_context = " ".join(f"w{i}" for i in range(100))
    assert conditional_perplexity(backend, long_context, "a b c") == pytest.approx(2.0, abs=1e-9)


def test_f_perplexity_values_and_monotonicity():
    assert f_perplexity(1.0) == 0.0
    assert f_perplexity(4.0) == pytest.approx(-1.3862943611198906, abs=1e-12)
    assert f_perplexity(2.0) > f_perplexity(5.0)
    with pytest.raises(ValueError):
        f_perplexity(0.0)
    with pytest.raises(ValueError):
        f_perplexity(-1.0)


def test_bleu_identity_is_one():
    s = "the quick brown fox jumps"
    assert f_bleu(s, s) == pytest.approx(1.0, abs=1e-12)


def test_bleu_hand_computed_case():
    assert f_bleu("the cat sat on the mat", "the cat sat") == pytest.approx(
        BLEU_CAT_SAT, abs=1e-12)


def test_bleu_disjoint_vocabulary_keeps_only_smoothing_mass():
    value = f_bleu("alpha beta gamma delta epsilon", "zeta eta theta iota kappa")
    assert value == pytest.approx(BLEU_DISJOINT_5, abs=1e-12)
    assert 0.0 < value < 0.05


def test_bleu_range_on_random_pairs():
    import random
    rng = random.Random(7)
    vocab = [f"w{i}" for i in range(12)]
    for _ in range(200):
        s = " ".join(rng.choices(vocab, k=rng.randint(1, 15)))
        t = " ".join(rng.choices(vocab, k=rng.randint(1, 15)))
        assert 0.0 <= f_bleu(s, t) <= 1.0


def test_bleu_empty_is_error():
    with pytest.raises(ValueError):
        f_bleu("", "words here")
    with pytest.raises(ValueError):
        f_bleu("words here", "")


def test_similarity_identity_orthogonal_and_hand_case():
    table = {"a": (1.0, 0.0), "b": (0.0, 1.0), "c": (1.0, 1.0)}
    backend = TableEmbeddingBackend(table=table)
    assert f_similarity(backend, "a", "a") == pytest.approx(1.0)
    assert f_similarity(backend, "a", "b") == pytest.approx(0.0)
    assert f_similarity(backend, "a", "c") == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_similarity_zero_vector_is_error():
    backend = TableEmbeddingBackend(table={"z": (0.0, 0.0), "a": (1.0, 0.0)})
    with pytest.raises(ValueError, match="degenerate embedding"):
        f_similarity(backend, "z", "a")


def test_similarity_symmetric():
    backend = HashEmbeddingBackend(dim=32)
    s, t = "alpha beta gamma delta", "delta epsilon zeta eta"
    assert f_similarity(backend, s, t) == pytest.approx(f_similarity(backend, t, s))


def test_entailment_passthrough_and_validation():
    assert f_entailment(ConstantEntailmentBackend(value=0.5), "p", "h") == 0.5
    with pytest.raises(ValueError):
        f_entailment(ConstantEntailmentBackend(value=1.2), "p", "h")
    table = TableEntailmentBackend(table={("the premise", "the hypothesis"): 0.9})
    assert f_entailment(table, "the premise", "the hypothesis") == 0.9
    assert f_entailment(table, "other", "pair") == 0.0


FIVE = "Alpha beta gamma delta epsilon"


def _pair_with_short_sentence():
    source = f"{FIVE} one. Too short here. {FIVE} two."
    summary = f"{FIVE} summary one. {FIVE} summary two."
    return make_pair("doc", source, summary)


def test_score_matrix_table_passthrough():
    pair = make_pair("doc", f"{FIVE} aaa. {FIVE} bbb.",
                     f"{FIVE} ccc. {FIVE} ddd.")
    table = {}
    for i, s in enumerate(pair.source):
        for j, t in enumerate(pair.summary):
            table[(s.text, t.text)] = 0.4 * i + 0.1 * j
    backends = ScoringBackends(entailment=TableEntailmentBackend(table=table, default=0.0))
    matrix = score_matrix(pair, "entailment", backends=backends)
    assert matrix.scores == ((0.0, 0.1), (0.4, 0.5))
    assert matrix.skipped_source == frozenset()


def test_score_matrix_marks_short_sentences_skipped():
    matrix = score_matrix(_pair_with_short_sentence(), "bleu")
    assert matrix.skipped_source == frozenset({1})
    scored_values = [matrix.scores[i][j]
                     for i in matrix.scored_source_ids()
                     for j in matrix.scored_summary_ids()]
    sentinel_row = matrix.scores[1]
    assert all(v < min(scored_values) for v in sentinel_row)
    assert all(math.isfinite(v) for row in matrix.scores for v in row)


def test_score_matrix_deterministic():
    pair = _pair_with_short_sentence()
    a = score_matrix(pair, "bleu")
    b = score_matrix(pair, "bleu")
    assert a == b


def test_score_matrix_missing_backend_is_error():
    pair = _pair_with_short_sentence()
    with pytest.raises(ValueError, match="backend"):
        score_matrix(pair, "perplexity", backends=ScoringBackends())


def test_score_matrix_unknown_method_is_error():
    with pytest.raises(ValueError):
        score_matrix(_pair_with_short_sentence(), "nonsense")


def test_warm_cache_rerun_makes_no_backend_calls(tmp_path):
    pair = make_pair("doc", f"{FIVE} one. {FIVE} two.", f"{FIVE} gold.")
    backend = UniformLikelihoodBackend(p=0.5)
    backends = ScoringBackends(likelihood=backend)
    cache = ScoreCache(tmp_path / "cache.jsonl")
    first = score_matrix(pair, "perplexity", backends=backends, cache=cache)
    calls_after_first = backend.calls
    assert calls_after_first > 0

    # fresh cache object over the same file; cold process, warm cache
    cache2 = ScoreCache(tmp_path / "cache.jsonl")
    second = score_matrix(pair, "perplexity", backends=backends, cache=cache2)
    assert second == first
    assert backend.calls == calls_after_first


def test_cache_corruption_is_error(tmp_path):
    path = tmp_path / "cache.jsonl"
    path.write_text("not json at all\n", encoding="utf-8")
    with pytest.raises(ValueError):
        ScoreCache(path)


def test_matrix_shape_properties():
    matrix = GroundingScoreMatrix(
        doc_id="d", method="bleu",
        scores=((1.0, 2.0, 3.0), (4.0, 5.0, 6.0)),
        skipped_source=frozenset(), skipped_summary=frozenset({2}),
    )
    assert matrix.m == 2
    assert matrix.n == 3
    assert matrix.scored_summary_ids() == [0, 1]
