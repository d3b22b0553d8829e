import math
import random

import pytest

from salientsum.grounding import GroundingScoreMatrix
from salientsum.salience import (
    SPLIT_FRACTIONS,
    SalienceExample,
    SamplingConfig,
    aggregate_salience,
    build_dataset,
    read_dataset,
    select_aggregate,
    select_for_document,
    select_random_negative,
    select_topk_bottomk,
    write_dataset,
)
from salientsum.synthetic import generate_corpus
from salientsum import score_matrix


def _matrix(rows, skipped_source=(), skipped_summary=(), doc_id="d", method="bleu"):
    return GroundingScoreMatrix(
        doc_id=doc_id, method=method,
        scores=tuple(tuple(float(v) for v in row) for row in rows),
        skipped_source=frozenset(skipped_source),
        skipped_summary=frozenset(skipped_summary),
    )


def test_aggregate_is_row_mean():
    matrix = _matrix([[1, 3], [2, 4]])
    assert aggregate_salience(matrix) == [(0, 2.0), (1, 3.0)]


def test_aggregate_single_column_is_identity():
    matrix = _matrix([[0.3], [0.9], [0.1]])
    assert aggregate_salience(matrix) == [(0, 0.3), (1, 0.9), (2, 0.1)]


def test_aggregate_column_permutation_invariant():
    a = _matrix([[1, 5, 9], [2, 4, 6]])
    b = _matrix([[9, 1, 5], [6, 2, 4]])
    assert aggregate_salience(a) == aggregate_salience(b)


def test_aggregate_excludes_skipped():
    matrix = _matrix([[1, 100], [2, 100], [3, 100]], skipped_source={1},
                     skipped_summary={1})
    scored = dict(aggregate_salience(matrix))
    assert set(scored) == {0, 2}
    assert scored[0] == 1.0 and scored[2] == 3.0


def test_aggregate_no_scored_columns_is_error():
    matrix = _matrix([[1.0]], skipped_summary={0})
    with pytest.raises(ValueError):
        aggregate_salience(matrix)


def test_select_aggregate_standard_quota():
    scored = [(i, float(100 - i)) for i in range(20)]
    salient, non_salient = select_aggregate(scored, n=2)
    assert len(salient) == 6 and len(non_salient) == 6
    assert salient == set(range(6))
    assert non_salient == set(range(14, 20))


def test_select_aggregate_small_document_half_rule():
    scored = [(i, float(10 - i)) for i in range(10)]
    salient, non_salient = select_aggregate(scored, n=2)
    assert len(salient) == 5 and len(non_salient) == 5
    scored9 = [(i, float(9 - i)) for i in range(9)]
    salient9, non_salient9 = select_aggregate(scored9, n=2)
    assert len(salient9) == 5 and len(non_salient9) == 4


def test_select_aggregate_separation_property():
    rng = random.Random(3)
    scored = [(i, rng.uniform(-5, 5)) for i in range(30)]
    salient, non_salient = select_aggregate(scored, n=2)
    by_id = dict(scored)
    assert not (salient & non_salient)
    assert min(by_id[i] for i in salient) >= max(by_id[i] for i in non_salient)


def test_select_aggregate_tie_break_prefers_earlier():
    scored = [(i, 1.0) for i in range(4)]
    salient, non_salient = select_aggregate(scored, n=1, k_multiplier=1)
    assert salient == {0}
    assert non_salient == {3}


def _oracle_select_aggregate(scored, n, k_multiplier=3):
    # independent sort-and-slice oracle
    ranked = [i for i, _ in sorted(scored, key=lambda kv: (-kv[1], kv[0]))]
    m, quota = len(ranked), k_multiplier * n
    if m >= 2 * quota:
        return set(ranked[:quota]), set(ranked[-quota:])
    top = math.ceil(m / 2)
    return set(ranked[:top]), set(ranked[top:])


def test_select_aggregate_matches_oracle_on_random_instances():
    rng = random.Random(11)
    for _ in range(200):
        m = rng.randint(2, 50)
        n = rng.randint(1, 8)
        scored = [(i, rng.choice([rng.uniform(-10, 10), float(rng.randint(-2, 2))]))
                  for i in range(m)]
        assert select_aggregate(scored, n) == _oracle_select_aggregate(scored, n)


def test_select_topk_bottomk_single_column():
    matrix = _matrix([[float(10 - i)] for i in range(10)])
    salient, non_salient = select_topk_bottomk(matrix, k=3)
    assert salient == {0, 1, 2}
    assert non_salient == {7, 8, 9}


def test_select_topk_bottomk_positives_win():
    # id 0: top of column 0, bottom of column 1
    matrix = _matrix([
        [9.0, 0.0],
        [8.0, 9.0],
        [7.0, 8.0],
        [1.0, 7.0],
        [0.5, 1.0],
        [0.2, 0.5],
    ])
    salient, non_salient = select_topk_bottomk(matrix, k=3)
    assert 0 in salient
    assert 0 not in non_salient
    assert not (salient & non_salient)


def test_select_topk_bottomk_overlapping_small_document():
    matrix = _matrix([[float(5 - i)] for i in range(5)])
    salient, non_salient = select_topk_bottomk(matrix, k=3)
    assert salient == {0, 1, 2}
    assert non_salient == {3, 4}
    assert len(salient | non_salient) <= 5


def test_select_random_negative_deterministic_and_disjoint():
    matrix = _matrix([[float(100 - i)] for i in range(100)])
    first = select_random_negative(matrix, k=3, seed=42)
    second = select_random_negative(matrix, k=3, seed=42)
    assert first == second
    salient, negatives = first
    assert len(negatives) == len(salient) == 3
    assert not (salient & negatives)


def test_select_random_negative_disjointness_over_many_seeds():
    matrix = _matrix([[float(100 - i)] for i in range(100)])
    for seed in range(1000):
        salient, negatives = select_random_negative(matrix, k=3, seed=seed)
        assert len(negatives) == 3
        assert not (salient & negatives)


def test_select_random_negative_exhausted_pool():
    matrix = _matrix([[float(3 - i)] for i in range(3)])
    salient, negatives = select_random_negative(matrix, k=3, seed=0)
    assert salient == {0, 1, 2}
    assert negatives == set()


def test_select_for_document_dispatches_all_strategies():
    matrix = _matrix([[float(30 - i)] for i in range(30)])
    for strategy in ("aggregate", "topk_bottomk", "random_negative"):
        config = SamplingConfig(strategy=strategy, seed=5)
        salient, non_salient = select_for_document(matrix, config)
        assert salient and not (salient & non_salient)


def test_sampling_config_validation():
    with pytest.raises(ValueError):
        SamplingConfig(strategy="bogus")
    with pytest.raises(ValueError):
        SamplingConfig(k_multiplier=0)
    with pytest.raises(ValueError):
        SamplingConfig(k=0)


def test_labeled_ids_subset_of_scored_ids():
    matrix = _matrix([[float(i)] for i in range(12)], skipped_source={0, 5})
    for strategy in ("aggregate", "topk_bottomk", "random_negative"):
        salient, non_salient = select_for_document(
            matrix, SamplingConfig(strategy=strategy, seed=1))
        assert (salient | non_salient) <= set(matrix.scored_source_ids())


def test_twenty_sentence_document_yields_twelve_examples():
    corpus = generate_corpus(num_docs=1, sentences_per_doc=20,
                             planted_per_doc=2, seed=0)
    pair = corpus.pairs[0]
    assert len(pair.summary) == 2
    matrix = score_matrix(pair, "bleu")
    splits = build_dataset([pair], {pair.doc_id: matrix},
                           SamplingConfig(strategy="aggregate"))
    total = sum(splits.counts().values())
    assert total == 12  # 6 salient + 6 non-salient for m=20, n=2


def test_build_dataset_split_sizes_and_determinism():
    corpus = generate_corpus(num_docs=10, seed=0)
    matrices = {p.doc_id: score_matrix(p, "bleu") for p in corpus.pairs}
    config = SamplingConfig(strategy="aggregate", seed=13)
    a = build_dataset(corpus.pairs, matrices, config)
    b = build_dataset(corpus.pairs, matrices, config)
    assert a.train == b.train and a.dev == b.dev and a.test == b.test
    total = sum(a.counts().values())
    assert a.counts()["train"] == int(total * SPLIT_FRACTIONS[0])
    assert a.counts()["dev"] == int(total * SPLIT_FRACTIONS[1])
    labels = {ex.label for ex in a.train}
    assert labels == {"salient", "non_salient"}


def test_build_dataset_missing_matrix_names_document():
    corpus = generate_corpus(num_docs=2, seed=0)
    matrices = {corpus.pairs[0].doc_id: score_matrix(corpus.pairs[0], "bleu")}
    with pytest.raises(ValueError, match=corpus.pairs[1].doc_id):
        build_dataset(corpus.pairs, matrices, SamplingConfig())


def test_dataset_round_trip(tmp_path):
    corpus = generate_corpus(num_docs=3, seed=1)
    matrices = {p.doc_id: score_matrix(p, "bleu") for p in corpus.pairs}
    splits = build_dataset(corpus.pairs, matrices, SamplingConfig(seed=2))
    path = tmp_path / "dataset.jsonl"
    write_dataset(splits, method="bleu", strategy="aggregate", path=path)
    again = read_dataset(path)
    assert again.counts() == splits.counts()
    assert again.train == splits.train


def test_example_identity_unique():
    corpus = generate_corpus(num_docs=5, seed=3)
    matrices = {p.doc_id: score_matrix(p, "bleu") for p in corpus.pairs}
    splits = build_dataset(corpus.pairs, matrices, SamplingConfig())
    seen = set()
    for split in (splits.train, splits.dev, splits.test):
        for ex in split:
            key = (ex.doc_id, ex.sent_id)
            assert key not in seen
            seen.add(key)
