"""Tests for the stage runner, configuration handling, artifact manifests,
caching, and the command-line front end."""

import json

import pytest
import yaml

from salientsum import cli
from salientsum.backends import UniformLikelihoodBackend
from salientsum.grounding import GroundingScoreMatrix
from salientsum.pipeline import (
    CACHE_ENV_VAR,
    CORE_STAGES,
    ConfigError,
    MissingArtifactError,
    PipelineConfig,
    matrix_from_record,
    matrix_to_record,
    run_all,
    run_stage,
)
from salientsum.synthetic import generate_corpus, write_raw_jsonl

CORE_ARTIFACTS = (
    "corpus.jsonl",
    "scores.jsonl",
    "dataset.jsonl",
    "model/manifest.json",
    "model/weights.json",
    "compressed.jsonl",
    "summaries.jsonl",
    "report.json",
    "report.txt",
)


@pytest.fixture(scope="module")
def raw_corpus_bytes(tmp_path_factory) -> bytes:
    path = tmp_path_factory.mktemp("corpus") / "raw.jsonl"
    write_raw_jsonl(generate_corpus(num_docs=8, sentences_per_doc=14,
                                    planted_per_doc=3, seed=0), path)
    return path.read_bytes()


def make_workspace(tmp_path, raw_corpus_bytes, config_data=None):
    (tmp_path / "raw.jsonl").write_bytes(raw_corpus_bytes)
    data = {
        "paths": {"raw_corpus": "raw.jsonl", "artifacts": "artifacts"},
        "grounding": {"method": "bleu"},
        "training": {"epochs": 3},
        "seed": 0,
    }
    for section, value in (config_data or {}).items():
        if isinstance(value, dict) and isinstance(data.get(section), dict):
            data[section].update(value)
        else:
            data[section] = value
    config_path = tmp_path / "config.yaml"
    config_path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return config_path


# --- configuration ------------------------------------------------------------


def test_config_from_yaml_resolves_paths_relative_to_config_file(tmp_path, raw_corpus_bytes):
    config_path = make_workspace(tmp_path, raw_corpus_bytes)
    config = PipelineConfig.from_yaml(config_path)
    assert config.raw_corpus == tmp_path / "raw.jsonl"
    assert config.artifacts == tmp_path / "artifacts"
    assert config.method == "bleu"
    assert config.training.epochs == 3


def test_config_rejects_unknown_sections(tmp_path, raw_corpus_bytes):
    config_path = make_workspace(tmp_path, raw_corpus_bytes,
                                 {"mystery": {"x": 1}})
    with pytest.raises(ConfigError, match="mystery"):
        PipelineConfig.from_yaml(config_path)


def test_config_requires_corpus_and_artifact_paths(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump({"paths": {"artifacts": "a"}}), encoding="utf-8")
    with pytest.raises(ConfigError, match="raw_corpus"):
        PipelineConfig.from_yaml(path)


def test_config_validates_method_threshold_and_roles(tmp_path, raw_corpus_bytes):
    for bad in ({"grounding": {"method": "rouge"}},
                {"threshold": 0.0},
                {"threshold": 1.5},
                {"backends": {"mystery_role": "bow"}},
                {"sampling": {"strategy": "nonsense"}},
                {"training": {"epochs": 0}}):
        config_path = make_workspace(tmp_path, raw_corpus_bytes, bad)
        with pytest.raises(ConfigError):
            PipelineConfig.from_yaml(config_path)


def test_config_missing_file_and_non_mapping_are_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        PipelineConfig.from_yaml(tmp_path / "absent.yaml")
    bad = tmp_path / "list.yaml"
    bad.write_text("- just\n- a list\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="mapping"):
        PipelineConfig.from_yaml(bad)


def test_config_accepts_cli_strategy_spellings(tmp_path, raw_corpus_bytes):
    for alias, canonical in (("topk", "topk_bottomk"),
                             ("randomneg", "random_negative"),
                             ("aggregate", "aggregate")):
        config_path = make_workspace(tmp_path, raw_corpus_bytes,
                                     {"sampling": {"strategy": alias}})
        assert PipelineConfig.from_yaml(config_path).sampling.strategy == canonical


def test_config_hash_ignores_paths_but_tracks_semantics(tmp_path, raw_corpus_bytes):
    dir_a, dir_b = tmp_path / "a", tmp_path / "b"
    dir_a.mkdir(), dir_b.mkdir()
    config_a = PipelineConfig.from_yaml(make_workspace(dir_a, raw_corpus_bytes))
    config_b = PipelineConfig.from_yaml(make_workspace(dir_b, raw_corpus_bytes))
    assert config_a.config_hash() == config_b.config_hash()

    dir_c = tmp_path / "c"
    dir_c.mkdir()
    changed = PipelineConfig.from_yaml(
        make_workspace(dir_c, raw_corpus_bytes, {"threshold": 0.6}))
    assert changed.config_hash() != config_a.config_hash()


def test_cache_dir_precedence(tmp_path, raw_corpus_bytes, monkeypatch):
    config_path = make_workspace(tmp_path, raw_corpus_bytes)
    config = PipelineConfig.from_yaml(config_path)
    monkeypatch.delenv(CACHE_ENV_VAR, raising=False)
    assert config.cache_dir() == config.artifacts / "cache"

    with_cache = PipelineConfig.from_yaml(make_workspace(
        tmp_path, raw_corpus_bytes, {"paths": {"cache": "mycache"}}))
    assert with_cache.cache_dir() == tmp_path / "mycache"

    monkeypatch.setenv(CACHE_ENV_VAR, str(tmp_path / "envcache"))
    assert with_cache.cache_dir() == tmp_path / "envcache"


# --- score matrix records -------------------------------------------------------


def test_matrix_record_round_trip():
    matrix = GroundingScoreMatrix(
        doc_id="d", method="bleu",
        scores=((0.5, 0.25), (0.0, -1.0)),
        skipped_source=frozenset({1}), skipped_summary=frozenset())
    assert matrix_from_record(matrix_to_record(matrix)) == matrix
    assert matrix_to_record(matrix) == json.loads(json.dumps(matrix_to_record(matrix)))


# --- stage runner ----------------------------------------------------------------


def test_run_all_produces_every_artifact(tmp_path, raw_corpus_bytes):
    config = PipelineConfig.from_yaml(make_workspace(tmp_path, raw_corpus_bytes))
    results = run_all(config)
    assert [r.stage for r in results] == list(CORE_STAGES)
    assert not any(r.skipped for r in results)
    for rel in CORE_ARTIFACTS:
        assert (config.artifacts / rel).exists(), rel
    report = json.loads((config.artifacts / "report.json").read_text())
    assert set(report) == {"extract+abstract", "textrank_extractor",
                           "random_extractor", "compression"}
    assert 0.0 <= report["compression"]["mean_ratio"] <= 1.0
    for stage in CORE_STAGES:
        manifest = json.loads(
            (config.artifacts / "manifests" / f"{stage}.json").read_text())
        assert manifest["config_hash"] == config.config_hash()
        assert manifest["stage"] == stage


def test_rerun_is_a_no_op_and_preserves_bytes(tmp_path, raw_corpus_bytes):
    config = PipelineConfig.from_yaml(make_workspace(tmp_path, raw_corpus_bytes))
    run_all(config)
    before = {rel: (config.artifacts / rel).read_bytes() for rel in CORE_ARTIFACTS}
    results = run_all(config)
    assert all(r.skipped for r in results)
    after = {rel: (config.artifacts / rel).read_bytes() for rel in CORE_ARTIFACTS}
    assert before == after


def test_stage_with_missing_upstream_names_the_producer(tmp_path, raw_corpus_bytes):
    config = PipelineConfig.from_yaml(make_workspace(tmp_path, raw_corpus_bytes))
    with pytest.raises(MissingArtifactError, match="run ingest first"):
        run_stage("score", config)
    run_stage("ingest", config)
    with pytest.raises(MissingArtifactError, match="run train first"):
        run_stage("compress", config)
    with pytest.raises(MissingArtifactError, match="run compress first"):
        run_stage("summarize", config)


def test_changed_config_against_existing_artifacts_requires_force(tmp_path, raw_corpus_bytes):
    config_path = make_workspace(tmp_path, raw_corpus_bytes)
    run_all(PipelineConfig.from_yaml(config_path))
    changed_path = make_workspace(tmp_path, raw_corpus_bytes, {"threshold": 0.7})
    changed = PipelineConfig.from_yaml(changed_path)
    with pytest.raises(ConfigError, match="different configuration"):
        run_stage("ingest", changed)
    result = run_stage("ingest", changed, force=True)
    assert not result.skipped


def test_cache_env_var_overrides_cache_location(tmp_path, raw_corpus_bytes, monkeypatch):
    env_cache = tmp_path / "shared-cache"
    monkeypatch.setenv(CACHE_ENV_VAR, str(env_cache))
    config = PipelineConfig.from_yaml(make_workspace(tmp_path, raw_corpus_bytes))
    run_stage("ingest", config)
    run_stage("score", config)
    assert (env_cache / "scores-bleu.jsonl").exists()
    assert not (config.artifacts / "cache").exists()


def test_warm_score_cache_makes_no_backend_calls(tmp_path, raw_corpus_bytes, monkeypatch):
    monkeypatch.delenv(CACHE_ENV_VAR, raising=False)
    config_path = make_workspace(tmp_path, raw_corpus_bytes,
                                 {"grounding": {"method": "perplexity"}})
    config = PipelineConfig.from_yaml(config_path)
    backend = UniformLikelihoodBackend()
    monkeypatch.setattr("salientsum.pipeline._build_likelihood",
                        lambda name: backend)
    run_stage("ingest", config)
    run_stage("score", config)
    assert backend.calls > 0
    scores_before = (config.artifacts / "scores.jsonl").read_bytes()

    # Drop the manifest so the stage body actually re-executes, then rerun
    # against the warm cache.
    (config.artifacts / "manifests" / "score.json").unlink()
    backend.calls = 0
    result = run_stage("score", config)
    assert not result.skipped
    assert backend.calls == 0
    assert (config.artifacts / "scores.jsonl").read_bytes() == scores_before


def test_parallel_scoring_matches_serial_output(tmp_path, raw_corpus_bytes):
    dir_serial, dir_parallel = tmp_path / "s", tmp_path / "p"
    dir_serial.mkdir(), dir_parallel.mkdir()
    config_s = PipelineConfig.from_yaml(make_workspace(dir_serial, raw_corpus_bytes))
    config_p = PipelineConfig.from_yaml(make_workspace(dir_parallel, raw_corpus_bytes))
    run_stage("ingest", config_s)
    run_stage("score", config_s, jobs=1)
    run_stage("ingest", config_p)
    run_stage("score", config_p, jobs=4)
    assert ((dir_serial / "artifacts" / "scores.jsonl").read_bytes()
            == (dir_parallel / "artifacts" / "scores.jsonl").read_bytes())


def test_run_stage_validates_stage_name_and_jobs(tmp_path, raw_corpus_bytes):
    config = PipelineConfig.from_yaml(make_workspace(tmp_path, raw_corpus_bytes))
    with pytest.raises(ConfigError, match="unknown stage"):
        run_stage("deploy", config)
    with pytest.raises(ConfigError, match="jobs"):
        run_stage("ingest", config, jobs=0)


def test_encoder_classifier_is_rejected_by_the_pipeline(tmp_path, raw_corpus_bytes):
    config_path = make_workspace(tmp_path, raw_corpus_bytes,
                                 {"backends": {"classifier": "encoder"}})
    config = PipelineConfig.from_yaml(config_path)
    run_stage("ingest", config)
    run_stage("score", config)
    run_stage("build-dataset", config)
    with pytest.raises(ConfigError, match="integration-only"):
        run_stage("train", config)


# --- nli-analyze stage -----------------------------------------------------------


def write_nli_pairs(path, per_class=6):
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(per_class):
            rows = [
                (f"the river rose {i} meters", f"the river rose {i}", "entailment"),
                (f"the river rose {i} meters", f"markets stayed flat {i}", "neutral"),
                (f"the river rose {i} meters", f"quartz granite {i}", "contradiction"),
            ]
            for premise, hypothesis, label in rows:
                fh.write(json.dumps({"premise": premise, "hypothesis": hypothesis,
                                     "label": label}) + "\n")


def test_nli_analyze_stage_writes_csv_and_stats(tmp_path, raw_corpus_bytes):
    write_nli_pairs(tmp_path / "nli.jsonl")
    config_path = make_workspace(
        tmp_path, raw_corpus_bytes,
        {"paths": {"nli_pairs": "nli.jsonl"},
         "backends": {"likelihood": "overlap"},
         "nli": {"sample_per_class": 4, "num_bins": 6}})
    config = PipelineConfig.from_yaml(config_path)
    result = run_stage("nli-analyze", config)
    assert not result.skipped
    csv_text = (config.artifacts / "nli_histogram.csv").read_text()
    assert csv_text.startswith("class,bin_low,bin_high,count\n")
    stats = json.loads((config.artifacts / "nli_stats.json").read_text())
    assert stats["counts"] == {"entailment": 4, "neutral": 4, "contradiction": 4}
    assert stats["medians"]["entailment"] < stats["medians"]["neutral"]
    assert stats["failures"] == {"entailment": 0, "neutral": 0, "contradiction": 0}


def test_nli_analyze_without_pairs_is_a_missing_artifact(tmp_path, raw_corpus_bytes):
    config = PipelineConfig.from_yaml(make_workspace(tmp_path, raw_corpus_bytes))
    with pytest.raises(MissingArtifactError, match="nli_pairs"):
        run_stage("nli-analyze", config)


# --- command line -----------------------------------------------------------------


def test_cli_runs_all_stages_and_reports_skips(tmp_path, raw_corpus_bytes, capsys):
    config_path = make_workspace(tmp_path, raw_corpus_bytes)
    assert cli.main(["all", "--config", str(config_path)]) == 0
    out = capsys.readouterr().out
    for stage in CORE_STAGES:
        assert f"[{stage}] done" in out
    assert "wrote" in out

    assert cli.main(["all", "--config", str(config_path)]) == 0
    rerun_out = capsys.readouterr().out
    for stage in CORE_STAGES:
        assert f"[{stage}] skipped (up to date)" in rerun_out


def test_cli_missing_upstream_exits_two(tmp_path, raw_corpus_bytes, capsys):
    config_path = make_workspace(tmp_path, raw_corpus_bytes)
    assert cli.main(["ingest", "--config", str(config_path)]) == 0
    capsys.readouterr()
    assert cli.main(["compress", "--config", str(config_path)]) == 2
    assert "run train first" in capsys.readouterr().err


def test_cli_config_problems_exit_three(tmp_path, raw_corpus_bytes, capsys):
    missing = tmp_path / "nope.yaml"
    assert cli.main(["all", "--config", str(missing)]) == 3

    config_path = make_workspace(tmp_path, raw_corpus_bytes)
    assert cli.main(["all", "--config", str(config_path)]) == 0
    capsys.readouterr()
    # Changing the method against existing artifacts is refused without --force.
    assert cli.main(["score", "--config", str(config_path),
                     "--method", "perplexity"]) == 3
    assert "different configuration" in capsys.readouterr().err
    assert cli.main(["score", "--config", str(config_path),
                     "--method", "perplexity", "--force"]) == 0


def test_cli_threshold_override_must_be_valid(tmp_path, raw_corpus_bytes, capsys):
    config_path = make_workspace(tmp_path, raw_corpus_bytes)
    assert cli.main(["ingest", "--config", str(config_path),
                     "--threshold", "2.0"]) == 3
    assert "threshold" in capsys.readouterr().err


def test_cli_seed_and_strategy_overrides_propagate(tmp_path, raw_corpus_bytes):
    config_path = make_workspace(tmp_path, raw_corpus_bytes)
    args = cli.build_parser().parse_args(
        ["all", "--config", str(config_path), "--seed", "7", "--strategy", "topk"])
    config = cli._apply_overrides(PipelineConfig.from_yaml(config_path), args)
    assert config.seed == 7
    assert config.sampling.seed == 7
    assert config.training.seed == 7
    assert config.sampling.strategy == "topk_bottomk"


def test_cli_rejects_unknown_stage(capsys):
    with pytest.raises(SystemExit):
        cli.main(["deploy", "--config", "x.yaml"])
