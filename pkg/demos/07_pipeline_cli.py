"""Drive the staged pipeline through its command-line interface.

Builds a small synthetic workspace in a temporary directory, writes a
YAML config, runs all core stages twice (the second run is a cached
no-op), and shows the dependency and exit-code behavior.

    python3 demos/07_pipeline_cli.py
"""

import tempfile
from pathlib import Path

import yaml

from salientsum import cli
from salientsum.synthetic import generate_corpus, write_raw_jsonl


def run(argv: list[str]) -> None:
    print(f"\n$ pipeline {' '.join(argv)}")
    code = cli.main(argv)
    print(f"(exit code {code})")


def main() -> None:
    workspace = Path(tempfile.mkdtemp(prefix="pipeline-demo-"))
    print(f"workspace: {workspace}")

    raw = workspace / "raw.jsonl"
    write_raw_jsonl(generate_corpus(num_docs=10, sentences_per_doc=16,
                                    planted_per_doc=3, seed=0), raw)
    config_path = workspace / "config.yaml"
    config_path.write_text(yaml.safe_dump({
        "paths": {"raw_corpus": "raw.jsonl", "artifacts": "artifacts"},
        "grounding": {"method": "bleu"},
        "sampling": {"strategy": "aggregate"},
        "training": {"epochs": 4},
        "threshold": 0.5,
        "seed": 0,
    }), encoding="utf-8")
    config = str(config_path)

    # Dependency checking: compress needs a trained model.
    run(["compress", "--config", config])

    # The full run, then an idempotent rerun.
    run(["all", "--config", config])
    run(["all", "--config", config])

    # Changing the configuration against existing artifacts is refused
    # without --force.
    run(["score", "--config", config, "--method", "perplexity"])

    print("\nreport table:")
    print((workspace / "artifacts" / "report.txt").read_text())


if __name__ == "__main__":
    main()
