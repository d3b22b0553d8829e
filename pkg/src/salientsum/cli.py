"""Command-line front end for the artifact pipeline.

Usage::

    pipeline <stage> --config config.yaml [--force] [--jobs N]
             [--threshold X] [--method M] [--strategy S] [--seed N]

Stages: ingest, score, build-dataset, train, compress, summarize,
evaluate, nli-analyze, or ``all`` for the seven core stages in order.
Exit codes: 0 success, 2 missing upstream artifact, 3 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .grounding import METHODS
from .pipeline import (
    CORE_STAGES,
    STAGES,
    STRATEGY_ALIASES,
    ConfigError,
    MissingArtifactError,
    PipelineConfig,
    PipelineError,
    run_stage,
)

EXIT_OK = 0
EXIT_MISSING_ARTIFACT = 2
EXIT_CONFIG_ERROR = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pipeline",
        description="Run summarization pipeline stages with cached artifacts.",
    )
    parser.add_argument("stage", choices=(*STAGES, "all"),
                        help="pipeline stage to run ('all' runs the core stages)")
    parser.add_argument("--config", required=True, metavar="FILE",
                        help="YAML configuration file")
    parser.add_argument("--force", action="store_true",
                        help="rerun even when artifacts are up to date or were "
                             "built by a different configuration")
    parser.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="parallel workers within a stage (default 1)")
    parser.add_argument("--threshold", type=float, metavar="X",
                        help="override the classifier keep threshold")
    parser.add_argument("--method", choices=METHODS,
                        help="override the grounding method")
    parser.add_argument("--strategy", choices=sorted(STRATEGY_ALIASES),
                        help="override the sampling strategy")
    parser.add_argument("--seed", type=int, metavar="N",
                        help="override every seed in the configuration")
    return parser


def _apply_overrides(config: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    changes: dict = {}
    if args.threshold is not None:
        changes["threshold"] = args.threshold
    if args.method is not None:
        changes["method"] = args.method
    sampling = config.sampling
    if args.strategy is not None:
        sampling = dataclasses.replace(sampling,
                                       strategy=STRATEGY_ALIASES[args.strategy])
    if args.seed is not None:
        changes["seed"] = args.seed
        sampling = dataclasses.replace(sampling, seed=args.seed)
        changes["training"] = dataclasses.replace(config.training, seed=args.seed)
    if sampling is not config.sampling:
        changes["sampling"] = sampling
    if not changes:
        return config
    try:
        return dataclasses.replace(config, **changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _apply_overrides(PipelineConfig.from_yaml(args.config), args)
        stages = CORE_STAGES if args.stage == "all" else (args.stage,)
        for stage in stages:
            result = run_stage(stage, config, force=args.force, jobs=args.jobs)
            status = "skipped (up to date)" if result.skipped else "done"
            print(f"[{result.stage}] {status}")
            for message in result.messages:
                if not result.skipped:
                    print(f"  {message}")
            for output in result.outputs:
                print(f"  wrote {output}")
    except MissingArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_ARTIFACT
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
