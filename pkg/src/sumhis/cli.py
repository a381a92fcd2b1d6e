"""Command-line entry point: ``sumhis <command> [options]``.

Every pipeline setting is available as a long flag (``--top-k``,
``--cluster-learning-rate``...). ``--config FILE`` reads ``key = value`` lines
first; flags given explicitly win over the file.

On failure the last line on stderr is ``sumhis: error: <category>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import pipeline
from .config import PipelineConfig, parse_config_file, setting_names, setting_type
from .errors import SumhisError

log = logging.getLogger("sumhis")

_HELP = {
    "top_k": "sentences taken from the ranking before filtering",
    "threshold": "minimum leading-cluster weight a sentence must exceed",
    "rouge_variants": "comma-separated ROUGE variants to report (1, 2, L)",
    "seed": "master seed; every stage derives its own sub-seed from it",
    "embed": "embedding source: hashed:<dim>:<seed> or vectors:<path>",
    "rank_loss": "triplet_nll or binary_ce",
    "cluster_init": "random or kmeans",
    "oracle_mode": "exhaustive, greedy or auto",
}


def _settings_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("pipeline settings")
    group.add_argument("--config", metavar="FILE", help="read 'key = value' settings from FILE")
    defaults = PipelineConfig()
    for name in setting_names():
        kind = {"int": int, "float": float}.get(setting_type(name), str)
        group.add_argument(
            "--" + name.replace("_", "-"), dest=name, type=kind, default=None,
            help=f"{_HELP.get(name, name.replace('_', ' '))} (default: {getattr(defaults, name)})",
        )
    return parent


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig()
    if args.config:
        cfg = cfg.update(**parse_config_file(args.config))
    return cfg.update(**{name: getattr(args, name) for name in setting_names()})


def build_parser() -> argparse.ArgumentParser:
    settings = _settings_parser()
    parser = argparse.ArgumentParser(prog="sumhis", description="Extractive summarization with hidden structure filtering.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", parents=[settings], help="turn gold summaries into extractive labels")
    p.add_argument("corpus")
    p.add_argument("labels_out")

    p = sub.add_parser("train-rank", parents=[settings], help="train the sentence ranking projection")
    p.add_argument("corpus")
    p.add_argument("labels")
    p.add_argument("model_out")

    p = sub.add_parser("train-cluster", parents=[settings], help="train the cluster matrix on sentence vectors")
    p.add_argument("corpus")
    p.add_argument("model_out")

    p = sub.add_parser("summarize", parents=[settings], help="write extractive summaries")
    p.add_argument("corpus")
    p.add_argument("rank_model")
    p.add_argument("summaries_out")
    p.add_argument("--cluster-model", help="filter with this cluster model (omit for no filtering)")

    p = sub.add_parser("evaluate", parents=[settings], help="corpus-mean ROUGE of summaries against gold")
    p.add_argument("summaries")
    p.add_argument("gold")
    p.add_argument("--report", help="also write the report as JSON here")

    p = sub.add_parser("sweep-threshold", parents=[settings], help="TPR/FPR of the filter over thresholds")
    p.add_argument("corpus")
    p.add_argument("labels")
    p.add_argument("rank_model")
    p.add_argument("cluster_model")
    p.add_argument("--thresholds", help="comma-separated list (default: 0 to 0.9, includes 0.25)")
    p.add_argument("--out", help="CSV output path (default: stdout)")

    p = sub.add_parser("analyze-distances", parents=[settings], help="histograms of text/sentence distances")
    p.add_argument("corpus")
    p.add_argument("labels")
    p.add_argument("rank_model")
    p.add_argument("out")

    p = sub.add_parser("aspects", parents=[settings], help="nearest vocabulary words for each cluster")
    p.add_argument("cluster_model")
    p.add_argument("vectors")
    p.add_argument("--top-m", type=int, default=7)

    p = sub.add_parser("make-fixture", help="write the synthetic fixture corpus")
    p.add_argument("out")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--fixture-seed", type=int, default=7)
    return parser


def _thresholds(text: str | None):
    if not text:
        return pipeline.DEFAULT_THRESHOLDS
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise SumhisError(f"bad threshold list {text!r}") from None


def run(args: argparse.Namespace) -> None:
    if args.command == "make-fixture":
        from .fixture import write_fixture

        write_fixture(args.out, args.count, args.fixture_seed)
        return
    cfg = resolve_config(args)
    if args.command == "oracle":
        stats = pipeline.cmd_oracle(args.corpus, args.labels_out, cfg)
        print(f"labelled {stats.labelled}, skipped {len(stats.skipped)}, failed {len(stats.failed)}")
    elif args.command == "train-rank":
        model = pipeline.cmd_train_rank(args.corpus, args.labels, args.model_out, cfg)
        for epoch, loss in enumerate(model.history, start=1):
            print(f"epoch {epoch}: mean loss {loss:.6f}")
    elif args.command == "train-cluster":
        model = pipeline.cmd_train_cluster(args.corpus, args.model_out, cfg)
        for epoch, loss in enumerate(model.history, start=1):
            print(f"epoch {epoch}: mean loss {loss:.6f}")
    elif args.command == "summarize":
        records = pipeline.cmd_summarize(args.corpus, args.rank_model, args.cluster_model, args.summaries_out, cfg)
        flagged = sum(r.fallback for r in records)
        print(f"summarized {len(records)} documents" + (f", {flagged} by top-1 fallback" if flagged else ""))
    elif args.command == "evaluate":
        report = pipeline.cmd_evaluate(args.summaries, args.gold, cfg.variants, args.report, cfg.as_dict())
        print(report.table())
        print(f"documents {report.documents}, skipped {report.skipped}, missing {len(report.missing)}")
    elif args.command == "sweep-threshold":
        rows = pipeline.cmd_sweep_threshold(args.corpus, args.labels, args.rank_model, args.cluster_model,
                                            _thresholds(args.thresholds), args.out, cfg)
        if args.out is None:
            print("threshold,tpr,fpr")
            for r in rows:
                print(f"{r.threshold!r},{r.tpr!r},{r.fpr!r}")
    elif args.command == "analyze-distances":
        series = pipeline.cmd_analyze_distances(args.corpus, args.labels, args.rank_model, args.out, cfg)
        for name, values in series.items():
            print(f"{name}: n={len(values)} mean={values.mean():.4f}")
    elif args.command == "aspects":
        for line in pipeline.cmd_aspects(args.cluster_model, args.vectors, args.top_m):
            print(line)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run(args)
    except SumhisError as exc:
        msg = " ".join(str(exc).split())
        print(f"sumhis: error: {exc.category}: {msg}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"sumhis: error: io: {' '.join(str(exc).split())}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
