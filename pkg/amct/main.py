"""
Command-line entry point: `python -m amct <command> ...`.

Commands: build-vocab, train, eval, explain, sweep, synthetic, check.
Exit codes: 0 ok, 1 internal error, 2 input error, 3 vocabulary mismatch,
4 diverged loss.
"""

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import structlog

from . import __version__
from .config import get_settings, resolve_run_config
from .exceptions import AmctError, ConfigError
from .logging_setup import configure_logging
from .models.dataset import MoleculeDataset
from .models.motif import MotifVocabulary
from .repositories.base import BaseRepository
from .repositories.checkpoint_repository import CheckpointRepository
from .repositories.log_repository import TrainingLogRepository
from .repositories.manifest_repository import ManifestRepository
from .repositories.report_repository import EXPLANATION_COLUMNS, SWEEP_COLUMNS, ReportRepository
from .repositories.vocabulary_repository import VocabularyRepository
from .schemas.checkpoint import CheckpointHeader
from .schemas.config import Ablation, PredictionSource, RunConfig, SweepGrid, TaskKind
from .schemas.report import ExplanationReport, RunManifest
from .services.artifact_checker import ArtifactKind, check
from .services.dataset_service import DatasetService, split_dataset
from .services.evaluation_service import evaluate
from .services.explanation_service import ExplanationService
from .services.smiles import ParseLimits
from .services.synthetic import write_planted_benchmark
from .services.training_service import run_repeated, sweep
from .services.vocabulary_service import vocabulary_from_motif_sets

logger = structlog.get_logger(__name__)

SPLITS = ("all", "train", "valid", "test")


def _dataset_service() -> DatasetService:
    return DatasetService(limits=ParseLimits(max_atoms=get_settings().max_atoms))


def _load_dataset(path: Path, task: Optional[TaskKind] = None) -> MoleculeDataset:
    return _dataset_service().load(path, task)


def _manifest(
    command: str,
    outputs: Dict[str, Path],
    config: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
    dataset: Optional[MoleculeDataset] = None,
    vocabulary: Optional[MotifVocabulary] = None,
) -> RunManifest:
    return RunManifest(
        command=command,
        config=config or {},
        dataset_hash=dataset.source_hash if dataset is not None else None,
        vocabulary_hash=vocabulary.content_hash() if vocabulary is not None else None,
        code_version=__version__,
        seed=seed,
        outputs={name: str(path) for name, path in outputs.items()},
        created_at=datetime.now(timezone.utc),
    )


def _print_json(payload: Any) -> None:
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _check_tasks(dataset: MoleculeDataset, header: CheckpointHeader) -> None:
    if dataset.num_tasks != header.network.num_tasks:
        raise ConfigError(
            f"dataset has {dataset.num_tasks} label columns, checkpoint predicts {header.network.num_tasks}"
        )


def _run_config(args: argparse.Namespace) -> RunConfig:
    """Resolve the run config from file, environment and flags, and log where each value came from."""
    overrides = {
        "train.seed": args.seed,
        "train.epochs": args.epochs,
        "train.runs": args.runs,
        "train.batch_size": args.batch_size,
        "train.learning_rate": args.lr,
        "train.lambda_a": args.lambda_a,
        "train.lambda_b": args.lambda_b,
        "train.temperature": args.temperature,
        "train.task": args.task,
        "train.predict_from": args.predict_from,
    }
    config, sources = resolve_run_config(args.config, overrides)
    ablations = [Ablation(name) for name in args.ablate or []]
    if ablations:
        config = config.model_copy(update={"train": config.train.with_ablations(ablations)})
        sources.update({f"train.ablate.{a.value}": "cli" for a in ablations})
    logger.info("run_config", config=config.model_dump(mode="json"), sources=sources)
    return config


# Commands


def cmd_build_vocab(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args.data)
    vocabulary = vocabulary_from_motif_sets(record.motif_set for record in dataset)
    VocabularyRepository().save(vocabulary, args.out)
    ManifestRepository().save_for(
        args.out, _manifest("build-vocab", {"vocabulary": args.out}, dataset=dataset, vocabulary=vocabulary)
    )
    sys.stdout.write(f"motifs: {len(vocabulary)}\n")
    for key, count in vocabulary.top_k(args.top_k):
        sys.stdout.write(f"{count}\t{vocabulary.lookup(key)}\t{key}\n")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    run_config = _run_config(args)
    vocabulary = VocabularyRepository().load(args.vocab)
    dataset = _load_dataset(args.data, run_config.train.task)
    valid = _load_dataset(args.valid_data, run_config.train.task) if args.valid_data else None
    log_path = args.log or args.out.with_name(args.out.name + ".log.jsonl")

    manifest = _manifest(
        "train",
        {"checkpoint": args.out, "log": log_path},
        config=run_config.model_dump(mode="json"),
        seed=run_config.train.seed,
        dataset=dataset,
        vocabulary=vocabulary,
    )
    log_repository = TrainingLogRepository(log_path)
    log_repository.reset()
    result = run_repeated(
        dataset, vocabulary, run_config, valid=valid, log_repository=log_repository, run_id=manifest.run_id
    )
    first = result.runs[0]
    CheckpointRepository().save(
        args.out,
        first.model,
        vocabulary.content_hash(),
        run_id=manifest.run_id,
        seed=first.seed,
        train_config=run_config.train,
    )
    ManifestRepository().save_for(args.out, manifest)
    if result.report is not None:
        _print_json(result.report.model_dump(mode="json"))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    vocabulary = VocabularyRepository().load(args.vocab)
    model, header = CheckpointRepository().load(args.ckpt, vocabulary.content_hash())
    train_config = header.train
    if args.task:
        task = TaskKind(args.task)
    else:
        task = train_config.task if train_config else TaskKind.CLASSIFICATION
    if args.predict_from:
        source = PredictionSource(args.predict_from)
    else:
        source = train_config.effective_prediction_source if train_config else PredictionSource.DECODER
    dataset = _load_dataset(args.data, task)
    _check_tasks(dataset, header)
    if args.split != "all":
        if train_config is None:
            raise ConfigError("checkpoint has no stored split settings; use --split all")
        dataset = split_dataset(dataset, train_config).by_name(args.split)
    workers = args.workers or get_settings().eval_workers
    report = evaluate(model, dataset, vocabulary, task, source, workers=workers)
    _print_json(report.model_dump(mode="json"))
    return 0


def cmd_explain(args: argparse.Namespace) -> int:
    alpha = get_settings().default_alpha if args.alpha is None else args.alpha
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"--alpha must lie in [0, 1], got {alpha}")
    vocabulary = VocabularyRepository().load(args.vocab)
    model, header = CheckpointRepository().load(args.ckpt, vocabulary.content_hash())
    dataset = _load_dataset(args.data)
    _check_tasks(dataset, header)

    outputs = {"report": args.out}
    if args.csv:
        outputs["csv"] = args.csv
    if args.embeddings_out:
        outputs["embeddings"] = args.embeddings_out
    manifest = _manifest(
        "explain", outputs, config={"alpha": alpha, "checkpoint_run_id": header.run_id},
        seed=header.seed, dataset=dataset, vocabulary=vocabulary,
    )

    service = ExplanationService(model, vocabulary)
    report = service.explain_dataset(dataset, alpha, run_id=manifest.run_id)
    BaseRepository(ExplanationReport).write(args.out, report)
    reports = ReportRepository()
    if args.csv:
        reports.write_rows(args.csv, service.csv_rows(report), EXPLANATION_COLUMNS)
    if args.embeddings_out:
        reports.write_frame(args.embeddings_out, service.motif_embeddings(dataset))
    ManifestRepository().save_for(args.out, manifest)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    run_config = _run_config(args)
    grid = BaseRepository(SweepGrid).read(args.grid)
    vocabulary = VocabularyRepository().load(args.vocab)
    dataset = _load_dataset(args.data, run_config.train.task)
    valid = _load_dataset(args.valid_data, run_config.train.task) if args.valid_data else None
    rows = sweep(grid, dataset, vocabulary, run_config, valid=valid)
    ReportRepository().write_rows(args.out, rows, SWEEP_COLUMNS)
    config = run_config.model_dump(mode="json")
    config["grid"] = grid.model_dump(mode="json")
    ManifestRepository().save_for(
        args.out,
        _manifest("sweep", {"sweep": args.out}, config=config, seed=run_config.train.seed,
                  dataset=dataset, vocabulary=vocabulary),
    )
    return 0


def cmd_synthetic(args: argparse.Namespace) -> int:
    paths = write_planted_benchmark(args.out, args.num_train, args.num_test, args.seed)
    ManifestRepository().save_for(
        Path(args.out) / "synthetic",
        _manifest(
            "synthetic", paths,
            config={"num_train": args.num_train, "num_test": args.num_test},
            seed=args.seed,
        ),
    )
    for name, path in paths.items():
        sys.stdout.write(f"{name}\t{path}\n")
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    result = check(ArtifactKind(args.kind), args.path)
    sys.stdout.write(f"ok\t{result.kind.value}\t{result.path}\t{result.items}\n")
    return 0


# Parser


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    """Flags shared by train and sweep; each overrides the config file."""
    parser.add_argument("--data", type=Path, required=True, help="Dataset CSV (smiles + label columns)")
    parser.add_argument("--vocab", type=Path, required=True, help="Vocabulary JSON from build-vocab")
    parser.add_argument("--config", type=Path, help='JSON run config {"model": {...}, "train": {...}}')
    parser.add_argument("--valid-data", type=Path, help="Separate validation CSV; disables the random split")
    parser.add_argument("--seed", type=int, help="Base seed (overrides AMCT_SEED and the config file)")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--runs", type=int, help="Independent runs; reports mean and std of the test metric")
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--lr", type=float, help="Adam learning rate")
    parser.add_argument("--lambda-a", type=float, help="Alignment loss weight")
    parser.add_argument("--lambda-b", type=float, help="Contrastive loss weight")
    parser.add_argument("--temperature", type=float, help="Alignment softening temperature")
    parser.add_argument("--task", choices=[t.value for t in TaskKind])
    parser.add_argument("--predict-from", choices=[p.value for p in PredictionSource])
    parser.add_argument("--ablate", action="append", choices=[a.value for a in Ablation],
                        help="Ablation to apply; may be repeated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amct",
        description="Atom-motif contrastive transformer for molecular property prediction.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="Log level (default: AMCT_LOG_LEVEL or INFO)")
    parser.add_argument("--log-json", action="store_true", help="Render logs as JSON lines on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    vocab = commands.add_parser("build-vocab", help="Build the motif vocabulary of a dataset")
    vocab.add_argument("--data", type=Path, required=True)
    vocab.add_argument("--out", type=Path, required=True, help="Vocabulary JSON to write")
    vocab.add_argument("--top-k", type=int, default=10, help="Most frequent motifs to print")
    vocab.set_defaults(handler=cmd_build_vocab)

    train = commands.add_parser("train", help="Train a model and write a checkpoint")
    _add_run_flags(train)
    train.add_argument("--out", type=Path, required=True, help="Checkpoint file to write")
    train.add_argument("--log", type=Path, help="JSON-lines epoch log (default: <out>.log.jsonl)")
    train.set_defaults(handler=cmd_train)

    evaluate_cmd = commands.add_parser("eval", help="Evaluate a checkpoint on a dataset")
    evaluate_cmd.add_argument("--ckpt", type=Path, required=True)
    evaluate_cmd.add_argument("--data", type=Path, required=True)
    evaluate_cmd.add_argument("--vocab", type=Path, required=True)
    evaluate_cmd.add_argument("--split", choices=SPLITS, default="all",
                              help="Re-create a split from the checkpoint's seed and fractions")
    evaluate_cmd.add_argument("--task", choices=[t.value for t in TaskKind])
    evaluate_cmd.add_argument("--predict-from", choices=[p.value for p in PredictionSource])
    evaluate_cmd.add_argument("--workers", type=int, help="Evaluation threads (default: AMCT_EVAL_WORKERS)")
    evaluate_cmd.set_defaults(handler=cmd_eval)

    explain = commands.add_parser("explain", help="Motif-level explanations from cross-attention")
    explain.add_argument("--ckpt", type=Path, required=True)
    explain.add_argument("--data", type=Path, required=True)
    explain.add_argument("--vocab", type=Path, required=True)
    explain.add_argument("--alpha", type=float, help="Selection threshold on normalized weights (default 0.5)")
    explain.add_argument("--out", type=Path, required=True, help="Explanation report JSON")
    explain.add_argument("--csv", type=Path, help="Plot-ready (molecule_id, property, motif_id, weight) CSV")
    explain.add_argument("--embeddings-out", type=Path, help="Final motif representations CSV")
    explain.set_defaults(handler=cmd_explain)

    sweep_cmd = commands.add_parser("sweep", help="Loss-weight sensitivity sweep")
    _add_run_flags(sweep_cmd)
    sweep_cmd.add_argument("--grid", type=Path, required=True, help='JSON {"lambda_a": [...], "lambda_b": [...]}')
    sweep_cmd.add_argument("--out", type=Path, required=True, help="Sweep CSV to write")
    sweep_cmd.set_defaults(handler=cmd_sweep)

    synthetic = commands.add_parser("synthetic", help="Write the planted-motif benchmark CSVs")
    synthetic.add_argument("--out", type=Path, required=True, help="Output directory")
    synthetic.add_argument("--seed", type=int, default=0)
    synthetic.add_argument("--num-train", type=int, default=64)
    synthetic.add_argument("--num-test", type=int, default=32)
    synthetic.set_defaults(handler=cmd_synthetic)

    check_cmd = commands.add_parser("check", help="Validate an artifact against its schema")
    check_cmd.add_argument("--kind", choices=[k.value for k in ArtifactKind], required=True)
    check_cmd.add_argument("path", type=Path)
    check_cmd.set_defaults(handler=cmd_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one command and map errors to exit codes.

    Returns:
        int: Process exit code
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    configure_logging(args.log_level or settings.log_level, args.log_json or settings.log_json)
    try:
        return args.handler(args)
    except AmctError as e:
        logger.error("command_failed", command=args.command, error=type(e).__name__, exit_code=e.exit_code)
        sys.stderr.write(f"error: {type(e).__name__}: {e.message}\n")
        return e.exit_code
    except Exception as e:
        logger.exception("command_crashed", command=args.command)
        sys.stderr.write(f"error: internal: {e}\n")
        return 1


def run(argv: Optional[List[str]] = None) -> None:
    sys.exit(main(argv))
