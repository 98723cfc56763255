"""
Training service: loss computation, Adam updates, epoch loop, repeated runs
and loss-weight sweeps.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np
import structlog
from pydantic import ValidationError

from ..autograd import ops
from ..exceptions import ConfigError, DivergedLoss, NoLabels, NonFinite, SingleClass
from ..models.batch import Batch
from ..models.dataset import MoleculeDataset
from ..models.motif import UNK_ID, MotifVocabulary
from ..network.amct_model import AmctModel
from ..network.losses import (
    LossReport,
    align_loss,
    motif_contrastive_loss,
    select_contrast_rows,
    supervised_loss,
    total_loss,
    zero_loss,
)
from ..network.optim import Adam, clip_grad_norm
from ..repositories.log_repository import TrainingLogRepository
from ..schemas.config import ModelConfig, RunConfig, SweepGrid, TrainConfig
from ..schemas.report import EpochLogRecord, EvalReport, LossSummary, SweepRow
from ..utils.hashing import derive_seed
from .batching import make_batches
from .dataset_service import DatasetSplits, split_dataset
from .evaluation_service import aggregate_runs, evaluate

logger = structlog.get_logger(__name__)


def run_seed(base_seed: int, run_index: int) -> int:
    """Run 0 uses the configured seed; later runs derive theirs from it."""
    return base_seed if run_index == 0 else derive_seed(base_seed, "run", run_index)


def sized_model_config(model_config: ModelConfig, vocabulary: MotifVocabulary, num_tasks: int) -> ModelConfig:
    """
    Model config with table sizes taken from the vocabulary and dataset.

    Raises:
        ConfigError: If the sized config is invalid, e.g. a dataset with no task columns
    """
    try:
        return ModelConfig.model_validate({
            **model_config.model_dump(),
            "vocab_size": len(vocabulary),
            "num_tasks": num_tasks,
        })
    except ValidationError as e:
        raise ConfigError(f"model config does not fit the data: {e}") from e


def mean_summary(summaries: List[LossSummary]) -> LossSummary:
    return LossSummary(**{
        name: float(np.mean([getattr(summary, name) for summary in summaries]))
        for name in LossSummary.model_fields
    })


class TrainingService:
    """
    Service for optimizing one model.
    """

    def __init__(
        self,
        model: AmctModel,
        config: TrainConfig,
        vocabulary: MotifVocabulary,
        log_repository: Optional[TrainingLogRepository] = None,
        run_id: str = "",
        seed: Optional[int] = None,
        run_index: int = 0,
    ):
        self.model = model
        self.config = config
        self.vocabulary = vocabulary
        self.log_repository = log_repository
        self.run_id = run_id
        self.run_index = run_index
        self.seed = config.seed if seed is None else seed
        self.weights = config.loss_weights()
        self.optimizer = Adam(
            model.parameters(),
            learning_rate=config.learning_rate,
            beta1=config.beta1,
            beta2=config.beta2,
            eps=config.eps,
            weight_decay=config.weight_decay,
        )
        self.contrast_rng = np.random.default_rng(derive_seed(self.seed, "contrast"))

    def _contrastive(self, motif_states, batch: Batch):
        q, m, width = motif_states.shape
        flat = ops.reshape(motif_states, (q * m, width))
        positions = np.flatnonzero(batch.motif_mask.reshape(-1))
        chosen = positions[select_contrast_rows(len(positions), self.config.max_contrast, self.contrast_rng)]
        rows = ops.embedding_lookup(flat, chosen)
        return motif_contrastive_loss(rows, batch.motif_ids.reshape(-1)[chosen], unknown_label=UNK_ID)

    def compute_losses(self, batch: Batch) -> LossReport:
        """
        Forward one batch and assemble the weighted objective.

        Components whose weight is zero, and sup_o under no_paware, are
        reported as exact zeros and are not computed.
        """
        use_decoder = not self.config.no_paware
        output = self.model.forward(batch, use_decoder=use_decoder)
        task = self.config.task
        sup_h = supervised_loss(output.readout_logits, batch.labels, batch.label_mask, task)
        if use_decoder:
            sup_o = supervised_loss(output.decoder_logits, batch.labels, batch.label_mask, task)
        else:
            sup_o = zero_loss()
        if self.weights.lambda_a > 0:
            align = align_loss(output.h_readout, output.z_readout, self.weights.temperature)
        else:
            align = zero_loss()
        contrastive = self._contrastive(output.motif_states, batch) if self.weights.lambda_b > 0 else zero_loss()
        return total_loss(sup_o, sup_h, align, contrastive, self.weights)

    def train_step(self, batch: Batch) -> LossSummary:
        """
        One Adam update.

        Raises:
            DivergedLoss: If any loss value is non-finite
        """
        self.model.train()
        self.optimizer.zero_grad()
        try:
            report = self.compute_losses(batch)
        except NonFinite as e:
            raise DivergedLoss(f"loss diverged: {e.message}") from e
        report.total.backward()
        clip_grad_norm(self.optimizer.parameters, self.config.grad_clip)
        self.optimizer.step()
        return report.summary()

    def train_epoch(self, batches: Iterable[Batch]) -> LossSummary:
        """Train on every batch; returns the per-batch mean of each component."""
        summaries = []
        for batch in batches:
            try:
                summaries.append(self.train_step(batch))
            except NoLabels:
                logger.warning("batch_skipped", reason="no labels present", molecules=batch.size)
        if not summaries:
            raise NoLabels("no batch in the epoch had labels")
        return mean_summary(summaries)

    def validation_metric(self, valid: Optional[MoleculeDataset]) -> Optional[float]:
        if valid is None or len(valid) == 0:
            return None
        try:
            return evaluate(
                self.model, valid, self.vocabulary, self.config.task, self.config.effective_prediction_source
            ).mean
        except (SingleClass, NoLabels):
            return None

    def fit(self, train: MoleculeDataset, valid: Optional[MoleculeDataset] = None) -> List[EpochLogRecord]:
        """
        Train for `config.epochs` epochs with a seeded shuffle per epoch.

        Returns:
            One log record per epoch (also appended to the log repository)
        """
        history = []
        for epoch in range(1, self.config.epochs + 1):
            batches = make_batches(
                train, self.vocabulary, self.config.batch_size, seed=derive_seed(self.seed, "epoch", epoch)
            )
            summary = self.train_epoch(batches)
            record = EpochLogRecord(
                run_id=self.run_id,
                run=self.run_index,
                epoch=epoch,
                eval_metric=self.validation_metric(valid),
                **summary.model_dump(),
            )
            history.append(record)
            if self.log_repository is not None:
                self.log_repository.append(record)
            logger.info("epoch_completed", epoch=epoch, total=summary.total, eval_metric=record.eval_metric)
        return history


@dataclass
class TrainingResult:
    model: AmctModel
    seed: int
    history: List[EpochLogRecord]
    splits: DatasetSplits
    test_report: Optional[EvalReport] = None


@dataclass
class RepeatedRunResult:
    runs: List[TrainingResult]
    report: Optional[EvalReport] = None
    reports: List[EvalReport] = field(default_factory=list)


def held_out(splits: DatasetSplits) -> Optional[MoleculeDataset]:
    """Test split if non-empty, else validation, else None."""
    for dataset in (splits.test, splits.valid):
        if len(dataset):
            return dataset
    return None


def run_training(
    dataset: MoleculeDataset,
    vocabulary: MotifVocabulary,
    run_config: RunConfig,
    seed: Optional[int] = None,
    valid: Optional[MoleculeDataset] = None,
    log_repository: Optional[TrainingLogRepository] = None,
    run_id: str = "",
    run_index: int = 0,
) -> TrainingResult:
    """
    Build a fresh model, split (unless `valid` is given) and train it.

    With an explicit `valid` dataset the whole of `dataset` is used for
    training and no test split is made.
    """
    train_config = run_config.train
    seed = train_config.seed if seed is None else seed
    if valid is None:
        splits = split_dataset(dataset, train_config)
    else:
        empty = dataset.subset([], f"{dataset.name}-test")
        splits = DatasetSplits(train=dataset, valid=valid, test=empty)

    model = AmctModel(sized_model_config(run_config.model, vocabulary, dataset.num_tasks), seed=seed)
    service = TrainingService(model, train_config, vocabulary, log_repository, run_id=run_id, seed=seed,
                              run_index=run_index)
    logger.info("training_started", seed=seed, train=len(splits.train), valid=len(splits.valid),
                test=len(splits.test), parameters=model.num_parameters())
    history = service.fit(splits.train, splits.valid)

    test_report = None
    if len(splits.test):
        try:
            test_report = evaluate(model, splits.test, vocabulary, train_config.task,
                                   train_config.effective_prediction_source)
        except (SingleClass, NoLabels) as e:
            logger.warning("test_evaluation_skipped", reason=e.message)
    return TrainingResult(model=model, seed=seed, history=history, splits=splits, test_report=test_report)


def run_repeated(
    dataset: MoleculeDataset,
    vocabulary: MotifVocabulary,
    run_config: RunConfig,
    valid: Optional[MoleculeDataset] = None,
    log_repository: Optional[TrainingLogRepository] = None,
    run_id: str = "",
    seed: Optional[int] = None,
) -> RepeatedRunResult:
    """
    Train `train.runs` independent models and aggregate their held-out metric.

    Model seeds derive from `seed` (default: the configured seed); the split
    always uses the configured seed so every run sees the same held-out set.
    """
    base_seed = run_config.train.seed if seed is None else seed
    results = []
    reports = []
    for index in range(run_config.train.runs):
        result = run_training(
            dataset, vocabulary, run_config,
            seed=run_seed(base_seed, index),
            valid=valid,
            log_repository=log_repository,
            run_id=run_id,
            run_index=index,
        )
        results.append(result)
        report = result.test_report
        if report is None:
            evaluation_set = valid if valid is not None else held_out(result.splits)
            if evaluation_set is not None:
                try:
                    report = evaluate(result.model, evaluation_set, vocabulary, run_config.train.task,
                                      run_config.train.effective_prediction_source)
                except (SingleClass, NoLabels):
                    report = None
        if report is not None:
            reports.append(report)
    return RepeatedRunResult(runs=results, report=aggregate_runs(reports) if reports else None, reports=reports)


def cell_seed_for(base_seed: int, lambda_a: float, lambda_b: float) -> int:
    return derive_seed(base_seed, "sweep", float(lambda_a), float(lambda_b))


def sweep(
    grid: SweepGrid,
    dataset: MoleculeDataset,
    vocabulary: MotifVocabulary,
    run_config: RunConfig,
    valid: Optional[MoleculeDataset] = None,
) -> List[SweepRow]:
    """
    One repeated train/evaluate per (lambda_a, lambda_b) cell.

    Each cell's model seed is derived from the base seed and the cell's
    weight values, so results do not depend on grid order. All cells share
    the split made with the base seed.

    Raises:
        SingleClass: If a cell produces no scorable held-out metric
    """
    rows = []
    for lambda_a in grid.lambda_a:
        for lambda_b in grid.lambda_b:
            cell_train = run_config.train.model_copy(update={"lambda_a": lambda_a, "lambda_b": lambda_b})
            cell_config = run_config.model_copy(update={"train": cell_train})
            cell_seed = cell_seed_for(run_config.train.seed, lambda_a, lambda_b)
            result = run_repeated(dataset, vocabulary, cell_config, valid=valid, seed=cell_seed)
            if result.report is None:
                raise SingleClass(f"cell lambda_a={lambda_a}, lambda_b={lambda_b} has no held-out metric")
            rows.append(SweepRow(
                lambda_a=lambda_a,
                lambda_b=lambda_b,
                metric_mean=result.report.mean,
                metric_std=result.report.std,
            ))
            logger.info("sweep_cell_completed", lambda_a=lambda_a, lambda_b=lambda_b, metric=result.report.mean)
    return rows
