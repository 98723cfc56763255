"""
Evaluation: batched prediction and AUC / RMSE metrics.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np
import structlog
from scipy.stats import rankdata

from ..autograd import no_grad
from ..exceptions import EmptyDataset, NoLabels, SingleClass
from ..models.dataset import MoleculeDataset
from ..models.motif import MotifVocabulary
from ..network.amct_model import AmctModel
from ..schemas.config import PredictionSource, TaskKind
from ..schemas.report import EvalReport, MetricKind
from .batching import collate

logger = structlog.get_logger(__name__)


def roc_auc(labels: np.ndarray, scores: np.ndarray) -> float:
    """
    Area under the ROC curve via the rank-sum statistic; tied scores get midranks.

    Args:
        labels: 0/1 targets
        scores: Real-valued scores, higher means more positive

    Raises:
        SingleClass: If only one class is present
    """
    labels = np.asarray(labels, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    positives = labels == 1.0
    n_pos = int(positives.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both classes present")
    ranks = rankdata(scores, method="average")
    return float((ranks[positives].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def rmse(targets: np.ndarray, predictions: np.ndarray) -> float:
    targets = np.asarray(targets, dtype=np.float64)
    predictions = np.asarray(predictions, dtype=np.float64)
    if targets.size == 0:
        raise NoLabels("RMSE needs at least one label")
    return float(np.sqrt(np.mean((targets - predictions) ** 2)))


def _predict_chunk(
    model: AmctModel,
    dataset: MoleculeDataset,
    indices: Sequence[int],
    vocabulary: MotifVocabulary,
    source: PredictionSource,
) -> np.ndarray:
    batch = collate([dataset[i] for i in indices], vocabulary)
    with no_grad():
        output = model.forward(batch, use_decoder=source == PredictionSource.DECODER)
    return output.predictions(source).numpy()


def predict(
    model: AmctModel,
    dataset: MoleculeDataset,
    vocabulary: MotifVocabulary,
    source: PredictionSource = PredictionSource.DECODER,
    batch_size: int = 64,
    workers: int = 1,
) -> np.ndarray:
    """
    Raw model outputs (logits for classification) for every molecule, in dataset order.

    Batches are formed in dataset order, so results do not depend on the
    number of worker threads.

    Raises:
        EmptyDataset: If the dataset is empty
    """
    if len(dataset) == 0:
        raise EmptyDataset(f"dataset '{dataset.name}' has no molecules")
    model.eval()
    chunks = [list(range(start, min(start + batch_size, len(dataset)))) for start in range(0, len(dataset), batch_size)]
    if workers <= 1:
        outputs = [_predict_chunk(model, dataset, chunk, vocabulary, source) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(lambda chunk: _predict_chunk(model, dataset, chunk, vocabulary, source), chunks))
    return np.concatenate(outputs, axis=0)


def score_predictions(labels: np.ndarray, outputs: np.ndarray, task: TaskKind) -> EvalReport:
    """
    Per-task metric over present labels, averaged over scorable tasks.

    Classification tasks with a single class present are skipped and listed
    in `skipped_tasks`; so are tasks with no labels at all.

    Raises:
        SingleClass: If no classification task can be scored
        NoLabels: If no regression task has labels
    """
    metric = MetricKind.AUC if task == TaskKind.CLASSIFICATION else MetricKind.RMSE
    per_task: List[Optional[float]] = []
    skipped: List[int] = []
    for column in range(labels.shape[1]):
        present = ~np.isnan(labels[:, column])
        targets, values = labels[present, column], outputs[present, column]
        try:
            if metric == MetricKind.AUC:
                per_task.append(roc_auc(targets, values))
            else:
                per_task.append(rmse(targets, values))
        except (SingleClass, NoLabels):
            per_task.append(None)
            skipped.append(column)
    scored = [value for value in per_task if value is not None]
    if not scored:
        if metric == MetricKind.AUC:
            raise SingleClass("no task has both classes present")
        raise NoLabels("no task has labels")
    if skipped:
        logger.warning("tasks_skipped", tasks=skipped, metric=metric.value)
    return EvalReport(metric=metric, per_task=per_task, skipped_tasks=skipped, mean=float(np.mean(scored)))


def evaluate(
    model: AmctModel,
    dataset: MoleculeDataset,
    vocabulary: MotifVocabulary,
    task: TaskKind,
    source: PredictionSource = PredictionSource.DECODER,
    batch_size: int = 64,
    workers: int = 1,
) -> EvalReport:
    """
    Predict and score one dataset.

    Returns:
        EvalReport with AUC (classification) or RMSE (regression)
    """
    outputs = predict(model, dataset, vocabulary, source, batch_size, workers)
    return score_predictions(dataset.label_matrix(), outputs, task)


def aggregate_runs(reports: Sequence[EvalReport]) -> EvalReport:
    """
    Mean and population standard deviation of run means; per-task values are
    averaged over the runs that scored them.
    """
    if not reports:
        raise ValueError("no reports to aggregate")
    means = np.asarray([report.mean for report in reports])
    per_task: List[Optional[float]] = []
    for column in range(len(reports[0].per_task)):
        values = [report.per_task[column] for report in reports if report.per_task[column] is not None]
        per_task.append(float(np.mean(values)) if values else None)
    skipped = sorted({task for report in reports for task in report.skipped_tasks})
    return EvalReport(
        metric=reports[0].metric,
        per_task=per_task,
        skipped_tasks=skipped,
        mean=float(means.mean()),
        std=float(means.std()),
        runs=len(reports),
    )
