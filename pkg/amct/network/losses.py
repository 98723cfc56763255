"""
Training objectives.

total = sup(o) + sup(H^linear) + lambda_a * align + lambda_b * contrastive
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..autograd import Tensor, ops
from ..exceptions import EmptyBatch, NoLabels, ShapeMismatch
from ..models.motif import UNK_ID
from ..schemas.config import LossWeights, TaskKind
from ..schemas.report import LossSummary


def zero_loss() -> Tensor:
    return Tensor(0.0)


def align_loss(h_readouts: Tensor, z_readouts: Tensor, temperature: float) -> Tensor:
    """
    Temperature-softened KL between atom-view and motif-view readouts.

    (1/q) * sum_i T^2 * KL(softmax(h_i / T) || softmax(z_i / T)); gradients
    flow into both views.

    Args:
        h_readouts: (q, d) atom-level readouts
        z_readouts: (q, d) motif-level readouts
        temperature: Softening temperature T > 0

    Returns:
        Scalar tensor
    """
    if h_readouts.shape != z_readouts.shape or h_readouts.ndim != 2:
        raise ShapeMismatch(f"align_loss: {h_readouts.shape} vs {z_readouts.shape}")
    inverse = 1.0 / temperature
    atom_view = ops.row_softmax(ops.scale(h_readouts, inverse))
    motif_view = ops.row_softmax(ops.scale(z_readouts, inverse))
    divergence = ops.reduce_sum(ops.kl_divergence(atom_view, motif_view))
    return ops.scale(divergence, temperature * temperature / h_readouts.shape[0])


def motif_contrastive_loss(rows: Tensor, labels: np.ndarray, unknown_label: Optional[int] = UNK_ID) -> Tensor:
    """
    Supervised contrastive loss over motif rows labelled by vocabulary id.

    For anchor i: log sum_{k: y_k = y_i} exp<Z_i, Z_k> - log sum_j exp<Z_i, Z_j>,
    with self-pairs in both sums and unnormalized rows. Rows labelled
    `unknown_label` are not anchors but stay in every denominator. The loss is
    minus the mean over anchors; zero when there are none.

    Args:
        rows: (l, d) motif representations
        labels: (l,) integer labels
        unknown_label: Label excluded from anchoring, or None

    Raises:
        EmptyBatch: If l == 0
    """
    labels = np.asarray(labels)
    if rows.ndim != 2 or labels.shape != (rows.shape[0],):
        raise ShapeMismatch(f"motif_contrastive_loss: rows {rows.shape} vs labels {labels.shape}")
    if rows.shape[0] == 0:
        raise EmptyBatch("motif_contrastive_loss needs at least one motif row")

    anchors = np.ones(labels.shape, dtype=bool) if unknown_label is None else labels != unknown_label
    if not anchors.any():
        return zero_loss()

    similarity = ops.matmul(rows, ops.transpose(rows))
    same_label = labels[:, None] == labels[None, :]
    per_row = ops.sub(ops.logsumexp(similarity), ops.logsumexp(similarity, same_label))
    anchored = ops.reduce_sum(ops.elementwise_mul(per_row, anchors.astype(np.float64)))
    return ops.scale(anchored, 1.0 / int(anchors.sum()))


def select_contrast_rows(num_rows: int, max_rows: int, rng: np.random.Generator) -> np.ndarray:
    """All row indices, or a sorted uniform subsample of `max_rows` of them."""
    if num_rows <= max_rows:
        return np.arange(num_rows)
    return np.sort(rng.choice(num_rows, size=max_rows, replace=False))


def supervised_loss(predictions: Tensor, targets: np.ndarray, present: np.ndarray, task: TaskKind) -> Tensor:
    """
    Mean loss over present labels.

    Classification uses per-task binary cross-entropy on logits (sigmoid is
    folded into the loss); regression uses squared error.

    Args:
        predictions: (q, c) logits or regression outputs
        targets: (q, c) labels; ignored where not present
        present: (q, c) boolean label mask
        task: Task kind

    Raises:
        NoLabels: If no label is present
    """
    present = np.asarray(present, dtype=bool)
    if predictions.shape != present.shape:
        raise ShapeMismatch(f"supervised_loss: predictions {predictions.shape} vs mask {present.shape}")
    count = int(present.sum())
    if count == 0:
        raise NoLabels("no labels present in batch")
    filled = np.where(present, np.asarray(targets, dtype=np.float64), 0.0)
    if task == TaskKind.CLASSIFICATION:
        elementwise = ops.cross_entropy_with_logits(predictions, filled)
    else:
        elementwise = ops.squared_error(predictions, filled)
    masked = ops.reduce_sum(ops.elementwise_mul(elementwise, present.astype(np.float64)))
    return ops.scale(masked, 1.0 / count)


@dataclass
class LossReport:
    """Loss components of one batch; gradients flow through `total`."""

    sup_o: Tensor
    sup_h: Tensor
    align: Tensor
    contrastive: Tensor
    total: Tensor

    def summary(self) -> LossSummary:
        return LossSummary(
            sup_o=self.sup_o.item(),
            sup_h=self.sup_h.item(),
            align=self.align.item(),
            contrastive=self.contrastive.item(),
            total=self.total.item(),
        )


def total_loss(sup_o: Tensor, sup_h: Tensor, align: Tensor, contrastive: Tensor, weights: LossWeights) -> LossReport:
    """
    Weighted sum, accumulated as ((sup_o + sup_h) + lambda_a*align) + lambda_b*contrastive.

    Raises:
        NonFinite: If any component or the total is not finite
    """
    total = ops.add(sup_o, sup_h)
    total = ops.add(total, ops.scale(align, weights.lambda_a))
    total = ops.add(total, ops.scale(contrastive, weights.lambda_b))
    return LossReport(sup_o=sup_o, sup_h=sup_h, align=align, contrastive=contrastive, total=total)
