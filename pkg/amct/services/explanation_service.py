"""
Motif-level explanations from property-aware cross-attention, and motif
representation export.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
import structlog

from ..autograd import no_grad
from ..models.dataset import MoleculeDataset
from ..models.motif import UNK_ID, MotifVocabulary
from ..network.amct_model import AmctModel
from ..schemas.report import (
    ExplanationCsvRow,
    ExplanationReport,
    MoleculeExplanation,
    MotifAttribution,
    PropertyExplanation,
)
from .batching import collate

logger = structlog.get_logger(__name__)

DEGENERATE_SPREAD = 1e-12


@dataclass(frozen=True)
class SelectedMotif:
    motif_index: int
    weight: float


def normalize_row(row: np.ndarray) -> Tuple[np.ndarray, bool]:
    """
    Min-max normalize one attention row to [0, 1].

    A constant row (spread <= DEGENERATE_SPREAD) maps to all ones and is
    flagged degenerate.

    Returns:
        Tuple of normalized weights and the degeneracy flag
    """
    row = np.asarray(row, dtype=np.float64)
    spread = float(row.max() - row.min()) if row.size else 0.0
    if spread <= DEGENERATE_SPREAD:
        return np.ones_like(row), True
    return (row - row.min()) / spread, False


def explain(attention: np.ndarray, alpha: float) -> List[Tuple[List[SelectedMotif], bool]]:
    """
    Per property row: motifs whose normalized weight is at least `alpha`,
    sorted by weight descending (ties by motif index), and the row's
    degeneracy flag.

    Args:
        attention: (c, m) cross-attention over the molecule's real motifs
        alpha: Threshold in [0, 1]
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    results = []
    for row in np.asarray(attention, dtype=np.float64):
        weights, degenerate = normalize_row(row)
        order = sorted(range(len(weights)), key=lambda i: (-weights[i], i))
        selected = [SelectedMotif(i, float(weights[i])) for i in order if weights[i] >= alpha]
        results.append((selected, degenerate))
    return results


class ExplanationService:
    """
    Service producing explanation reports for a trained model.
    """

    def __init__(self, model: AmctModel, vocabulary: MotifVocabulary, batch_size: int = 32):
        self.model = model
        self.vocabulary = vocabulary
        self.batch_size = batch_size

    def _attention(self, dataset: MoleculeDataset) -> List[np.ndarray]:
        """(c, m_i) head-averaged final-layer cross-attention per molecule."""
        self.model.eval()
        maps = []
        for start in range(0, len(dataset), self.batch_size):
            records = dataset.records[start:start + self.batch_size]
            batch = collate(records, self.vocabulary)
            with no_grad():
                output = self.model.forward(batch, use_decoder=True)
            for row, record in enumerate(records):
                maps.append(output.cross_attention[row, :, :record.num_motifs])
        return maps

    def explain_dataset(self, dataset: MoleculeDataset, alpha: float, run_id: str = "") -> ExplanationReport:
        """
        Rank every motif of every molecule for every property.

        All motifs are listed (sorted by normalized weight, descending) with
        `selected` set where the weight reaches `alpha`.
        """
        molecules = []
        for record, attention in zip(dataset.records, self._attention(dataset)):
            properties = []
            ranked_rows = explain(attention, 0.0)
            selected_rows = explain(attention, alpha)
            for property_index, ((ranked, degenerate), (selected, _)) in enumerate(zip(ranked_rows, selected_rows)):
                chosen = {entry.motif_index for entry in selected}
                motifs = []
                for entry in ranked:
                    motif = record.motif_set.motifs[entry.motif_index]
                    model_id = self.vocabulary.model_id(motif.canonical_key)
                    motifs.append(MotifAttribution(
                        motif_index=entry.motif_index,
                        motif_id=None if model_id == UNK_ID else model_id - 1,
                        canonical_key=motif.canonical_key,
                        atom_indices=list(motif.sorted_atoms),
                        weight=entry.weight,
                        selected=entry.motif_index in chosen,
                    ))
                properties.append(PropertyExplanation(
                    property=dataset.task_names[property_index],
                    property_index=property_index,
                    degenerate=degenerate,
                    motifs=motifs,
                ))
            molecules.append(MoleculeExplanation(
                molecule_id=record.molecule_id,
                smiles=record.smiles,
                properties=properties,
            ))
        logger.info("explanations_built", molecules=len(molecules), alpha=alpha)
        return ExplanationReport(run_id=run_id, alpha=alpha, molecules=molecules)

    @staticmethod
    def csv_rows(report: ExplanationReport) -> List[ExplanationCsvRow]:
        """Plot-ready rows (molecule_id, property, motif_id, weight) for every listed motif."""
        return [
            ExplanationCsvRow(
                molecule_id=molecule.molecule_id,
                property=prop.property,
                motif_id=motif.motif_id,
                weight=motif.weight,
            )
            for molecule in report.molecules
            for prop in molecule.properties
            for motif in prop.motifs
        ]

    def motif_embeddings(self, dataset: MoleculeDataset) -> pd.DataFrame:
        """
        Final motif-encoder rows of every real motif, one row per motif.

        Columns: molecule_id, motif_index, motif_id (empty for UNK),
        canonical_key, z0..z{d-1}.
        """
        self.model.eval()
        width = self.model.config.d_model
        rows = []
        for start in range(0, len(dataset), self.batch_size):
            records = dataset.records[start:start + self.batch_size]
            batch = collate(records, self.vocabulary)
            with no_grad():
                output = self.model.forward(batch, use_decoder=False)
            states = output.motif_states.numpy()
            for row, record in enumerate(records):
                for motif_index, motif in enumerate(record.motif_set.motifs):
                    vocab_id: Optional[int] = self.vocabulary.lookup(motif.canonical_key)
                    rows.append(
                        [record.molecule_id, motif_index, vocab_id, motif.canonical_key]
                        + states[row, motif_index].tolist()
                    )
        frame = pd.DataFrame(
            rows, columns=["molecule_id", "motif_index", "motif_id", "canonical_key"] + [f"z{i}" for i in range(width)]
        )
        frame["motif_id"] = frame["motif_id"].astype("Int64")
        return frame
