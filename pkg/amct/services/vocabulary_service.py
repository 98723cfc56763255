"""
Corpus motif vocabulary construction.
"""

from typing import Iterable

import structlog

from ..exceptions import EmptyCorpus
from ..models.molecule import MolecularGraph
from ..models.motif import MotifSet, MotifVocabulary
from .decomposition import decompose

logger = structlog.get_logger(__name__)


def vocabulary_from_motif_sets(motif_sets: Iterable[MotifSet]) -> MotifVocabulary:
    """
    Fold already-decomposed molecules into a vocabulary, ids in first-seen order.

    Raises:
        EmptyCorpus: If no molecule is supplied
    """
    vocabulary = MotifVocabulary()
    molecules = 0
    for motif_set in motif_sets:
        molecules += 1
        for key in motif_set.keys:
            vocabulary.insert(key)
    if molecules == 0:
        raise EmptyCorpus("cannot build a motif vocabulary from an empty corpus")
    logger.info("vocabulary_built", molecules=molecules, motifs=len(vocabulary))
    return vocabulary


def build_vocabulary(corpus: Iterable[MolecularGraph]) -> MotifVocabulary:
    """
    Decompose every molecule and collect the distinct canonical motif keys.

    Args:
        corpus: Molecular graphs

    Returns:
        MotifVocabulary with per-key occurrence counts

    Raises:
        EmptyCorpus: If the corpus is empty
    """
    return vocabulary_from_motif_sets(decompose(graph) for graph in corpus)
