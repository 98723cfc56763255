"""
Atom-Motif Contrastive Transformer toolkit.

Molecular property prediction from SMILES: graph ingestion, motif tree
decomposition, dual atom/motif transformer encoders trained with alignment and
contrastive losses, and a property-aware cross-attention decoder whose weights
explain predictions at motif level.
"""

__version__ = "1.0.0"
__author__ = "AMCT Toolkit Team"
