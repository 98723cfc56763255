"""
Atom-motif contrastive transformer.

Atoms and motifs are embedded with additive degree-centrality encodings and
run through separate encoders; a property-aware decoder uses learned property
embeddings as queries over the motif rows. The atom readout feeds a linear
head (H^linear), the decoder feeds a per-property output head (o).
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..autograd import Tensor, ops
from ..exceptions import ShapeMismatch
from ..models.batch import Batch
from ..models.molecule import DEFAULT_SCHEMA, AtomFeatureSchema
from ..schemas.config import ModelConfig, PredictionSource
from .layers import DecoderLayer, Encoder, Linear
from .module import Module, ModuleList, init_embedding


@dataclass
class ForwardOutput:
    """
    Everything one forward pass produces for a batch of q molecules.

    Attributes:
        atom_states: Final atom rows (q, n, d)
        h_readout: Atom-level readout (q, d)
        motif_states: Final motif rows Z (q, m, d)
        z_readout: Motif-level readout (q, d)
        readout_logits: H^linear (q, c)
        decoder_logits: o (q, c); None when the decoder was skipped
        cross_attention: A (q, c, m), final decoder layer averaged over heads
        atom_attention: Per-layer atom encoder weights (q, h, n, n)
        motif_attention: Per-layer motif encoder weights (q, h, m, m)
    """

    atom_states: Tensor
    h_readout: Tensor
    motif_states: Tensor
    z_readout: Tensor
    readout_logits: Tensor
    decoder_logits: Optional[Tensor] = None
    cross_attention: Optional[np.ndarray] = None
    atom_attention: List[np.ndarray] = field(default_factory=list)
    motif_attention: List[np.ndarray] = field(default_factory=list)

    def predictions(self, source: PredictionSource) -> Tensor:
        if source == PredictionSource.DECODER and self.decoder_logits is not None:
            return self.decoder_logits
        return self.readout_logits


class AmctModel(Module):
    """
    The full network. Parameters are created in a fixed order from
    `np.random.default_rng(seed)`, so a (config, seed) pair always yields the
    same initial weights.
    """

    def __init__(self, config: ModelConfig, seed: int = 0, schema: AtomFeatureSchema = DEFAULT_SCHEMA):
        super().__init__()
        object.__setattr__(self, "config", config)
        object.__setattr__(self, "schema", schema)
        init_seed, dropout_seed = np.random.SeedSequence(seed).spawn(2)
        rng = np.random.default_rng(init_seed)
        dropout_rng = np.random.default_rng(dropout_seed)
        width = config.d_model

        for name, rows in zip(schema.category_names, schema.cardinalities):
            setattr(self, f"atom_{name}_table", init_embedding(rng, rows, width, f"atom_{name}_table"))
        self.atom_degree_table = init_embedding(rng, config.max_atom_degree + 1, width, "atom_degree_table")
        self.motif_table = init_embedding(rng, config.vocab_size + 1, width, "motif_table")
        self.motif_degree_table = init_embedding(rng, config.max_motif_degree + 1, width, "motif_degree_table")
        self.property_embeddings = init_embedding(rng, config.num_tasks, width, "property_embeddings")

        layer_args = (width, config.num_heads, config.ffn_multiplier, config.dropout_rate, rng, dropout_rng)
        self.atom_encoder = Encoder(config.num_encoder_layers, *layer_args)
        self.motif_encoder = Encoder(config.num_encoder_layers, *layer_args)
        self.decoder = ModuleList([DecoderLayer(*layer_args) for _ in range(config.num_decoder_layers)])
        self.readout_head = Linear(width, config.num_tasks, rng)
        self.output_head = Linear(width, 1, rng)

    def __repr__(self) -> str:
        return f"<AmctModel(d={self.config.d_model}, heads={self.config.num_heads}, params={self.num_parameters()})>"

    def embed_atoms(self, features: np.ndarray, degrees: np.ndarray) -> Tensor:
        """
        H0 = sum of per-category feature embeddings + degree embedding.

        Args:
            features: (..., n, 5) integer feature indices
            degrees: (..., n) integer degrees, clamped to max_atom_degree

        Raises:
            IndexOutOfRange: If a feature index exceeds its table
        """
        features = np.asarray(features)
        if features.shape[-1] != len(self.schema.category_names):
            raise ShapeMismatch(f"expected {len(self.schema.category_names)} feature columns, got {features.shape}")
        clamped = np.clip(np.asarray(degrees, dtype=np.int64), 0, self.config.max_atom_degree)
        total = ops.embedding_lookup(self.atom_degree_table, clamped)
        for column, name in enumerate(self.schema.category_names):
            table = getattr(self, f"atom_{name}_table")
            total = ops.add(ops.embedding_lookup(table, features[..., column]), total)
        return total

    def embed_motifs(self, motif_ids: np.ndarray, degrees: np.ndarray) -> Tensor:
        """Z0 = motif vocabulary embedding + motif degree embedding."""
        clamped = np.clip(np.asarray(degrees, dtype=np.int64), 0, self.config.max_motif_degree)
        return ops.add(
            ops.embedding_lookup(self.motif_table, np.asarray(motif_ids)),
            ops.embedding_lookup(self.motif_degree_table, clamped),
        )

    def encode_atoms(self, h0: Tensor, mask: np.ndarray):
        return self.atom_encoder(h0, mask)

    def encode_motifs(self, z0: Tensor, mask: np.ndarray):
        return self.motif_encoder(z0, mask)

    def decode_properties(self, motif_states: Tensor, motif_mask: np.ndarray):
        """
        Property-aware decoding.

        Returns:
            o (..., c), A (..., c, m) as numpy, final-layer cross weights (..., h, c, m)

        Raises:
            MaskAllFalse: If a molecule has no unmasked motif
        """
        leading = motif_states.shape[:-2]
        properties = ops.broadcast_to(self.property_embeddings, leading + self.property_embeddings.shape)
        cross_weights = None
        for layer in self.decoder:
            properties, cross_weights = layer(properties, motif_states, motif_mask)
        logits = ops.reshape(self.output_head(properties), leading + (self.config.num_tasks,))
        return logits, cross_weights.mean(axis=-3), cross_weights

    def forward(self, batch: Batch, use_decoder: bool = True) -> ForwardOutput:
        h0 = self.embed_atoms(batch.atom_features, batch.atom_degrees)
        atom_states, h_readout, atom_attention = self.encode_atoms(h0, batch.atom_mask)
        z0 = self.embed_motifs(batch.motif_ids, batch.motif_degrees)
        motif_states, z_readout, motif_attention = self.encode_motifs(z0, batch.motif_mask)
        output = ForwardOutput(
            atom_states=atom_states,
            h_readout=h_readout,
            motif_states=motif_states,
            z_readout=z_readout,
            readout_logits=self.readout_head(h_readout),
            atom_attention=atom_attention,
            motif_attention=motif_attention,
        )
        if use_decoder:
            output.decoder_logits, output.cross_attention, _ = self.decode_properties(motif_states, batch.motif_mask)
        return output

    __call__ = forward

    def parameter_names(self) -> Sequence[str]:
        return [name for name, _ in self.named_parameters()]
