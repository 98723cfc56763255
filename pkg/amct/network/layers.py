"""
Transformer building blocks: linear maps, layer norm, feed-forward,
multi-head attention, and post-norm encoder/decoder layers.

All blocks accept inputs with arbitrary leading batch axes; the last two axes
are (rows, features).
"""

from typing import List, Optional, Tuple

import numpy as np

from ..autograd import Tensor, ops
from .module import Module, ModuleList, constant_parameter, init_parameter


class Linear(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator, bias: bool = True):
        super().__init__()
        self.weight = init_parameter(rng, (in_features, out_features), "weight")
        self.bias = constant_parameter((out_features,), 0.0, "bias") if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        out = ops.matmul(x, self.weight)
        return ops.add(out, self.bias) if self.bias is not None else out


class LayerNorm(Module):
    def __init__(self, width: int, eps: float = 1e-5):
        super().__init__()
        self.gain = constant_parameter((width,), 1.0, "gain")
        self.shift = constant_parameter((width,), 0.0, "shift")
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x, self.gain, self.shift, self.eps)


class FeedForward(Module):
    """Position-wise d -> d*multiplier -> relu -> d."""

    def __init__(self, width: int, multiplier: int, rng: np.random.Generator):
        super().__init__()
        self.expand = Linear(width, width * multiplier, rng)
        self.project = Linear(width * multiplier, width, rng)

    def __call__(self, x: Tensor) -> Tensor:
        return self.project(ops.relu(self.expand(x)))


class MultiHeadAttention(Module):
    """
    Scaled dot-product attention with per-head projections.

    Head i uses query/key/value projections W^Q_i, W^K_i, W^V_i of shape
    (d, d_k), stored stacked along a leading head axis. The output projection
    W^O is stored as (h, d_k, d) so that summing per-head products over the
    head axis equals concatenating the heads and multiplying by W^O.
    """

    def __init__(self, width: int, num_heads: int, rng: np.random.Generator):
        super().__init__()
        if width % num_heads:
            raise ValueError(f"width {width} not divisible by {num_heads} heads")
        self.num_heads = num_heads
        self.head_width = width // num_heads
        self.w_query = init_parameter(rng, (num_heads, width, self.head_width), "w_query")
        self.w_key = init_parameter(rng, (num_heads, width, self.head_width), "w_key")
        self.w_value = init_parameter(rng, (num_heads, width, self.head_width), "w_value")
        self.w_output = init_parameter(rng, (num_heads, self.head_width, width), "w_output")

    def __call__(
        self,
        query: Tensor,
        key_value: Tensor,
        key_mask: Optional[np.ndarray] = None,
    ) -> Tuple[Tensor, np.ndarray]:
        """
        Args:
            query: (..., nq, d)
            key_value: (..., nk, d)
            key_mask: Boolean (..., nk); False keys get zero attention

        Returns:
            Output (..., nq, d) and attention weights (..., h, nq, nk)
        """
        q_rows = ops.reshape(query, query.shape[:-2] + (1,) + query.shape[-2:])
        kv_rows = ops.reshape(key_value, key_value.shape[:-2] + (1,) + key_value.shape[-2:])
        queries = ops.matmul(q_rows, self.w_query)
        keys = ops.matmul(kv_rows, self.w_key)
        values = ops.matmul(kv_rows, self.w_value)

        scores = ops.scale(ops.matmul(queries, ops.transpose(keys)), 1.0 / np.sqrt(self.head_width))
        if key_mask is None:
            weights = ops.row_softmax(scores)
        else:
            mask = np.asarray(key_mask, dtype=bool)
            weights = ops.masked_row_softmax(scores, mask.reshape(mask.shape[:-1] + (1, 1) + mask.shape[-1:]))

        heads = ops.matmul(weights, values)
        out = ops.reduce_sum(ops.matmul(heads, self.w_output), axis=-3)
        return out, weights.data


class EncoderLayer(Module):
    """Post-norm layer: x = LN(x + MHA(x)); x = LN(x + FFN(x))."""

    def __init__(
        self,
        width: int,
        num_heads: int,
        ffn_multiplier: int,
        dropout_rate: float,
        rng: np.random.Generator,
        dropout_rng: np.random.Generator,
    ):
        super().__init__()
        self.attention = MultiHeadAttention(width, num_heads, rng)
        self.attention_norm = LayerNorm(width)
        self.ffn = FeedForward(width, ffn_multiplier, rng)
        self.ffn_norm = LayerNorm(width)
        self.dropout_rate = dropout_rate
        self.dropout_rng = dropout_rng

    def _drop(self, x: Tensor) -> Tensor:
        return ops.dropout(x, self.dropout_rate, self.dropout_rng, self.training)

    def __call__(self, x: Tensor, mask: np.ndarray) -> Tuple[Tensor, np.ndarray]:
        attended, weights = self.attention(x, x, mask)
        x = self.attention_norm(ops.add(x, self._drop(attended)))
        x = self.ffn_norm(ops.add(x, self._drop(self.ffn(x))))
        return x, weights


class DecoderLayer(Module):
    """
    Property-aware layer: self-attention over property rows, then masked
    cross-attention with property rows as queries and motif rows as keys and
    values, then FFN; each sublayer followed by add & norm.
    """

    def __init__(
        self,
        width: int,
        num_heads: int,
        ffn_multiplier: int,
        dropout_rate: float,
        rng: np.random.Generator,
        dropout_rng: np.random.Generator,
    ):
        super().__init__()
        self.self_attention = MultiHeadAttention(width, num_heads, rng)
        self.self_norm = LayerNorm(width)
        self.cross_attention = MultiHeadAttention(width, num_heads, rng)
        self.cross_norm = LayerNorm(width)
        self.ffn = FeedForward(width, ffn_multiplier, rng)
        self.ffn_norm = LayerNorm(width)
        self.dropout_rate = dropout_rate
        self.dropout_rng = dropout_rng

    def _drop(self, x: Tensor) -> Tensor:
        return ops.dropout(x, self.dropout_rate, self.dropout_rng, self.training)

    def __call__(self, properties: Tensor, motifs: Tensor, motif_mask: np.ndarray) -> Tuple[Tensor, np.ndarray]:
        attended, _ = self.self_attention(properties, properties)
        properties = self.self_norm(ops.add(properties, self._drop(attended)))
        crossed, cross_weights = self.cross_attention(properties, motifs, motif_mask)
        properties = self.cross_norm(ops.add(properties, self._drop(crossed)))
        properties = self.ffn_norm(ops.add(properties, self._drop(self.ffn(properties))))
        return properties, cross_weights


class Encoder(Module):
    """N encoder layers followed by a masked sum readout."""

    def __init__(
        self,
        num_layers: int,
        width: int,
        num_heads: int,
        ffn_multiplier: int,
        dropout_rate: float,
        rng: np.random.Generator,
        dropout_rng: np.random.Generator,
    ):
        super().__init__()
        self.layers = ModuleList([
            EncoderLayer(width, num_heads, ffn_multiplier, dropout_rate, rng, dropout_rng)
            for _ in range(num_layers)
        ])

    def __call__(self, x: Tensor, mask: np.ndarray) -> Tuple[Tensor, Tensor, List[np.ndarray]]:
        """
        Returns:
            Final rows, masked row-sum readout, per-layer attention weights
        """
        weights = []
        for layer in self.layers:
            x, layer_weights = layer(x, mask)
            weights.append(layer_weights)
        return x, ops.masked_row_sum(x, mask), weights
