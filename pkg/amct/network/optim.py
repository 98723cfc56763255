"""
Adam with decoupled weight decay, and global-norm gradient clipping.
"""

from typing import List, Sequence

import numpy as np

from ..autograd import Tensor


def clip_grad_norm(parameters: Sequence[Tensor], max_norm: float) -> float:
    """
    Rescale gradients in place so their global L2 norm is at most `max_norm`.

    Returns:
        The norm before clipping
    """
    grads = [p.grad for p in parameters if p.grad is not None]
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if norm > max_norm:
        factor = max_norm / norm
        for parameter in parameters:
            if parameter.grad is not None:
                parameter.grad = parameter.grad * factor
    return norm


class Adam:
    """
    Bias-corrected Adam. Weight decay is applied directly to the weights,
    not folded into the gradient moments.
    """

    def __init__(
        self,
        parameters: Sequence[Tensor],
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        self.parameters: List[Tensor] = list(parameters)
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.first_moments = [np.zeros_like(p.data) for p in self.parameters]
        self.second_moments = [np.zeros_like(p.data) for p in self.parameters]

    def step(self) -> None:
        self.step_count += 1
        first_correction = 1.0 - self.beta1 ** self.step_count
        second_correction = 1.0 - self.beta2 ** self.step_count
        for i, parameter in enumerate(self.parameters):
            grad = parameter.grad
            if grad is None:
                continue
            self.first_moments[i] = self.beta1 * self.first_moments[i] + (1.0 - self.beta1) * grad
            self.second_moments[i] = self.beta2 * self.second_moments[i] + (1.0 - self.beta2) * grad * grad
            m_hat = self.first_moments[i] / first_correction
            v_hat = self.second_moments[i] / second_correction
            update = self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)
            if self.weight_decay:
                update = update + self.learning_rate * self.weight_decay * parameter.data
            parameter.data -= update

    def zero_grad(self) -> None:
        for parameter in self.parameters:
            parameter.zero_grad()
