"""
Parameter containers.

A Module registers Tensor attributes with requires_grad as parameters and
Module attributes as children, both in assignment order, so `named_parameters`
yields a stable dotted naming used by checkpoints and the optimizer.
"""

from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..autograd import Tensor


class Module:
    """Base class for every network component."""

    def __init__(self) -> None:
        object.__setattr__(self, "_parameters", {})
        object.__setattr__(self, "_modules", {})
        object.__setattr__(self, "training", True)

    def __setattr__(self, name: str, value) -> None:
        if isinstance(value, Tensor) and value.requires_grad:
            self._parameters[name] = value
        elif isinstance(value, Module):
            self._modules[name] = value
        object.__setattr__(self, name, value)

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for name, parameter in self._parameters.items():
            yield prefix + name, parameter
        for name, module in self._modules.items():
            yield from module.named_parameters(prefix + name + ".")

    def parameters(self) -> List[Tensor]:
        return [parameter for _, parameter in self.named_parameters()]

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: parameter.data for name, parameter in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """
        Copy arrays into the registered parameters.

        Raises:
            KeyError: If names differ from the registered ones
            ValueError: If a shape differs
        """
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise KeyError(f"parameter names differ: missing={missing} unexpected={unexpected}")
        for name, parameter in own.items():
            values = np.asarray(state[name], dtype=np.float64)
            if values.shape != parameter.shape:
                raise ValueError(f"{name}: expected shape {parameter.shape}, got {values.shape}")
            parameter.data[...] = values

    def zero_grad(self) -> None:
        for parameter in self.parameters():
            parameter.zero_grad()

    def train(self, mode: bool = True) -> "Module":
        object.__setattr__(self, "training", mode)
        for module in self._modules.values():
            module.train(mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def num_parameters(self) -> int:
        return sum(parameter.size for parameter in self.parameters())


class ModuleList(Module):
    """Indexed sequence of child modules named "0", "1", ..."""

    def __init__(self, modules: Optional[Sequence[Module]] = None):
        super().__init__()
        for module in modules or ():
            self.append(module)

    def append(self, module: Module) -> None:
        setattr(self, str(len(self._modules)), module)

    def __len__(self) -> int:
        return len(self._modules)

    def __iter__(self) -> Iterator[Module]:
        return iter(self._modules.values())

    def __getitem__(self, index: int) -> Module:
        return list(self._modules.values())[index]


def init_parameter(rng: np.random.Generator, shape: Tuple[int, ...], name: str) -> Tensor:
    """Xavier-uniform initialization for weight matrices."""
    fan_in, fan_out = shape[-2], shape[-1]
    limit = float(np.sqrt(6.0 / (fan_in + fan_out)))
    return Tensor(rng.uniform(-limit, limit, size=shape), requires_grad=True, name=name)


def init_embedding(rng: np.random.Generator, rows: int, width: int, name: str) -> Tensor:
    return Tensor(rng.normal(0.0, width ** -0.5, size=(rows, width)), requires_grad=True, name=name)


def constant_parameter(shape: Tuple[int, ...], value: float, name: str) -> Tensor:
    return Tensor(np.full(shape, value), requires_grad=True, name=name)
