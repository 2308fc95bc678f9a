# src/network.py

"""
Network Module
--------------
Dense feed-forward tanh networks built on the autodiff graph.

Parameters live in one flat vector. Layer by layer, the weight matrix of shape
(fan_in, fan_out) is stored row-major, followed by the layer's bias vector.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from .autodiff import Graph, Operand, Variable
from .custom_logger import log
from .errors import ArgumentError, ParseError, StructuralError
from .helpers import atomic_write_text, format_real
from .sampler import Rng

ACTIVATIONS = ("tanh",)


@dataclass(frozen=True)
class MLPConfig:
    input_dim: int
    hidden_layers: int
    hidden_width: int
    output_dim: int
    activation: str = "tanh"

    def __post_init__(self) -> None:
        for name in ("input_dim", "hidden_layers", "hidden_width", "output_dim"):
            if int(getattr(self, name)) < 1:
                raise ArgumentError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.activation not in ACTIVATIONS:
            raise ArgumentError(f"unsupported activation '{self.activation}'")

    @property
    def layer_sizes(self) -> List[int]:
        return [self.input_dim] + [self.hidden_width] * self.hidden_layers + [self.output_dim]

    @property
    def parameter_count(self) -> int:
        w = self.hidden_width
        return (
            (self.input_dim * w + w)
            + (self.hidden_layers - 1) * (w * w + w)
            + (w * self.output_dim + self.output_dim)
        )

    def layers(self) -> List[Tuple[int, int, int]]:
        """(offset, fan_in, fan_out) of every layer in the flat vector."""
        sizes = self.layer_sizes
        offset = 0
        layout = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            layout.append((offset, fan_in, fan_out))
            offset += fan_in * fan_out + fan_out
        return layout

    def describe(self) -> str:
        return f"{self.input_dim}-{'x'.join([str(self.hidden_width)] * self.hidden_layers)}-{self.output_dim}"


def init_params(config: MLPConfig, seed: int) -> np.ndarray:
    """
    Glorot-normal weights (std = sqrt(2 / (fan_in + fan_out))) and zero biases.

    Returns:
        np.ndarray: Read-only flat parameter vector of length `config.parameter_count`.
    """
    rng = Rng(seed)
    params = np.zeros(config.parameter_count)
    for offset, fan_in, fan_out in config.layers():
        std = np.sqrt(2.0 / (fan_in + fan_out))
        params[offset : offset + fan_in * fan_out] = rng.normal(0.0, std, fan_in * fan_out)
    params.setflags(write=False)
    log.debug(f"Initialized {config.describe()} network ({config.parameter_count} parameters, seed {seed})")
    return params


def register_params(graph: Graph, config: MLPConfig, values: Union[np.ndarray, None] = None) -> List[Variable]:
    """Registers the parameter vector on `graph` as scalar free variables theta0, theta1, ..."""
    if values is not None and len(values) != config.parameter_count:
        raise StructuralError(
            f"expected {config.parameter_count} parameters, got {len(values)}"
        )
    return [
        graph.variable(f"theta{k}", None if values is None else float(values[k]))
        for k in range(config.parameter_count)
    ]


def forward(
    config: MLPConfig, params: Sequence[Variable], inputs: Sequence[Operand], graph: Graph
) -> List[Variable]:
    """
    Builds the network on `graph`: tanh hidden layers, affine output layer.

    Args:
        config (MLPConfig): Architecture.
        params (Sequence[Variable]): Parameter variables from `register_params`.
        inputs (Sequence[Operand]): `input_dim` input nodes.
        graph (Graph): Graph to build on.

    Returns:
        List[Variable]: `output_dim` output nodes.
    """
    if len(inputs) != config.input_dim:
        raise StructuralError(f"network takes {config.input_dim} inputs, got {len(inputs)}")
    if len(params) != config.parameter_count:
        raise StructuralError(f"network takes {config.parameter_count} parameters, got {len(params)}")
    activations = list(inputs)
    layout = config.layers()
    for layer, (offset, fan_in, fan_out) in enumerate(layout):
        bias_offset = offset + fan_in * fan_out
        outputs = []
        for j in range(fan_out):
            pre = graph.linear(
                [(activations[i], params[offset + i * fan_out + j]) for i in range(fan_in)],
                [params[bias_offset + j]],
            )
            outputs.append(pre if layer == len(layout) - 1 else graph.tanh(pre))
        activations = outputs
    return activations


def forward_array(config: MLPConfig, params: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    """
    Evaluates the network on a batch of points with plain NumPy.

    Args:
        inputs (np.ndarray): Shape (n, input_dim).

    Returns:
        np.ndarray: Shape (n, output_dim).
    """
    params = np.asarray(params, dtype=np.float64)
    if params.size != config.parameter_count:
        raise StructuralError(f"expected {config.parameter_count} parameters, got {params.size}")
    hidden = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if hidden.shape[1] != config.input_dim:
        raise StructuralError(f"network takes {config.input_dim} inputs, got {hidden.shape[1]}")
    layout = config.layers()
    for layer, (offset, fan_in, fan_out) in enumerate(layout):
        weights = params[offset : offset + fan_in * fan_out].reshape(fan_in, fan_out)
        bias = params[offset + fan_in * fan_out : offset + fan_in * fan_out + fan_out]
        hidden = hidden @ weights + bias
        if layer < len(layout) - 1:
            hidden = np.tanh(hidden)
    return hidden


def save_checkpoint(path: Union[str, Path], config: MLPConfig, params: np.ndarray) -> Path:
    """Writes the config tuple line followed by one %.17g value per line."""
    if len(params) != config.parameter_count:
        raise StructuralError(f"expected {config.parameter_count} parameters, got {len(params)}")
    header = (
        f"{config.input_dim} {config.hidden_layers} {config.hidden_width} "
        f"{config.output_dim} {config.activation}"
    )
    body = "\n".join(format_real(v) for v in params)
    return atomic_write_text(path, f"{header}\n{body}\n")


def load_checkpoint(path: Union[str, Path]) -> Tuple[MLPConfig, np.ndarray]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty checkpoint file", 1)
    fields = lines[0].split()
    if len(fields) != 5:
        raise ParseError("expected 'input_dim hidden_layers hidden_width output_dim activation'", 1)
    try:
        config = MLPConfig(int(fields[0]), int(fields[1]), int(fields[2]), int(fields[3]), fields[4])
    except (ValueError, ArgumentError) as e:
        raise ParseError(f"bad network header: {e}", 1) from e
    values = []
    for number, line in enumerate(lines[1:], start=2):
        try:
            values.append(float(line))
        except ValueError as e:
            raise ParseError(f"not a real number: '{line}'", number) from e
    if len(values) != config.parameter_count:
        raise ParseError(
            f"expected {config.parameter_count} parameters, found {len(values)}", len(lines)
        )
    params = np.array(values)
    params.setflags(write=False)
    return config, params
