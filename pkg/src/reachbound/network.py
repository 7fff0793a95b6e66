"""Dense feedforward network model: JSON loading, evaluation, Jacobians.

The model document format is
``{"layers": [{"weights": [[...], ...], "bias": [...], "activation": "tanh"}]}``
with decimal floats that round-trip exactly through ``repr``/``json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .intervals import activation_derivative, activation_function, activation_names

__all__ = [
    "Layer",
    "Network",
    "load_network",
    "network_to_document",
    "read_model",
    "write_model",
    "forward_point",
    "forward_batch",
    "point_jacobian",
    "jacobian_batch",
    "generate_network",
]


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Layer:
    """One dense layer: y = f(W x + b)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        b = np.asarray(self.bias, dtype=float)
        if w.ndim != 2 or w.size == 0:
            raise ValueError("layer weights must form a nonempty 2-d matrix")
        if b.ndim != 1 or b.shape[0] != w.shape[0]:
            raise ValueError(
                f"bias length {b.shape} does not match weight rows {w.shape[0]}"
            )
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ValueError("layer parameters must be finite")
        if self.activation not in activation_names():
            raise ValueError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "weights", _frozen_array(w))
        object.__setattr__(self, "bias", _frozen_array(b))

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class Network:
    """Immutable stack of dense layers with chained dimensions."""

    layers: tuple[Layer, ...]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("network must have at least one layer")
        for k in range(len(self.layers) - 1):
            a, b = self.layers[k], self.layers[k + 1]
            if a.out_dim != b.in_dim:
                raise ValueError(
                    f"layer {k} outputs {a.out_dim} values but layer {k + 1} expects {b.in_dim}"
                )

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def is_square(self) -> bool:
        return self.input_dim == self.output_dim

    def dims(self) -> tuple[int, ...]:
        return (self.input_dim,) + tuple(l.out_dim for l in self.layers)


def load_network(document) -> Network:
    """Validate a parsed model document and build a Network."""
    if not isinstance(document, dict):
        raise ValueError("model document must be a JSON object")
    layers_doc = document.get("layers")
    if not isinstance(layers_doc, list) or not layers_doc:
        raise ValueError("model document needs a nonempty 'layers' list")
    layers = []
    for k, entry in enumerate(layers_doc):
        if not isinstance(entry, dict):
            raise ValueError(f"layer {k} must be an object")
        missing = {"weights", "bias", "activation"} - set(entry)
        if missing:
            raise ValueError(f"layer {k} missing fields: {sorted(missing)}")
        weights = entry["weights"]
        if not isinstance(weights, list) or not weights or not all(
            isinstance(row, list) and len(row) == len(weights[0]) and row for row in weights
        ):
            raise ValueError(f"layer {k} weights must be a rectangular nonempty matrix")
        try:
            layers.append(Layer(weights, entry["bias"], entry["activation"]))
        except (ValueError, TypeError) as exc:
            raise ValueError(f"layer {k}: {exc}") from None
    return Network(tuple(layers))


def network_to_document(net: Network) -> dict:
    return {
        "layers": [
            {
                "weights": [[float(v) for v in row] for row in layer.weights],
                "bias": [float(v) for v in layer.bias],
                "activation": layer.activation,
            }
            for layer in net.layers
        ]
    }


def read_model(path) -> Network:
    with open(path, "r", encoding="utf-8") as fh:
        document = json.load(fh)
    return load_network(document)


def write_model(net: Network, path) -> None:
    Path(path).write_text(json.dumps(network_to_document(net), indent=1), encoding="utf-8")


def forward_batch(net: Network, xs: np.ndarray) -> np.ndarray:
    """Evaluate the network on a batch of points, shape (n, input_dim)."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != net.input_dim:
        raise ValueError(f"expected batch of shape (n, {net.input_dim})")
    out = xs
    for layer in net.layers:
        out = activation_function(layer.activation)(out @ layer.weights.T + layer.bias)
    return out


def forward_point(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (net.input_dim,):
        raise ValueError(f"expected input of shape ({net.input_dim},)")
    return forward_batch(net, x[None, :])[0]


def jacobian_batch(net: Network, xs: np.ndarray) -> np.ndarray:
    """Chain-rule Jacobians at a batch of points, shape (n, out_dim, in_dim)."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != net.input_dim:
        raise ValueError(f"expected batch of shape (n, {net.input_dim})")
    n = xs.shape[0]
    jac = np.broadcast_to(np.eye(net.input_dim), (n, net.input_dim, net.input_dim)).copy()
    out = xs
    for layer in net.layers:
        z = out @ layer.weights.T + layer.bias
        d = activation_derivative(layer.activation)(z)
        jac = d[:, :, None] * np.einsum("oi,nij->noj", layer.weights, jac)
        out = activation_function(layer.activation)(z)
    return jac


def point_jacobian(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (net.input_dim,):
        raise ValueError(f"expected input of shape ({net.input_dim},)")
    return jacobian_batch(net, x[None, :])[0]


def generate_network(
    seed: int,
    dims,
    activation: str = "tanh",
    scale: float = 1.0,
    output_activation: str = "linear",
) -> Network:
    """Deterministic seeded network with uniform weights in [-scale, scale].

    Hidden layers use `activation`; the final layer uses `output_activation`.
    The counter-based Philox generator makes equal seeds give bit-identical
    networks.
    """
    dims = [int(d) for d in dims]
    if len(dims) < 2:
        raise ValueError("dims must list input and output sizes")
    if any(d < 1 for d in dims):
        raise ValueError("layer sizes must be positive")
    if not scale > 0:
        raise ValueError("scale must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    layers = []
    last = len(dims) - 2
    for k in range(len(dims) - 1):
        w = rng.uniform(-scale, scale, size=(dims[k + 1], dims[k]))
        b = rng.uniform(-scale, scale, size=dims[k + 1])
        layers.append(Layer(w, b, output_activation if k == last else activation))
    return Network(tuple(layers))
