"""Sequential model container with summary and JSON serialization.

Model files are single self-contained JSON documents: layer configs
(including shapes inferred at build time), each hyper layer's algebra
table embedded in full, and every parameter as base64 little-endian
float64 in enumeration order (layer order, weights before bias).
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field

import numpy as np

from . import layers as L
from .algebra import StructureConstants, write_atomic
from .tensor import ShapeError, Tensor, no_grad

FORMAT_VERSION = 1


class ModelLoadError(ValueError):
    """Model file cannot be read back (corrupt, truncated, wrong version)."""


@dataclass
class LayerReport:
    name: str
    out_shape: tuple
    param_count: int


@dataclass
class ModelSummary:
    layers: list[LayerReport] = field(default_factory=list)

    @property
    def total_params(self):
        return sum(r.param_count for r in self.layers)

    def __str__(self):
        rows = [("layer", "output shape", "params")]
        for r in self.layers:
            rows.append((r.name, str((None, *r.out_shape)), str(r.param_count)))
        widths = [max(len(row[i]) for row in rows) for i in range(3)]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                 for row in rows]
        lines.insert(1, "-" * len(lines[0]))
        lines.append(f"total params: {self.total_params}")
        return "\n".join(lines)


class Sequential:
    """Ordered stack of layers; shapes are inferred at the first forward."""

    def __init__(self, layers=None, seed=None):
        self.layers = list(layers) if layers else []
        self.seed = seed
        self._seed_seq = None

    def add(self, layer):
        self.layers.append(layer)

    @property
    def built(self):
        return bool(self.layers) and all(layer.built for layer in self.layers)

    def _next_rng(self):
        if self._seed_seq is None:
            self._seed_seq = np.random.SeedSequence(self.seed)
        return np.random.default_rng(self._seed_seq.spawn(1)[0])

    def forward(self, x):
        if not self.layers:
            raise RuntimeError("model has no layers")
        if not isinstance(x, Tensor):
            x = Tensor(x)
        for i, layer in enumerate(self.layers):
            if not layer.built:
                rng = (np.random.default_rng(layer.seed) if layer.seed is not None
                       else self._next_rng())
                try:
                    layer.build(x.data.shape[1:], rng)
                except ShapeError as exc:
                    before = self.layers[i - 1].name if i else "input"
                    raise ShapeError(
                        f"cannot connect {before} to {layer.name} "
                        f"(layer {i}): {exc}") from exc
            x = layer.forward(x)
        return x

    def predict(self, x):
        """Forward pass without gradient recording; returns a numpy array."""
        with no_grad():
            return self.forward(x).data

    def params(self):
        """Trainable tensors in stable order: layer order, weights then bias."""
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def summary(self):
        if not self.built:
            raise RuntimeError("model is unbuilt; run a forward pass first")
        return ModelSummary([LayerReport(layer.name, layer.out_shape,
                                         layer.param_count())
                             for layer in self.layers])


# ---------------------------------------------------------------------------
# serialization

def _algebra_doc(algebra):
    rows = []
    for (i, j), terms in algebra.to_entries().items():
        for k, c in terms:
            rows.append([i, j, k, c])
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return {"name": algebra.name, "dim": algebra.dim, "entries": rows}


def _algebra_from_doc(doc):
    entries: dict[tuple[int, int], list] = {}
    for i, j, k, c in doc["entries"]:
        entries.setdefault((int(i), int(j)), []).append((int(k), float(c)))
    return StructureConstants(entries, dim=int(doc["dim"]), name=doc.get("name"))


def _layer_doc(layer):
    kind_map = {
        L.HyperDense: "hyper_dense",
        L.HyperConv1D: "hyper_conv1d",
        L.HyperConv2D: "hyper_conv2d",
        L.HyperConv3D: "hyper_conv3d",
        L.Dense: "dense",
        L.Activation: "activation",
        L.GlobalMaxPool: "global_max_pool",
        L.Flatten: "flatten",
    }
    kind = kind_map.get(type(layer))
    if kind is None:
        raise ValueError(f"cannot serialize layer of type {type(layer).__name__}")
    algebra = None
    config: dict = {}
    if kind == "hyper_dense":
        algebra = _algebra_doc(layer.algebra)
        config = {"units": layer.units, "activation": layer.activation,
                  "in_elems": layer.in_elems, "dtype": layer.dtype.name}
    elif kind.startswith("hyper_conv"):
        algebra = _algebra_doc(layer.algebra)
        stride = layer.stride
        config = {"filters": layer.filters, "kernel_size": list(layer.kernel_size),
                  "stride": list(stride) if isinstance(stride, tuple) else stride,
                  "padding": layer.padding, "activation": layer.activation,
                  "in_shape": list(layer.in_shape) if layer.built else None,
                  "dtype": layer.dtype.name}
    elif kind == "dense":
        config = {"units": layer.units, "activation": layer.activation,
                  "in_width": layer.in_shape[0] if layer.built else None,
                  "dtype": layer.dtype.name}
    elif kind == "activation":
        config = {"activation": layer.kind}
    elif kind in ("global_max_pool", "flatten"):
        config = {"in_shape": list(layer.in_shape) if layer.built else None}
    return {"kind": kind, "config": config, "algebra": algebra}


def _layer_from_doc(doc):
    kind = doc["kind"]
    config = doc.get("config", {})
    rng = np.random.default_rng(0)  # placeholder init, overwritten by weights
    if kind == "hyper_dense":
        algebra = _algebra_from_doc(doc["algebra"])
        layer = L.HyperDense(config["units"], algebra=algebra,
                             activation=config.get("activation"),
                             dtype=config.get("dtype", "float64"))
        if config.get("in_elems") is not None:
            layer.build((config["in_elems"] * algebra.dim,), rng)
        return layer
    if kind in ("hyper_conv1d", "hyper_conv2d", "hyper_conv3d"):
        algebra = _algebra_from_doc(doc["algebra"])
        cls = {"hyper_conv1d": L.HyperConv1D, "hyper_conv2d": L.HyperConv2D,
               "hyper_conv3d": L.HyperConv3D}[kind]
        stride = config["stride"]
        layer = cls(config["filters"], tuple(config["kernel_size"]),
                    algebra=algebra,
                    stride=tuple(stride) if isinstance(stride, list) else stride,
                    padding=config["padding"],
                    activation=config.get("activation"),
                    dtype=config.get("dtype", "float64"))
        if config.get("in_shape") is not None:
            layer.build(tuple(config["in_shape"]), rng)
        return layer
    if kind == "dense":
        layer = L.Dense(config["units"], activation=config.get("activation"),
                        dtype=config.get("dtype", "float64"))
        if config.get("in_width") is not None:
            layer.build((config["in_width"],), rng)
        return layer
    if kind == "activation":
        return L.Activation(config["activation"])
    if kind in ("global_max_pool", "flatten"):
        cls = L.GlobalMaxPool if kind == "global_max_pool" else L.Flatten
        layer = cls()
        if config.get("in_shape") is not None:
            layer.build(tuple(config["in_shape"]), rng)
        return layer
    raise ModelLoadError(f"unknown layer kind {kind!r}")


def save_model(model, path):
    doc = {
        "format_version": FORMAT_VERSION,
        "layers": [_layer_doc(layer) for layer in model.layers],
        "weights": [base64.b64encode(
            np.ascontiguousarray(p.data, dtype="<f8").tobytes()).decode("ascii")
            for p in model.params()],
    }
    write_atomic(path, json.dumps(doc, indent=1) + "\n")


def load_model(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelLoadError(f"cannot read model file {path}: {exc}") from exc
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelLoadError(f"unsupported format_version {version!r} "
                             f"(expected {FORMAT_VERSION})")
    try:
        model = Sequential([_layer_from_doc(d) for d in doc["layers"]])
        blobs = doc["weights"]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelLoadError):
            raise
        raise ModelLoadError(f"malformed model file {path}: {exc}") from exc
    params = model.params()
    if len(blobs) != len(params):
        raise ModelLoadError(f"model file {path} holds {len(blobs)} parameter "
                             f"blobs, expected {len(params)}")
    for p, blob in zip(params, blobs):
        raw = base64.b64decode(blob)
        if len(raw) != p.data.size * 8:
            raise ModelLoadError(f"parameter blob holds {len(raw)} bytes, "
                                 f"expected {p.data.size * 8}")
        decoded = np.frombuffer(raw, dtype="<f8").reshape(p.data.shape)
        p.data = decoded.astype(p.data.dtype)
    return model
