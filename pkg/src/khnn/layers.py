"""Dense and convolutional layers over structure-constants algebras.

A hyper layer holds one algebra element per (output unit, input element)
slot and multiplies with the weight on the left: out_a = sum_b w[a,b] * x_b.
The whole layer is lowered to an ordinary real computation by expanding
each weight element into its left-multiplication matrix, so a HyperDense
with u units over m input elements becomes a (u*n, m*n) block matrix and
a HyperConv becomes a real kernel with n-times-wider channel blocks.

Output widths follow the units*n / filters*n convention: a layer with u
units over an n-dimensional algebra emits u*n real scalars.

Shapes are inferred at the first forward pass. Weights draw from a
uniform distribution with limit sqrt(6 / (fan_in + fan_out)) where the
fans count real scalars; biases start at zero.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .algebra import StructureConstants, predefined
from .tensor import ShapeError, Tensor

_ACTIVATIONS = {"tanh": T.tanh, "sigmoid": T.sigmoid}


def _resolve_activation(activation):
    if activation is None or activation in _ACTIVATIONS:
        return activation
    raise ValueError(f"unknown activation {activation!r}; "
                     f"choose from {sorted(_ACTIVATIONS)} or None")


def _resolve_algebra(algebra):
    if algebra is None:
        return predefined("quaternions")
    if isinstance(algebra, StructureConstants):
        return algebra
    return predefined(algebra)


def glorot_uniform(shape, fan_in, fan_out, rng):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """Base layer: build once from the input shape, then forward."""

    def __init__(self, seed=None, dtype=np.float64):
        self.built = False
        self.in_shape = None
        self.out_shape = None
        self.seed = seed
        self.dtype = np.dtype(dtype)
        if self.dtype not in (np.float32, np.float64):
            raise ValueError(f"dtype must be float32 or float64, got {dtype}")

    @property
    def name(self):
        return type(self).__name__

    def build(self, in_shape, rng):
        self.in_shape = tuple(in_shape)
        self.out_shape = tuple(in_shape)
        self.built = True

    def forward(self, x):
        raise NotImplementedError

    def params(self):
        return []

    def param_count(self):
        return int(sum(p.data.size for p in self.params()))

    def _param(self, values):
        return Tensor(np.asarray(values, dtype=self.dtype), requires_grad=True)

    def __call__(self, x):
        if not self.built:
            rng = np.random.default_rng(self.seed)
            self.build(x.data.shape[1:], rng)
        return self.forward(x)


def assemble_block_matrix(weights, algebra):
    """Expand (u, m, n) weight elements into the real (u*n, m*n) matrix.

    Block (a, b) is the left-multiplication matrix of weights[a, b], so
    multiplying the block matrix against a stacked coordinate vector
    equals the per-element algebra products.
    """
    u, m, n = weights.data.shape
    if n != algebra.dim:
        raise ShapeError(f"weight element width {n} != algebra dim {algebra.dim}")
    blocks = T.einsum_linear("abi,ijk->akbj", "akbj,ijk->abi",
                             weights, algebra.tensor)
    return T.reshape(blocks, (u * n, m * n))


def assemble_conv_kernel(weights, algebra):
    """Expand (K.., G, F, n) weight elements into a (K.., G*n, F*n) kernel.

    At every spatial offset the (input group g, filter f) channel block
    is the left-multiplication matrix of weights[offset, g, f], laid out
    so conv_nd over the result equals the algebra-valued convolution.
    """
    *ksize, groups, filters, n = weights.data.shape
    if n != algebra.dim:
        raise ShapeError(f"weight element width {n} != algebra dim {algebra.dim}")
    flat = T.reshape(weights, (-1, groups, filters, n))
    blocks = T.einsum_linear("pgfi,ijk->pgjfk", "pgjfk,ijk->pgfi",
                             flat, algebra.tensor)
    return T.reshape(blocks, (*ksize, groups * n, filters * n))


class HyperDense(Layer):
    """Dense layer whose weights are algebra elements.

    Input width must be a multiple of the algebra dimension n; each row
    is read as m = width/n elements and the output is units*n wide.
    """

    def __init__(self, units, algebra=None, activation=None, input_shape=None,
                 seed=None, dtype=np.float64):
        super().__init__(seed, dtype)
        if units < 1:
            raise ValueError(f"units must be >= 1, got {units}")
        self.units = int(units)
        self.algebra = _resolve_algebra(algebra)
        self.activation = _resolve_activation(activation)
        self.in_elems = None
        self.weights = None
        self.bias = None
        if input_shape is not None:
            self.build(tuple(input_shape), np.random.default_rng(seed))

    def build(self, in_shape, rng):
        n = self.algebra.dim
        if len(in_shape) != 1:
            raise ShapeError(f"{self.name} expects flat (batch, width) input, "
                             f"got trailing shape {tuple(in_shape)}")
        width = in_shape[0]
        if width % n != 0:
            raise ShapeError(f"{self.name}: input width {width} is not a multiple "
                             f"of algebra dim {n}")
        self.in_elems = width // n
        fan_in, fan_out = width, self.units * n
        self.weights = self._param(glorot_uniform(
            (self.units, self.in_elems, n), fan_in, fan_out, rng))
        self.bias = self._param(np.zeros(fan_out))
        self.in_shape = (width,)
        self.out_shape = (fan_out,)
        self.built = True

    def forward(self, x):
        if x.data.ndim != 2 or x.data.shape[1] != self.in_shape[0]:
            raise ShapeError(f"{self.name} built for width {self.in_shape[0]}, "
                             f"got input shape {x.data.shape}")
        block = assemble_block_matrix(self.weights, self.algebra)
        out = T.add_bias(T.matmul(x, T.transpose(block)), self.bias)
        if self.activation:
            out = _ACTIVATIONS[self.activation](out)
        return out

    def params(self):
        return [self.weights, self.bias] if self.built else []


class _HyperConv(Layer):
    """Shared machinery for the 1D/2D/3D hypercomplex convolutions."""

    ndim = None

    def __init__(self, filters, kernel_size, algebra=None, stride=1,
                 padding="valid", activation=None, seed=None, dtype=np.float64):
        super().__init__(seed, dtype)
        if filters < 1:
            raise ValueError(f"filters must be >= 1, got {filters}")
        self.filters = int(filters)
        if isinstance(kernel_size, int):
            kernel_size = (kernel_size,) * self.ndim
        self.kernel_size = tuple(int(k) for k in kernel_size)
        if len(self.kernel_size) != self.ndim or min(self.kernel_size) < 1:
            raise ValueError(f"{self.name} kernel_size {kernel_size!r} must be "
                             f"{self.ndim} positive ints")
        self.stride = stride
        self.padding = padding
        self.algebra = _resolve_algebra(algebra)
        self.activation = _resolve_activation(activation)
        self.in_groups = None
        self.weights = None
        self.bias = None

    def build(self, in_shape, rng):
        n = self.algebra.dim
        if len(in_shape) != self.ndim + 1:
            raise ShapeError(f"{self.name} expects (batch, {self.ndim} spatial axes, "
                             f"channels), got trailing shape {tuple(in_shape)}")
        channels = in_shape[-1]
        if channels % n != 0:
            raise ShapeError(f"{self.name}: {channels} input channels are not a "
                             f"multiple of algebra dim {n}")
        self.in_groups = channels // n
        receptive = int(np.prod(self.kernel_size))
        fan_in = receptive * channels
        fan_out = receptive * self.filters * n
        self.weights = self._param(glorot_uniform(
            (*self.kernel_size, self.in_groups, self.filters, n),
            fan_in, fan_out, rng))
        self.bias = self._param(np.zeros(self.filters * n))
        self.in_shape = tuple(in_shape)
        stride, _, out_spatial = T._conv_geometry(
            (1, *in_shape), (*self.kernel_size, channels, self.filters * n),
            self.stride, self.padding)
        self.stride = stride
        self.out_shape = (*out_spatial, self.filters * n)
        self.built = True

    def forward(self, x):
        kernel = assemble_conv_kernel(self.weights, self.algebra)
        out = T.conv_nd(x, kernel, stride=self.stride, padding=self.padding)
        out = T.add_bias(out, self.bias)
        if self.activation:
            out = _ACTIVATIONS[self.activation](out)
        return out

    def params(self):
        return [self.weights, self.bias] if self.built else []


class HyperConv1D(_HyperConv):
    ndim = 1


class HyperConv2D(_HyperConv):
    ndim = 2


class HyperConv3D(_HyperConv):
    ndim = 3


class Dense(Layer):
    """Ordinary real dense layer, y = x @ W + b."""

    def __init__(self, units, activation=None, seed=None, dtype=np.float64):
        super().__init__(seed, dtype)
        if units < 1:
            raise ValueError(f"units must be >= 1, got {units}")
        self.units = int(units)
        self.activation = _resolve_activation(activation)
        self.weights = None
        self.bias = None

    def build(self, in_shape, rng):
        if len(in_shape) != 1:
            raise ShapeError(f"Dense expects flat (batch, width) input, got "
                             f"trailing shape {tuple(in_shape)}")
        width = in_shape[0]
        self.weights = self._param(glorot_uniform((width, self.units), width,
                                                  self.units, rng))
        self.bias = self._param(np.zeros(self.units))
        self.in_shape = (width,)
        self.out_shape = (self.units,)
        self.built = True

    def forward(self, x):
        out = T.add_bias(T.matmul(x, self.weights), self.bias)
        if self.activation:
            out = _ACTIVATIONS[self.activation](out)
        return out

    def params(self):
        return [self.weights, self.bias] if self.built else []


class Activation(Layer):
    def __init__(self, kind):
        super().__init__()
        if kind not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {kind!r}; "
                             f"choose from {sorted(_ACTIVATIONS)}")
        self.kind = kind

    def forward(self, x):
        return _ACTIVATIONS[self.kind](x)


class GlobalMaxPool(Layer):
    """Global max over all spatial axes, (B, S.., C) -> (B, C)."""

    def build(self, in_shape, rng):
        if len(in_shape) < 2:
            raise ShapeError(f"GlobalMaxPool needs spatial axes, got trailing "
                             f"shape {tuple(in_shape)}")
        self.in_shape = tuple(in_shape)
        self.out_shape = (in_shape[-1],)
        self.built = True

    def forward(self, x):
        return T.global_max_pool(x)


class Flatten(Layer):
    def build(self, in_shape, rng):
        self.in_shape = tuple(in_shape)
        self.out_shape = (int(np.prod(in_shape)),)
        self.built = True

    def forward(self, x):
        return T.flatten(x)
