"""Losses, optimizers, metrics and the full-batch training loop."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .algebra import write_atomic
from .tensor import Tensor, no_grad, zero_grad

BCE_CLAMP = 1e-7  # predictions are clamped to [eps, 1 - eps] before the logs


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during fit."""


def _as_array(x):
    return x.data if isinstance(x, Tensor) else np.asarray(x)


def bce_loss(pred, target):
    """Mean binary cross-entropy, -[y log p + (1 - y) log(1 - p)]."""
    if not isinstance(pred, Tensor):
        pred = Tensor(pred)
    target_arr = _as_array(target)
    if not np.isin(target_arr, (0.0, 1.0)).all():
        raise ValueError("binary cross-entropy targets must be 0 or 1")
    target = target if isinstance(target, Tensor) else Tensor(target_arr)
    p = T.clip(pred, BCE_CLAMP, 1.0 - BCE_CLAMP)
    on = T.mul(target, T.log(p))
    off = T.mul(1.0 - target, T.log(1.0 - p))
    return T.neg(T.mean(T.add(on, off)))


def accuracy(pred, target):
    """Fraction of thresholded predictions matching binary targets.

    The threshold is inclusive: a prediction of exactly 0.5 counts as
    class 1.
    """
    pred = _as_array(pred)
    target = _as_array(target)
    return float(((pred >= 0.5) == (target >= 0.5)).mean())


class SGD:
    """Plain gradient descent, w <- w - lr * g."""

    def __init__(self, lr=0.01):
        self.lr = float(lr)

    def step(self, params):
        for p in params:
            if p.grad is None:
                raise RuntimeError("parameter has no gradient; run backward first")
            p.data = p.data - self.lr * p.grad


class Adam:
    """Adam with bias-corrected moments, w <- w - lr * m^ / (sqrt(v^) + eps)."""

    def __init__(self, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-7):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.step_count = 0
        self._m: dict[int, np.ndarray] = {}
        self._v: dict[int, np.ndarray] = {}

    def step(self, params):
        self.step_count += 1
        t = self.step_count
        for i, p in enumerate(params):
            if p.grad is None:
                raise RuntimeError("parameter has no gradient; run backward first")
            m = self._m.setdefault(i, np.zeros_like(p.data))
            v = self._v.setdefault(i, np.zeros_like(p.data))
            m += (1.0 - self.beta1) * (p.grad - m)
            v += (1.0 - self.beta2) * (p.grad * p.grad - v)
            m_hat = m / (1.0 - self.beta1 ** t)
            v_hat = v / (1.0 - self.beta2 ** t)
            p.data = p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class TrainHistory:
    """Per-epoch records; validation columns present only when tracked."""

    loss: list[float] = field(default_factory=list)
    accuracy: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.loss)

    @property
    def has_validation(self):
        return bool(self.val_loss)

    def to_csv(self, path):
        """Write one row per epoch with 9 significant digits."""
        header = "epoch,loss,accuracy"
        if self.has_validation:
            header += ",val_loss,val_accuracy"
        lines = [header]
        for i in range(len(self)):
            row = [str(i + 1), f"{self.loss[i]:.9g}", f"{self.accuracy[i]:.9g}"]
            if self.has_validation:
                row += [f"{self.val_loss[i]:.9g}", f"{self.val_accuracy[i]:.9g}"]
            lines.append(",".join(row))
        write_atomic(path, "\n".join(lines) + "\n")


def evaluate(model, x, y, loss_fn=bce_loss):
    """Loss and accuracy on held-out data, without gradient recording."""
    with no_grad():
        pred = model.forward(Tensor(np.asarray(x, dtype=np.float64)))
        loss = loss_fn(pred, Tensor(np.asarray(y, dtype=np.float64)))
    return float(loss.data), accuracy(pred, y)


def fit(model, x, y, epochs, optimizer, loss_fn=bce_loss, seed=None,
        validation=None, batch_size=None, verbose=False):
    """Train by gradient descent and record per-epoch history.

    Full batch by default; pass batch_size for sequential mini-batches.
    The loss/accuracy recorded for an epoch are measured on the forward
    passes of that epoch, before the following update is visible. With a
    seed and an unbuilt model, initialization (and hence the whole run)
    is deterministic.
    """
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    x = np.asarray(x)
    if x.dtype not in (np.float32, np.float64):
        x = x.astype(np.float64)
    y = np.asarray(y, dtype=np.float64)
    if seed is not None and not model.built and model.seed is None:
        model.seed = seed
    count = x.shape[0]
    if batch_size is None or batch_size >= count:
        bounds = [(0, count)]
    else:
        bounds = [(i, min(i + batch_size, count))
                  for i in range(0, count, batch_size)]

    history = TrainHistory()
    params = None
    for epoch in range(epochs):
        total = 0.0
        preds = np.zeros(y.shape)
        for lo, hi in bounds:
            out = model.forward(Tensor(x[lo:hi]))
            loss = loss_fn(out, Tensor(y[lo:hi]))
            if not np.isfinite(loss.data):
                raise TrainingDiverged(
                    f"loss became {float(loss.data)} at epoch {epoch + 1}")
            if params is None:
                params = model.params()
            loss.backward()
            optimizer.step(params)
            zero_grad(params)
            total += float(loss.data) * (hi - lo)
            preds[lo:hi] = out.data
        history.loss.append(total / count)
        history.accuracy.append(accuracy(preds, y))
        if validation is not None:
            val_loss, val_acc = evaluate(model, *validation, loss_fn=loss_fn)
            history.val_loss.append(val_loss)
            history.val_accuracy.append(val_acc)
        if verbose:
            line = (f"epoch {epoch + 1}/{epochs}  loss {history.loss[-1]:.6f}  "
                    f"acc {history.accuracy[-1]:.4f}")
            if validation is not None:
                line += (f"  val_loss {history.val_loss[-1]:.6f}  "
                         f"val_acc {history.val_accuracy[-1]:.4f}")
            print(line)
    return history
