"""Seeded desk-scale datasets for the demo commands."""

from __future__ import annotations

import numpy as np

# Four one-hot rows labelled by parity of the hot position pair, the
# classic minimal binary task for a width-4 hyper layer.
XOR_X = np.array([[1.0, 0.0, 0.0, 0.0],
                  [0.0, 1.0, 0.0, 0.0],
                  [0.0, 0.0, 1.0, 0.0],
                  [0.0, 0.0, 0.0, 1.0]])
XOR_Y = np.array([[0.0], [1.0], [1.0], [0.0]])

# Cross-shaped stamp whose sign pattern differs per channel, so the two
# classes are separated by joint structure across channels rather than
# by any single channel's intensity.
_MOTIF_CHANNEL_WEIGHTS = np.array([1.0, -1.0, 0.5, -0.5])
_MOTIF_MASK = np.array([[0.0, 1.0, 0.0],
                        [1.0, 1.0, 1.0],
                        [0.0, 1.0, 0.0]])


def motif_images(count, size=16, seed=0, amplitude=2.0, alpha_zero=False):
    """Two-class 4-channel images: a 3x3 cross-channel motif is stamped
    somewhere in every positive example and nowhere in negatives.

    Channels share a common low-frequency background plus per-channel
    noise, so they are correlated. With alpha_zero the first channel
    (the algebra's unit axis) is cleared, mirroring data encodings that
    reserve that axis.

    Returns (x, y) with x of shape (count, size, size, 4) and y of
    shape (count, 1) holding 0/1 labels.
    """
    rng = np.random.default_rng(seed)
    shared = rng.standard_normal((count, size, size, 1))
    mix = rng.uniform(0.5, 1.0, size=(count, 1, 1, 4))
    x = shared * mix + 0.5 * rng.standard_normal((count, size, size, 4))
    y = (rng.random(count) < 0.5).astype(np.float64)

    motif = _MOTIF_MASK[:, :, None] * _MOTIF_CHANNEL_WEIGHTS
    for i in np.nonzero(y)[0]:
        r = rng.integers(0, size - 3)
        c = rng.integers(0, size - 3)
        x[i, r:r + 3, c:c + 3, :] += amplitude * motif
    if alpha_zero:
        x[..., 0] = 0.0
    return x, y.reshape(-1, 1)


def motif_splits(seed=0, train=500, val=50, test=150, **kwargs):
    """Train/validation/test splits drawn from one seeded generator run."""
    x, y = motif_images(train + val + test, seed=seed, **kwargs)
    a, b = train, train + val
    return ((x[:a], y[:a]), (x[a:b], y[a:b]), (x[b:], y[b:]))
