"""One-hidden-layer neural network: tanh hidden units, softmax output,
mini-batch gradient descent on cross-entropy. Features are z-scored in fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class NetParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    def copy(self) -> "NetParams":
        return NetParams(self.W1.copy(), self.b1.copy(),
                         self.W2.copy(), self.b2.copy())


@dataclass
class NetModel:
    n_classes: int
    mean: np.ndarray
    scale: np.ndarray
    params: NetParams


def _softmax(Z: np.ndarray) -> np.ndarray:
    z = Z - Z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(params: NetParams, X: np.ndarray, Y: np.ndarray):
    """Mean cross-entropy over the batch and its analytic parameter gradients."""
    m = X.shape[0]
    A1 = np.tanh(X @ params.W1 + params.b1)
    P = _softmax(A1 @ params.W2 + params.b2)
    loss = -np.mean(np.log(np.maximum(np.sum(P * Y, axis=1), 1e-300)))

    dZ2 = (P - Y) / m
    dW2 = A1.T @ dZ2
    db2 = dZ2.sum(axis=0)
    dA1 = dZ2 @ params.W2.T
    dZ1 = dA1 * (1.0 - A1 * A1)
    dW1 = X.T @ dZ1
    db1 = dZ1.sum(axis=0)
    return loss, NetParams(dW1, db1, dW2, db2)


def init_params(n_features: int, hidden: int, n_classes: int,
                rng: np.random.Generator) -> NetParams:
    return NetParams(
        W1=rng.normal(0.0, 1.0 / np.sqrt(max(n_features, 1)), (n_features, hidden)),
        b1=np.zeros(hidden),
        W2=rng.normal(0.0, 1.0 / np.sqrt(hidden), (hidden, n_classes)),
        b2=np.zeros(n_classes))


def fit_net(X: np.ndarray, y: np.ndarray, n_classes: int, hidden: int,
            learning_rate: float, epochs: int, batch_size: int,
            seed: int) -> NetModel:
    n, p = X.shape
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale == 0, 1.0, scale)
    Z = (X - mean) / scale

    Y = np.zeros((n, n_classes))
    Y[np.arange(n), y] = 1.0

    rng = np.random.default_rng(seed)
    params = init_params(p, hidden, n_classes, rng)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = order[start:start + batch_size]
            _, grads = loss_and_grads(params, Z[batch], Y[batch])
            params.W1 -= learning_rate * grads.W1
            params.b1 -= learning_rate * grads.b1
            params.W2 -= learning_rate * grads.W2
            params.b2 -= learning_rate * grads.b2
    return NetModel(n_classes=n_classes, mean=mean, scale=scale, params=params)


def net_scores(model: NetModel, X: np.ndarray) -> np.ndarray:
    Z = (X - model.mean) / model.scale
    A1 = np.tanh(Z @ model.params.W1 + model.params.b1)
    return _softmax(A1 @ model.params.W2 + model.params.b2)
