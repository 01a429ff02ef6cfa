"""Multilayer perceptron trained with softmax cross-entropy and Adam.

Architecture: 784 -> width -> ... -> width -> 10 with a rectifier after
every affine layer except the last. Depth counts hidden layers, so depth
0 is plain multinomial softmax regression. All math is float64 numpy.
"""

from dataclasses import dataclass

import numpy as np

from ..idx import N_CLASSES

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class MlpParams:
    weights: list  # per layer: (fan_in, fan_out)
    biases: list  # per layer: (fan_out,)

    def layer_dims(self):
        return [w.shape for w in self.weights]


@dataclass
class AdamState:
    m_w: list
    v_w: list
    m_b: list
    v_b: list
    t: int = 0


def mlp_init(depth: int, width: int, seed: int, n_inputs: int = 784) -> MlpParams:
    """Uniform(-s, s) weights with s = sqrt(6 / fan_in); zero biases."""
    if not 0 <= depth <= 3:
        raise ValueError(f"depth must be 0..3, got {depth}")
    dims = [n_inputs] + [width] * depth + [N_CLASSES]
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights=weights, biases=biases)


def mlp_forward(params: MlpParams, images) -> np.ndarray:
    """Logits of shape (batch, 10)."""
    h = np.atleast_2d(np.asarray(images, dtype=np.float64))
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
    return h @ params.weights[-1] + params.biases[-1]


def _softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def mlp_backward(params: MlpParams, images, labels):
    """Exact gradients of the mean softmax cross-entropy.

    Returns ((weight_grads, bias_grads), loss).
    """
    X = np.atleast_2d(np.asarray(images, dtype=np.float64))
    y = np.asarray(labels, dtype=np.int64)
    n = len(X)

    activations = [X]
    pre = []
    h = X
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0)
        activations.append(h)
    logits = h @ params.weights[-1] + params.biases[-1]

    probs = _softmax(logits)
    correct = probs[np.arange(n), y]
    loss = float(-np.mean(np.log(np.maximum(correct, 1e-300))))

    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n

    n_layers = len(params.weights)
    w_grads = [None] * n_layers
    b_grads = [None] * n_layers
    for layer in range(n_layers - 1, -1, -1):
        w_grads[layer] = activations[layer].T @ delta
        b_grads[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ params.weights[layer].T
            delta[pre[layer - 1] <= 0.0] = 0.0
    return (w_grads, b_grads), loss


def adam_init(params: MlpParams) -> AdamState:
    return AdamState(
        m_w=[np.zeros_like(w) for w in params.weights],
        v_w=[np.zeros_like(w) for w in params.weights],
        m_b=[np.zeros_like(b) for b in params.biases],
        v_b=[np.zeros_like(b) for b in params.biases],
        t=0,
    )


def adam_step(params: MlpParams, state: AdamState, grads, lr: float) -> None:
    """One bias-corrected Adam update, in place."""
    w_grads, b_grads = grads
    state.t += 1
    t = state.t
    correction1 = 1.0 - ADAM_BETA1**t
    correction2 = 1.0 - ADAM_BETA2**t
    for i in range(len(params.weights)):
        for value, grad, m, v in (
            (params.weights[i], w_grads[i], state.m_w[i], state.v_w[i]),
            (params.biases[i], b_grads[i], state.m_b[i], state.v_b[i]),
        ):
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * grad
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * grad * grad
            m_hat = m / correction1
            v_hat = v / correction2
            value -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def mlp_predict(params: MlpParams, images) -> np.ndarray:
    return np.argmax(mlp_forward(params, images), axis=1)
