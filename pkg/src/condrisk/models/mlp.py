"""Multilayer perceptrons trained with minibatch Adam.

One network core serves both heads: a single linear output for regression
under mean squared error, and K linear outputs for classification under
cross-entropy (softmax folded into the loss through log-sum-exp). Weights
start Glorot-uniform, biases at zero. Training reshuffles the data every
epoch from the model's own seed stream and stops early once the mean epoch
loss improves by less than 1e-6 for 10 consecutive epochs.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .. import rng

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
EARLY_STOP_TOL = 1e-6
EARLY_STOP_PATIENCE = 10


@dataclasses.dataclass
class MLPParams:
    weights: list  # W_i of shape (fan_in, fan_out), hidden layers then output
    biases: list


def init_params(d_in, hidden, d_out, gen) -> MLPParams:
    dims = [d_in] + list(hidden) + [d_out]
    weights, biases = [], []
    for i in range(len(dims) - 1):
        lim = np.sqrt(6.0 / (dims[i] + dims[i + 1]))
        weights.append(gen.uniform(-lim, lim, size=(dims[i], dims[i + 1])))
        biases.append(np.zeros(dims[i + 1]))
    return MLPParams(weights=weights, biases=biases)


def forward(params: MLPParams, X):
    """Return (logits_or_output, post-activation values per hidden layer)."""
    acts = []
    h = X
    for W, b in zip(params.weights[:-1], params.biases[:-1]):
        h = np.maximum(h @ W + b, 0.0)
        acts.append(h)
    out = h @ params.weights[-1] + params.biases[-1]
    return out, acts


def _log_softmax(z):
    m = z.max(axis=1, keepdims=True)
    return z - m - np.log(np.exp(z - m).sum(axis=1, keepdims=True))


def softmax(z):
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(params: MLPParams, X, y, head):
    """Mean loss over the batch plus gradients for every weight and bias.

    head "regression": L = mean (out - y)^2, out is the single output column.
    head "classification": L = mean cross-entropy of softmax(logits) at the
    integer labels y.
    """
    n = X.shape[0]
    out, acts = forward(params, X)
    if head == "regression":
        diff = out[:, 0] - y
        loss = float(diff @ diff) / n
        g_out = (2.0 / n) * diff[:, None]
    else:
        ls = _log_softmax(out)
        loss = float(-ls[np.arange(n), y].sum()) / n
        g_out = np.exp(ls)
        g_out[np.arange(n), y] -= 1.0
        g_out /= n

    g_weights = [None] * len(params.weights)
    g_biases = [None] * len(params.biases)
    g = g_out
    layer_inputs = [X] + acts
    for i in range(len(params.weights) - 1, -1, -1):
        g_weights[i] = layer_inputs[i].T @ g
        g_biases[i] = g.sum(axis=0)
        if i > 0:
            g = (g @ params.weights[i].T) * (acts[i - 1] > 0)
    return loss, g_weights, g_biases


def train(X, y, hidden, head, d_out, seed, scope, batch_size=256,
          learning_rate=5e-4, max_epochs=800):
    """Fit a network and report (params, final_loss, epochs_run, converged)."""
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    gen = rng.stream(*scope, seed)
    params = init_params(d, hidden, d_out, gen)

    flat = params.weights + params.biases
    m = [np.zeros_like(p) for p in flat]
    v = [np.zeros_like(p) for p in flat]
    step = 0
    streak = 0
    prev_loss = np.inf
    epoch_loss = np.inf
    epochs_run = 0
    converged = False

    for epoch in range(max_epochs):
        order = gen.permutation(n)
        total = 0.0
        for lo in range(0, n, batch_size):
            idx = order[lo:lo + batch_size]
            bloss, gw, gb = loss_and_grads(params, X[idx], y[idx], head)
            total += bloss * len(idx)
            grads = gw + gb
            step += 1
            c1 = 1.0 - ADAM_BETA1 ** step
            c2 = 1.0 - ADAM_BETA2 ** step
            for j, p in enumerate(flat):
                m[j] = ADAM_BETA1 * m[j] + (1.0 - ADAM_BETA1) * grads[j]
                v[j] = ADAM_BETA2 * v[j] + (1.0 - ADAM_BETA2) * grads[j] ** 2
                p -= learning_rate * (m[j] / c1) / (np.sqrt(v[j] / c2) + ADAM_EPS)
        epoch_loss = total / n
        epochs_run = epoch + 1
        if prev_loss - epoch_loss < EARLY_STOP_TOL:
            streak += 1
            if streak >= EARLY_STOP_PATIENCE:
                converged = True
                break
        else:
            streak = 0
        prev_loss = epoch_loss

    return params, epoch_loss, epochs_run, converged


def representation(params: MLPParams, X):
    _, acts = forward(params, np.asarray(X, dtype=np.float64))
    if not acts:
        raise ValueError("model has no hidden layer to take representations from")
    return acts[-1]


def numeric_gradient(params: MLPParams, X, y, head, step=1e-5):
    """Central-difference gradients plus a validity mask per entry.

    A coordinate is marked invalid when nudging it by +-step flips some
    ReLU's activation, which puts a kink inside the difference bracket and
    biases the quotient; such coordinates cannot be checked numerically.
    """
    flats = params.weights + params.biases
    grads = [np.zeros_like(p) for p in flats]
    masks = [np.ones(p.shape, dtype=bool) for p in flats]

    def pattern():
        _, acts = forward(params, X)
        return tuple((a > 0).tobytes() for a in acts)

    base = pattern()
    for p, g, m in zip(flats, grads, masks):
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            ix = it.multi_index
            orig = p[ix]
            p[ix] = orig + step
            lo_plus, _, _ = loss_and_grads(params, X, y, head)
            ok = pattern() == base
            p[ix] = orig - step
            lo_minus, _, _ = loss_and_grads(params, X, y, head)
            ok = ok and pattern() == base
            p[ix] = orig
            g[ix] = (lo_plus - lo_minus) / (2.0 * step)
            m[ix] = ok
    return grads, masks
