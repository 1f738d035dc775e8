"""Feed-forward approximator with hand-rolled gradients.

Rectifier hidden layers, identity output head, squared-error loss on the
output entry of the taken action, adaptive-moment optimizer, and soft
target blending. Everything is float64 numpy; no autograd framework.
"""

import numpy as np


class Mlp:
    """Fully connected net; weights[i] is (out, in), biases[i] is (out,)."""

    def __init__(self, layer_sizes, rng: np.random.Generator | None = None):
        if len(layer_sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            if rng is None:
                w = np.zeros((fan_out, fan_in))
                b = np.zeros(fan_out)
            else:
                w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
                b = rng.uniform(-bound, bound, size=fan_out)
            self.weights.append(w)
            self.biases.append(b)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "Mlp":
        clone = Mlp(self.layer_sizes)
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.forward_batch(np.asarray(x, dtype=float)[None, :])[0]

    def forward_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.layer_sizes[0]:
            raise ValueError(
                f"input width {X.shape[1]} != expected {self.layer_sizes[0]}"
            )
        h = X
        last = self.n_layers - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w.T + b
            if i != last:
                np.maximum(h, 0.0, out=h)
        return h


def loss_and_grads(net: Mlp, X: np.ndarray, actions: np.ndarray,
                   targets: np.ndarray):
    """Mean squared error on the selected outputs and its exact gradients.

    Returns (loss, grads) where grads is a list of (dW, db) congruent with
    the net's layers.
    """
    X = np.asarray(X, dtype=float)
    actions = np.asarray(actions, dtype=int)
    targets = np.asarray(targets, dtype=float)
    k = X.shape[0]
    if k == 0:
        raise ValueError("batch must be nonempty")
    if np.any(actions < 0) or np.any(actions >= net.layer_sizes[-1]):
        raise ValueError("action index out of range")

    # forward pass keeping activations
    acts = [X]
    h = X
    last = net.n_layers - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        h = h @ w.T + b
        if i != last:
            h = np.maximum(h, 0.0)
        acts.append(h)

    out = acts[-1]
    picked = out[np.arange(k), actions]
    residual = picked - targets
    loss = float(np.mean(residual ** 2))

    d_out = np.zeros_like(out)
    d_out[np.arange(k), actions] = 2.0 * residual / k

    grads = [None] * net.n_layers
    delta = d_out
    for i in range(last, -1, -1):
        grads[i] = (delta.T @ acts[i], delta.sum(axis=0))
        if i > 0:
            delta = (delta @ net.weights[i]) * (acts[i] > 0.0)
    return loss, grads


class Adam:
    """Adaptive-moment optimizer bound to one net's parameter shapes."""

    def __init__(self, net: Mlp, lr: float = 1e-4, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [(np.zeros_like(w), np.zeros_like(b))
                  for w, b in zip(net.weights, net.biases)]
        self.v = [(np.zeros_like(w), np.zeros_like(b))
                  for w, b in zip(net.weights, net.biases)]

    def step(self, net: Mlp, grads) -> None:
        if len(grads) != len(self.m):
            raise ValueError("gradient shape does not match optimizer state")
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for i, (dw, db) in enumerate(grads):
            if dw.shape != net.weights[i].shape or db.shape != net.biases[i].shape:
                raise ValueError("gradient shape does not match parameters")
            mw, mb = self.m[i]
            vw, vb = self.v[i]
            mw *= self.beta1
            mw += (1.0 - self.beta1) * dw
            mb *= self.beta1
            mb += (1.0 - self.beta1) * db
            vw *= self.beta2
            vw += (1.0 - self.beta2) * dw ** 2
            vb *= self.beta2
            vb += (1.0 - self.beta2) * db ** 2
            net.weights[i] -= self.lr * (mw / bc1) / (np.sqrt(vw / bc2) + self.eps)
            net.biases[i] -= self.lr * (mb / bc1) / (np.sqrt(vb / bc2) + self.eps)

    def state_dict(self) -> dict:
        return {
            "lr": self.lr, "beta1": self.beta1, "beta2": self.beta2,
            "eps": self.eps, "t": self.t,
            "m": [(mw.copy(), mb.copy()) for mw, mb in self.m],
            "v": [(vw.copy(), vb.copy()) for vw, vb in self.v],
        }

    @classmethod
    def from_state_dict(cls, net: Mlp, state: dict) -> "Adam":
        opt = cls(net, lr=state["lr"], beta1=state["beta1"],
                  beta2=state["beta2"], eps=state["eps"])
        opt.t = state["t"]
        opt.m = [(mw.copy(), mb.copy()) for mw, mb in state["m"]]
        opt.v = [(vw.copy(), vb.copy()) for vw, vb in state["v"]]
        return opt


def soft_update(target: Mlp, online: Mlp, tau: float) -> None:
    """Blend target toward online in place: target = tau*online + (1-tau)*target."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must be in [0, 1]")
    if target.layer_sizes != online.layer_sizes:
        raise ValueError("networks are not shape-congruent")
    for tw, ow in zip(target.weights, online.weights):
        tw *= 1.0 - tau
        tw += tau * ow
    for tb, ob in zip(target.biases, online.biases):
        tb *= 1.0 - tau
        tb += tau * ob
