"""Minimal neural-network layers with explicit forward/backward passes.

All math is float64 numpy; the graph/conv hot loops go through
``dtafusion.kernels``. Each layer caches what its backward pass needs, so a
layer instance handles one forward-then-backward round at a time (which is
how the model uses them). Parameters and their gradients are exposed as
(name, array) pairs; ``Adam`` matches them by name.
"""

import numpy as np

from . import kernels


class Dense:
    """Affine layer y = x @ W + b with He-scaled init."""

    def __init__(self, name, n_in, n_out, rng):
        self.name = name
        self.W = rng.normal(0.0, np.sqrt(2.0 / n_in), size=(n_in, n_out))
        self.b = np.zeros(n_out)
        self.gW = np.zeros_like(self.W)
        self.gb = np.zeros_like(self.b)
        self._x = None

    def params(self):
        return [(f"{self.name}.W", self.W), (f"{self.name}.b", self.b)]

    def grads(self):
        return [(f"{self.name}.W", self.gW), (f"{self.name}.b", self.gb)]

    def state(self):
        return []

    def forward(self, x, training=False):
        self._x = x
        return x @ self.W + self.b

    def backward(self, g):
        self.gW = self._x.T @ g
        self.gb = g.sum(axis=0)
        return g @ self.W.T


class ReLU:
    def __init__(self):
        self._mask = None

    def forward(self, x, training=False):
        self._mask = x > 0
        return x * self._mask

    def backward(self, g):
        return g * self._mask


class Dropout:
    """Inverted dropout; identity when eval or rate 0. The mask rng is passed
    per forward call so the trainer owns determinism."""

    def __init__(self, rate):
        self.rate = rate
        self._mask = None

    def forward(self, x, training=False, rng=None):
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("dropout in training mode needs an rng")
        self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, g):
        if self._mask is None:
            return g
        return g * self._mask


class BatchNorm:
    """Feature-wise normalization over the row axis with running statistics."""

    def __init__(self, name, dim, momentum=0.1, eps=1e-5):
        self.name = name
        self.gamma = np.ones(dim)
        self.beta = np.zeros(dim)
        self.ggamma = np.zeros(dim)
        self.gbeta = np.zeros(dim)
        self.running_mean = np.zeros(dim)
        self.running_var = np.ones(dim)
        self.momentum = momentum
        self.eps = eps
        self._cache = None

    def params(self):
        return [(f"{self.name}.gamma", self.gamma), (f"{self.name}.beta", self.beta)]

    def grads(self):
        return [(f"{self.name}.gamma", self.ggamma), (f"{self.name}.beta", self.gbeta)]

    def state(self):
        return [
            (f"{self.name}.running_mean", self.running_mean),
            (f"{self.name}.running_var", self.running_var),
        ]

    def forward(self, x, training=False):
        if training:
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            self.running_mean = (1 - self.momentum) * self.running_mean + self.momentum * mean
            self.running_var = (1 - self.momentum) * self.running_var + self.momentum * var
        else:
            mean = self.running_mean
            var = self.running_var
        invstd = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * invstd
        self._cache = (xhat, invstd, training)
        return self.gamma * xhat + self.beta

    def backward(self, g):
        xhat, invstd, training = self._cache
        self.gbeta = g.sum(axis=0)
        self.ggamma = (g * xhat).sum(axis=0)
        if not training:
            return g * self.gamma * invstd
        n = g.shape[0]
        return (
            self.gamma
            * invstd
            / n
            * (n * g - self.gbeta - xhat * self.ggamma)
        )


class Conv1d:
    """Strided valid 1D convolution over a single-channel signal."""

    def __init__(self, name, channels, kernel, stride, rng):
        self.name = name
        self.kernel = kernel
        self.stride = stride
        self.w = rng.normal(0.0, np.sqrt(2.0 / kernel), size=(channels, kernel))
        self.b = np.zeros(channels)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._x = None

    def out_length(self, length):
        return (length - self.kernel) // self.stride + 1

    def params(self):
        return [(f"{self.name}.w", self.w), (f"{self.name}.b", self.b)]

    def grads(self):
        return [(f"{self.name}.w", self.gw), (f"{self.name}.b", self.gb)]

    def state(self):
        return []

    def forward(self, x, training=False):
        self._x = np.ascontiguousarray(x)
        y = kernels.conv1d_forward(self._x, self.w, self.stride)
        return y + self.b  # (B, T, C)

    def backward(self, g):
        g = np.ascontiguousarray(g)
        self.gw = kernels.conv1d_backward_w(g, self._x, self.kernel, self.stride)
        self.gb = g.sum(axis=(0, 1))
        return kernels.conv1d_backward_x(g, self.w, self._x.shape[1], self.stride)


class GINBlock:
    """Sum-aggregation (epsilon = 0) followed by a two-layer elementwise net
    and feature-wise normalization."""

    def __init__(self, name, n_in, n_out, rng):
        self.name = name
        self.lin1 = Dense(f"{name}.lin1", n_in, n_out, rng)
        self.lin2 = Dense(f"{name}.lin2", n_out, n_out, rng)
        self.bn = BatchNorm(f"{name}.bn", n_out)
        self.act1 = ReLU()
        self.act2 = ReLU()
        self._edges = None

    def params(self):
        return self.lin1.params() + self.lin2.params() + self.bn.params()

    def grads(self):
        return self.lin1.grads() + self.lin2.grads() + self.bn.grads()

    def state(self):
        return self.bn.state()

    def forward(self, x, src, dst, training=False):
        self._edges = (src, dst, x.shape[0])
        agg = x + kernels.neighbor_sum(x, src, dst, x.shape[0])
        h = self.act1.forward(self.lin1.forward(agg))
        h = self.act2.forward(self.lin2.forward(h))
        return self.bn.forward(h, training)

    def backward(self, g):
        g = self.bn.backward(g)
        g = self.lin2.backward(self.act2.backward(g))
        g = self.lin1.backward(self.act1.backward(g))
        src, dst, n = self._edges
        return g + kernels.neighbor_sum(g, dst, src, n)


class SegmentMeanPool:
    """Mean over nodes per graph segment."""

    def __init__(self):
        self._cache = None

    def forward(self, x, seg, n_seg):
        counts = np.bincount(seg, minlength=n_seg).astype(float)
        if np.any(counts == 0):
            raise ValueError("empty graph segment in batch")
        self._cache = (seg, counts)
        return kernels.segment_sum(x, seg, n_seg) / counts[:, None]

    def backward(self, g):
        seg, counts = self._cache
        return g[seg] / counts[seg][:, None]


class Adam:
    """Adaptive-moment optimizer over (name, param) pairs."""

    def __init__(self, named_params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.named_params = list(named_params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p) for name, p in self.named_params}
        self.v = {name: np.zeros_like(p) for name, p in self.named_params}

    def step(self, named_grads):
        self.t += 1
        grads = dict(named_grads)
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for name, p in self.named_params:
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
