"""Adam with step learning-rate decay."""
from __future__ import annotations

import numpy as np


class Adam:
    def __init__(self, params: list[np.ndarray], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8, decay: float = 0.5,
                 decay_every: int = 1000):
        self.params = params
        self.lr0 = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.decay, self.decay_every = decay, decay_every
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def lr_at(self, epoch: int) -> float:
        if not self.decay_every:
            return self.lr0
        return self.lr0 * self.decay ** (epoch // self.decay_every)

    def step(self, grads: list[np.ndarray], epoch: int) -> None:
        """In-place update of every parameter array."""
        self.t += 1
        lr = self.lr_at(epoch)
        c1 = 1 - self.beta1 ** self.t
        c2 = 1 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
