"""Adaptive-moment optimizer with decoupled weight decay."""

import numpy as np

from .errors import NumericError, ValidationError


class Adam:
    """Adam with decoupled weight decay over a list of parameter tensors.

    ``m = b1*m + (1-b1)*g``, ``v = b2*v + (1-b2)*g^2``, then
    ``w -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * w)``.
    Gradients are zeroed after every step.
    """

    def __init__(self, params, lr, weight_decay=0.0, beta1=0.9, beta2=0.999, eps=1e-8):
        if lr <= 0:
            raise ValidationError(f"learning rate must be positive, got {lr}")
        if weight_decay < 0:
            raise ValidationError(f"weight decay must be non-negative, got {weight_decay}")
        self.params = list(params)
        self.lr = float(lr)
        self.weight_decay = float(weight_decay)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.value) for p in self.params]
        self.v = [np.zeros_like(p.value) for p in self.params]

    def step(self):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for i, p in enumerate(self.params):
            g = p.grad
            if g is None:
                g = np.zeros_like(p.value)
            elif not np.all(np.isfinite(g)):
                raise NumericError(f"non-finite gradient for parameter {p.name or i!r}")
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * (g * g)
            update = (self.m[i] / c1) / (np.sqrt(self.v[i] / c2) + self.eps)
            if self.weight_decay:
                update = update + self.weight_decay * p.value
            p.value = p.value - self.lr * update
            p.grad = None

    def zero_grad(self):
        for p in self.params:
            p.grad = None
