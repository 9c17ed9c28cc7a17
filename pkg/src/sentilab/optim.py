"""Adam optimizer, exponential learning-rate schedule, and gradient checking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence

import numpy as np

from .errors import ShapeMismatch
from .layers import Parameter


@dataclass
class LrSchedule:
    """Exponential decay: lr(epoch) = lr0 * exp(-k * epoch)."""

    lr0: float = 4e-5
    k: float = 0.1


def lr_at(schedule: LrSchedule, epoch: int) -> float:
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    return schedule.lr0 * math.exp(-schedule.k * epoch)


@dataclass
class AdamState:
    m: Dict[str, np.ndarray]
    v: Dict[str, np.ndarray]
    t: int
    lr: float
    beta1: float
    beta2: float
    eps: float


class Adam:
    """Adam with bias correction: w -= lr * m_hat / (sqrt(v_hat) + eps)."""

    def __init__(
        self,
        params: Sequence[Parameter],
        lr: float = 4e-5,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = list(params)
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ShapeMismatch("duplicate parameter names")
        self.state = AdamState(
            m={p.name: np.zeros_like(p.data, dtype=np.float64) for p in self.params},
            v={p.name: np.zeros_like(p.data, dtype=np.float64) for p in self.params},
            t=0,
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )

    def zero_grad(self) -> None:
        for p in self.params:
            p.tensor.zero_grad()

    def step(self, lr: float | None = None) -> None:
        """Apply one update using each parameter's accumulated gradient."""
        s = self.state
        s.t += 1
        lr = s.lr if lr is None else lr
        bc1 = 1.0 - s.beta1**s.t
        bc2 = 1.0 - s.beta2**s.t
        for p in self.params:
            g = p.grad
            if g is None:
                continue
            if g.shape != p.data.shape:
                raise ShapeMismatch(f"gradient shape {g.shape} != param shape {p.data.shape}")
            m = s.m[p.name]
            v = s.v[p.name]
            m *= s.beta1
            m += (1.0 - s.beta1) * g
            v *= s.beta2
            v += (1.0 - s.beta2) * (g.astype(np.float64) ** 2)
            m_hat = m / bc1
            v_hat = v / bc2
            p.tensor.data -= (lr * m_hat / (np.sqrt(v_hat) + s.eps)).astype(p.data.dtype)


def gradient_check(
    loss_fn: Callable[[], "object"],
    params: Sequence[Parameter],
    h: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``loss_fn`` must rebuild the graph from the current parameter values and
    return a scalar Tensor; any randomness inside it must be re-seeded per
    call so ±h evaluations see the same draw.  Parameters should be float64.
    """
    loss = loss_fn()
    for p in params:
        p.tensor.zero_grad()
    loss = loss_fn()
    loss.backward()
    analytic = {p.name: (np.zeros_like(p.data) if p.grad is None else p.grad.copy()) for p in params}

    worst = 0.0
    for p in params:
        flat = p.tensor.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            f_plus = loss_fn().item()
            flat[i] = orig - h
            f_minus = loss_fn().item()
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            a = analytic[p.name].reshape(-1)[i]
            denom = max(abs(a) + abs(numeric), 1e-8)
            worst = max(worst, abs(a - numeric) / denom)
    return worst
