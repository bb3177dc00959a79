"""Adaptive-moment optimizer over the model's named parameter arrays."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatchError
from .model import ModelParams, named_arrays

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_init(params: ModelParams) -> AdamState:
    state = AdamState()
    for name, arr in named_arrays(params):
        state.m[name] = np.zeros_like(arr)
        state.v[name] = np.zeros_like(arr)
    return state


def adam_step(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
) -> None:
    """One bias-corrected moment update, applied to params in place."""
    state.t += 1
    bc1 = 1.0 - BETA1**state.t
    bc2 = 1.0 - BETA2**state.t
    for name, arr in named_arrays(params):
        g = grads[name]
        if g.shape != arr.shape:
            raise ShapeMismatchError(
                f"gradient {name} has shape {g.shape}, expected {arr.shape}"
            )
        m = state.m[name]
        v = state.v[name]
        m *= BETA1
        m += (1.0 - BETA1) * g
        v *= BETA2
        v += (1.0 - BETA2) * g * g
        arr -= lr * (m / bc1) / (np.sqrt(v / bc2) + EPSILON)
