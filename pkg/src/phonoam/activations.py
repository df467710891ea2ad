"""Scalar nonlinearities with derivatives expressed via the forward output."""

import numpy as np


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _sigmoid_deriv(y):
    return y * (1.0 - y)


def _tanh_deriv(y):
    return 1.0 - y * y


def _relu(x):
    return np.maximum(x, 0.0)


def _relu_deriv(y):
    return (y > 0).astype(y.dtype)


# name -> (forward, derivative as a function of the forward OUTPUT)
ACTIVATIONS = {
    "sigmoid": (sigmoid, _sigmoid_deriv),
    "tanh": (np.tanh, _tanh_deriv),
    "relu": (_relu, _relu_deriv),
}


def get_activation(name: str):
    if name not in ACTIVATIONS:
        raise KeyError(f"unknown activation {name!r}; choices: {sorted(ACTIVATIONS)}")
    return ACTIVATIONS[name]
