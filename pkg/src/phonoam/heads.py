"""Phone-embedding heads and the joining of embeddings with acoustic output.

Three head kinds produce the embedding matrix E (one row per unit):

* FlatHead      -- E is a free parameter matrix (the traditional baseline).
* LinearHead    -- e_i = A p_i, a linear map of the 51-bit phonological-vector.
* NonlinearHead -- e_i = A2 sigma(A1 p_i), one hidden layer.

Logits are the dot products z[t, i] = <e_i, h_t> of embeddings with the
acoustic encoder output; phone posteriors are the row-wise softmax.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .activations import get_activation
from .errors import DimensionMismatch, ModeHeadMismatch, NonFiniteInput
from .features import VECTOR_BITS


@dataclass
class FlatHead:
    E: np.ndarray  # N x H


@dataclass
class LinearHead:
    A: np.ndarray  # H x 51
    b: np.ndarray | None = None  # H, off by default


@dataclass
class NonlinearHead:
    A1: np.ndarray  # Dh x 51
    A2: np.ndarray  # H x Dh
    b1: np.ndarray | None = None
    b2: np.ndarray | None = None
    activation: str = "sigmoid"


Head = FlatHead | LinearHead | NonlinearHead

HEAD_KINDS = {"flat", "linear", "nonlinear"}


def head_kind(head: Head) -> str:
    return {FlatHead: "flat", LinearHead: "linear", NonlinearHead: "nonlinear"}[
        type(head)
    ]


def _glorot(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def make_flat_head(n_units: int, width: int, rng: np.random.Generator) -> FlatHead:
    return FlatHead(E=_glorot(rng, n_units, width))


def make_linear_head(
    width: int, rng: np.random.Generator, bias: bool = False
) -> LinearHead:
    b = np.zeros(width) if bias else None
    return LinearHead(A=_glorot(rng, width, VECTOR_BITS), b=b)


def make_nonlinear_head(
    width: int,
    rng: np.random.Generator,
    hidden: int = 512,
    activation: str = "sigmoid",
    bias: bool = False,
) -> NonlinearHead:
    return NonlinearHead(
        A1=_glorot(rng, hidden, VECTOR_BITS),
        A2=_glorot(rng, width, hidden),
        b1=np.zeros(hidden) if bias else None,
        b2=np.zeros(width) if bias else None,
        activation=activation,
    )


def compute_embeddings(head: Head, P: np.ndarray) -> np.ndarray:
    """Embedding matrix E (N x H) for the units whose vectors are the rows of P."""
    if isinstance(head, FlatHead):
        if P is not None and P.shape[0] != head.E.shape[0]:
            raise DimensionMismatch(
                f"flat head has {head.E.shape[0]} rows, P has {P.shape[0]}"
            )
        return head.E
    if P.ndim != 2 or P.shape[1] != VECTOR_BITS:
        raise DimensionMismatch(f"P must be N x {VECTOR_BITS}, got {P.shape}")
    if isinstance(head, LinearHead):
        E = P @ head.A.T
        if head.b is not None:
            E = E + head.b
        return E
    act, _ = get_activation(head.activation)
    pre = P @ head.A1.T
    if head.b1 is not None:
        pre = pre + head.b1
    E = act(pre) @ head.A2.T
    if head.b2 is not None:
        E = E + head.b2
    return E


def logits(E: np.ndarray, H_seq: np.ndarray) -> np.ndarray:
    """z[t, i] = dot(E[i], H_seq[t]); no normalization."""
    if E.shape[1] != H_seq.shape[1]:
        raise DimensionMismatch(
            f"embedding width {E.shape[1]} != encoder width {H_seq.shape[1]}"
        )
    return H_seq @ E.T


def posteriors(Z: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    if not np.all(np.isfinite(Z)):
        raise NonFiniteInput("logits contain non-finite entries")
    shifted = Z - Z.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def log_posteriors(Z: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(Z)):
        raise NonFiniteInput("logits contain non-finite entries")
    shifted = Z - Z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def extend_inventory(
    head: Head,
    new_P: np.ndarray,
    mode: str = "phonology",
    seed: int | None = None,
) -> np.ndarray:
    """Embedding rows for M new units described by the rows of new_P.

    phonology    -- phonology-driven heads only: the same deterministic map as
                    compute_embeddings, with no parameter updates.
    random       -- FlatHead only: seeded Gaussian rows (mean 0, std 0.01).
    mean_of_seen -- FlatHead only: every new row is the mean of existing rows.
    """
    if new_P.ndim != 2 or new_P.shape[1] != VECTOR_BITS:
        raise DimensionMismatch(f"new_P must be M x {VECTOR_BITS}, got {new_P.shape}")
    m = new_P.shape[0]
    if mode == "phonology":
        if isinstance(head, FlatHead):
            raise ModeHeadMismatch("phonology extension requires a phonology-driven head")
        return compute_embeddings(head, new_P)
    if not isinstance(head, FlatHead):
        raise ModeHeadMismatch(f"{mode!r} extension targets FlatHead")
    width = head.E.shape[1]
    if mode == "random":
        rng = np.random.default_rng(seed)
        return rng.normal(0.0, 0.01, size=(m, width))
    if mode == "mean_of_seen":
        return np.tile(head.E.mean(axis=0), (m, 1))
    raise ModeHeadMismatch(f"unknown extension mode {mode!r}")


def extend_flat_head(head: FlatHead, rows: np.ndarray) -> FlatHead:
    """New FlatHead with `rows` appended (used after inventory extension)."""
    return FlatHead(E=np.concatenate([head.E, rows], axis=0))


def head_backward(head: Head, P: np.ndarray, dE: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss w.r.t. head parameters, given dL/dE."""
    if isinstance(head, FlatHead):
        if dE.shape != head.E.shape:
            raise DimensionMismatch(f"dE shape {dE.shape} != E shape {head.E.shape}")
        return {"E": dE}
    if dE.shape[0] != P.shape[0]:
        raise DimensionMismatch(f"dE rows {dE.shape[0]} != P rows {P.shape[0]}")
    if isinstance(head, LinearHead):
        grads = {"A": dE.T @ P}
        if head.b is not None:
            grads["b"] = dE.sum(axis=0)
        return grads
    act, deriv = get_activation(head.activation)
    pre = P @ head.A1.T
    if head.b1 is not None:
        pre = pre + head.b1
    hidden = act(pre)
    dA2 = dE.T @ hidden
    d_hidden = dE @ head.A2
    d_pre = d_hidden * deriv(hidden)
    grads = {"A1": d_pre.T @ P, "A2": dA2}
    if head.b1 is not None:
        grads["b1"] = d_pre.sum(axis=0)
    if head.b2 is not None:
        grads["b2"] = dE.sum(axis=0)
    return grads


def head_params(head: Head) -> dict[str, np.ndarray]:
    """Named trainable parameters of a head."""
    if isinstance(head, FlatHead):
        return {"E": head.E}
    if isinstance(head, LinearHead):
        out = {"A": head.A}
        if head.b is not None:
            out["b"] = head.b
        return out
    out = {"A1": head.A1, "A2": head.A2}
    if head.b1 is not None:
        out["b1"] = head.b1
    if head.b2 is not None:
        out["b2"] = head.b2
    return out


def set_head_params(head: Head, params: dict[str, np.ndarray]) -> None:
    for name, value in params.items():
        setattr(head, name, value)
