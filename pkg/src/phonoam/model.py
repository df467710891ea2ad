"""The full acoustic model: encoder -> embedding head -> logits -> loss.

Parameters live in a flat name -> array dict with "enc." and "head."
prefixes, which keeps the optimizer, freezing and checksumming generic.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import ctc as ctc_mod
from . import crf as crf_mod
from .crf import DenominatorGraph
from .encoder import EncoderConfig, encoder_backward, encoder_forward, init_encoder
from .heads import (
    Head,
    compute_embeddings,
    head_backward,
    head_kind,
    head_params,
    logits,
    make_flat_head,
    make_linear_head,
    make_nonlinear_head,
)
from .lm import PhoneLM


@dataclass
class AcousticModel:
    encoder_config: EncoderConfig
    encoder_params: dict[str, np.ndarray]
    head: Head
    P: np.ndarray  # N x 51 phonological-vectors, row order = units
    units: tuple[str, ...]

    @property
    def n_units(self) -> int:
        return len(self.units)

    def unit_index(self) -> dict[str, int]:
        return {u: i for i, u in enumerate(self.units)}


def build_model(
    units: tuple[str, ...],
    P: np.ndarray,
    encoder_config: EncoderConfig,
    head: str = "nonlinear",
    seed: int = 0,
    head_hidden: int = 512,
    head_activation: str = "sigmoid",
    head_bias: bool = False,
) -> AcousticModel:
    rng = np.random.default_rng(seed)
    enc_params = init_encoder(encoder_config, rng)
    width = encoder_config.output_dim
    if head == "flat":
        h = make_flat_head(len(units), width, rng)
    elif head == "linear":
        h = make_linear_head(width, rng, bias=head_bias)
    elif head == "nonlinear":
        h = make_nonlinear_head(
            width, rng, hidden=head_hidden, activation=head_activation, bias=head_bias
        )
    else:
        raise ValueError(f"unknown head kind {head!r}")
    return AcousticModel(
        encoder_config=encoder_config,
        encoder_params=enc_params,
        head=h,
        P=P,
        units=tuple(units),
    )


def model_params(model: AcousticModel) -> dict[str, np.ndarray]:
    out = {f"enc.{k}": v for k, v in model.encoder_params.items()}
    out.update({f"head.{k}": v for k, v in head_params(model.head).items()})
    return out


def set_model_params(model: AcousticModel, params: dict[str, np.ndarray]) -> None:
    for name, value in params.items():
        group, key = name.split(".", 1)
        if group == "enc":
            model.encoder_params[key] = value
        else:
            setattr(model.head, key, value)


def params_checksum(params: dict[str, np.ndarray]) -> str:
    digest = hashlib.sha256()
    for name in sorted(params):
        digest.update(name.encode())
        digest.update(np.ascontiguousarray(params[name]).tobytes())
    return digest.hexdigest()


def extend_model(
    model: AcousticModel,
    new_units: tuple[str, ...],
    new_P: np.ndarray,
    mode: str = "phonology",
    seed: int | None = None,
) -> AcousticModel:
    """New model covering extra units, without touching trained parameters.

    Phonology-driven heads use mode "phonology" (embeddings follow from the new
    phonological-vectors); flat heads get "random" or "mean_of_seen" rows,
    which then train as ordinary parameters during finetuning.
    """
    import copy

    from .heads import FlatHead, extend_flat_head, extend_inventory

    head = model.head
    if isinstance(head, FlatHead):
        rows = extend_inventory(head, new_P, mode=mode, seed=seed)
        head = extend_flat_head(head, rows)
    elif mode != "phonology":
        raise ValueError(f"mode {mode!r} only applies to flat heads")
    else:
        head = copy.deepcopy(head)  # finetuning the extension must not touch the original
    return AcousticModel(
        encoder_config=model.encoder_config,
        encoder_params=dict(model.encoder_params),
        head=head,
        P=np.concatenate([model.P, new_P], axis=0),
        units=model.units + tuple(new_units),
    )


def model_forward(model: AcousticModel, frames: np.ndarray, train_mode=False, seed=0):
    """Returns (Z, cache) where Z is the T x N logit matrix."""
    H_seq, enc_cache = encoder_forward(
        model.encoder_config, model.encoder_params, frames, train_mode, seed
    )
    E = compute_embeddings(model.head, model.P)
    Z = logits(E, H_seq)
    return Z, {"enc": enc_cache, "H_seq": H_seq, "E": E}


def model_loss_and_grads(
    model: AcousticModel,
    frames: np.ndarray,
    labels,
    loss: str = "ctc",
    lm: PhoneLM | None = None,
    graph: DenominatorGraph | None = None,
    train_mode: bool = False,
    seed: int = 0,
):
    """One utterance: (nll, grads dict) with exact analytic gradients."""
    Z, cache = model_forward(model, frames, train_mode=train_mode, seed=seed)
    if loss == "ctc":
        result = ctc_mod.ctc_loss(Z, labels)
    elif loss == "ctc_crf":
        result = crf_mod.crf_loss(Z, labels, lm, graph=graph)
    else:
        raise ValueError(f"unknown loss {loss!r}")

    dZ = result.dZ
    dH = dZ @ cache["E"]
    dE = dZ.T @ cache["H_seq"]
    enc_grads, _ = encoder_backward(
        model.encoder_config, model.encoder_params, cache["enc"], dH
    )
    h_grads = head_backward(model.head, model.P, dE)
    grads = {f"enc.{k}": v for k, v in enc_grads.items()}
    grads.update({f"head.{k}": v for k, v in h_grads.items()})
    return result.nll, grads
