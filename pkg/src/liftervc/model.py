"""Gated-linear-unit acoustic model, Adam optimizer, and model file I/O.

The model maps a source cepstrum to a differential cepstrum: inputs are
normalized by training-set statistics, passed through two GLU hidden layers
(tanh value branch times sigmoid gate branch, batch norm before each
activation), projected linearly back to cepstrum size, and de-normalized by
the training-set statistics of the target differential.

Model file layout (all little-endian):

    bytes 0..7    magic "LVCMODEL"
    bytes 8..11   format version (uint32, currently 1)
    bytes 12..15  config length L (uint32)
    bytes 16..    config JSON (L bytes, sorted keys)
    then          float64 parameter blocks in param_entries() order:
                  in_mean, in_std, out_mean, out_std, lifter, then per GLU
                  layer {w_value, b_value, bn_value gamma/beta/running_mean/
                  running_var, w_gate, b_gate, bn_gate gamma/beta/
                  running_mean/running_var}, then w_out, b_out.

Shapes are implied by the config block, so a save/load/save round trip is
byte-identical.
"""

from __future__ import annotations

import copy
import json
import struct
from pathlib import Path

import numpy as np

from .cepstral import Lifter
from .config import AnalysisConfig

BN_EPS = 1e-5
BN_MOMENTUM = 0.1
MAGIC = b"LVCMODEL"
FORMAT_VERSION = 1

NARROW_BAND_HIDDEN = (280, 100)
FULL_BAND_HIDDEN = (840, 300)


class ModelFileError(ValueError):
    """Raised when a model file is malformed or inconsistent."""


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))


class BatchNorm:
    """Per-feature batch normalization with running statistics."""

    def __init__(self, dim: int):
        self.gamma = np.ones(dim)
        self.beta = np.zeros(dim)
        self.running_mean = np.zeros(dim)
        self.running_var = np.ones(dim)

    def forward(self, x, train: bool, update_stats: bool):
        if train:
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            if update_stats:
                self.running_mean += BN_MOMENTUM * (mean - self.running_mean)
                self.running_var += BN_MOMENTUM * (var - self.running_var)
        else:
            mean = self.running_mean
            var = self.running_var
        inv = 1.0 / np.sqrt(var + BN_EPS)
        xhat = (x - mean) * inv
        return self.gamma * xhat + self.beta, (xhat, inv, train, x.shape[0])

    def backward(self, cache, gy):
        xhat, inv, train, batch = cache
        ggamma = (gy * xhat).sum(axis=0)
        gbeta = gy.sum(axis=0)
        gxhat = gy * self.gamma
        if train:
            # Batch statistics depend on every row; standard coupled backward.
            gx = (inv / batch) * (batch * gxhat - gxhat.sum(axis=0)
                                  - xhat * (gxhat * xhat).sum(axis=0))
        else:
            gx = gxhat * inv
        return gx, ggamma, gbeta


class GluLayer:
    """One gated hidden layer: tanh(BN(W_v x + b_v)) * sigmoid(BN(W_g x + b_g))."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        bound = np.sqrt(1.0 / in_dim)
        self.w_value = rng.uniform(-bound, bound, (out_dim, in_dim))
        self.b_value = np.zeros(out_dim)
        self.w_gate = rng.uniform(-bound, bound, (out_dim, in_dim))
        self.b_gate = np.zeros(out_dim)
        self.bn_value = BatchNorm(out_dim)
        self.bn_gate = BatchNorm(out_dim)

    def forward(self, x, train: bool, update_stats: bool):
        pre_v = x @ self.w_value.T + self.b_value
        pre_g = x @ self.w_gate.T + self.b_gate
        norm_v, cache_v = self.bn_value.forward(pre_v, train, update_stats)
        norm_g, cache_g = self.bn_gate.forward(pre_g, train, update_stats)
        value = np.tanh(norm_v)
        gate = sigmoid(norm_g)
        return value * gate, (x, cache_v, cache_g, value, gate)

    def backward(self, cache, gout):
        x, cache_v, cache_g, value, gate = cache
        gnorm_v = gout * gate * (1.0 - value * value)
        gnorm_g = gout * value * gate * (1.0 - gate)
        gpre_v, ggamma_v, gbeta_v = self.bn_value.backward(cache_v, gnorm_v)
        gpre_g, ggamma_g, gbeta_g = self.bn_gate.backward(cache_g, gnorm_g)
        gx = gpre_v @ self.w_value + gpre_g @ self.w_gate
        grads = {
            "w_value": gpre_v.T @ x, "b_value": gpre_v.sum(axis=0),
            "bn_value.gamma": ggamma_v, "bn_value.beta": gbeta_v,
            "w_gate": gpre_g.T @ x, "b_gate": gpre_g.sum(axis=0),
            "bn_gate.gamma": ggamma_g, "bn_gate.beta": gbeta_g,
        }
        return gx, grads


def default_hidden(cfg: AnalysisConfig) -> tuple:
    return FULL_BAND_HIDDEN if cfg.sample_rate >= 48000 else NARROW_BAND_HIDDEN


class AcousticModel:
    """GLU MLP plus feature-normalization statistics and the lifter."""

    def __init__(self, cfg: AnalysisConfig, hidden: tuple | None = None,
                 seed: int = 0):
        self.cfg = cfg
        self.hidden = tuple(hidden) if hidden is not None else default_hidden(cfg)
        rng = np.random.default_rng(seed)
        dims = (cfg.cep_dim,) + self.hidden
        self.layers = [GluLayer(dims[i], dims[i + 1], rng)
                       for i in range(len(self.hidden))]
        bound = np.sqrt(1.0 / dims[-1])
        self.w_out = rng.uniform(-bound, bound, (cfg.cep_dim, dims[-1]))
        self.b_out = np.zeros(cfg.cep_dim)
        self.in_mean = np.zeros(cfg.cep_dim)
        self.in_std = np.ones(cfg.cep_dim)
        self.out_mean = np.zeros(cfg.cep_dim)
        self.out_std = np.ones(cfg.cep_dim)
        self.lifter = Lifter.minimum_phase(cfg)

    # -- inference / training math -------------------------------------------

    def forward(self, cep, train: bool = False, update_stats: bool | None = None,
                return_cache: bool = False):
        """Map source cepstra (B, c) or (c,) to differential cepstra.

        train selects batch statistics for batch norm (and, unless
        update_stats=False, folds them into the running statistics); otherwise
        the stored running statistics are used and rows are independent.
        """
        if update_stats is None:
            update_stats = train
        cep = np.asarray(cep, dtype=np.float64)
        single = cep.ndim == 1
        x = cep[None, :] if single else cep
        if x.shape[1] != self.cfg.cep_dim:
            raise ValueError(f"expected {self.cfg.cep_dim} cepstral dims, got {x.shape[1]}")
        xn = (x - self.in_mean) / self.in_std
        caches = []
        h = xn
        for layer in self.layers:
            h, cache = layer.forward(h, train, update_stats)
            caches.append(cache)
        y = h @ self.w_out.T + self.b_out
        out = y * self.out_std + self.out_mean
        if not return_cache:
            return out[0] if single else out
        return (out[0] if single else out), (caches, h)

    def backward(self, cache, gout):
        """Gradients of a scalar loss w.r.t. all trainable parameters and the
        input, given the loss gradient w.r.t. the de-normalized output."""
        caches, h_last = cache
        gout = np.atleast_2d(np.asarray(gout, dtype=np.float64))
        gy = gout * self.out_std
        grads = {"w_out": gy.T @ h_last, "b_out": gy.sum(axis=0)}
        gh = gy @ self.w_out
        for i in reversed(range(len(self.layers))):
            gh, layer_grads = self.layers[i].backward(caches[i], gh)
            for name, g in layer_grads.items():
                grads[f"layers.{i}.{name}"] = g
        gx = gh / self.in_std
        return grads, gx

    # -- parameter bookkeeping -------------------------------------------------

    def trainable_entries(self, include_lifter: bool = False) -> list:
        """(name, array) pairs for everything the optimizer may update."""
        entries = []
        for i, layer in enumerate(self.layers):
            entries += [
                (f"layers.{i}.w_value", layer.w_value),
                (f"layers.{i}.b_value", layer.b_value),
                (f"layers.{i}.bn_value.gamma", layer.bn_value.gamma),
                (f"layers.{i}.bn_value.beta", layer.bn_value.beta),
                (f"layers.{i}.w_gate", layer.w_gate),
                (f"layers.{i}.b_gate", layer.b_gate),
                (f"layers.{i}.bn_gate.gamma", layer.bn_gate.gamma),
                (f"layers.{i}.bn_gate.beta", layer.bn_gate.beta),
            ]
        entries += [("w_out", self.w_out), ("b_out", self.b_out)]
        if include_lifter:
            entries.append(("lifter", self.lifter.coeffs))
        return entries

    def param_entries(self) -> list:
        """(name, array) pairs for everything serialized, in file order."""
        entries = [
            ("in_mean", self.in_mean), ("in_std", self.in_std),
            ("out_mean", self.out_mean), ("out_std", self.out_std),
            ("lifter", self.lifter.coeffs),
        ]
        for i, layer in enumerate(self.layers):
            for branch in ("value", "gate"):
                bn = getattr(layer, f"bn_{branch}")
                entries += [
                    (f"layers.{i}.w_{branch}", getattr(layer, f"w_{branch}")),
                    (f"layers.{i}.b_{branch}", getattr(layer, f"b_{branch}")),
                    (f"layers.{i}.bn_{branch}.gamma", bn.gamma),
                    (f"layers.{i}.bn_{branch}.beta", bn.beta),
                    (f"layers.{i}.bn_{branch}.running_mean", bn.running_mean),
                    (f"layers.{i}.bn_{branch}.running_var", bn.running_var),
                ]
        entries += [("w_out", self.w_out), ("b_out", self.b_out)]
        return entries

    def copy(self) -> "AcousticModel":
        return copy.deepcopy(self)


def constant_model(cfg: AnalysisConfig, cep_d: np.ndarray,
                   hidden: tuple | None = None) -> AcousticModel:
    """A model that emits the fixed differential cepstrum cep_d for any input.

    All weights are zero, so the GLU output vanishes and the de-normalization
    offset carries the constant. Useful for identity checks and synthetic
    tasks with a known answer.
    """
    model = AcousticModel(cfg, hidden=hidden, seed=0)
    for layer in model.layers:
        layer.w_value[:] = 0.0
        layer.w_gate[:] = 0.0
    model.w_out[:] = 0.0
    model.out_mean = np.asarray(cep_d, dtype=np.float64).copy()
    model.out_std = np.zeros(cfg.cep_dim)
    return model


class Adam:
    """Bias-corrected Adam over a list of parameter arrays, updated in place."""

    def __init__(self, params, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]
        self.t = 0

    def step(self, grads) -> None:
        grads = list(grads)
        if len(grads) != len(self.params):
            raise ValueError("gradient count does not match parameter count")
        for p, g in zip(self.params, grads):
            if np.shape(g) != p.shape:
                raise ValueError(f"gradient shape {np.shape(g)} != param shape {p.shape}")
        self.t += 1
        correct1 = 1.0 - self.beta1 ** self.t
        correct2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / correct1) / (np.sqrt(v / correct2) + self.eps)


# -- serialization ---------------------------------------------------------


def _config_block(model: AcousticModel) -> bytes:
    doc = {
        "sample_rate": model.cfg.sample_rate,
        "window_len": model.cfg.window_len,
        "hop": model.cfg.hop,
        "fft_len": model.cfg.fft_len,
        "cep_dim": model.cfg.cep_dim,
        "window": model.cfg.window,
        "hidden": list(model.hidden),
        "lifter_trainable": bool(model.lifter.trainable),
        "bn_eps": BN_EPS,
        "bn_momentum": BN_MOMENTUM,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


def save_model(model: AcousticModel, path) -> None:
    blob = _config_block(model)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, arr in model.param_entries():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path, expected_cfg: AnalysisConfig | None = None) -> AcousticModel:
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 8 or data[:len(MAGIC)] != MAGIC:
        raise ModelFileError("not a model file (bad magic)")
    version, = struct.unpack_from("<I", data, len(MAGIC))
    if version != FORMAT_VERSION:
        raise ModelFileError(f"unsupported model format version {version}")
    blob_len, = struct.unpack_from("<I", data, len(MAGIC) + 4)
    offset = len(MAGIC) + 8
    if offset + blob_len > len(data):
        raise ModelFileError("corrupt model file (truncated config)")
    try:
        doc = json.loads(data[offset:offset + blob_len])
        cfg = AnalysisConfig(
            sample_rate=doc["sample_rate"], window_len=doc["window_len"],
            hop=doc["hop"], fft_len=doc["fft_len"], cep_dim=doc["cep_dim"],
            window=doc["window"])
        hidden = tuple(doc["hidden"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ModelFileError(f"corrupt model file (bad config: {exc})") from exc
    if expected_cfg is not None and cfg != expected_cfg:
        raise ModelFileError(
            f"model analysis config {cfg} does not match expected {expected_cfg}")

    model = AcousticModel(cfg, hidden=hidden, seed=0)
    model.lifter.trainable = bool(doc.get("lifter_trainable", False))
    offset += blob_len
    for name, arr in model.param_entries():
        nbytes = arr.size * 8
        if offset + nbytes > len(data):
            raise ModelFileError(f"corrupt model file (truncated at {name})")
        values = np.frombuffer(data, dtype="<f8", count=arr.size, offset=offset)
        arr[...] = values.reshape(arr.shape)
        offset += nbytes
    if offset != len(data):
        raise ModelFileError("corrupt model file (trailing bytes)")
    return model
