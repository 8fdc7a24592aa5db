"""Conventional pretraining and truncation-aware joint training."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chain import backward_chain, forward_chain
from .config import TrainConfig
from .dataset import TrainingSet
from .filters import SubbandGate
from .model import AcousticModel, Adam

STD_FLOOR = 1e-8


@dataclass
class EpochRow:
    epoch: int
    train_loss: float
    val_loss: float
    rmse: float
    wall_time_s: float


@dataclass
class TrainLog:
    """Per-epoch training record, serialized as CSV."""

    rows: list = field(default_factory=list)

    columns = ("epoch", "train_loss", "val_loss", "rmse", "wall_time_s")

    def append(self, row: EpochRow) -> None:
        self.rows.append(row)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(self.columns) + "\n")
            for r in self.rows:
                fh.write(f"{r.epoch},{r.train_loss!r},{r.val_loss!r},"
                         f"{r.rmse!r},{r.wall_time_s:.3f}\n")

    def loss_log_bytes(self) -> bytes:
        """The log without the wall-clock column, whose timings vary from run
        to run; everything else is reproducible bit for bit."""
        lines = ["epoch,train_loss,val_loss,rmse"]
        lines += [f"{r.epoch},{r.train_loss!r},{r.val_loss!r},{r.rmse!r}"
                  for r in self.rows]
        return ("\n".join(lines) + "\n").encode()

    @classmethod
    def from_csv(cls, path) -> "TrainLog":
        log = cls()
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                log.append(EpochRow(
                    epoch=int(rec["epoch"]),
                    train_loss=float(rec["train_loss"]),
                    val_loss=float(rec["val_loss"]),
                    rmse=float(rec["rmse"]),
                    wall_time_s=float(rec["wall_time_s"])))
        return log


def set_normalization(model: AcousticModel, data: TrainingSet) -> None:
    """Freeze feature statistics into the model: inputs are z-scored by the
    source cepstra, outputs are de-normalized by the target-minus-source
    differential statistics."""
    model.in_mean = data.src_cep.mean(axis=0)
    model.in_std = np.maximum(data.src_cep.std(axis=0), STD_FLOOR)
    diff = data.tgt_cep - data.src_cep
    model.out_mean = diff.mean(axis=0)
    model.out_std = np.maximum(diff.std(axis=0), STD_FLOOR)


def cepstral_loss(model: AcousticModel, data: TrainingSet,
                  batch_size: int = 4096) -> float:
    """Mean squared cepstral error of the conventional additive estimate
    (source plus predicted differential), in inference mode."""
    total = 0.0
    for a in range(0, len(data), batch_size):
        xb = data.src_cep[a:a + batch_size]
        err = xb + model.forward(xb) - data.tgt_cep[a:a + batch_size]
        total += float((err * err).sum())
    return total / len(data)


def chain_loss(model: AcousticModel, data: TrainingSet, taps: int,
               gate: SubbandGate | None = None,
               lifter: np.ndarray | None = None,
               batch_size: int = 2048) -> float:
    """Mean squared cepstral error through the truncation chain, in
    inference mode. A lifter override scores the model against coefficients
    other than its own (e.g. the fixed minimum-phase lifter)."""
    total = 0.0
    for a in range(0, len(data), batch_size):
        result = forward_chain(
            model, data.src_cep[a:a + batch_size],
            data.src_spec[a:a + batch_size],
            data.tgt_cep[a:a + batch_size], taps, gate=gate, lifter=lifter)
        total += float(result.frame_losses.sum())
    return total / len(data)


def _batches(n_frames: int, batch_size: int, rng: np.random.Generator):
    perm = rng.permutation(n_frames)
    for a in range(0, n_frames, batch_size):
        yield perm[a:a + batch_size]


def pretrain_conventional(model: AcousticModel, data: TrainingSet,
                          cfg: TrainConfig,
                          val_data: TrainingSet | None = None) -> TrainLog:
    """Conventional cepstral-domain training.

    Minimizes the mean squared error between the target cepstrum and
    source + predicted differential over shuffled frame batches, and sets
    the model's normalization statistics from the training set. The reported
    rmse is the root of the validation loss.
    """
    if len(data) == 0:
        raise ValueError("empty training set")
    set_normalization(model, data)
    rng = np.random.default_rng(cfg.seed)
    entries = model.trainable_entries()
    opt = Adam([arr for _, arr in entries], lr=cfg.pretrain_lr)
    log = TrainLog()
    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        total = 0.0
        for idx in _batches(len(data), cfg.batch_size, rng):
            xb = data.src_cep[idx]
            cep_d, cache = model.forward(xb, train=True, return_cache=True)
            err = xb + cep_d - data.tgt_cep[idx]
            total += float((err * err).sum())
            grads, _ = model.backward(cache, (2.0 / len(idx)) * err)
            opt.step([grads[name] for name, _ in entries])
        train_loss = total / len(data)
        val_loss = cepstral_loss(model, val_data) if val_data is not None else train_loss
        log.append(EpochRow(epoch, train_loss, val_loss, float(np.sqrt(val_loss)),
                            time.perf_counter() - t0))
    return log


def train_lifter(model: AcousticModel, data: TrainingSet, cfg: TrainConfig,
                 val_data: TrainingSet | None = None,
                 gate: SubbandGate | None = None) -> TrainLog:
    """Joint fine-tuning of the model and its lifter through the truncation
    chain at cfg.taps.

    The model should be pretrained and its lifter initialized to the
    minimum-phase prefix; training marks the lifter trainable and updates it
    together with the network by Adam. The reported rmse is the root of the
    validation chain loss at cfg.taps.
    """
    if len(data) == 0:
        raise ValueError("empty training set")
    model.lifter.trainable = True
    rng = np.random.default_rng(cfg.seed)
    entries = model.trainable_entries(include_lifter=True)
    opt = Adam([arr for _, arr in entries], lr=cfg.finetune_lr)
    log = TrainLog()
    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        total = 0.0
        for idx in _batches(len(data), cfg.batch_size, rng):
            result = forward_chain(
                model, data.src_cep[idx], data.src_spec[idx],
                data.tgt_cep[idx], cfg.taps, gate=gate, train=True,
                keep_cache=True)
            total += float(result.frame_losses.sum())
            grads = backward_chain(model, result)
            opt.step([grads[name] for name, _ in entries])
        train_loss = total / len(data)
        val_loss = (chain_loss(model, val_data, cfg.taps, gate=gate)
                    if val_data is not None else train_loss)
        log.append(EpochRow(epoch, train_loss, val_loss, float(np.sqrt(val_loss)),
                            time.perf_counter() - t0))
    return log
