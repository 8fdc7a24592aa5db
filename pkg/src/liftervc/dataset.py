"""Pooled training material: aligned frames from many utterance pairs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .align import AlignedPair, align_pair, trim_silence
from .config import AnalysisConfig
from .spectral import Waveform


@dataclass
class TrainingSet:
    """Frame-level training data pooled over utterances.

    src_cep, tgt_cep: (T, c) aligned cepstra. src_spec: (T, fft_len) complex
    source spectra at the warped positions. offsets: utterance boundaries,
    offsets[u]..offsets[u+1] is utterance u's frame range.
    """

    src_cep: np.ndarray
    tgt_cep: np.ndarray
    src_spec: np.ndarray
    offsets: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        if not (len(self.src_cep) == len(self.tgt_cep) == len(self.src_spec)):
            raise ValueError("frame arrays must have equal length")
        if self.offsets is None:
            self.offsets = np.array([0, len(self.src_cep)], dtype=np.intp)
        self.offsets = np.asarray(self.offsets, dtype=np.intp)
        if self.offsets[0] != 0 or self.offsets[-1] != len(self.src_cep):
            raise ValueError("offsets must start at 0 and end at frame count")

    def __len__(self) -> int:
        return len(self.src_cep)

    @property
    def n_utterances(self) -> int:
        return len(self.offsets) - 1

    def utterance(self, u: int) -> AlignedPair:
        a, b = self.offsets[u], self.offsets[u + 1]
        return AlignedPair(self.src_cep[a:b], self.tgt_cep[a:b], self.src_spec[a:b])

    def save(self, path, cfg: AnalysisConfig) -> None:
        meta = json.dumps({
            "sample_rate": cfg.sample_rate, "window_len": cfg.window_len,
            "hop": cfg.hop, "fft_len": cfg.fft_len, "cep_dim": cfg.cep_dim,
            "window": cfg.window}, sort_keys=True)
        np.savez(path, src_cep=self.src_cep, tgt_cep=self.tgt_cep,
                 src_spec=self.src_spec, offsets=self.offsets,
                 meta=np.array(meta))

    @classmethod
    def load(cls, path, cfg: AnalysisConfig | None = None
             ) -> "tuple[TrainingSet, AnalysisConfig]":
        with np.load(path) as data:
            meta = AnalysisConfig(**json.loads(str(data["meta"])))
            if cfg is not None and meta != cfg:
                raise ValueError(
                    f"dataset analysis config {meta} does not match expected {cfg}")
            ts = cls(src_cep=data["src_cep"], tgt_cep=data["tgt_cep"],
                     src_spec=data["src_spec"], offsets=data["offsets"])
        return ts, meta


def concat_pairs(pairs: "list[AlignedPair]") -> TrainingSet:
    if not pairs:
        raise ValueError("no utterance pairs")
    offsets = np.cumsum([0] + [len(p) for p in pairs])
    return TrainingSet(
        src_cep=np.concatenate([p.src_cep for p in pairs]),
        tgt_cep=np.concatenate([p.tgt_cep for p in pairs]),
        src_spec=np.concatenate([p.src_spec for p in pairs]),
        offsets=offsets)


def build_dataset(waves: "list[tuple[Waveform, Waveform]]", cfg: AnalysisConfig,
                  trim_db: float | None = 40.0) -> TrainingSet:
    """Trim, analyze, and align each (source, target) waveform pair, then
    pool the frames. trim_db=None skips silence removal (evaluation data)."""
    aligned = []
    for src, tgt in waves:
        if trim_db is not None:
            src = trim_silence(src, cfg, trim_db)
            tgt = trim_silence(tgt, cfg, trim_db)
        aligned.append(align_pair(src, tgt, cfg))
    return concat_pairs(aligned)
