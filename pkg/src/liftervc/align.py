"""Silence trimming and dynamic-time-warping alignment of utterance pairs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cepstral import real_cepstrum
from .config import AnalysisConfig
from .spectral import Waveform, stft


def trim_silence(wave: Waveform, cfg: AnalysisConfig,
                 threshold_db: float = 40.0) -> Waveform:
    """Drop hop-length blocks whose RMS is more than threshold_db below the
    loudest block; the remaining blocks are concatenated.

    Raises on input with no energy at all (there is no reference level).
    """
    if len(wave) == 0:
        raise ValueError("empty waveform")
    samples = wave.samples
    hop = cfg.hop
    n_blocks = -(-samples.size // hop)
    padded = np.zeros(n_blocks * hop)
    padded[:samples.size] = samples
    blocks = padded.reshape(n_blocks, hop)
    # RMS of the final partial block uses its true sample count.
    counts = np.full(n_blocks, hop)
    counts[-1] = samples.size - (n_blocks - 1) * hop
    rms = np.sqrt((blocks * blocks).sum(axis=1) / counts)
    peak = rms.max()
    if peak == 0.0:
        raise ValueError("waveform is entirely silent")
    keep = rms >= peak * 10.0 ** (-threshold_db / 20.0)
    if not keep.any():
        raise ValueError("no audio left after silence trimming")
    kept = [blocks[t][:counts[t]] for t in np.flatnonzero(keep)]
    return Waveform(np.concatenate(kept), wave.sample_rate)


def alignment_features(cep: np.ndarray) -> np.ndarray:
    """Per-sequence z-scored cepstra with coefficient 0 (energy) removed, so
    warping follows spectral shape rather than loudness."""
    feats = np.asarray(cep, dtype=np.float64)[:, 1:]
    mean = feats.mean(axis=0)
    std = np.maximum(feats.std(axis=0), 1e-8)
    return (feats - mean) / std


def dtw_align(src: np.ndarray, tgt: np.ndarray) -> np.ndarray:
    """Minimum-cost monotonic alignment between two feature sequences.

    Steps are (1,0), (0,1), (1,1) with endpoints pinned to (0,0) and
    (Ts-1, Tt-1); cell cost is the Euclidean distance between the frames.
    Returns the path as an integer array of shape (path_len, 2).
    """
    src = np.atleast_2d(np.asarray(src, dtype=np.float64))
    tgt = np.atleast_2d(np.asarray(tgt, dtype=np.float64))
    if src.shape[0] == 0 or tgt.shape[0] == 0:
        raise ValueError("cannot align empty sequences")
    if src.shape[1] != tgt.shape[1]:
        raise ValueError("feature dimensions differ")
    ts, tt = src.shape[0], tgt.shape[0]
    sq = ((src * src).sum(axis=1)[:, None] + (tgt * tgt).sum(axis=1)[None, :]
          - 2.0 * src @ tgt.T)
    cost = np.sqrt(np.maximum(sq, 0.0))

    # One-cell border of +inf stands in for the boundary conditions, so each
    # anti-diagonal update is a single fancy-indexed minimum.
    acc = np.full((ts + 1, tt + 1), np.inf)
    acc[0, 0] = 0.0
    for d in range(2, ts + tt + 1):
        i = np.arange(max(1, d - tt), min(ts, d - 1) + 1)
        j = d - i
        prev = np.minimum(np.minimum(acc[i - 1, j], acc[i, j - 1]),
                          acc[i - 1, j - 1])
        acc[i, j] = cost[i - 1, j - 1] + prev

    path = [(ts - 1, tt - 1)]
    i, j = ts, tt
    while (i, j) != (1, 1):
        diag, up, left = acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1]
        if diag <= up and diag <= left:
            i, j = i - 1, j - 1
        elif up <= left:
            i -= 1
        else:
            j -= 1
        path.append((i - 1, j - 1))
    return np.array(path[::-1], dtype=np.intp)


def dtw_cost(src: np.ndarray, tgt: np.ndarray, path: np.ndarray) -> float:
    """Summed Euclidean distance along an alignment path."""
    diffs = np.asarray(src)[path[:, 0]] - np.asarray(tgt)[path[:, 1]]
    return float(np.sqrt((diffs * diffs).sum(axis=1)).sum())


@dataclass
class AlignedPair:
    """Time-aligned training material for one utterance pair.

    src_cep and tgt_cep hold the warped cepstrum sequences; src_spec keeps
    the complex source spectra at the same warped positions, which the
    truncation-aware training chain needs.
    """

    src_cep: np.ndarray
    tgt_cep: np.ndarray
    src_spec: np.ndarray

    def __post_init__(self) -> None:
        if not (len(self.src_cep) == len(self.tgt_cep) == len(self.src_spec)):
            raise ValueError("aligned sequences must have equal length")

    def __len__(self) -> int:
        return len(self.src_cep)


def align_pair(src: Waveform, tgt: Waveform, cfg: AnalysisConfig) -> AlignedPair:
    """Analyze a source/target utterance pair and warp them onto a common
    time axis."""
    src_spec = stft(src, cfg)
    tgt_spec = stft(tgt, cfg)
    src_cep = real_cepstrum(src_spec, cfg)
    tgt_cep = real_cepstrum(tgt_spec, cfg)
    path = dtw_align(alignment_features(src_cep), alignment_features(tgt_cep))
    return AlignedPair(src_cep=src_cep[path[:, 0]],
                       tgt_cep=tgt_cep[path[:, 1]],
                       src_spec=src_spec[path[:, 0]])
