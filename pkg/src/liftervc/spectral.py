"""Windowed analysis, DFTs, and time-varying overlap-add FIR filtering."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import AnalysisConfig

# Per-tap direct convolution beats FFT blocks below this filter length.
FFT_CONV_THRESHOLD = 64


@dataclass
class Waveform:
    """A mono waveform with its sample rate; samples are float64 in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("waveform must be one-dimensional")
        if self.samples.size and not np.isfinite(self.samples).all():
            raise ValueError("waveform contains non-finite samples")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def frame_count(n_samples: int, hop: int) -> int:
    """Number of analysis frames covering n_samples at the given hop."""
    return -(-n_samples // hop)


def analysis_window(cfg: AnalysisConfig) -> np.ndarray:
    """Periodic Hann (or all-ones) window of length cfg.window_len."""
    if cfg.window == "rectangular":
        return np.ones(cfg.window_len)
    n = np.arange(cfg.window_len)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / cfg.window_len)


def stft(wave: Waveform, cfg: AnalysisConfig) -> np.ndarray:
    """Short-time Fourier transform.

    Frame t covers samples [t*hop, t*hop + window_len); frames are windowed,
    zero-padded to fft_len, and transformed. The signal tail is zero-padded
    so the final partial frame is still analyzed.

    Returns a complex array of shape (frame_count, fft_len). Rows are
    conjugate-symmetric because the input is real.
    """
    if wave.sample_rate != cfg.sample_rate:
        raise ValueError(
            f"sample rate {wave.sample_rate} does not match config {cfg.sample_rate}")
    n = len(wave)
    if n == 0:
        raise ValueError("empty waveform")
    n_frames = frame_count(n, cfg.hop)
    padded = np.zeros((n_frames - 1) * cfg.hop + cfg.window_len)
    padded[:n] = wave.samples
    frames = np.lib.stride_tricks.sliding_window_view(
        padded, cfg.window_len)[::cfg.hop]
    frames = frames * analysis_window(cfg)
    return np.fft.fft(frames, n=cfg.fft_len, axis=1)


def dft(x: np.ndarray, n: int | None = None) -> np.ndarray:
    """Forward DFT along the last axis; if n is given the input length must match."""
    x = np.asarray(x)
    if n is not None and x.shape[-1] != n:
        raise ValueError(f"length mismatch: expected {n}, got {x.shape[-1]}")
    return np.fft.fft(x, axis=-1)


def idft(x: np.ndarray, n: int | None = None) -> np.ndarray:
    """Inverse DFT along the last axis; exact inverse of dft up to rounding."""
    x = np.asarray(x)
    if n is not None and x.shape[-1] != n:
        raise ValueError(f"length mismatch: expected {n}, got {x.shape[-1]}")
    return np.fft.ifft(x, axis=-1)


def _segments(samples: np.ndarray, hop: int, n_frames: int) -> np.ndarray:
    seg = np.zeros(n_frames * hop)
    seg[:samples.size] = samples
    return seg.reshape(n_frames, hop)


def _ola_direct(seg: np.ndarray, filters: np.ndarray) -> np.ndarray:
    n_frames, hop = seg.shape
    taps = filters.shape[1]
    total = n_frames * hop
    acc = np.zeros(total + taps - 1)
    scaled = np.empty_like(seg)
    # Tap-major: for a fixed tap k, frame contributions land in disjoint
    # hop-length blocks, so one strided add covers all frames.
    for k in range(taps):
        np.multiply(seg, filters[:, k:k + 1], out=scaled)
        acc[k:k + total] += scaled.reshape(-1)
    return acc


def _ola_fft(seg: np.ndarray, filters: np.ndarray) -> np.ndarray:
    n_frames, hop = seg.shape
    taps = filters.shape[1]
    out_len = hop + taps - 1
    n_fft = 1 << (out_len - 1).bit_length()
    spec = np.fft.rfft(seg, n_fft, axis=1) * np.fft.rfft(filters, n_fft, axis=1)
    blocks = np.fft.irfft(spec, n_fft, axis=1)[:, :out_len]
    acc = np.zeros(n_frames * hop + taps - 1)
    for t in range(n_frames):
        acc[t * hop:t * hop + out_len] += blocks[t]
    return acc


def ola_filter(wave: Waveform, filters: np.ndarray, cfg: AnalysisConfig,
               mode: str = "auto", delay: int = 0) -> Waveform:
    """Filter a waveform with one FIR filter per analysis frame.

    The signal is split into consecutive hop-length blocks (block t starting
    at t*hop), each block is convolved with its frame's filter, and the
    convolution tails are overlap-added at the original offsets. Each input
    sample is therefore filtered exactly once. The output is trimmed back to
    the input length.

    mode selects the convolution path: "direct" (per-tap multiply-add),
    "fft" (block FFT convolution), or "auto" (fft for filters longer than
    FFT_CONV_THRESHOLD taps). Both paths agree to within 1e-8.

    delay drops that many leading output samples instead of trailing ones,
    compensating filters whose nominal time origin sits `delay` taps into
    their impulse response.
    """
    filters = np.atleast_2d(np.asarray(filters, dtype=np.float64))
    n = len(wave)
    n_frames = frame_count(n, cfg.hop)
    if filters.shape[0] != n_frames:
        raise ValueError(
            f"filter count {filters.shape[0]} does not match frame count {n_frames}")
    taps = filters.shape[1]
    if taps == 0 or taps > cfg.fft_len:
        raise ValueError(f"filter length must be in 1..{cfg.fft_len}")
    if not 0 <= delay < taps:
        raise ValueError("delay must be smaller than the filter length")
    if mode == "auto":
        mode = "fft" if taps > FFT_CONV_THRESHOLD else "direct"
    seg = _segments(wave.samples, cfg.hop, n_frames)
    if mode == "direct":
        acc = _ola_direct(seg, filters)
    elif mode == "fft":
        acc = _ola_fft(seg, filters)
    else:
        raise ValueError(f"unknown convolution mode: {mode!r}")
    return Waveform(acc[delay:delay + n].copy(), wave.sample_rate)
