"""Differential-filter construction, truncation, and sub-band gating."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .cepstral import reconstruct_spectrum
from .config import AnalysisConfig

log = logging.getLogger(__name__)

IMAG_RESIDUAL_TOL = 1e-6


def _real_impulse_response(spectrum: np.ndarray) -> np.ndarray:
    """Inverse transform of a filter spectrum, dropping the imaginary part.

    The spectrum of any real liftered cepstrum is conjugate-symmetric, so the
    residual should be rounding noise only; a larger residual is logged.
    """
    h = np.fft.ifft(spectrum, axis=-1)
    residual = float(np.max(np.abs(h.imag))) if h.size else 0.0
    if residual > IMAG_RESIDUAL_TOL:
        log.warning("imaginary residual %.3e in impulse response", residual)
    return np.ascontiguousarray(h.real)


def design_filter(cep_d: np.ndarray, lifter: np.ndarray, cfg: AnalysisConfig,
                  gate: "SubbandGate | None" = None) -> np.ndarray:
    """Full-length time-domain differential filter for a differential cepstrum.

    Equivalent to idft(reconstruct_spectrum(cep_d, lifter)), with the
    sub-band gate (if any) applied to the spectrum before the inverse
    transform; the result has fft_len taps per frame. A zero cepstrum yields
    the unit impulse.
    """
    spec = reconstruct_spectrum(cep_d, lifter, cfg)
    return _real_impulse_response(subband_gate(spec, gate, cfg))


def truncate_filter(taps: np.ndarray, length: int) -> np.ndarray:
    """Keep the first `length` taps (rectangular quefrency window, zeros dropped)."""
    taps = np.asarray(taps)
    if not 0 < length <= taps.shape[-1]:
        raise ValueError(f"truncation length must be in 1..{taps.shape[-1]}")
    return np.ascontiguousarray(taps[..., :length])


def truncated_spectrum(taps: np.ndarray, cfg: AnalysisConfig) -> np.ndarray:
    """Spectrum of a (possibly truncated) filter, zero-padded to fft_len."""
    taps = np.asarray(taps)
    if taps.shape[-1] > cfg.fft_len:
        raise ValueError("filter longer than fft_len")
    return np.fft.fft(taps, n=cfg.fft_len, axis=-1)


@dataclass(frozen=True)
class SubbandGate:
    """Sigmoid crossover that confines the differential filter to the low band.

    Below the crossover the filter applies unchanged; above it the spectrum
    relaxes to the identity filter so the source passes through untouched.
    """

    crossover_hz: float = 8000.0
    steepness_hz: float = 200.0

    def __post_init__(self) -> None:
        if self.crossover_hz <= 0:
            raise ValueError("crossover must be positive")
        if self.steepness_hz <= 0:
            raise ValueError("steepness must be positive")


def gate_weights(gate: SubbandGate, cfg: AnalysisConfig) -> np.ndarray:
    """Per-bin blend weights in [0, 1], mirrored above fft_len/2 so a gated
    conjugate-symmetric spectrum stays conjugate-symmetric."""
    if gate.crossover_hz >= cfg.sample_rate / 2:
        raise ValueError("crossover must lie below the Nyquist frequency")
    n = cfg.fft_len
    k = np.arange(n)
    k = np.minimum(k, n - k)
    freq = k * (cfg.sample_rate / n)
    x = np.clip((gate.crossover_hz - freq) / gate.steepness_hz, -500.0, 500.0)
    return 1.0 / (1.0 + np.exp(-x))


def subband_gate(spec_d: np.ndarray, gate: SubbandGate | None,
                 cfg: AnalysisConfig) -> np.ndarray:
    """Blend a differential-filter spectrum toward the identity filter above
    the crossover: out = 1 + g * (spec - 1) per bin.

    gate=None bypasses gating bit-exactly (the input is returned unchanged).
    """
    if gate is None:
        return spec_d
    spec_d = np.asarray(spec_d)
    if spec_d.shape[-1] != cfg.fft_len:
        raise ValueError(f"expected {cfg.fft_len} bins, got {spec_d.shape[-1]}")
    g = gate_weights(gate, cfg)
    return 1.0 + g * (spec_d - 1.0)


def conversion_filters(cep_d: np.ndarray, lifter: np.ndarray,
                       cfg: AnalysisConfig, taps: int,
                       gate: SubbandGate | None = None):
    """Causal FIR filters for waveform conversion, plus their onset delay.

    Ungated differential filters are built from a causal liftered cepstrum,
    so their response starts at tap 0 and the delay is 0. The gate's
    frequency weighting has a symmetric kernel, which gives the gated
    spectrum a small acausal component; rendered naively it wraps onto the
    last taps and ruins the response between bin centers. Instead the
    response is rotated so its time origin sits `delay` taps in, and the
    overlap-add stage drops that many leading samples to compensate.
    """
    spec = reconstruct_spectrum(cep_d, lifter, cfg)
    if gate is None:
        return truncate_filter(_real_impulse_response(spec), taps), 0
    spec = subband_gate(spec, gate, cfg)
    # Large enough for the gate kernel's acausal lobe at full length, while
    # heavily truncated filters keep most of their window for the main
    # response.
    delay = min(cfg.fft_len // 4, taps // 2)
    rotation = np.exp(-2j * np.pi * np.arange(cfg.fft_len) * delay / cfg.fft_len)
    return truncate_filter(_real_impulse_response(spec * rotation), taps), delay
