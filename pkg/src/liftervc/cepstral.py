"""Real-cepstrum analysis and lifter-based spectrum reconstruction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import AnalysisConfig

# Floor applied to spectral magnitudes before the log, so the analysis chain
# is total and gradients through log|.| stay bounded.
MAG_FLOOR = 1e-10


def real_cepstrum(frames: np.ndarray, cfg: AnalysisConfig) -> np.ndarray:
    """Low-order real cepstrum of complex spectra.

    frames has shape (..., fft_len); the result keeps the first cep_dim
    quefrency coefficients of idft(log(max(|frames|, MAG_FLOOR))). The
    log-magnitude of a real signal's spectrum is even, so the inverse
    transform is real up to rounding.
    """
    frames = np.asarray(frames)
    if frames.shape[-1] != cfg.fft_len:
        raise ValueError(f"expected {cfg.fft_len} bins, got {frames.shape[-1]}")
    log_mag = np.log(np.maximum(np.abs(frames), MAG_FLOOR))
    return np.fft.ifft(log_mag, axis=-1).real[..., :cfg.cep_dim]


def minimum_phase_lifter(n_fft: int) -> np.ndarray:
    """Quefrency weights turning a real cepstrum into the complex cepstrum of
    a minimum-phase system: 1 at quefrency 0 and n_fft/2, 2 in between, 0 above.
    """
    if n_fft < 4 or n_fft % 2:
        raise ValueError("length must be even and at least 4")
    u = np.zeros(n_fft)
    u[0] = 1.0
    u[n_fft // 2] = 1.0
    u[1:n_fft // 2] = 2.0
    return u


@dataclass
class Lifter:
    """Quefrency weighting of length cep_dim, optionally trainable."""

    coeffs: np.ndarray
    trainable: bool = False

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if self.coeffs.ndim != 1:
            raise ValueError("lifter coefficients must be one-dimensional")
        if not np.isfinite(self.coeffs).all():
            raise ValueError("lifter coefficients must be finite")

    @classmethod
    def minimum_phase(cls, cfg: AnalysisConfig, trainable: bool = False) -> "Lifter":
        """First cep_dim entries of the minimum-phase lifter for cfg.fft_len."""
        return cls(minimum_phase_lifter(cfg.fft_len)[:cfg.cep_dim].copy(), trainable)


def reconstruct_spectrum(cep: np.ndarray, lifter: np.ndarray,
                         cfg: AnalysisConfig) -> np.ndarray:
    """Complex spectrum from a liftered low-order cepstrum.

    The liftered cepstrum is zero-padded to fft_len and treated as a complex
    cepstrum: the result is exp(dft(pad(lifter * cep))), shape (..., fft_len).
    With the minimum-phase lifter this preserves the magnitude spectrum
    encoded by cep and adds the minimum phase.
    """
    cep = np.asarray(cep, dtype=np.float64)
    lifter = np.asarray(lifter, dtype=np.float64)
    if cep.shape[-1] != cfg.cep_dim or lifter.shape[-1] != cfg.cep_dim:
        raise ValueError(f"cepstrum and lifter must have length {cfg.cep_dim}")
    padded = np.zeros(cep.shape[:-1] + (cfg.fft_len,))
    padded[..., :cfg.cep_dim] = cep * lifter
    return np.exp(np.fft.fft(padded, axis=-1))
