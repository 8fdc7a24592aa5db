"""End-to-end conversion, evaluation, diagnostics, and the filtering benchmark."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .cepstral import real_cepstrum
from .chain import forward_chain
from .config import AnalysisConfig
from .dataset import TrainingSet
from .filters import SubbandGate, conversion_filters, design_filter, truncate_filter
from .model import AcousticModel
from .spectral import Waveform, frame_count, ola_filter, stft

log = logging.getLogger(__name__)


def convert(wave: Waveform, model: AcousticModel, taps: int | None = None,
            gate: SubbandGate | None = None, mode: str = "auto") -> Waveform:
    """Convert a source waveform with per-frame truncated differential filters.

    Per frame: analyze, estimate the differential cepstrum, design the
    filter with the model's lifter (gating the spectrum if requested),
    truncate to `taps`, then overlap-add filter the waveform. The output is
    clamped to [-1, 1]; clamped samples are counted and logged.
    """
    cfg = model.cfg
    if wave.sample_rate != cfg.sample_rate:
        raise ValueError(
            f"sample rate {wave.sample_rate} does not match model ({cfg.sample_rate})")
    if taps is None:
        taps = cfg.fft_len
    spec = stft(wave, cfg)
    cep_d = model.forward(real_cepstrum(spec, cfg))
    filters, delay = conversion_filters(cep_d, model.lifter.coeffs, cfg, taps,
                                        gate=gate)
    out = ola_filter(wave, filters, cfg, mode=mode, delay=delay)
    samples = out.samples
    if not np.isfinite(samples).all():
        raise ValueError("conversion produced non-finite samples")
    clipped = int((np.abs(samples) > 1.0).sum())
    if clipped:
        log.warning("clamped %d of %d output samples to [-1, 1]",
                    clipped, samples.size)
        samples = np.clip(samples, -1.0, 1.0)
    return Waveform(samples, wave.sample_rate)


@dataclass
class MetricsReport:
    """Cepstral conversion error of a model over an evaluation set."""

    rmse: float
    per_utterance: np.ndarray
    n_frames: int

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("utterance,rmse\n")
            for u, r in enumerate(self.per_utterance):
                fh.write(f"{u},{float(r)!r}\n")
            fh.write(f"all,{self.rmse!r}\n")


def _chain_frame_losses(model: AcousticModel, data: TrainingSet, taps: int,
                        gate: SubbandGate | None,
                        batch_size: int = 2048) -> np.ndarray:
    losses = np.empty(len(data))
    for a in range(0, len(data), batch_size):
        result = forward_chain(model, data.src_cep[a:a + batch_size],
                               data.src_spec[a:a + batch_size],
                               data.tgt_cep[a:a + batch_size], taps, gate=gate)
        losses[a:a + batch_size] = result.frame_losses
    return losses


def eval_rmse(model: AcousticModel, data: TrainingSet, taps: int,
              gate: SubbandGate | None = None) -> MetricsReport:
    """Root of the mean squared cepstral error through the truncation chain,
    per utterance and pooled."""
    if len(data) == 0:
        raise ValueError("empty evaluation set")
    losses = _chain_frame_losses(model, data, taps, gate)
    per_utt = np.array([
        np.sqrt(losses[data.offsets[u]:data.offsets[u + 1]].mean())
        for u in range(data.n_utterances)])
    return MetricsReport(rmse=float(np.sqrt(losses.mean())),
                         per_utterance=per_utt, n_frames=len(data))


def cumulative_power(model: AcousticModel, data: TrainingSet,
                     batch_size: int = 512) -> np.ndarray:
    """Average normalized cumulative energy of the full-length differential
    filters the model designs for an evaluation set.

    Entry n is the mean over frames of sum(h[:n+1]**2) / sum(h**2); the curve
    is nondecreasing and ends at 1. A fast rise means the filter survives
    truncation.
    """
    if len(data) == 0:
        raise ValueError("empty evaluation set")
    cfg = model.cfg
    total = np.zeros(cfg.fft_len)
    for a in range(0, len(data), batch_size):
        cep_d = model.forward(data.src_cep[a:a + batch_size])
        filters = design_filter(cep_d, model.lifter.coeffs, cfg)
        power = filters * filters
        cum = np.cumsum(power, axis=1)
        total += (cum / cum[:, -1:]).sum(axis=0)
    return total / len(data)


def power_threshold_tap(curve: np.ndarray, fraction: float = 0.95) -> int:
    """First tap index at which the cumulative power reaches the fraction."""
    return int(np.argmax(curve >= fraction))


@dataclass
class BenchRow:
    taps: int
    median_s: float
    ns_per_sample: float
    speedup: float


def bench_filtering(taps_list, duration_s: float = 10.0,
                    cfg: AnalysisConfig | None = None, mode: str = "direct",
                    repeats: int = 5, seed: int = 0) -> list:
    """Median wall time of ola_filter per tap count on synthetic data.

    Speedups are relative to the full fft_len filter, which is measured even
    when absent from taps_list. Single-threaded numpy timing; repeats take
    the median to damp scheduler noise.
    """
    cfg = cfg or AnalysisConfig()
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * cfg.sample_rate))
    wave = Waveform(rng.uniform(-0.5, 0.5, n), cfg.sample_rate)
    n_frames = frame_count(n, cfg.hop)
    full = rng.standard_normal((n_frames, cfg.fft_len)) * 0.05

    taps_list = list(taps_list)
    measured = sorted(set(taps_list) | {cfg.fft_len})
    times = {}
    for l in measured:
        filters = truncate_filter(full, l)
        ola_filter(wave, filters, cfg, mode=mode)  # warm-up
        samples = []
        for _ in range(repeats):
            t0 = time.perf_counter_ns()
            ola_filter(wave, filters, cfg, mode=mode)
            samples.append(time.perf_counter_ns() - t0)
        times[l] = float(np.median(samples)) / 1e9
    reference = times[cfg.fft_len]
    return [BenchRow(taps=l, median_s=times[l],
                     ns_per_sample=times[l] * 1e9 / n,
                     speedup=reference / times[l]) for l in taps_list]


def bench_to_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("taps,median_s,ns_per_sample,speedup\n")
        for r in rows:
            fh.write(f"{r.taps},{r.median_s!r},{r.ns_per_sample!r},{r.speedup!r}\n")
