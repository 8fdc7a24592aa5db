"""Differentiable filter-truncation chain.

Training needs the cepstral loss of the speech a truncated differential
filter would actually produce, and gradients of that loss with respect to
the acoustic model and the lifter. The forward pass mirrors conversion
frame by frame:

    differential cepstrum -> lifter product -> zero-pad -> DFT -> exp
    -> (optional sub-band gate) -> IDFT -> keep first l taps -> DFT
    -> multiply with the source spectrum -> floored log magnitude
    -> IDFT -> first c quefrencies -> squared error against the target

Everything here is float64/complex128 numpy; the backward pass is written
out by hand. Complex gradients follow the real-pair convention
g = dL/d(Re z) + i*dL/d(Im z), under which the adjoint of the DFT is N times
the inverse DFT (and vice versa), a product w = u*v pulls back as
g_v = conj(u)*g_w, and the elementwise exp pulls back as conj(exp(z))*g_w.
The floored log magnitude has gradient z/|z|^2 where the magnitude is above
the floor and zero below it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cepstral import MAG_FLOOR
from .config import AnalysisConfig
from .filters import SubbandGate, gate_weights
from .model import AcousticModel


@dataclass
class ChainCache:
    """Forward-pass intermediates needed by chain_backward."""

    cep_d: np.ndarray
    lifter: np.ndarray
    spec_x: np.ndarray
    spec_d: np.ndarray
    spec_y: np.ndarray
    mag_floored: np.ndarray
    above_floor: np.ndarray
    err: np.ndarray
    taps: int
    gate_w: np.ndarray | None


@dataclass
class ChainResult:
    """Output of one forward pass over a batch of frames."""

    cep_y: np.ndarray
    frame_losses: np.ndarray
    loss: float
    cache: object = None


def chain_forward(cep_d: np.ndarray, lifter: np.ndarray, spec_x: np.ndarray,
                  tgt_cep: np.ndarray, taps: int, cfg: AnalysisConfig,
                  gate: SubbandGate | None = None,
                  keep_cache: bool = False) -> ChainResult:
    """Loss of the truncated differential filter built from cep_d.

    cep_d: (B, c) differential cepstra. lifter: (c,). spec_x: (B, fft_len)
    complex source spectra. tgt_cep: (B, c) target cepstra. taps: truncation
    length l. Returns the estimated target cepstra, per-frame squared errors,
    and their mean (the loss).
    """
    n, c = cfg.fft_len, cfg.cep_dim
    cep_d = np.atleast_2d(np.asarray(cep_d, dtype=np.float64))
    tgt_cep = np.atleast_2d(np.asarray(tgt_cep, dtype=np.float64))
    spec_x = np.atleast_2d(np.asarray(spec_x, dtype=np.complex128))
    lifter = np.asarray(lifter, dtype=np.float64)
    if not 0 < taps <= n:
        raise ValueError(f"taps must be in 1..{n}")
    if cep_d.shape[1] != c or lifter.shape != (c,):
        raise ValueError(f"cepstrum and lifter must have length {c}")

    batch = cep_d.shape[0]
    padded = np.zeros((batch, n))
    padded[:, :c] = cep_d * lifter
    spec_d = np.exp(np.fft.fft(padded, axis=1))
    if gate is not None:
        gate_w = gate_weights(gate, cfg)
        spec_g = 1.0 + gate_w * (spec_d - 1.0)
    else:
        gate_w = None
        spec_g = spec_d
    f_d = np.fft.ifft(spec_g, axis=1).real
    f_l = f_d.copy()
    f_l[:, taps:] = 0.0
    spec_y = spec_x * np.fft.fft(f_l, axis=1)
    mag = np.abs(spec_y)
    mag_floored = np.maximum(mag, MAG_FLOOR)
    cep_y = np.fft.ifft(np.log(mag_floored), axis=1).real[:, :c]
    err = cep_y - tgt_cep
    frame_losses = (err * err).sum(axis=1)

    cache = None
    if keep_cache:
        cache = ChainCache(cep_d=cep_d, lifter=lifter, spec_x=spec_x,
                           spec_d=spec_d, spec_y=spec_y,
                           mag_floored=mag_floored,
                           above_floor=mag > MAG_FLOOR, err=err,
                           taps=taps, gate_w=gate_w)
    return ChainResult(cep_y=cep_y, frame_losses=frame_losses,
                       loss=float(frame_losses.mean()), cache=cache)


def chain_backward(cache: ChainCache, cfg: AnalysisConfig):
    """Gradients of the mean frame loss w.r.t. cep_d and the lifter.

    Returns (g_cep_d, g_lifter) with shapes (B, c) and (c,).
    """
    n, c = cfg.fft_len, cfg.cep_dim
    batch = cache.err.shape[0]

    # d loss / d estimated cepstrum, zero-padded back to all n quefrencies.
    g_cep_full = np.zeros((batch, n))
    g_cep_full[:, :c] = (2.0 / batch) * cache.err
    # Estimated cepstrum = Re(ifft(log-magnitude)); the log-magnitude is real.
    g_logmag = np.fft.fft(g_cep_full, axis=1).real / n
    g_spec_y = np.where(cache.above_floor,
                        g_logmag / (cache.mag_floored * cache.mag_floored),
                        0.0) * cache.spec_y
    g_spec_l = np.conj(cache.spec_x) * g_spec_y
    g_f_l = np.fft.ifft(g_spec_l, axis=1).real * n
    # Truncation window: gradients beyond the kept taps vanish.
    g_f_d = g_f_l
    g_f_d[:, cache.taps:] = 0.0
    g_spec_g = np.fft.fft(g_f_d, axis=1) / n
    if cache.gate_w is not None:
        g_spec_d = cache.gate_w * g_spec_g
    else:
        g_spec_d = g_spec_g
    g_log_spec = np.conj(cache.spec_d) * g_spec_d
    g_padded = np.fft.ifft(g_log_spec, axis=1).real * n
    g_liftered = g_padded[:, :c]
    g_cep_d = g_liftered * cache.lifter
    g_lifter = (g_liftered * cache.cep_d).sum(axis=0)
    return g_cep_d, g_lifter


def forward_chain(model: AcousticModel, cep_x: np.ndarray, spec_x: np.ndarray,
                  tgt_cep: np.ndarray, taps: int,
                  gate: SubbandGate | None = None,
                  lifter: np.ndarray | None = None, train: bool = False,
                  update_stats: bool | None = None,
                  keep_cache: bool = False) -> ChainResult:
    """Model-in-the-loop forward pass: estimate differential cepstra from the
    source cepstra, then run the truncation chain.

    lifter overrides the model's own lifter coefficients when given (used to
    score a model against the fixed minimum-phase lifter).
    """
    if lifter is None:
        lifter = model.lifter.coeffs
    cep_d, model_cache = model.forward(cep_x, train=train,
                                       update_stats=update_stats,
                                       return_cache=True)
    result = chain_forward(cep_d, lifter, spec_x, tgt_cep, taps, model.cfg,
                           gate=gate, keep_cache=keep_cache)
    if keep_cache:
        result.cache = (result.cache, model_cache)
    return result


def backward_chain(model: AcousticModel, result: ChainResult) -> dict:
    """Gradients of the mean frame loss w.r.t. every model parameter and the
    lifter, keyed by the model's parameter names plus "lifter"."""
    if result.cache is None:
        raise ValueError("forward pass was run without keep_cache")
    chain_cache, model_cache = result.cache
    g_cep_d, g_lifter = chain_backward(chain_cache, model.cfg)
    grads, _ = model.backward(model_cache, g_cep_d)
    grads["lifter"] = g_lifter
    return grads
