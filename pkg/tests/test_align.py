import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liftervc import AnalysisConfig, Waveform, align_pair, dtw_align, trim_silence
from liftervc.align import AlignedPair, alignment_features, dtw_cost

from naive import brute_force_dtw_cost


def test_trim_keeps_loud_blocks(small_cfg):
    hop = small_cfg.hop
    loud = np.full(hop, 0.5)
    quiet = np.full(hop, 0.0001)
    wave = Waveform(np.concatenate([quiet, loud, quiet, loud]), 16000)
    out = trim_silence(wave, small_cfg, threshold_db=40.0)
    assert len(out) == 2 * hop
    assert np.allclose(out.samples, 0.5)


def test_trim_keeps_everything_within_threshold(small_cfg):
    wave = Waveform(np.full(small_cfg.hop * 3, 0.2), 16000)
    out = trim_silence(wave, small_cfg)
    assert np.array_equal(out.samples, wave.samples)


def test_trim_partial_last_block_uses_true_rms(small_cfg):
    hop = small_cfg.hop
    # last block has hop/4 loud samples; zero-padding must not dilute its RMS
    samples = np.concatenate([np.full(hop, 0.5), np.full(hop // 4, 0.5)])
    out = trim_silence(Waveform(samples, 16000), small_cfg, threshold_db=6.0)
    assert len(out) == samples.size


def test_trim_rejects_silence(small_cfg):
    with pytest.raises(ValueError):
        trim_silence(Waveform(np.zeros(400), 16000), small_cfg)
    with pytest.raises(ValueError):
        trim_silence(Waveform(np.zeros(0), 16000), small_cfg)


def test_alignment_features_drop_energy_and_zscore(rng):
    cep = rng.normal(size=(50, 8)) * 3.0 + 1.0
    feats = alignment_features(cep)
    assert feats.shape == (50, 7)
    assert np.allclose(feats.mean(axis=0), 0.0, atol=1e-10)
    assert np.allclose(feats.std(axis=0), 1.0, atol=1e-10)
    # energy coefficient must not influence the features
    cep2 = cep.copy()
    cep2[:, 0] += rng.normal(size=50) * 10.0
    assert np.allclose(alignment_features(cep2), feats)


def test_dtw_identical_sequences_take_diagonal(rng):
    seq = rng.normal(size=(10, 3))
    path = dtw_align(seq, seq)
    want = np.stack([np.arange(10), np.arange(10)], axis=1)
    assert np.array_equal(path, want)


def test_dtw_endpoints_and_monotonicity(rng):
    src = rng.normal(size=(9, 4))
    tgt = rng.normal(size=(13, 4))
    path = dtw_align(src, tgt)
    assert tuple(path[0]) == (0, 0)
    assert tuple(path[-1]) == (8, 12)
    steps = np.diff(path, axis=0)
    assert np.all(steps >= 0)
    assert np.all(steps.max(axis=1) == 1)


def test_dtw_rejects_bad_input(rng):
    with pytest.raises(ValueError):
        dtw_align(np.zeros((0, 3)), np.zeros((4, 3)))
    with pytest.raises(ValueError):
        dtw_align(np.zeros((4, 3)), np.zeros((4, 2)))


def test_dtw_cost_is_optimal_small_grids(rng):
    for _ in range(20):
        ts = rng.integers(1, 6)
        tt = rng.integers(1, 6)
        src = rng.normal(size=(ts, 2))
        tgt = rng.normal(size=(tt, 2))
        path = dtw_align(src, tgt)
        got = dtw_cost(src, tgt, path)
        want = brute_force_dtw_cost(src, tgt)
        assert np.isclose(got, want, rtol=1e-12), (ts, tt)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**31), st.integers(1, 5),
       st.integers(1, 5))
def test_dtw_optimality_property(seed, ts, tt):
    r = np.random.default_rng(seed)
    src = r.normal(size=(ts, 3))
    tgt = r.normal(size=(tt, 3))
    path = dtw_align(src, tgt)
    assert np.isclose(dtw_cost(src, tgt, path),
                      brute_force_dtw_cost(src, tgt), rtol=1e-12)


def test_aligned_pair_validates_lengths(rng):
    with pytest.raises(ValueError):
        AlignedPair(src_cep=np.zeros((3, 4)), tgt_cep=np.zeros((2, 4)),
                    src_spec=np.zeros((3, 8), dtype=complex))


def test_align_pair_time_shift(small_cfg, rng):
    """A target that is the source delayed by a few hops should align with
    the delayed content matched up."""
    burst = rng.normal(size=small_cfg.hop * 6) * 0.4
    pad = np.zeros(small_cfg.hop * 3)
    src = Waveform(np.concatenate([burst, pad]), small_cfg.sample_rate)
    tgt = Waveform(np.concatenate([pad, burst]), small_cfg.sample_rate)
    pair = align_pair(src, tgt, small_cfg)
    assert len(pair) >= max(len(src), len(tgt)) // small_cfg.hop
    assert pair.src_cep.shape[1] == small_cfg.cep_dim
    assert pair.src_spec.shape[1] == small_cfg.fft_len
    # the warped sequences should be closer than an unwarped pairing
    n = min(stft_len_frames(src, small_cfg), stft_len_frames(tgt, small_cfg))
    from liftervc import real_cepstrum, stft
    cs = real_cepstrum(stft(src, small_cfg), small_cfg)
    ct = real_cepstrum(stft(tgt, small_cfg), small_cfg)
    unwarped = np.abs(cs[:n, 1:] - ct[:n, 1:]).mean()
    warped = np.abs(pair.src_cep[:, 1:] - pair.tgt_cep[:, 1:]).mean()
    assert warped < unwarped


def stft_len_frames(wave, cfg):
    from liftervc.spectral import frame_count
    return frame_count(len(wave), cfg.hop)
