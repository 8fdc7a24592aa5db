import wave

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liftervc import Waveform, wav_read, wav_write


def test_roundtrip_exact_for_grid_values(tmp_path):
    # values on the 1/32768 quantization grid survive a write/read unchanged
    ints = np.array([-32768, -12345, -1, 0, 1, 777, 32767])
    wav = Waveform(ints / 32768.0, 16000)
    path = tmp_path / "a.wav"
    wav_write(path, wav)
    back = wav_read(path)
    assert back.sample_rate == 16000
    assert np.array_equal(back.samples * 32768.0, ints)


def test_roundtrip_error_bounded(tmp_path, rng):
    x = rng.uniform(-1.0, 1.0, 5000) * 0.99
    path = tmp_path / "b.wav"
    wav_write(path, Waveform(x, 48000))
    back = wav_read(path)
    assert back.sample_rate == 48000
    assert np.max(np.abs(back.samples - x)) <= 0.5 / 32768.0 + 1e-12


def test_write_clamps_out_of_range(tmp_path):
    wav = Waveform(np.array([-2.0, 2.0, 1.0]), 16000)
    path = tmp_path / "c.wav"
    wav_write(path, wav)
    back = wav_read(path)
    assert back.samples[0] == -1.0
    assert back.samples[1] == pytest.approx(32767 / 32768.0)


def test_write_rejects_unsupported_rate():
    with pytest.raises(ValueError):
        wav_write("/tmp/never.wav", Waveform(np.zeros(10), 44100))


def test_read_rejects_stereo(tmp_path):
    path = tmp_path / "stereo.wav"
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(2)
        fh.setsampwidth(2)
        fh.setframerate(16000)
        fh.writeframes(b"\x00" * 32)
    with pytest.raises(ValueError, match="channel"):
        wav_read(path)


def test_read_rejects_wrong_width(tmp_path):
    path = tmp_path / "w8.wav"
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(1)
        fh.setframerate(16000)
        fh.writeframes(b"\x00" * 32)
    with pytest.raises(ValueError, match="width"):
        wav_read(path)


def test_read_rejects_unsupported_rate(tmp_path):
    path = tmp_path / "r44.wav"
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(44100)
        fh.writeframes(b"\x00" * 32)
    with pytest.raises(ValueError, match="rate"):
        wav_read(path)


def test_read_rejects_garbage(tmp_path):
    path = tmp_path / "garbage.wav"
    path.write_bytes(b"this is not audio")
    with pytest.raises(ValueError, match="malformed"):
        wav_read(path)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31),
       rate=st.sampled_from([16000, 48000]),
       n=st.integers(min_value=1, max_value=400))
def test_roundtrip_property(tmp_path_factory, seed, rate, n):
    r = np.random.default_rng(seed)
    x = np.round(r.uniform(-1.0, 1.0, n) * 32767) / 32768.0
    path = tmp_path_factory.mktemp("wav") / "h.wav"
    wav_write(path, Waveform(x, rate))
    back = wav_read(path)
    assert back.sample_rate == rate
    assert np.array_equal(back.samples, x)
