import numpy as np
import pytest

from liftervc import AnalysisConfig


@pytest.fixture
def small_cfg():
    """Tiny analysis geometry so per-test transforms stay cheap."""
    return AnalysisConfig(sample_rate=16000, window_len=48, hop=16,
                          fft_len=64, cep_dim=8)


@pytest.fixture
def cfg16():
    return AnalysisConfig.for_rate(16000)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
