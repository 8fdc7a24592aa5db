"""Configuration dataclasses and JSON config loading."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

NARROW_BAND_RATE = 16000
FULL_BAND_RATE = 48000


@dataclass(frozen=True)
class AnalysisConfig:
    """Frame-analysis parameters: window, hop, FFT size, cepstrum order.

    Defaults correspond to narrow-band (16 kHz) processing: 25 ms window,
    5 ms hop, 512-point FFT, 40 cepstral dimensions.
    """

    sample_rate: int = 16000
    window_len: int = 400
    hop: int = 80
    fft_len: int = 512
    cep_dim: int = 40
    window: str = "hann"

    def __post_init__(self) -> None:
        if min(self.sample_rate, self.window_len, self.hop,
               self.fft_len, self.cep_dim) <= 0:
            raise ValueError("analysis parameters must be positive")
        if self.window_len > self.fft_len:
            raise ValueError("window_len must not exceed fft_len")
        if self.hop > self.window_len:
            raise ValueError("hop must not exceed window_len")
        if self.cep_dim > self.fft_len // 2:
            raise ValueError("cep_dim must not exceed fft_len / 2")
        if self.window not in ("hann", "rectangular"):
            raise ValueError(f"unknown analysis window: {self.window!r}")

    @classmethod
    def for_rate(cls, sample_rate: int, **overrides) -> "AnalysisConfig":
        """Standard settings for 16 kHz (512-point FFT, 40 cepstra) or
        48 kHz (2048-point FFT, 120 cepstra); both use 25 ms / 5 ms frames."""
        if sample_rate == NARROW_BAND_RATE:
            base = dict(sample_rate=sample_rate, window_len=400, hop=80,
                        fft_len=512, cep_dim=40)
        elif sample_rate == FULL_BAND_RATE:
            base = dict(sample_rate=sample_rate, window_len=1200, hop=240,
                        fft_len=2048, cep_dim=120)
        else:
            raise ValueError(f"no standard settings for {sample_rate} Hz")
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings for pretraining and lifter fine-tuning."""

    taps: int = 512
    pretrain_lr: float = 0.0005
    finetune_lr: float = 0.00001
    batch_size: int = 1000
    epochs: int = 100
    seed: int = 0
    gate_in_training: bool = False

    def __post_init__(self) -> None:
        if self.taps <= 0:
            raise ValueError("taps must be positive")
        if self.pretrain_lr <= 0 or self.finetune_lr <= 0:
            raise ValueError("learning rates must be positive")
        if self.batch_size <= 0 or self.epochs <= 0:
            raise ValueError("batch_size and epochs must be positive")


@dataclass
class RunConfig:
    """Everything a full run needs: analysis + training settings, data lists,
    output locations, and sub-band gate parameters."""

    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    train_pairs: list = field(default_factory=list)
    val_pairs: list = field(default_factory=list)
    test_pairs: list = field(default_factory=list)
    model_file: str = "model.lvc"
    output_dir: str = "out"
    silence_threshold_db: float = 40.0
    subband_enabled: bool = False
    subband_crossover_hz: float = 8000.0
    subband_steepness_hz: float = 200.0

    def __post_init__(self) -> None:
        if self.train.taps > self.analysis.fft_len:
            raise ValueError("taps must not exceed fft_len")
        for pairs in (self.train_pairs, self.val_pairs, self.test_pairs):
            for pair in pairs:
                if len(pair) != 2:
                    raise ValueError("each data entry must be a [source, target] pair")

    @classmethod
    def from_json(cls, path, check_paths: bool = True) -> "RunConfig":
        """Load a config document; with check_paths, verify every listed
        WAV file exists."""
        raw = json.loads(Path(path).read_text())
        known = {"analysis", "train", "data", "model_file", "output_dir",
                 "silence_threshold_db", "subband"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")

        analysis = AnalysisConfig(**raw.get("analysis", {}))
        train = TrainConfig(**raw.get("train", {}))
        data = raw.get("data", {})
        sub = raw.get("subband", {})
        cfg = cls(
            analysis=analysis,
            train=train,
            train_pairs=[tuple(p) for p in data.get("train", [])],
            val_pairs=[tuple(p) for p in data.get("val", [])],
            test_pairs=[tuple(p) for p in data.get("test", [])],
            model_file=raw.get("model_file", "model.lvc"),
            output_dir=raw.get("output_dir", "out"),
            silence_threshold_db=raw.get("silence_threshold_db", 40.0),
            subband_enabled=sub.get("enabled", False),
            subband_crossover_hz=sub.get("crossover_hz", 8000.0),
            subband_steepness_hz=sub.get("steepness_hz", 200.0),
        )
        if check_paths:
            missing = [p for pairs in (cfg.train_pairs, cfg.val_pairs, cfg.test_pairs)
                       for pair in pairs for p in pair if not Path(p).exists()]
            if missing:
                raise FileNotFoundError(f"missing data files: {missing[:4]}"
                                        + (" ..." if len(missing) > 4 else ""))
        return cfg

    def to_json(self, path) -> None:
        doc = {
            "analysis": asdict(self.analysis),
            "train": asdict(self.train),
            "data": {
                "train": [list(p) for p in self.train_pairs],
                "val": [list(p) for p in self.val_pairs],
                "test": [list(p) for p in self.test_pairs],
            },
            "model_file": self.model_file,
            "output_dir": self.output_dir,
            "silence_threshold_db": self.silence_threshold_db,
            "subband": {
                "enabled": self.subband_enabled,
                "crossover_hz": self.subband_crossover_hz,
                "steepness_hz": self.subband_steepness_hz,
            },
        }
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
