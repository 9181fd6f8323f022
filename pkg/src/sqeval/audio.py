"""Mono audio container and RIFF WAV (PCM 16-bit) file I/O."""

from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np

FULLBAND_RATE = 48000

# int16 <-> float mapping: float = int / 32768, so a PCM read/write cycle is lossless
_PCM_SCALE = 32768.0


@dataclass(eq=False)
class AudioClip:
    """Single-channel audio with float64 samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("AudioClip is mono; samples must be one-dimensional")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("AudioClip samples must be finite")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def channels(self) -> int:
        return 1

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)


def read_wav(path) -> AudioClip:
    """Read a RIFF WAV file.

    Only uncompressed PCM 16-bit mono is accepted; anything else is an
    error, never a conversion.
    """
    with wave.open(str(path), "rb") as wf:
        if wf.getcomptype() != "NONE":
            raise ValueError(f"{path}: compressed WAV is not supported (PCM 16-bit required)")
        if wf.getsampwidth() != 2:
            raise ValueError(f"{path}: expected PCM 16-bit, got {8 * wf.getsampwidth()}-bit")
        if wf.getnchannels() != 1:
            raise ValueError(f"{path}: expected mono, got {wf.getnchannels()} channels")
        rate = wf.getframerate()
        raw = wf.readframes(wf.getnframes())
    ints = np.frombuffer(raw, dtype="<i2")
    return AudioClip(ints.astype(np.float64) / _PCM_SCALE, rate)


def write_wav(path, clip: AudioClip) -> None:
    """Write PCM 16-bit mono WAV; quantization is deterministic."""
    ints = np.clip(np.round(clip.samples * _PCM_SCALE), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(clip.sample_rate)
        wf.writeframes(ints.tobytes())
