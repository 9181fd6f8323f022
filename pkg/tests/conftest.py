"""Shared synthetic audio fixtures.

Speech stand-in: a pitch-modulated harmonic stack with syllable-rate energy
bursts and coarse formant shaping, padded with leading/trailing silence.
Noise stand-in: 1/f-shaped noise. Both are deterministic per seed.
"""

import numpy as np
import pytest

from sqeval.audio import AudioClip

SR = 48000


def synth_speech(seed: int, dur: float = 4.0, f0: float = 120.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = int(SR * dur)
    t = np.arange(n) / SR
    pitch = f0 * (1 + 0.08 * np.sin(2 * np.pi * 0.6 * t) + 0.02 * rng.standard_normal())
    phase = 2 * np.pi * np.cumsum(pitch) / SR
    sig = np.zeros(n)
    for k in range(1, 24):
        sig += np.sin(k * phase + rng.uniform(0, 2 * np.pi)) / k
    # syllable-like energy bursts; the distortion stage needs non-stationarity
    env = np.clip(np.sin(2 * np.pi * 2.5 * t + rng.uniform(0, 2 * np.pi)), 0, None) ** 0.5
    sig *= env
    spec = np.fft.rfft(sig)
    f = np.fft.rfftfreq(n, 1 / SR)
    shape = (
        np.exp(-(((f - 500) / 400) ** 2))
        + 0.7 * np.exp(-(((f - 1500) / 500) ** 2))
        + 0.3 * np.exp(-(((f - 2900) / 700) ** 2))
        + 0.02
    )
    sig = np.fft.irfft(spec * shape, n)
    pad = np.zeros(int(0.25 * SR))
    sig = np.concatenate([pad, sig, pad])
    return 0.3 * sig / np.max(np.abs(sig))


def synth_noise(seed: int, dur: float = 4.0) -> np.ndarray:
    rng = np.random.default_rng(10_000 + seed)
    n = int(SR * dur)
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1 / SR)
    spec = spec / np.sqrt(np.maximum(f, 20.0))
    noise = np.fft.irfft(spec, n)
    return 0.2 * noise / np.max(np.abs(noise))


@pytest.fixture
def make_speech():
    def factory(seed: int = 0, dur: float = 4.0) -> AudioClip:
        return AudioClip(synth_speech(seed, dur), SR)

    return factory


@pytest.fixture
def make_noise():
    # default runs longer than the padded speech fixture
    def factory(seed: int = 0, dur: float = 5.0) -> AudioClip:
        return AudioClip(synth_noise(seed, dur), SR)

    return factory
