import wave

import numpy as np
import pytest

from sqeval.audio import AudioClip, read_wav, write_wav

from conftest import SR, synth_speech


def test_clip_validation():
    with pytest.raises(ValueError):
        AudioClip(np.zeros((2, 100)), SR)
    with pytest.raises(ValueError):
        AudioClip(np.array([0.0, np.nan]), SR)
    with pytest.raises(ValueError):
        AudioClip(np.zeros(10), 0)


def test_clip_properties():
    clip = AudioClip(np.zeros(SR), SR)
    assert clip.channels == 1
    assert clip.duration == pytest.approx(1.0)
    assert len(clip) == SR


def test_wav_round_trip_is_lossless(tmp_path):
    # values on the exact int16 grid survive write/read bit-for-bit
    rng = np.random.default_rng(7)
    samples = rng.integers(-32768, 32768, size=4800).astype(np.float64) / 32768.0
    path = tmp_path / "grid.wav"
    write_wav(path, AudioClip(samples, SR))
    back = read_wav(path)
    assert back.sample_rate == SR
    assert np.array_equal(back.samples, samples)


def test_wav_write_quantizes_within_half_step(tmp_path):
    samples = synth_speech(0, dur=0.5)
    path = tmp_path / "speech.wav"
    write_wav(path, AudioClip(samples, SR))
    back = read_wav(path)
    assert np.max(np.abs(back.samples - samples)) <= 0.5 / 32768 + 1e-12


def test_wav_write_clips_overrange(tmp_path):
    path = tmp_path / "hot.wav"
    write_wav(path, AudioClip(np.array([1.5, -1.5, 0.0]), SR))
    back = read_wav(path)
    assert back.samples[0] == pytest.approx(32767 / 32768)
    assert back.samples[1] == -1.0


def test_read_rejects_stereo(tmp_path):
    path = tmp_path / "stereo.wav"
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(2)
        fh.setsampwidth(2)
        fh.setframerate(SR)
        fh.writeframes(b"\x00\x00" * 200)
    with pytest.raises(ValueError, match="mono"):
        read_wav(path)


def test_read_rejects_non_16bit(tmp_path):
    path = tmp_path / "wide.wav"
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(4)
        fh.setframerate(SR)
        fh.writeframes(b"\x00\x00\x00\x00" * 100)
    with pytest.raises(ValueError, match="16-bit"):
        read_wav(path)
