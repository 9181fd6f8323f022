"""Synthesis of the twelve fullband reference conditions.

Two degradation axes are combined: background noise mixed at an A-weighted
speech-to-noise ratio, and a noise-suppressor-style speech distortion built
from an STFT Wiener gain. Both operate on 48 kHz mono clips.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audio import FULLBAND_RATE, AudioClip, read_wav, write_wav

log = logging.getLogger(__name__)

# Cond. id -> (speech distortion level, SNR dB(A)); built-in anchor chain
_REFERENCE_TABLE: dict[str, tuple[Optional[int], Optional[float]]] = {
    "i01": (None, None),
    "i02": (None, 0.0),
    "i03": (None, 12.0),
    "i04": (None, 24.0),
    "i05": (None, 36.0),
    "i06": (1, None),
    "i07": (2, None),
    "i08": (3, None),
    "i09": (4, None),
    "i10": (3, 24.0),
    "i11": (2, 12.0),
    "i12": (1, 0.0),
}


@dataclass(frozen=True)
class ConditionSpec:
    """One reference condition (i01..i12) or a system-under-test label."""

    id: str
    ns_level: Optional[int] = None
    snr_db_a: Optional[float] = None

    def __post_init__(self):
        if self.ns_level is not None and self.ns_level not in (1, 2, 3, 4):
            raise ValueError(f"ns_level must be 1..4, got {self.ns_level}")
        if self.id in _REFERENCE_TABLE:
            level, snr = _REFERENCE_TABLE[self.id]
            if self.ns_level != level or self.snr_db_a != snr:
                raise ValueError(
                    f"condition {self.id} is fixed to ns_level={level}, snr_db_a={snr}"
                )

    @property
    def is_reference(self) -> bool:
        return self.id in _REFERENCE_TABLE


def condition_spec(condition_id: str) -> ConditionSpec:
    """Return the built-in spec for one of i01..i12."""
    if condition_id not in _REFERENCE_TABLE:
        raise ValueError(f"unknown reference condition {condition_id!r} (expected i01..i12)")
    level, snr = _REFERENCE_TABLE[condition_id]
    return ConditionSpec(condition_id, ns_level=level, snr_db_a=snr)


REFERENCE_CONDITIONS = {cid: condition_spec(cid) for cid in _REFERENCE_TABLE}


@dataclass(frozen=True)
class DistortionParams:
    """Knobs of the Wiener-gain speech distortion.

    over_subtraction scales the noise-floor proxy upward, gain_floor limits
    how deep the spectral gain may cut. More aggressive settings (large
    over_subtraction, small gain_floor) produce heavier distortion.
    """

    over_subtraction: float
    gain_floor: float
    frame_ms: float = 32.0
    hop_ms: float = 16.0
    smoothing: float = 0.96

    def __post_init__(self):
        if self.over_subtraction < 1.0:
            raise ValueError("over_subtraction must be >= 1")
        if not 0.0 < self.gain_floor <= 1.0:
            raise ValueError("gain_floor must be in (0, 1]")
        if not 0.0 <= self.smoothing < 1.0:
            raise ValueError("smoothing must be in [0, 1)")
        if self.frame_ms <= 0 or self.hop_ms <= 0 or self.hop_ms > self.frame_ms:
            raise ValueError("invalid frame/hop geometry")


# Level presets, calibrated for strictly monotone distortion severity:
# level 1 is the heaviest (lowest SIG anchor), level 4 the lightest.
DISTORTION_LEVELS: dict[int, DistortionParams] = {
    1: DistortionParams(over_subtraction=8.0, gain_floor=0.03),
    2: DistortionParams(over_subtraction=4.0, gain_floor=0.08),
    3: DistortionParams(over_subtraction=2.0, gain_floor=0.18),
    4: DistortionParams(over_subtraction=1.0, gain_floor=0.40),
}

# Frames whose energy is within this range of the loudest frame count as active.
ACTIVITY_RANGE_DB = 35.0
_ASL_FRAME_SECONDS = 0.010


def active_speech_level(clip: AudioClip) -> float:
    """Active speech level in dB relative to full scale.

    Energy-based activity detection: the clip is cut into 10 ms frames and
    frames within ACTIVITY_RANGE_DB of the loudest frame are marked active;
    the level is the RMS over active frames. Deterministic, and exactly
    gain-equivariant because the threshold is relative.
    """
    x = clip.samples
    if len(x) == 0:
        raise ValueError("empty clip")
    frame = max(1, int(round(_ASL_FRAME_SECONDS * clip.sample_rate)))
    n_frames = -(-len(x) // frame)
    padded = np.zeros(n_frames * frame)
    padded[: len(x)] = x
    frames = padded.reshape(n_frames, frame)
    energy = np.mean(frames**2, axis=1)
    peak = energy.max()
    if peak <= 0.0:
        raise ValueError("no active speech in clip")
    active = energy >= peak * 10.0 ** (-ACTIVITY_RANGE_DB / 10.0)
    rms = np.sqrt(np.mean(frames[active] ** 2))
    return float(20.0 * np.log10(rms))


def _a_curve(freq_hz: np.ndarray) -> np.ndarray:
    """Linear magnitude of the IEC 61672 A-weighting curve (unnormalized)."""
    f2 = np.asarray(freq_hz, dtype=np.float64) ** 2
    num = (12194.0**2) * f2 * f2
    den = (
        (f2 + 20.6**2)
        * np.sqrt((f2 + 107.7**2) * (f2 + 737.9**2))
        * (f2 + 12194.0**2)
    )
    out = np.zeros_like(f2)
    nz = den > 0
    out[nz] = num[nz] / den[nz]
    return out


_A_CURVE_1K = float(_a_curve(np.array([1000.0]))[0])


def a_weight(clip: AudioClip) -> AudioClip:
    """Apply A-weighting as a zero-phase frequency-domain filter.

    Normalized to 0 dB at 1 kHz. Only meant for level measurement, not for
    listening; requires 48 kHz input (no silent resampling).
    """
    if clip.sample_rate != FULLBAND_RATE:
        raise ValueError(
            f"a_weight expects {FULLBAND_RATE} Hz input, got {clip.sample_rate} Hz"
        )
    n = len(clip.samples)
    if n == 0:
        return AudioClip(clip.samples.copy(), clip.sample_rate)
    spectrum = np.fft.rfft(clip.samples)
    weights = _a_curve(np.fft.rfftfreq(n, 1.0 / clip.sample_rate)) / _A_CURVE_1K
    return AudioClip(np.fft.irfft(spectrum * weights, n), clip.sample_rate)


def a_weighted_active_level(clip: AudioClip) -> float:
    """Active level of the A-weighted signal; the measure behind SNR (A) targets."""
    return active_speech_level(a_weight(clip))


def _mix(speech: AudioClip, noise: AudioClip, snr_db_a: float):
    if speech.sample_rate != FULLBAND_RATE or noise.sample_rate != FULLBAND_RATE:
        raise ValueError("mixing expects 48 kHz speech and noise")
    if len(noise) < len(speech):
        raise ValueError("noise must be at least as long as speech (never looped)")
    # leading segment of equal length; looping would splice artifacts in
    noise_seg = noise.samples[: len(speech)]
    if not np.any(noise_seg):
        raise ValueError("noise is silent")
    speech_level = a_weighted_active_level(speech)
    noise_level = a_weighted_active_level(AudioClip(noise_seg, noise.sample_rate))
    gain_db = speech_level - snr_db_a - noise_level
    gain = 10.0 ** (gain_db / 20.0)
    mixture = speech.samples + gain * noise_seg
    peak = float(np.max(np.abs(mixture))) if len(mixture) else 0.0
    scale = 0.99 / peak if peak > 1.0 else 1.0
    if scale != 1.0:
        mixture = mixture * scale
        log.info("mixture clipped: rescaled by %.4f to peak 0.99", scale)
    return AudioClip(mixture, speech.sample_rate), gain_db, scale


def mix_at_snr(speech: AudioClip, noise: AudioClip, snr_db_a: float) -> AudioClip:
    """Mix noise under speech at a target A-weighted active SNR.

    The noise gain is chosen so that the A-weighted active speech level
    exceeds the A-weighted noise level by exactly snr_db_a. If the mixture
    peaks above full scale it is rescaled to peak 0.99 (SNR is unaffected).
    """
    clip, _, _ = _mix(speech, noise, snr_db_a)
    return clip


def _sqrt_hann(size: int) -> np.ndarray:
    k = np.arange(size)
    return np.sqrt(0.5 - 0.5 * np.cos(2.0 * np.pi * k / size))


def _stft(x: np.ndarray, frame: int, hop: int, window: np.ndarray) -> np.ndarray:
    padded = np.concatenate([np.zeros(frame), x, np.zeros(frame + (-len(x)) % hop)])
    n_frames = (len(padded) - frame) // hop + 1
    frames = np.lib.stride_tricks.sliding_window_view(padded, frame)[::hop][:n_frames]
    return np.fft.rfft(frames * window, axis=1)


def _istft(spec: np.ndarray, frame: int, hop: int, window: np.ndarray, n: int) -> np.ndarray:
    frames = np.fft.irfft(spec, frame, axis=1) * window
    out = np.zeros(frame + (spec.shape[0] - 1) * hop)
    for i in range(spec.shape[0]):
        out[i * hop : i * hop + frame] += frames[i]
    # sqrt-Hann analysis/synthesis at 50% overlap sums to one in the interior
    return out[frame : frame + n]


def wiener_distort(speech: AudioClip, params: DistortionParams) -> AudioClip:
    """Degrade clean speech with an STFT Wiener gain.

    The clip's own long-term average spectrum, scaled by over_subtraction,
    stands in for the noise estimate; the a-priori SNR follows the
    decision-directed recursion and the gain is floored at gain_floor.
    With over_subtraction=1 and gain_floor=1 the chain is the identity.
    """
    frame = int(round(params.frame_ms * 1e-3 * speech.sample_rate))
    hop = int(round(params.hop_ms * 1e-3 * speech.sample_rate))
    window = _sqrt_hann(frame)
    spec = _stft(speech.samples, frame, hop, window)
    power = np.abs(spec) ** 2
    noise_psd = params.over_subtraction * power.mean(axis=0) + 1e-30

    gains = np.empty_like(power)
    recursion = np.zeros(power.shape[1])
    for t in range(power.shape[0]):
        gamma = power[t] / noise_psd
        xi = params.smoothing * recursion + (1.0 - params.smoothing) * np.maximum(gamma - 1.0, 0.0)
        g = np.maximum(xi / (1.0 + xi), params.gain_floor)
        gains[t] = g
        recursion = g * g * gamma

    out = _istft(gains * spec, frame, hop, window, len(speech.samples))
    return AudioClip(out, speech.sample_rate)


def apply_ns_distortion(speech: AudioClip, level: int) -> AudioClip:
    """Apply one of the four noise-suppression distortion levels to clean speech.

    Severity is strictly monotone: level 1 distorts the most, level 4 the
    least. Output length equals input length.
    """
    if level not in DISTORTION_LEVELS:
        raise ValueError(f"distortion level must be 1..4, got {level}")
    return wiener_distort(speech, DISTORTION_LEVELS[level])


def generate_condition(
    spec: ConditionSpec, speech: AudioClip, noise: Optional[AudioClip] = None
) -> AudioClip:
    """Run the full condition chain for one of i01..i12.

    i01 passes speech through untouched; i02-i05 mix only; i06-i09 distort
    only; i10-i12 distort the clean speech first and then add noise, keeping
    the two degradation axes independent.
    """
    clip, _ = generate_condition_info(spec, speech, noise)
    return clip


def generate_condition_info(
    spec: ConditionSpec, speech: AudioClip, noise: Optional[AudioClip] = None
) -> tuple[AudioClip, dict]:
    """Like generate_condition, plus the gains the batch manifest records."""
    if not spec.is_reference:
        raise ValueError(f"{spec.id!r} is not a reference condition (expected i01..i12)")
    info = {"applied_noise_gain_db": None, "post_mix_scale": 1.0}

    processed = speech
    if spec.ns_level is not None:
        processed = apply_ns_distortion(speech, spec.ns_level)
    if spec.snr_db_a is not None:
        if noise is None:
            raise ValueError(f"condition {spec.id} requires a noise clip")
        processed, gain_db, scale = _mix(processed, noise, spec.snr_db_a)
        info["applied_noise_gain_db"] = gain_db
        info["post_mix_scale"] = scale
    elif spec.ns_level is None:
        processed = AudioClip(speech.samples.copy(), speech.sample_rate)

    return processed, info


def generate_condition_file(
    speech_path, noise_path, condition_id: str, output_path
) -> dict:
    """Generate one manifest entry's WAV; returns the gain info to append."""
    speech = read_wav(speech_path)
    spec = condition_spec(condition_id)
    noise = None
    if spec.snr_db_a is not None:
        if noise_path is None:
            raise ValueError(f"condition {condition_id} requires a noise_path")
        noise = read_wav(noise_path)
    clip, info = generate_condition_info(spec, speech, noise)
    write_wav(output_path, clip)
    return info
