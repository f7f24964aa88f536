"""Synthetic ENF-bearing media.

Generates a grid-wide ground-truth frequency trace (a clamped Gaussian random
walk around the nominal frequency), embeds it into audio as mains hum
harmonics and into video as illumination flicker sampled by a global- or
rolling-shutter sensor, and injects labeled forgeries.

Everything here is a pure function of its arguments (including seeds), so
identical calls give bit-identical streams.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np

from .errors import InvalidArgumentError


@dataclass
class GridConfig:
    """Parameters of the simulated power grid frequency process."""

    nominal_hz: float = 60.0
    drift_std_hz: float = 0.005
    max_dev_hz: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.nominal_hz <= 0:
            raise InvalidArgumentError("nominal_hz must be > 0")
        if self.drift_std_hz < 0:
            raise InvalidArgumentError("drift_std_hz must be >= 0")
        if self.max_dev_hz <= 0:
            raise InvalidArgumentError("max_dev_hz must be > 0")


@dataclass
class EnfSeries:
    """Timestamped sequence of instantaneous frequency estimates in Hz."""

    start_time_s: float
    step_s: float
    values_hz: np.ndarray

    def __post_init__(self):
        self.values_hz = np.asarray(self.values_hz, dtype=float)
        if self.step_s <= 0:
            raise InvalidArgumentError("step_s must be > 0")
        if self.values_hz.ndim != 1 or len(self.values_hz) < 1:
            raise InvalidArgumentError("values_hz must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(self.values_hz)):
            raise InvalidArgumentError("values_hz must be finite")

    def __len__(self):
        return len(self.values_hz)

    def times(self) -> np.ndarray:
        return self.start_time_s + self.step_s * np.arange(len(self.values_hz))

    @property
    def duration_s(self) -> float:
        return self.step_s * len(self.values_hz)


class ShutterType(Enum):
    GlobalCCD = "GlobalCCD"
    RollingCMOS = "RollingCMOS"


class ForgeryMode(Enum):
    ReplaceEnf = "ReplaceEnf"
    StripEnf = "StripEnf"


@dataclass
class AudioStream:
    """Mono amplitude stream carrying an embedded ENF hum."""

    sample_rate_hz: float
    samples: np.ndarray
    truth: EnfSeries
    forged_intervals: List[Tuple[float, float]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass
class VideoLumaStream:
    """Per-row mean luminance stream; frames has shape (n_frames, frame_height)."""

    fps: float
    frame_height: int
    shutter: ShutterType
    frames: np.ndarray
    truth: EnfSeries
    forged_intervals: List[Tuple[float, float]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def duration_s(self) -> float:
        return len(self.frames) / self.fps


def gen_enf_truth(cfg: GridConfig, duration_s: float, step_s: float) -> EnfSeries:
    """Clamped Gaussian random walk around cfg.nominal_hz.

    Per-step increments are N(0, drift_std_hz^2 * step_s); the accumulated
    deviation is clipped to +-max_dev_hz at every step.
    """
    if duration_s <= 0:
        raise InvalidArgumentError("duration_s must be > 0")
    if step_s <= 0:
        raise InvalidArgumentError("step_s must be > 0")
    n = int(round(duration_s / step_s))
    if n < 1:
        raise InvalidArgumentError("duration_s must cover at least one step")
    rng = np.random.default_rng(cfg.seed)
    incr = rng.normal(0.0, cfg.drift_std_hz * np.sqrt(step_s), size=n)
    dev = np.clip(np.cumsum(incr), -cfg.max_dev_hz, cfg.max_dev_hz)
    return EnfSeries(start_time_s=0.0, step_s=step_s, values_hz=cfg.nominal_hz + dev)


def _instantaneous_freq(truth: EnfSeries, rate_hz: float, n: int) -> np.ndarray:
    # piecewise-linear interpolation of the truth onto the sample clock
    t = np.arange(n) / rate_hz
    return np.interp(t, truth.times(), truth.values_hz)


def _integrated_phase(truth: EnfSeries, rate_hz: float, n: int) -> np.ndarray:
    """2*pi * cumulative integral of f(t), sampled at rate_hz."""
    f = _instantaneous_freq(truth, rate_hz, n)
    return 2.0 * np.pi * np.cumsum(f) / rate_hz


def _noise_sigma(signal_power: float, snr_db: float) -> float:
    if not np.isfinite(snr_db):
        return 0.0
    return float(np.sqrt(signal_power / 10.0 ** (snr_db / 10.0)))


def embed_audio(
    truth: EnfSeries,
    sample_rate_hz: float,
    harmonics: Sequence[Tuple[int, float]],
    snr_db: float,
    seed: int = 0,
    grid: GridConfig | None = None,
) -> AudioStream:
    """Embed the truth trace as a sum of hum harmonics plus white noise.

    harmonics is a list of (order, amplitude); harmonic k oscillates at
    k * f(t) with phase equal to the cumulative integral of the interpolated
    truth. grid (optional) records the generating process so forgeries can
    re-synthesize matching content.
    """
    if not harmonics:
        raise InvalidArgumentError("harmonics must be non-empty")
    max_order = max(int(k) for k, _ in harmonics)
    if sample_rate_hz <= 2.0 * max_order * float(np.max(truth.values_hz)):
        raise InvalidArgumentError(
            f"sample_rate_hz={sample_rate_hz} violates Nyquist for harmonic order {max_order}"
        )
    rng = np.random.default_rng(seed)
    n = int(round(truth.duration_s * sample_rate_hz))
    base_phase = _integrated_phase(truth, sample_rate_hz, n)
    sig = np.zeros(n)
    for k, amp in harmonics:
        sig += amp * np.sin(k * base_phase + rng.uniform(0.0, 2.0 * np.pi))
    p = float(np.mean(sig**2)) if n else 0.0
    if p > 0.0:
        sigma = _noise_sigma(p, snr_db)
        if sigma > 0.0:
            sig = sig + rng.normal(0.0, sigma, size=n)
    g = grid if grid is not None else GridConfig(nominal_hz=60.0)
    meta = {
        "nominal_hz": g.nominal_hz,
        "drift_std_hz": g.drift_std_hz,
        "max_dev_hz": g.max_dev_hz,
        "harmonics": [(int(k), float(a)) for k, a in harmonics],
        "snr_db": float(snr_db),
        "seed": seed if isinstance(seed, int) else list(seed),
    }
    return AudioStream(
        sample_rate_hz=float(sample_rate_hz),
        samples=sig,
        truth=truth,
        forged_intervals=[],
        meta=meta,
    )


def embed_video(
    truth: EnfSeries,
    fps: float,
    frame_height: int,
    shutter: ShutterType,
    snr_db: float,
    seed: int = 0,
    mod_depth: float = 0.1,
    base_luma: float = 100.0,
    grid: GridConfig | None = None,
) -> VideoLumaStream:
    """Embed illumination flicker at 2*f(t) into per-row mean luminance.

    The lamp waveform is fully rectified (raised cosine), so its fundamental
    sits at twice the grid frequency. RollingCMOS exposes rows sequentially
    at rate fps*frame_height; GlobalCCD exposes whole frames at rate fps.
    """
    if fps <= 0:
        raise InvalidArgumentError("fps must be > 0")
    if frame_height < 1:
        raise InvalidArgumentError("frame_height must be >= 1")
    rng = np.random.default_rng(seed)
    n_frames = int(round(truth.duration_s * fps))
    ac_amp = 0.5 * mod_depth * base_luma

    if shutter is ShutterType.RollingCMOS:
        row_rate = fps * frame_height
        n = n_frames * frame_height
        phase2 = 2.0 * _integrated_phase(truth, row_rate, n)
        flat = base_luma + ac_amp * (1.0 - np.cos(phase2))
        sigma = _noise_sigma(ac_amp**2 / 2.0, snr_db)
        if sigma > 0.0:
            flat = flat + rng.normal(0.0, sigma, size=n)
        frames = flat.reshape(n_frames, frame_height)
    elif shutter is ShutterType.GlobalCCD:
        phase2 = 2.0 * _integrated_phase(truth, fps, n_frames)
        col = base_luma + ac_amp * (1.0 - np.cos(phase2))
        sigma = _noise_sigma(ac_amp**2 / 2.0, snr_db)
        if sigma > 0.0:
            col = col + rng.normal(0.0, sigma, size=n_frames)
        frames = np.repeat(col[:, None], frame_height, axis=1)
    else:
        raise InvalidArgumentError(f"unknown shutter type: {shutter!r}")

    g = grid if grid is not None else GridConfig(nominal_hz=60.0)
    meta = {
        "nominal_hz": g.nominal_hz,
        "drift_std_hz": g.drift_std_hz,
        "max_dev_hz": g.max_dev_hz,
        "snr_db": float(snr_db),
        "seed": seed if isinstance(seed, int) else list(seed),
        "mod_depth": float(mod_depth),
        "base_luma": float(base_luma),
    }
    return VideoLumaStream(
        fps=float(fps),
        frame_height=int(frame_height),
        shutter=shutter,
        frames=frames,
        truth=truth,
        forged_intervals=[],
        meta=meta,
    )


def _check_segments(segments, duration_s):
    segs = sorted((float(a), float(b)) for a, b in segments)
    prev_end = -np.inf
    for a, b in segs:
        if not (0.0 <= a < b <= duration_s):
            raise InvalidArgumentError(f"segment ({a}, {b}) outside stream duration {duration_s}")
        if a < prev_end:
            raise InvalidArgumentError("segments overlap")
        prev_end = b
    return segs


def _merge_intervals(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def _fresh_grid(meta: dict, seed) -> GridConfig:
    return GridConfig(
        nominal_hz=meta.get("nominal_hz", 60.0),
        drift_std_hz=meta.get("drift_std_hz", 0.005),
        max_dev_hz=meta.get("max_dev_hz", 0.05),
        seed=seed,
    )


def forge_segments(stream, segments, mode: ForgeryMode, seed: int = 0):
    """Inject forgeries over the given (start_s, end_s) segments.

    ReplaceEnf re-synthesizes segment content from an independent ENF truth;
    StripEnf substitutes matched-power white noise. Values outside the
    segments are untouched, and forged_intervals is extended with the new
    labels.
    """
    segs = _check_segments(segments, stream.duration_s)
    out = copy.deepcopy(stream)
    if not segs:
        return out

    if isinstance(stream, AudioStream):
        rate = stream.sample_rate_hz
        replacement = None
        if mode is ForgeryMode.ReplaceEnf:
            alt_truth = gen_enf_truth(
                _fresh_grid(stream.meta, seed=[int(seed), 0x5EED]),
                stream.truth.duration_s,
                stream.truth.step_s,
            )
            replacement = embed_audio(
                alt_truth,
                rate,
                stream.meta.get("harmonics", [(1, 1.0)]),
                stream.meta.get("snr_db", np.inf),
                seed=int(seed) + 1,
            ).samples
        for si, (a, b) in enumerate(segs):
            i0, i1 = int(round(a * rate)), int(round(b * rate))
            if mode is ForgeryMode.ReplaceEnf:
                out.samples[i0:i1] = replacement[i0:i1]
            elif mode is ForgeryMode.StripEnf:
                rng = np.random.default_rng([int(seed), si])
                power = float(np.mean(stream.samples[i0:i1] ** 2))
                out.samples[i0:i1] = rng.normal(0.0, np.sqrt(power), size=i1 - i0)
            else:
                raise InvalidArgumentError(f"unknown forgery mode: {mode!r}")
    elif isinstance(stream, VideoLumaStream):
        h = stream.frame_height
        flat = out.frames.reshape(-1)
        src_flat = stream.frames.reshape(-1)
        if stream.shutter is ShutterType.RollingCMOS:
            rate = stream.fps * h
        else:
            rate = stream.fps
        replacement = None
        if mode is ForgeryMode.ReplaceEnf:
            alt_truth = gen_enf_truth(
                _fresh_grid(stream.meta, seed=[int(seed), 0x5EED]),
                stream.truth.duration_s,
                stream.truth.step_s,
            )
            replacement = embed_video(
                alt_truth,
                stream.fps,
                h,
                stream.shutter,
                stream.meta.get("snr_db", np.inf),
                seed=int(seed) + 1,
                mod_depth=stream.meta.get("mod_depth", 0.1),
                base_luma=stream.meta.get("base_luma", 100.0),
            ).frames.reshape(-1)
        for si, (a, b) in enumerate(segs):
            if stream.shutter is ShutterType.RollingCMOS:
                i0, i1 = int(round(a * rate)), int(round(b * rate))
            else:
                # global shutter forgeries snap to whole frames
                i0 = int(round(a * rate)) * h
                i1 = int(round(b * rate)) * h
            if mode is ForgeryMode.ReplaceEnf:
                flat[i0:i1] = replacement[i0:i1]
            elif mode is ForgeryMode.StripEnf:
                rng = np.random.default_rng([int(seed), si])
                seg = src_flat[i0:i1]
                ac = seg - np.mean(seg)
                flat[i0:i1] = np.mean(seg) + rng.normal(0.0, np.sqrt(np.mean(ac**2)), size=i1 - i0)
            else:
                raise InvalidArgumentError(f"unknown forgery mode: {mode!r}")
        out.frames = flat.reshape(stream.frames.shape)
    else:
        raise InvalidArgumentError(f"unsupported stream type: {type(stream).__name__}")

    out.forged_intervals = _merge_intervals(list(stream.forged_intervals) + segs)
    return out
