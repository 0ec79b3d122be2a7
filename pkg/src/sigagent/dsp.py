"""Spectral and statistical features for complex (I/Q) radar frames.

Every feature is computed from one of three frame summaries (averaged power
spectrum, magnitude spectrogram, amplitude envelope), and the ``*_from_*``
helpers take those summaries directly, so callers that evaluate many parameter
settings can compute the summaries once.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import get_window

from .errors import EmptyBand, FrameTooShort


@dataclass(frozen=True)
class SignalFrame:
    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("a frame needs a non-empty 1-D sample vector")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.size

    def scaled(self, c: float) -> "SignalFrame":
        return SignalFrame(self.samples * c, self.sample_rate)


@dataclass(frozen=True)
class Spectrogram:
    magnitudes: np.ndarray  # frames x frequency bins, DC in the middle
    freqs: np.ndarray
    window_length: int
    hop: int
    nfft: int


def _samples(frame) -> tuple[np.ndarray, float]:
    if isinstance(frame, SignalFrame):
        return frame.samples, frame.sample_rate
    return np.asarray(frame, dtype=np.complex128), 1.0


def stft(frame, window_length: int = 64, hop: int = 32, nfft: int | None = None,
         window: str = "hann") -> Spectrogram:
    x, fs = _samples(frame)
    nfft = nfft or window_length
    if hop < 1:
        raise ValueError("hop must be >= 1")
    if nfft < window_length:
        raise ValueError("nfft must be >= window length")
    if window_length > x.size:
        raise FrameTooShort(f"window of {window_length} samples exceeds frame of {x.size}")
    n_frames = (x.size - window_length) // hop + 1
    idx = np.arange(window_length)[None, :] + hop * np.arange(n_frames)[:, None]
    segs = x[idx] * get_window(window, window_length)
    mags = np.abs(np.fft.fftshift(np.fft.fft(segs, n=nfft, axis=1), axes=1))
    freqs = np.fft.fftshift(np.fft.fftfreq(nfft, d=1.0 / fs))
    return Spectrogram(mags, freqs, window_length, hop, nfft)


def stft_marginal_spectrum(spec: Spectrogram) -> np.ndarray:
    return spec.magnitudes.mean(axis=0)


def power_spectrum(frame, nfft: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Averaged periodogram over non-overlapping rectangular segments of ``nfft`` samples.

    Returns (freqs, power) with DC in the middle. A rectangular window keeps a
    bin-centred tone in a single bin.
    """
    x, fs = _samples(frame)
    if x.size < nfft:
        raise FrameTooShort(f"frame of {x.size} samples shorter than nfft={nfft}")
    m = x.size // nfft
    segs = x[: m * nfft].reshape(m, nfft)
    p = (np.abs(np.fft.fft(segs, axis=1)) ** 2).mean(axis=0) / nfft
    return np.fft.fftshift(np.fft.fftfreq(nfft, d=1.0 / fs)), np.fft.fftshift(p)


def entropy_of(weights: np.ndarray) -> float:
    total = float(np.sum(weights))
    if total <= 0:
        return 0.0
    p = np.asarray(weights, dtype=float) / total
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log(p))))


def doppler_spectral_entropy(frame, nfft: int = 256) -> float:
    return entropy_of(power_spectrum(frame, nfft)[1])


def envelope(frame) -> np.ndarray:
    return np.abs(_samples(frame)[0])


def tie_from_envelope(env: np.ndarray, n_intervals: int) -> float:
    n_intervals = int(n_intervals)
    if n_intervals < 2:
        raise ValueError("need at least 2 intervals")
    lo, hi = float(env.min()), float(env.max())
    if hi <= lo:
        return 0.0
    bins = np.minimum(((env - lo) / (hi - lo) * n_intervals).astype(np.int64), n_intervals - 1)
    return entropy_of(np.bincount(bins, minlength=n_intervals))


def time_information_entropy(frame, n_intervals: int) -> float:
    """Entropy of the amplitude histogram over equal-width bins spanning [min, max]."""
    return tie_from_envelope(envelope(frame), n_intervals)


def fpar_from_power(freqs: np.ndarray, power: np.ndarray, band, sample_rate: float) -> float:
    f_lo, f_hi = float(band[0]), float(band[1])
    if not (-sample_rate / 2 <= f_lo < f_hi <= sample_rate / 2):
        raise ValueError(f"band {band} not inside +/- {sample_rate / 2} Hz")
    sel = power[(freqs >= f_lo) & (freqs <= f_hi)]
    if sel.size == 0:
        raise EmptyBand(f"no frequency bins in [{f_lo}, {f_hi}] Hz")
    mean = float(sel.mean())
    return float(sel.max()) / mean if mean > 0 else 0.0


def fpar(frame, band, nfft: int = 256) -> float:
    """Peak-to-average power ratio inside a frequency band (Hz, inclusive)."""
    _, fs = _samples(frame)
    freqs, power = power_spectrum(frame, nfft)
    return fpar_from_power(freqs, power, band, fs)


def _window_span(center: int, width: int, size: int) -> slice:
    start = min(max(center - width // 2, 0), size - width)
    return slice(start, start + width)


def stftm_from_spec(mags: np.ndarray, ratio: float) -> float:
    """Mean magnitude in a box around the spectrogram peak.

    The box spans ceil(ratio * T) frames by ceil(ratio * F) bins, centred on the
    peak and slid inward at the edges, so ``ratio=1`` averages everything.
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError("neighbourhood ratio must lie in (0, 1]")
    T, F = mags.shape
    t0, f0 = np.unravel_index(int(np.argmax(mags)), mags.shape)
    wt = max(1, min(T, math.ceil(ratio * T)))
    wf = max(1, min(F, math.ceil(ratio * F)))
    return float(mags[_window_span(t0, wt, T), _window_span(f0, wf, F)].mean())


def stftm(frame, ratio: float, window_length: int = 64, hop: int = 32) -> float:
    return stftm_from_spec(stft(frame, window_length, hop).magnitudes, ratio)


def angle_stat(frame) -> float:
    """Circular standard deviation of the sample phases; zero-magnitude samples are ignored."""
    x, _ = _samples(frame)
    mag = np.abs(x)
    nz = mag > 0
    if not np.any(nz):
        return 0.0
    R = float(np.abs(np.mean(x[nz] / mag[nz])))
    R = min(max(R, 1e-300), 1.0)
    return math.sqrt(max(0.0, -2.0 * math.log(R)))


# ---- signal files --------------------------------------------------------------------

def write_signal(path, frame: SignalFrame, label: str | None = None) -> tuple[Path, Path]:
    """Store a frame as ``<path>.iq`` (little-endian float32 I/Q pairs) plus ``<path>.json``."""
    path = Path(path)
    iq = np.empty(2 * len(frame), dtype="<f4")
    iq[0::2] = frame.samples.real
    iq[1::2] = frame.samples.imag
    data_path, meta_path = path.with_suffix(".iq"), path.with_suffix(".json")
    data_path.write_bytes(iq.tobytes())
    meta = {"sample_rate": frame.sample_rate, "samples": len(frame), "label": label, "data": data_path.name}
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta_path, data_path


def read_signal(path) -> tuple[SignalFrame, str | None]:
    meta_path = Path(path).with_suffix(".json")
    meta = json.loads(meta_path.read_text())
    raw = np.frombuffer((meta_path.parent / meta["data"]).read_bytes(), dtype="<f4")
    if raw.size != 2 * meta["samples"]:
        raise ValueError(f"{meta_path}: expected {meta['samples']} samples, found {raw.size // 2}")
    return SignalFrame(raw[0::2] + 1j * raw[1::2].astype(np.float64), meta["sample_rate"]), meta.get("label")
