import math

import numpy as np
import pytest
from scipy import integrate

from sigagent.dsp import (SignalFrame, angle_stat, doppler_spectral_entropy, fpar, power_spectrum, read_signal,
                          stft, stft_marginal_spectrum, stftm, time_information_entropy, write_signal)
from sigagent.errors import EmptyBand, FrameTooShort

FS = 1000.0


def tone(n, bin_, nfft, amp=1.0):
    return amp * np.exp(2j * np.pi * bin_ * np.arange(n) / nfft)


def cnoise(rng, n, sigma=1.0):
    return sigma * (rng.normal(size=n) + 1j * rng.normal(size=n)) / math.sqrt(2)


# stft

def test_stft_frame_count():
    spec = stft(SignalFrame(np.ones(1024), FS), 128, 64)
    assert spec.magnitudes.shape == (15, 128)


def test_stft_too_short():
    with pytest.raises(FrameTooShort):
        stft(SignalFrame(np.ones(100), FS), 128, 64)


def test_stft_zero_signal():
    assert not stft(SignalFrame(np.zeros(512), FS)).magnitudes.any()


def test_stft_tone_single_column():
    spec = stft(SignalFrame(tone(1024, 8, 64), FS), 64, 32)
    col = spec.magnitudes.mean(axis=0)
    k = int(np.argmax(col))
    assert spec.freqs[k] == pytest.approx(8 * FS / 64)
    # Hann main lobe covers the neighbouring bins; compare against everything outside it
    outside = np.delete(col, [k - 1, k, k + 1])
    assert col[k] / outside.max() > 100
    assert np.all(np.argmax(spec.magnitudes, axis=1) == k)


def test_marginal_spectrum():
    spec = stft(SignalFrame(tone(64, 3, 64), FS), 64, 32)
    assert np.array_equal(stft_marginal_spectrum(spec), spec.magnitudes[0])
    spec = stft(SignalFrame(tone(2048, -5, 64), FS), 64, 16)
    assert spec.freqs[np.argmax(stft_marginal_spectrum(spec))] == pytest.approx(-5 * FS / 64)
    assert not stft_marginal_spectrum(stft(SignalFrame(np.zeros(256), FS))).any()


# Doppler entropy

def test_entropy_of_tone_is_near_zero():
    assert doppler_spectral_entropy(SignalFrame(tone(2048, 16, 256), FS)) <= 0.2


def test_entropy_of_white_noise():
    rng = np.random.default_rng(0)
    h = [doppler_spectral_entropy(SignalFrame(cnoise(rng, 2048), FS)) for _ in range(100)]
    assert abs(np.mean(h) - math.log(256)) / math.log(256) < 0.05


def test_entropy_zero_signal():
    assert doppler_spectral_entropy(SignalFrame(np.zeros(256), FS)) == 0.0


def test_power_spectrum_needs_nfft_samples():
    with pytest.raises(FrameTooShort):
        power_spectrum(SignalFrame(np.ones(100), FS), 256)


# time information entropy

def test_tie_constant():
    assert time_information_entropy(SignalFrame(np.full(100, 2 + 0j), FS), 8) == 0.0


def test_tie_staircase_hits_every_bin():
    m = 16
    levels = []
    for i in range(8):
        vals = [(i + 0.5) / 8] * m
        if i == 0:
            vals[0] = 0.0
        if i == 7:
            vals[0] = 1.0
        levels += vals
    rng = np.random.default_rng(1)
    x = np.array(levels) * np.exp(1j * rng.uniform(-np.pi, np.pi, len(levels)))
    assert abs(time_information_entropy(SignalFrame(x, FS), 8) - math.log(8)) < 1e-6


def test_tie_needs_two_intervals():
    with pytest.raises(ValueError):
        time_information_entropy(SignalFrame(np.arange(10) + 0j, FS), 1)


# FPAR

def test_fpar_flat_band():
    x = np.zeros(256, complex)
    x[0] = 1.0  # impulse: flat spectrum
    assert abs(fpar(SignalFrame(x, FS), (-200, 300)) - 1.0) < 1e-9


def test_fpar_tone_in_band():
    rng = np.random.default_rng(2)
    x = tone(2048, 32, 256) + cnoise(rng, 2048, 0.3)
    freqs, _ = power_spectrum(SignalFrame(x, FS), 256)
    assert ((freqs >= 0) & (freqs <= 500)).sum() == 128
    assert fpar(SignalFrame(x, FS), (0, 500)) >= 50


def test_fpar_band_checks():
    f = SignalFrame(np.ones(256), FS)
    with pytest.raises(ValueError):
        fpar(f, (0, 600))
    with pytest.raises(EmptyBand):
        fpar(f, (1.0, 2.0))
    assert fpar(SignalFrame(np.zeros(256), FS), (0, 400)) == 0.0


# STFTM

def test_stftm_full_neighbourhood_is_global_mean():
    rng = np.random.default_rng(3)
    f = SignalFrame(cnoise(rng, 1024), FS)
    assert stftm(f, 1.0) == pytest.approx(stft(f).magnitudes.mean(), rel=1e-12)


def test_stftm_concentrates_on_peak():
    rng = np.random.default_rng(4)
    f = SignalFrame(tone(2048, 20, 64) + cnoise(rng, 2048, 0.3), FS)
    assert stftm(f, 0.1) > stftm(f, 1.0)
    assert stftm(SignalFrame(np.zeros(512), FS), 0.3) == 0.0
    with pytest.raises(ValueError):
        stftm(f, 0.0)


# angle

def test_angle_degenerate_cases():
    assert angle_stat(SignalFrame(np.full(50, 3 * np.exp(0.7j)), FS)) == pytest.approx(0.0, abs=1e-7)
    assert angle_stat(SignalFrame(np.array([1 + 1j]), FS)) == 0.0


def test_angle_uniform_phases():
    # with N uniform phases, N*R^2 is close to Exp(1), so the expectation is an integral
    n = 1024
    oracle = integrate.quad(lambda e: math.sqrt(max(0.0, math.log(n) - math.log(e))) * math.exp(-e),
                            0, n, limit=200)[0]
    rng = np.random.default_rng(5)
    got = np.mean([angle_stat(SignalFrame(np.exp(1j * rng.uniform(-np.pi, np.pi, n)), FS)) for _ in range(100)])
    assert abs(got - oracle) / oracle < 0.10


# invariants

def test_scale_behaviour():
    rng = np.random.default_rng(6)
    f = SignalFrame(tone(1024, 9, 64) + cnoise(rng, 1024), FS)
    for c in (0.01, 3.0, 250.0):
        g = f.scaled(c)
        assert time_information_entropy(g, 12) == pytest.approx(time_information_entropy(f, 12), abs=1e-9)
        assert doppler_spectral_entropy(g) == pytest.approx(doppler_spectral_entropy(f), abs=1e-9)
        assert fpar(g, (-300, 300)) == pytest.approx(fpar(f, (-300, 300)), abs=1e-9)
        assert angle_stat(g) == pytest.approx(angle_stat(f), abs=1e-9)
        assert stftm(g, 0.3) == pytest.approx(c * stftm(f, 0.3), rel=1e-9)


def test_signal_file_roundtrip(tmp_path):
    rng = np.random.default_rng(7)
    f = SignalFrame(cnoise(rng, 300).astype(np.complex64), 1000.0)
    write_signal(tmp_path / "frame01", f, "target")
    g, label = read_signal(tmp_path / "frame01")
    assert label == "target" and g.sample_rate == 1000.0
    assert np.array_equal(g.samples, f.samples)
    raw = (tmp_path / "frame01.iq").read_bytes()
    assert len(raw) == 300 * 8
    assert np.frombuffer(raw[:4], "<f4")[0] == np.float32(f.samples[0].real)
