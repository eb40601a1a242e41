"""FFT harmonic analysis of steady vibration records.

The one-sided amplitude spectrum is scaled so a pure sinusoid of
amplitude A shows a peak of height A (DC and the Nyquist bin are not
doubled). Peak heights are typically normalized by the largest
non-DC magnitude before harmonics of the excitation frequency are
extracted and compared.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Spectrum",
    "HarmonicPeak",
    "HarmonicComparison",
    "fft_spectrum",
    "normalize_by_max",
    "find_harmonics",
    "compare_spectra",
    "steady_state_spectrum",
    "write_spectrum",
    "read_spectrum",
    "write_harmonics",
]

WINDOWS = ("none", "hann")
# a harmonic is "present" when its local peak exceeds this multiple of the
# median non-DC magnitude
NOISE_FLOOR_FACTOR = 10.0


@dataclass(eq=False)
class Spectrum:
    """One-sided amplitude spectrum on a uniform frequency grid."""

    frequencies: np.ndarray
    magnitudes: np.ndarray
    df: float
    window: str = "none"

    @property
    def nyquist(self) -> float:
        return float(self.frequencies[-1])


@dataclass(frozen=True)
class HarmonicPeak:
    k: int
    frequency: float
    magnitude: float
    present: bool


@dataclass(frozen=True)
class HarmonicComparison:
    k: int
    delta_f: float
    magnitude_ratio: float


def fft_spectrum(samples, dt: float, window: str = "none") -> Spectrum:
    """One-sided amplitude spectrum of a uniformly sampled series."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or len(samples) < 8:
        raise ValueError("need a 1-d series of at least 8 samples")
    if not (np.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not np.isfinite(samples).all():
        raise ValueError("samples must be finite")
    if window not in WINDOWS:
        raise ValueError(f"window must be one of {WINDOWS}, got {window!r}")

    x = samples * np.hanning(len(samples)) if window == "hann" else samples
    n = len(x)
    mags = np.abs(np.fft.rfft(x)) / n
    mags[1:] *= 2.0
    if n % 2 == 0:
        mags[-1] /= 2.0  # Nyquist bin is not mirrored
    freqs = np.fft.rfftfreq(n, dt)
    return Spectrum(frequencies=freqs, magnitudes=mags, df=1.0 / (n * dt), window=window)


def normalize_by_max(s: Spectrum) -> Spectrum:
    """All magnitudes divided by the largest non-DC magnitude.

    Idempotent and scale-invariant; raises on an all-zero spectrum.
    """
    peak = s.magnitudes[1:].max() if len(s.magnitudes) > 1 else 0.0
    if not peak > 0.0:
        raise ValueError("cannot normalize: no nonzero oscillatory content")
    return Spectrum(
        frequencies=s.frequencies,
        magnitudes=s.magnitudes / peak,
        df=s.df,
        window=s.window,
    )


def find_harmonics(s: Spectrum, f0: float, k_max: int, tol_bins: int = 2):
    """Local peaks near k*f0 for k = 1..k_max.

    Each harmonic is searched within ``tol_bins`` bins of its nominal
    location; it is flagged absent when the local maximum does not rise
    above the noise floor (median non-DC magnitude x 10).
    """
    if not f0 > 0.0:
        raise ValueError(f"f0 must be positive, got {f0!r}")
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    if k_max * f0 >= s.nyquist:
        raise ValueError(
            f"harmonic {k_max} of {f0} Hz is at or above Nyquist {s.nyquist} Hz"
        )
    if tol_bins < 0:
        raise ValueError("tol_bins must be >= 0")

    floor = NOISE_FLOOR_FACTOR * float(np.median(s.magnitudes[1:]))
    last = len(s.magnitudes) - 1
    peaks = []
    for k in range(1, k_max + 1):
        center = int(round(k * f0 / s.df))
        lo = max(1, center - tol_bins)
        hi = min(last, center + tol_bins)
        j = lo + int(np.argmax(s.magnitudes[lo : hi + 1]))
        mag = float(s.magnitudes[j])
        peaks.append(
            HarmonicPeak(
                k=k,
                frequency=float(s.frequencies[j]),
                magnitude=mag,
                present=mag > floor,
            )
        )
    return peaks


def _common_grid(a: Spectrum, b: Spectrum):
    """Interpolate the coarser spectrum onto the finer grid."""
    fine, coarse = (a, b) if a.df <= b.df else (b, a)
    f_max = min(a.nyquist, b.nyquist)
    freqs = fine.frequencies[fine.frequencies <= f_max]
    mags_fine = fine.magnitudes[: len(freqs)]
    mags_coarse = np.interp(freqs, coarse.frequencies, coarse.magnitudes)
    ga = Spectrum(freqs, mags_fine if fine is a else mags_coarse, fine.df, a.window)
    gb = Spectrum(freqs, mags_fine if fine is b else mags_coarse, fine.df, b.window)
    return ga, gb


def compare_spectra(a: Spectrum, b: Spectrum, f0: float, k_max: int, tol_bins: int = 2):
    """Per-harmonic frequency offsets and height ratios, b relative to a.

    Both spectra are normalized by their own maxima first, so overall gain
    differences cancel; mismatched resolutions are reconciled by
    interpolating the coarser onto the finer grid. The ratio is NaN when a
    harmonic is absent on either side.
    """
    ga, gb = _common_grid(normalize_by_max(a), normalize_by_max(b))
    pa = find_harmonics(ga, f0, k_max, tol_bins)
    pb = find_harmonics(gb, f0, k_max, tol_bins)
    out = []
    for ha, hb in zip(pa, pb):
        both = ha.present and hb.present
        out.append(
            HarmonicComparison(
                k=ha.k,
                delta_f=hb.frequency - ha.frequency,
                magnitude_ratio=hb.magnitude / ha.magnitude if both else float("nan"),
            )
        )
    return out


def steady_state_spectrum(samples, dt: float, window: str = "none") -> Spectrum:
    """Spectrum of the trailing half of a record, truncated to a power of two.

    The leading half is treated as transient and discarded; the power-of-two
    truncation keeps the FFT grid clean.
    """
    samples = np.asarray(samples, dtype=float)
    half = len(samples) // 2
    if half < 8:
        raise ValueError("record too short for a steady-state window")
    m = 2 ** int(np.floor(np.log2(half)))
    return fft_spectrum(samples[-m:], dt, window)


def write_spectrum(path, s: Spectrum, meta=None) -> None:
    from . import _tables

    full_meta = {"window": s.window, "df_Hz": s.df}
    full_meta.update(meta or {})
    _tables.write_table(
        path,
        kind="spectrum",
        column_names=["f_Hz", "magnitude"],
        data=np.column_stack([s.frequencies, s.magnitudes]),
        meta=full_meta,
    )


def read_spectrum(path) -> Spectrum:
    from . import _tables

    meta, cols = _tables.read_table(path, expected_kind="spectrum")
    freqs = cols["f_Hz"]
    if len(freqs) < 2:
        raise ValueError(f"{path}: spectrum needs at least 2 bins")
    df = float(meta.get("df_Hz", freqs[1] - freqs[0]))
    window = meta.get("window", "none")
    return Spectrum(frequencies=freqs, magnitudes=cols["magnitude"], df=df, window=window)


def write_harmonics(path, peaks, meta=None) -> None:
    from . import _tables

    data = np.array(
        [[p.k, p.frequency, p.magnitude, 1.0 if p.present else 0.0] for p in peaks]
    )
    _tables.write_table(
        path,
        kind="harmonics",
        column_names=["k", "f_peak_Hz", "magnitude", "present"],
        data=data,
        meta=meta,
    )
