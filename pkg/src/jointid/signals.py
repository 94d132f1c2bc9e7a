"""Spectra, cutoff selection, zero-phase low-pass filtering and local
polynomial differentiation of uniformly sampled channels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

DEFAULT_WINDOW = 21
DEFAULT_DEGREE = 2
DEFAULT_MARGIN = 2.0
FILTER_ORDER = 4


class SignalError(ValueError):
    pass


@dataclass(frozen=True)
class SampledSeries:
    sample_rate: float
    values: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise SignalError("sample_rate must be positive")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.values)) * self.dt

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class AmplitudeSpectrum:
    frequencies: np.ndarray
    magnitudes: np.ndarray
    n_samples: int

    def mean_square(self) -> float:
        """Time-domain mean square implied by the one-sided magnitudes."""
        w = np.full(len(self.magnitudes), 2.0)
        w[0] = 1.0
        if self.n_samples % 2 == 0:
            w[-1] = 1.0
        return float(np.sum(w * self.magnitudes**2))


def amplitude_spectrum(s: SampledSeries) -> AmplitudeSpectrum:
    """One-sided DFT magnitude scaled by ``1/N`` (a constant ``c`` shows as
    ``c`` in the DC bin, a sine of amplitude ``A`` as ``A/2``)."""
    x = s.values
    if len(x) < 8:
        raise SignalError("series too short for a spectrum (need >= 8 samples)")
    if not np.all(np.isfinite(x)):
        raise SignalError("invalid sample")
    n = len(x)
    mags = np.abs(np.fft.rfft(x)) / n
    freqs = np.fft.rfftfreq(n, d=s.dt)
    return AmplitudeSpectrum(freqs, mags, n)


def band_spectrum(spec: AmplitudeSpectrum, width: float = 0.5) -> AmplitudeSpectrum:
    """RMS magnitude over consecutive bands of ``width`` Hz, labelled by their
    upper edge. The DC bin stays a band of its own."""
    f, m = spec.frequencies, spec.magnitudes
    band = np.ceil(f / width - 1e-9).astype(int)
    idx, inv = np.unique(band, return_inverse=True)
    power = np.bincount(inv, weights=m**2) / np.bincount(inv)
    return AmplitudeSpectrum(np.minimum(idx * width, f[-1]), np.sqrt(power), spec.n_samples)


def noise_floor(static_capture: SampledSeries, quantile: float = 0.95, band_width: float | None = None) -> float:
    """Upper quantile of the static spectrum without the DC bin, optionally on
    ``band_width`` Hz bands."""
    if len(static_capture) / static_capture.sample_rate < 2.0:
        raise SignalError("insufficient static capture")
    spec = amplitude_spectrum(static_capture)
    if band_width is not None:
        spec = band_spectrum(spec, band_width)
    return float(np.quantile(spec.magnitudes[1:], quantile))


def select_cutoff(moving: AmplitudeSpectrum, floor: float, margin: float = DEFAULT_MARGIN) -> float:
    """Smallest frequency above which every bin sits within ``margin * floor``.

    Rounded up to the next 0.5 Hz and clamped to ``[1 Hz, 0.8 * Nyquist]``.
    """
    if margin < 1.0:
        raise SignalError("margin must be >= 1")
    above = np.nonzero(moving.magnitudes > margin * floor)[0]
    if np.all(moving.magnitudes[1:] > margin * floor):
        raise SignalError("no noise-dominated band")
    f = float(moving.frequencies[above[-1]]) if len(above) else 0.0
    f = math.ceil(f * 2.0 - 1e-9) / 2.0
    nyquist = float(moving.frequencies[-1])
    return min(max(f, 1.0), 0.8 * nyquist)


def lowpass_zero_phase(s: SampledSeries, cutoff: float) -> SampledSeries:
    y = lowpass_array(s.values, s.sample_rate, cutoff)
    return SampledSeries(s.sample_rate, y, s.t0)


def lowpass_array(x, sample_rate: float, cutoff: float) -> np.ndarray:
    """Forward-backward 4th-order Butterworth along axis 0."""
    nyquist = 0.5 * sample_rate
    if not 0.0 < cutoff < nyquist:
        raise SignalError(f"cutoff {cutoff} Hz outside (0, {nyquist}) Hz")
    sos = sps.butter(FILTER_ORDER, cutoff, btype="low", fs=sample_rate, output="sos")
    return sps.sosfiltfilt(sos, np.asarray(x, dtype=float), axis=0)


def _check_window(n: int, window: int, degree: int):
    if window % 2 != 1:
        raise SignalError("window must be an odd sample count")
    if degree < 2:
        raise SignalError("degree must be >= 2")
    if window < degree + 1:
        raise SignalError("window must be >= degree + 1")
    if n < window:
        raise SignalError(f"series shorter than window ({n} < {window})")


def _fit_weights(window: int, degree: int) -> np.ndarray:
    """``W[pos, d, k]``: weight of window sample ``k`` in the ``d``-th
    derivative (unit spacing) of the fitted polynomial at window position ``pos``."""
    k = np.arange(window)
    W = np.empty((window, 3, window))
    for pos in range(window):
        V = np.vander(k - pos, degree + 1, increasing=True).astype(float)
        P = np.linalg.pinv(V)
        W[pos, 0] = P[0]
        W[pos, 1] = P[1]
        W[pos, 2] = 2.0 * P[2]
    return W


def local_polyfit(x, dt: float, window: int = DEFAULT_WINDOW, degree: int = DEFAULT_DEGREE):
    """Sliding-window least-squares polynomial fit along axis 0.

    Returns ``(value, first, second)`` derivative estimates at every sample.
    Interior samples use a centered window; the first and last ``window // 2``
    samples use the nearest full window, evaluated off-center.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    _check_window(n, window, degree)
    h = window // 2
    W = _fit_weights(window, degree)
    flat = x.reshape(n, -1)
    out = np.empty((3, n, flat.shape[1]))
    # interior: correlate with the centered weights
    windows = np.lib.stride_tricks.sliding_window_view(flat, window, axis=0)  # (n-w+1, c, w)
    out[:, h : n - h] = np.einsum("dk,nck->dnc", W[h], windows)
    head, tail = flat[:window], flat[n - window :]
    for i in range(h):
        out[:, i] = W[i] @ head
        out[:, n - h + i] = W[h + 1 + i] @ tail
    scale = np.array([1.0, 1.0 / dt, 1.0 / dt**2])[:, None, None]
    out = out * scale
    shape = x.shape
    return out[0].reshape(shape), out[1].reshape(shape), out[2].reshape(shape)


def sliding_window_derivatives(
    s: SampledSeries, window: int = DEFAULT_WINDOW, degree: int = DEFAULT_DEGREE
) -> tuple[SampledSeries, SampledSeries]:
    _, d1, d2 = local_polyfit(s.values, s.dt, window, degree)
    return SampledSeries(s.sample_rate, d1, s.t0), SampledSeries(s.sample_rate, d2, s.t0)


def edge_mask(n: int, trim: int) -> np.ndarray:
    """Boolean validity mask with ``trim`` samples removed at each end."""
    valid = np.ones(n, dtype=bool)
    if trim > 0:
        valid[:trim] = False
        valid[n - trim :] = False
    return valid
