"""Sensing performance metrics: closed-form accuracy/resolution/ambiguity
bounds of a pulsed waveform, and envelope detection statistics.

Detection model: after matched filtering, the sample magnitude is Rayleigh
distributed under noise only and Rician under signal plus noise, with
per-quadrature noise standard deviation sigma and signal envelope A. The
SNR convention used by the table helper is SNR = A^2 / (2 sigma^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from scipy.integrate import quad
from scipy.special import i0e

from .constants import SPEED_OF_LIGHT
from .errors import ConfigError, NumericError


@dataclass
class WaveformParams:
    """Pulsed waveform and receive array description."""

    pulse_width_s: float
    pri_s: float
    pulses: int
    wavelength_m: float
    element_spacing_m: float
    elements: int

    def __post_init__(self):
        for name in ("pulse_width_s", "pri_s", "wavelength_m", "element_spacing_m"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.pulses < 1 or self.elements < 1:
            raise ConfigError("pulse and element counts must be >= 1")
        if self.pri_s < self.pulse_width_s:
            raise ConfigError("pulse repetition interval must be >= pulse width")


@dataclass
class DetectionParams:
    """Envelope detection operating point (all linear amplitudes)."""

    noise_std: float
    threshold: float
    signal_amplitude: float = 0.0

    def __post_init__(self):
        if self.noise_std <= 0:
            raise ConfigError("noise std must be positive")
        if self.threshold < 0 or self.signal_amplitude < 0:
            raise ConfigError("threshold and signal amplitude must be >= 0")


class RangeMetrics(NamedTuple):
    range_m: float
    accuracy_m: float
    resolution_m: float
    max_range_m: float


class SpeedMetrics(NamedTuple):
    speed_mps: float
    accuracy_mps: float
    resolution_mps: float


class AngleMetrics(NamedTuple):
    angle_rad: float
    accuracy_rad: float
    resolution_rad: float
    max_angle_rad: float


def range_metrics(
    w: WaveformParams, t_r_s: float, dt_r_s: float = 0.0, dc_mps: float = 0.0
) -> RangeMetrics:
    """Round-trip range estimate with its differential accuracy and bounds.

    R = c t_R / 2; dR propagates timing error and propagation-speed error;
    resolution is set by the pulse width, the unambiguous maximum by the
    pulse repetition interval.
    """
    if t_r_s < 0:
        raise ConfigError("echo delay must be >= 0")
    c = SPEED_OF_LIGHT
    r = c * t_r_s / 2.0
    dr = c * dt_r_s / 2.0 + (r / c) * dc_mps
    resolution = c * w.pulse_width_s / 2.0
    r_max = c * w.pri_s / 2.0
    return RangeMetrics(r, dr, resolution, r_max)


def speed_metrics(w: WaveformParams, fd_hz: float, dfd_hz: float = 0.0) -> SpeedMetrics:
    """Radial speed from round-trip Doppler: v = lambda f_d / 2.

    Doppler resolution over M coherent pulses is 1/(M T_R), hence
    dv = lambda / (2 M T_R).
    """
    lam = w.wavelength_m
    v = lam * fd_hz / 2.0
    dv = lam * dfd_hz / 2.0
    resolution = lam / (2.0 * w.pulses * w.pri_s)
    return SpeedMetrics(v, dv, resolution)


def angle_metrics(
    w: WaveformParams,
    phase_rad: float,
    dphase_rad: float = 0.0,
    theta_rad: float | None = None,
) -> AngleMetrics:
    """Angle from inter-element phase: theta = arcsin(phi lambda / (2 pi d)).

    Accuracy and resolution are evaluated at theta_rad (default: the
    estimate itself) and diverge toward endfire; the unambiguous maximum is
    arcsin(lambda/(2d)), the whole half-space when d <= lambda/2.
    """
    lam, d = w.wavelength_m, w.element_spacing_m
    arg = phase_rad * lam / (2.0 * math.pi * d)
    if abs(arg) > 1.0:
        raise NumericError(
            f"phase {phase_rad:.4g} rad is ambiguous at spacing {d} m "
            f"(arcsin argument {arg:.4g} outside [-1, 1])"
        )
    theta_est = math.asin(arg)
    theta = theta_est if theta_rad is None else theta_rad
    cos_t = math.cos(theta)
    if abs(cos_t) < 1e-12:
        raise NumericError("angle accuracy/resolution are singular at endfire")
    accuracy = lam * dphase_rad / (2.0 * math.pi * d * cos_t)
    resolution = lam / (w.elements * d * cos_t)
    half = lam / (2.0 * d)
    theta_max = math.pi / 2.0 if half >= 1.0 else math.asin(half)
    return AngleMetrics(theta_est, accuracy, resolution, theta_max)


def pfa(p: DetectionParams) -> float:
    """False-alarm probability of a Rayleigh envelope: exp(-V_T^2/(2 sigma^2))."""
    return math.exp(-(p.threshold ** 2) / (2.0 * p.noise_std ** 2))


def threshold_for_pfa(target_pfa: float, noise_std: float) -> float:
    """Threshold achieving a wanted false-alarm probability (inverse of pfa)."""
    if not (0.0 < target_pfa <= 1.0):
        raise ConfigError(f"false-alarm probability must be in (0, 1], got {target_pfa}")
    if noise_std <= 0:
        raise ConfigError("noise std must be positive")
    return noise_std * math.sqrt(-2.0 * math.log(target_pfa))


def pd(p: DetectionParams) -> float:
    """Detection probability of a Rician envelope above the threshold.

    Integrates (x/sigma^2) exp(-(A^2+x^2)/(2 sigma^2)) I0(A x / sigma^2)
    from V_T upward. The integrand is evaluated in exponentially scaled
    form, exp(-(x-A)^2/(2 sigma^2)) i0e(A x/sigma^2) x/sigma^2, which is
    numerically stable for large A/sigma. With A = 0 this reduces exactly
    to the Rayleigh tail, so pd == pfa.
    """
    a, vt, s = p.signal_amplitude, p.threshold, p.noise_std
    s2 = s * s

    def integrand(x):
        return (x / s2) * math.exp(-((x - a) ** 2) / (2.0 * s2)) * i0e(a * x / s2)

    upper = max(vt, a) + 40.0 * s
    if upper <= vt:
        return 0.0
    value, err = quad(integrand, vt, upper, epsabs=1e-13, epsrel=1e-11, limit=200)
    if not math.isfinite(value) or err > 1e-6:
        raise NumericError(
            f"detection integral failed to converge: value={value!r}, "
            f"abserr={err!r}, A={a}, V_T={vt}, sigma={s}"
        )
    return min(max(value, 0.0), 1.0)


def snr_to_amplitude(snr_db: float, noise_std: float = 1.0) -> float:
    """Signal envelope for a given SNR in dB under SNR = A^2/(2 sigma^2)."""
    return noise_std * math.sqrt(2.0 * 10.0 ** (snr_db / 10.0))


def detection_table(pfa_values, snr_db_values, noise_std: float = 1.0):
    """Rows (snr_db, pfa, pd) for curve plotting, one row per grid point."""
    rows = []
    for target in pfa_values:
        vt = threshold_for_pfa(target, noise_std)
        for snr_db in snr_db_values:
            a = snr_to_amplitude(snr_db, noise_std)
            point = DetectionParams(
                noise_std=noise_std, threshold=vt, signal_amplitude=a
            )
            rows.append((float(snr_db), float(target), pd(point)))
    return rows
