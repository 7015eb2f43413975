"""Per-drop channel statistics and cross-drop distribution comparison.

Spread statistics are computed on *effective* path weights: within each
component (specular/diffuse combination) the stored weights are normalized
to unit total power and then scaled by that component's condition
prefactor. This is exactly the power split the synthesized channel
realizes, and it makes the trailing-N power rescale of the concatenation
cases a provable no-op for spreads while leaving the raw power bookkeeping
visible through total_power and the diffuse-block power helpers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .concatenation import ConcatCase, TargetPathSet
from .errors import ConfigError

SPREAD_METRICS = ("ASA", "ASD", "ZSA", "ZSD")


@dataclass
class DropStatistics:
    """One drop's summary: realized total power, delay spread, angle spreads."""

    total_power: float
    ds: float
    asa: float
    asd: float
    zsa: float
    zsd: float
    case: ConcatCase
    condition_pair: str


def effective_weights(paths: TargetPathSet) -> np.ndarray:
    """Per-path amplitude weights normalized per component and K-weighted.

    Each pair-type block is scaled to unit total power, then multiplied by
    its condition prefactor, so sum(effective^2) equals the summed squared
    prefactors of the components present.
    """
    if len(paths) == 0:
        raise ConfigError("empty path set has no weights")
    w = paths.weight.astype(float).copy()
    for pt in np.unique(paths.pair_type):
        mask = paths.pair_type == pt
        power = float(np.sum(w[mask] ** 2))
        if power <= 0:
            raise ConfigError("a path component has zero total power")
        w[mask] *= paths.k_weights[int(pt)] / np.sqrt(power)
    return w


def total_power(paths: TargetPathSet) -> float:
    """Realized channel power: squared stored weights under the K prefactors.

    Equals 1 for the full convolution and the power-normalized cases, and
    drops below 1 when a down-selection discards diffuse power.
    """
    if len(paths) == 0:
        raise ConfigError("empty path set has no power")
    amp = paths.k_weights[paths.pair_type] * paths.weight
    return float(np.sum(amp ** 2))


def delay_spread(paths: TargetPathSet, weights: np.ndarray | None = None) -> float:
    """Power-weighted RMS delay spread in seconds."""
    if len(paths) == 0:
        raise ConfigError("cannot compute delay spread of an empty path set")
    tau = paths.joint_delay
    if tau.max() == tau.min():
        return 0.0
    w = effective_weights(paths) if weights is None else np.asarray(weights, float)
    p = w ** 2
    if p.sum() <= 0:
        raise ConfigError("delay spread needs positive total weight")
    return _weighted_rms(tau, p)


def _weighted_rms(values: np.ndarray, p: np.ndarray) -> float:
    """Centered power-weighted RMS deviation (two-pass, for digit stability)."""
    total = p.sum()
    mean = float(np.sum(p * values) / total)
    var = float(np.sum(p * (values - mean) ** 2) / total)
    return float(np.sqrt(max(var, 0.0)))


def _circular_spread_deg(angles_deg: np.ndarray, p: np.ndarray) -> float:
    """Exact power-weighted circular RMS spread, minimized over origin shifts.

    The optimal cut of the circle always falls in a gap between sorted
    angles, so the minimum over continuous shifts equals the minimum over n
    discrete cut positions. A prefix-sum scan locates the best cut in O(n);
    the spread at that cut is then recomputed in centered form so the
    returned value keeps full precision.
    """
    order = np.argsort(angles_deg)
    a = angles_deg[order]
    pw = p[order]
    total = pw.sum()
    s1 = float(np.sum(pw * a))
    s2 = float(np.sum(pw * a ** 2))
    # Cut after index k (k = 0: no shift): angles below index k move up 360.
    cw = np.concatenate([[0.0], np.cumsum(pw)[:-1]])
    cwa = np.concatenate([[0.0], np.cumsum(pw * a)[:-1]])
    sum1 = s1 + 360.0 * cw
    sum2 = s2 + 720.0 * cwa + 360.0 ** 2 * cw
    variance = sum2 / total - (sum1 / total) ** 2
    k_best = int(np.argmin(variance))
    shifted = a.copy()
    shifted[:k_best] += 360.0
    return _weighted_rms(shifted, pw)


def angle_spread(paths: TargetPathSet, which: str, weights: np.ndarray | None = None) -> float:
    """Power-weighted angle spread in degrees.

    which selects the angle population: 'ASA'/'ZSA' use the arrival azimuth
    /zenith at the receiver, 'ASD'/'ZSD' the departure azimuth/zenith at
    the transmitter. Azimuth spreads are circular (minimized over origin
    shifts); zenith spreads are plain weighted RMS.
    """
    if which not in SPREAD_METRICS:
        raise ConfigError(f"unknown spread metric {which!r}; one of {SPREAD_METRICS}")
    if len(paths) == 0:
        raise ConfigError("cannot compute angle spread of an empty path set")
    if which == "ASA":
        angles = paths.rx_azimuth
    elif which == "ASD":
        angles = paths.tx_azimuth
    elif which == "ZSA":
        angles = paths.rx_zenith
    else:
        angles = paths.tx_zenith
    angles_deg = np.degrees(angles)
    if angles_deg.max() == angles_deg.min():
        return 0.0
    w = effective_weights(paths) if weights is None else np.asarray(weights, float)
    p = w ** 2
    if p.sum() <= 0:
        raise ConfigError("angle spread needs positive total weight")
    if which in ("ASA", "ASD"):
        return _circular_spread_deg(angles_deg, p)
    return _weighted_rms(angles_deg, p)


def drop_statistics(paths: TargetPathSet) -> DropStatistics:
    """All per-drop statistics of one concatenated path set."""
    w = effective_weights(paths)
    return DropStatistics(
        total_power=total_power(paths),
        ds=delay_spread(paths, weights=w),
        asa=angle_spread(paths, "ASA", weights=w),
        asd=angle_spread(paths, "ASD", weights=w),
        zsa=angle_spread(paths, "ZSA", weights=w),
        zsd=angle_spread(paths, "ZSD", weights=w),
        case=paths.case,
        condition_pair=paths.condition_pair,
    )


@dataclass
class EmpiricalCdf:
    """Sorted sample values with step probabilities i/n."""

    values: np.ndarray
    probabilities: np.ndarray

    @property
    def n(self) -> int:
        return int(self.values.shape[0])


def empirical_cdf(values) -> EmpiricalCdf:
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ConfigError("cannot build a CDF from no samples")
    probs = np.arange(1, v.size + 1, dtype=float) / v.size
    return EmpiricalCdf(values=v, probabilities=probs)


def ks_statistic(a: EmpiricalCdf, b: EmpiricalCdf) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    if a.n == 0 or b.n == 0:
        raise ConfigError("KS statistic needs nonempty samples")
    grid = np.concatenate([a.values, b.values])
    f_a = np.searchsorted(a.values, grid, side="right") / a.n
    f_b = np.searchsorted(b.values, grid, side="right") / b.n
    return float(np.max(np.abs(f_a - f_b)))
