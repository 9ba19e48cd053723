"""Validation mathematics: PDP normalization, RMS delay spread, correlation, K-S statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Asymptotic two-sample Kolmogorov-Smirnov coefficient at a 5% significance level.
KS_ALPHA_5PCT_COEFF = 1.358


@dataclass(eq=False)
class Pdp:
    """Discretized power delay profile on a uniform delay grid.

    ``powers`` holds linear power per bin; bin n covers delay
    [n*dt, (n+1)*dt) with dt = ``delay_resolution_ns``. ``truncated_*`` carry
    over how much tap power fell beyond the grid when the profile was binned.
    """

    powers: np.ndarray
    delay_resolution_ns: float
    normalized: bool = False
    truncated_tap_count: int = 0
    truncated_power: float = 0.0

    def __post_init__(self):
        self.powers = np.asarray(self.powers, dtype=float)
        if self.powers.ndim != 1 or self.powers.size == 0:
            raise ValueError("a PDP must be a non-empty 1-D power vector")
        if np.any(self.powers < 0.0) or not np.all(np.isfinite(self.powers)):
            raise ValueError("PDP powers must be finite and >= 0")
        if not np.any(self.powers > 0.0):
            raise ValueError("a PDP must contain at least one positive sample")
        if not self.delay_resolution_ns > 0.0:
            raise ValueError("delay_resolution_ns must be > 0")
        if self.normalized and not math.isclose(self.powers.max(), 1.0, rel_tol=1e-12):
            raise ValueError("a normalized PDP must peak at 1 (0 dB)")

    def delays(self) -> np.ndarray:
        """Delay of each bin's left edge, ns."""
        return np.arange(self.powers.size) * self.delay_resolution_ns

    def total_power(self) -> float:
        return float(self.powers.sum())


@dataclass(frozen=True)
class GofReport:
    """Goodness-of-fit summary for one measured/simulated PDP pair."""

    correlation: float        # rho in [0, 1]
    ks_statistic: float       # S_KS in [0, 1]
    ks_reject_at_5pct: bool   # True when S_KS exceeds the 5% critical value
    rms_measured_ns: float
    rms_simulated_ns: float

    def __post_init__(self):
        if not 0.0 <= self.correlation <= 1.0:
            raise ValueError(f"correlation must lie in [0, 1], got {self.correlation}")
        if not 0.0 <= self.ks_statistic <= 1.0:
            raise ValueError(f"K-S statistic must lie in [0, 1], got {self.ks_statistic}")
        if self.rms_measured_ns < 0.0 or self.rms_simulated_ns < 0.0:
            raise ValueError("RMS delay spreads must be >= 0")


def normalize_pdp(pdp: Pdp) -> Pdp:
    """Scale a PDP so its peak is 1 (0 dB); shape is preserved."""
    peak = pdp.powers.max()
    if not peak > 0.0:
        raise ValueError("cannot normalize an all-zero PDP")
    return Pdp(
        powers=pdp.powers / peak,
        delay_resolution_ns=pdp.delay_resolution_ns,
        normalized=True,
        truncated_tap_count=pdp.truncated_tap_count,
        truncated_power=pdp.truncated_power / peak,
    )


def rms_delay_spread(pdp: Pdp, floor_db=None) -> float:
    """Power-weighted standard deviation of delay, ns.

    sqrt( sum(P*tau^2)/sum(P) - (sum(P*tau)/sum(P))^2 ) with tau = n*dt.
    ``floor_db``, when given, excludes samples more than that many dB below
    the peak before computing the moments (a noise-floor cut for measured
    traces; simulated profiles need none).
    """
    powers = pdp.powers
    if floor_db is not None:
        if floor_db <= 0.0:
            raise ValueError("floor_db must be a positive dB depth below the peak")
        powers = np.where(powers >= powers.max() * 10.0 ** (-floor_db / 10.0), powers, 0.0)
    total = powers.sum()
    if not total > 0.0:
        raise ValueError("RMS delay spread of an all-zero PDP is undefined")
    tau = pdp.delays()
    mean = float((powers * tau).sum() / total)
    second = float((powers * tau * tau).sum() / total)
    return math.sqrt(max(0.0, second - mean * mean))


def correlation(p: Pdp, q: Pdp) -> float:
    """Normalized inner product of two equal-length PDPs, in [0, 1].

    rho = |(1/N) sum |P||P_s|| / sqrt((1/N) sum |P|^2 * (1/N) sum |P_s|^2);
    1 when the profiles are proportional, 0 when their supports are disjoint.
    """
    a, b = p.powers, q.powers
    if a.size != b.size:
        raise ValueError(f"PDP lengths differ: {a.size} vs {b.size}")
    ea, eb = float((a * a).sum()), float((b * b).sum())
    if not (ea > 0.0 and eb > 0.0):
        raise ValueError("correlation of an all-zero PDP is undefined")
    rho = abs(float((a * b).sum())) / math.sqrt(ea * eb)
    return min(1.0, rho)


def _ecdf_sup_distance(a, b):
    """sup_x |F_a(x) - F_b(x)| over the pooled sample values."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_statistic(p: Pdp, q: Pdp):
    """Two-sample Kolmogorov-Smirnov statistic over PDP sample magnitudes.

    Empirical CDFs are taken over the multisets of linear bin powers (any
    monotone rescaling such as dB leaves the statistic unchanged). Returns
    ``(s_ks, reject_at_5pct)`` where the flag compares against the asymptotic
    critical value 1.358 * sqrt((N1+N2)/(N1*N2)).
    """
    a, b = p.powers, q.powers
    if a.size == 0 or b.size == 0:
        raise ValueError("K-S statistic needs non-empty samples")
    s_ks = _ecdf_sup_distance(a, b)
    critical = KS_ALPHA_5PCT_COEFF * math.sqrt((a.size + b.size) / (a.size * b.size))
    return s_ks, bool(s_ks > critical)


def gof_report(measured: Pdp, simulated: Pdp) -> GofReport:
    """Bundle all goodness-of-fit metrics for a measured/simulated pair."""
    s_ks, reject = ks_statistic(measured, simulated)
    return GofReport(
        correlation=correlation(measured, simulated),
        ks_statistic=s_ks,
        ks_reject_at_5pct=reject,
        rms_measured_ns=rms_delay_spread(measured),
        rms_simulated_ns=rms_delay_spread(simulated),
    )
