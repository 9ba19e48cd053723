"""Inverse modeling: estimate S-V parameters from PDPs and aggregate over angular bins.

The pipeline mirrors how the parameter tables were produced from traces:
pick the peaks above the PDP average as major multipath components, split
them into clusters at the largest delay gaps, fit log-domain regression lines
for the decay constants, and turn mean arrival gaps into rates. Angular bins
then average the per-trace estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import MisalignmentBin
from .metrics import Pdp, normalize_pdp
from .sv_core import Scenario

LN10 = math.log(10.0)


class InsufficientDataError(ValueError):
    """Too few peaks or clusters to estimate the requested parameter."""


class InvalidFitError(ValueError):
    """A decay regression came out flat or rising, which has no decay constant."""


@dataclass
class MpcSet:
    """Major multipath components of one PDP: peak delays/powers, optionally clustered.

    ``labels`` is None for an unlabeled set, otherwise a 1-based cluster index
    per peak, non-decreasing along delay.
    """

    delays_ns: np.ndarray
    powers: np.ndarray
    labels: np.ndarray = None

    def __post_init__(self):
        self.delays_ns = np.asarray(self.delays_ns, dtype=float)
        self.powers = np.asarray(self.powers, dtype=float)
        if self.delays_ns.size == 0 or self.delays_ns.size != self.powers.size:
            raise ValueError("peak delays and powers must be non-empty and equal length")
        if np.any(np.diff(self.delays_ns) < 0.0):
            raise ValueError("peaks must be sorted by delay")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.size != self.delays_ns.size:
                raise ValueError("labels must match the number of peaks")
            if np.any(np.diff(self.labels) < 0) or self.labels[0] != 1:
                raise ValueError("labels must start at 1 and be non-decreasing along delay")

    @property
    def n_peaks(self) -> int:
        return self.delays_ns.size

    def cluster(self, index: int):
        """(delays, powers) of the peaks labeled with 1-based cluster ``index``."""
        if self.labels is None:
            raise ValueError("MpcSet is unlabeled; run segment_clusters first")
        mask = self.labels == index
        return self.delays_ns[mask], self.powers[mask]


def _local_maxima(powers):
    """Indices of strict local maxima; a plateau counts once, at its first bin."""
    p = np.asarray(powers, dtype=float)
    change = np.flatnonzero(np.diff(p) != 0.0)
    starts = np.concatenate(([0], change + 1))  # first bin of each equal-value run
    vals = p[starts]
    higher_than_left = np.empty(starts.size, dtype=bool)
    higher_than_left[0] = True
    higher_than_left[1:] = vals[1:] > vals[:-1]
    higher_than_right = np.empty(starts.size, dtype=bool)
    higher_than_right[-1] = True
    higher_than_right[:-1] = vals[:-1] > vals[1:]
    return starts[higher_than_left & higher_than_right]


def detect_mpcs(pdp: Pdp) -> MpcSet:
    """Peaks of the PDP that rise above its arithmetic mean, as an unlabeled MpcSet."""
    mean_power = float(pdp.powers.mean())
    idx = _local_maxima(pdp.powers)
    idx = idx[pdp.powers[idx] > mean_power]
    if idx.size == 0:
        raise InsufficientDataError("no peak exceeds the PDP average")
    return MpcSet(delays_ns=idx * pdp.delay_resolution_ns, powers=pdp.powers[idx])


def segment_clusters(mpcs: MpcSet, n_clusters: int) -> MpcSet:
    """Split peaks into ``n_clusters`` contiguous groups at the largest delay gaps.

    The (n_clusters - 1) widest inter-peak gaps become the cluster boundaries;
    equal gaps break toward the earlier one. Labels are 1-based and
    non-decreasing along delay.
    """
    if n_clusters < 1:
        raise ValueError("n_clusters must be >= 1")
    if mpcs.n_peaks < n_clusters:
        raise InsufficientDataError(
            f"need at least {n_clusters} peaks to form {n_clusters} clusters, "
            f"got {mpcs.n_peaks}"
        )
    labels = np.ones(mpcs.n_peaks, dtype=int)
    if n_clusters > 1:
        gaps = np.diff(mpcs.delays_ns)
        order = np.argsort(-gaps, kind="stable")  # stable: ties keep the earlier gap first
        boundaries = np.sort(order[: n_clusters - 1])
        for b in boundaries:
            labels[b + 1 :] += 1
    return MpcSet(delays_ns=mpcs.delays_ns, powers=mpcs.powers, labels=labels)


def _fit_decay(delays_ns, powers):
    """Least-squares line through (tau, power in dB); returns (tau constant, residual RMS).

    Delays are referenced to the first point. A power envelope exp(-tau/g)
    is a line of slope -10/(g*ln10) dB/ns, so the fitted slope s maps back to
    g = -10/(s*ln10). A flat or rising fit has no decay constant.
    """
    x = np.asarray(delays_ns, dtype=float)
    x = x - x[0]
    y = 10.0 * np.log10(np.asarray(powers, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    if not slope < 0.0:
        raise InvalidFitError(f"fitted slope {slope:.6g} dB/ns does not decay")
    residual = y - (slope * x + intercept)
    return -10.0 / (slope * LN10), float(np.sqrt(np.mean(residual**2)))


def fit_ray_decay(delays_ns, powers) -> float:
    """Intra-cluster decay constant gamma (ns) from one cluster's peaks."""
    if len(delays_ns) < 2:
        raise InsufficientDataError("ray decay fit needs at least 2 peaks")
    gamma, _ = _fit_decay(delays_ns, powers)
    return gamma


def fit_cluster_decay(lead_delays_ns, lead_powers) -> float:
    """Inter-cluster decay constant Gamma (ns) from the leading peak of each cluster."""
    if len(lead_delays_ns) < 2:
        raise InsufficientDataError("cluster decay fit needs at least 2 clusters")
    big_gamma, _ = _fit_decay(lead_delays_ns, lead_powers)
    return big_gamma


def estimate_arrival_rates(mpcs: MpcSet):
    """Arrival rates from mean gaps: per-cluster lambda_i and the cluster rate Lambda.

    lambda_i is the reciprocal of the mean gap between consecutive peaks of
    cluster i; Lambda the reciprocal of the mean gap between consecutive
    cluster-leading peaks. Parameters without enough gaps come back as NaN
    (insufficient data) rather than raising, so one thin cluster does not
    invalidate the rest of a trace.
    """
    if mpcs.labels is None:
        raise ValueError("MpcSet is unlabeled; run segment_clusters first")
    n_clusters = int(mpcs.labels.max())
    lambdas = np.full(n_clusters, np.nan)
    leads = np.empty(n_clusters)
    for i in range(1, n_clusters + 1):
        delays, _ = mpcs.cluster(i)
        leads[i - 1] = delays[0]
        if delays.size >= 2:
            lambdas[i - 1] = 1.0 / np.mean(np.diff(delays))
    big_lambda = 1.0 / np.mean(np.diff(leads)) if n_clusters >= 2 else float("nan")
    return lambdas, float(big_lambda)


@dataclass
class ExtractedParameters:
    """S-V parameters estimated from one or more PDPs, with fit diagnostics.

    Mirrors the shape of a parameter-table row; entries that could not be
    estimated (too few peaks, non-decaying fit) are NaN. ``peak_counts``
    holds detected peaks per cluster (a mean after aggregation) and
    ``sample_count`` how many PDPs back the estimate.
    """

    n_clusters: int
    ray_rates: np.ndarray       # lambda_i, 1/ns
    cluster_rate: float         # Lambda, 1/ns
    ray_decays: np.ndarray      # gamma_i, ns
    cluster_decay: float        # Gamma, ns
    ray_fit_rms_db: np.ndarray  # residual RMS of each intra-cluster regression
    cluster_fit_rms_db: float
    peak_counts: np.ndarray
    sample_count: int = 1
    scenario: Scenario = None
    bin: MisalignmentBin = None

    def __post_init__(self):
        for name in ("ray_rates", "ray_decays", "ray_fit_rms_db", "peak_counts"):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.size != self.n_clusters:
                raise ValueError(f"{name} must have {self.n_clusters} entries")
            setattr(self, name, value)


def extract_parameters(pdp, n_clusters, scenario=None, bin=None) -> ExtractedParameters:
    """Full single-PDP pipeline: detect peaks, segment, fit decays, estimate rates."""
    mpcs = segment_clusters(detect_mpcs(normalize_pdp(pdp)), n_clusters)
    ray_rates, cluster_rate = estimate_arrival_rates(mpcs)

    ray_decays = np.full(n_clusters, np.nan)
    ray_fit_rms = np.full(n_clusters, np.nan)
    peak_counts = np.zeros(n_clusters)
    leads_delay = np.empty(n_clusters)
    leads_power = np.empty(n_clusters)
    for i in range(1, n_clusters + 1):
        delays, powers = mpcs.cluster(i)
        peak_counts[i - 1] = delays.size
        leads_delay[i - 1] = delays[0]
        leads_power[i - 1] = powers[0]
        if delays.size >= 2:
            try:
                ray_decays[i - 1], ray_fit_rms[i - 1] = _fit_decay(delays, powers)
            except InvalidFitError:
                pass  # stays NaN: flagged invalid

    cluster_decay = float("nan")
    cluster_fit_rms = float("nan")
    if n_clusters >= 2:
        try:
            cluster_decay, cluster_fit_rms = _fit_decay(leads_delay, leads_power)
        except InvalidFitError:
            pass

    return ExtractedParameters(
        n_clusters=n_clusters,
        ray_rates=ray_rates,
        cluster_rate=cluster_rate,
        ray_decays=ray_decays,
        cluster_decay=cluster_decay,
        ray_fit_rms_db=ray_fit_rms,
        cluster_fit_rms_db=cluster_fit_rms,
        peak_counts=peak_counts,
        sample_count=1,
        scenario=scenario,
        bin=bin,
    )


def _nanmean(values):
    values = np.asarray(values, dtype=float)
    good = np.isfinite(values)
    return float(values[good].mean()) if good.any() else float("nan")


def _pooled_rate(rates, gap_counts):
    """Combine per-trace rates in the gap domain: total gaps / total gap time.

    Each trace's rate is the reciprocal of its mean gap, so averaging the
    underlying gaps (rather than the reciprocals) keeps the combined estimate
    unbiased even when individual traces contribute only one or two gaps.
    """
    rates = np.asarray(rates, dtype=float)
    counts = np.asarray(gap_counts, dtype=float)
    good = np.isfinite(rates) & (counts > 0)
    if not good.any():
        return float("nan")
    total_time = (counts[good] / rates[good]).sum()
    return float(counts[good].sum() / total_time)


def aggregate_over_bin(entries, bin=None) -> ExtractedParameters:
    """Combine per-angle estimates into one parameter set for an angular bin.

    Decay constants average arithmetically; arrival rates combine in the gap
    domain (weighted by each trace's gap count) because the rates are defined
    as reciprocals of mean gaps. NaN entries are skipped per parameter; a
    parameter nobody could estimate stays NaN.
    """
    if not entries:
        raise ValueError("cannot aggregate an empty list of extractions")
    n_clusters = entries[0].n_clusters
    if any(e.n_clusters != n_clusters for e in entries):
        raise ValueError("all extractions in a bin must share the same cluster count")

    ray_rates = np.empty(n_clusters)
    ray_decays = np.empty(n_clusters)
    ray_fit_rms = np.empty(n_clusters)
    for i in range(n_clusters):
        ray_rates[i] = _pooled_rate(
            [e.ray_rates[i] for e in entries],
            [e.peak_counts[i] - 1 for e in entries],
        )
        ray_decays[i] = _nanmean([e.ray_decays[i] for e in entries])
        ray_fit_rms[i] = _nanmean([e.ray_fit_rms_db[i] for e in entries])

    cluster_rate = _pooled_rate(
        [e.cluster_rate for e in entries],
        [e.n_clusters - 1 for e in entries],
    )
    scenarios = {e.scenario for e in entries}
    return ExtractedParameters(
        n_clusters=n_clusters,
        ray_rates=ray_rates,
        cluster_rate=cluster_rate,
        ray_decays=ray_decays,
        cluster_decay=_nanmean([e.cluster_decay for e in entries]),
        ray_fit_rms_db=ray_fit_rms,
        cluster_fit_rms_db=_nanmean([e.cluster_fit_rms_db for e in entries]),
        peak_counts=np.mean([e.peak_counts for e in entries], axis=0),
        sample_count=sum(e.sample_count for e in entries),
        scenario=scenarios.pop() if len(scenarios) == 1 else None,
        bin=bin,
    )
