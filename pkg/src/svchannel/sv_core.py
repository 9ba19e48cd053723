"""Saleh-Valenzuela primitives: parameter sets, ray taps, arrival samplers, decay law.

The model describes a sparse channel impulse response as clusters of rays.
Cluster arrivals and intra-cluster ray arrivals are independent Poisson
processes (exponential gaps with rates Lambda and lambda_i), and tap powers
follow a double-exponential envelope with time constants Gamma (between
clusters) and gamma_i (within cluster i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .geometry import MisalignmentBin

TWO_PI = 2.0 * math.pi


class Scenario(Enum):
    """Link scenario: the receiver sits behind a window (O2I) or on a rooftop (O2O)."""

    O2I = "o2i"
    O2O = "o2o"

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown scenario {text!r}, expected 'o2i' or 'o2o'") from None


@dataclass(frozen=True)
class SvParameterSet:
    """One row of the PDP simulation parameter tables.

    Rates are in 1/ns, decay constants in ns. ``ray_rates`` and ``ray_decays``
    hold one entry per cluster (the tables list separate lambda_i / gamma_i
    columns for each cluster).
    """

    scenario: Scenario
    bin: MisalignmentBin
    n_clusters: int            # N_c
    ray_rates: tuple           # lambda_i, 1/ns
    cluster_rate: float        # Lambda, 1/ns
    ray_decays: tuple          # gamma_i, ns
    cluster_decay: float       # Gamma, ns

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ValueError(f"n_clusters must be >= 1, got {self.n_clusters}")
        if len(self.ray_rates) != self.n_clusters or len(self.ray_decays) != self.n_clusters:
            raise ValueError(
                f"ray_rates/ray_decays must have exactly {self.n_clusters} entries, "
                f"got {len(self.ray_rates)}/{len(self.ray_decays)}"
            )
        values = (*self.ray_rates, self.cluster_rate, *self.ray_decays, self.cluster_decay)
        if any(not (v > 0.0) for v in values):
            raise ValueError("all rates and decay constants must be strictly positive")


@dataclass(frozen=True)
class RayTap:
    """A single resolvable ray of the sparse channel impulse response."""

    cluster_index: int  # 1-based cluster number n
    delay_ns: float     # absolute arrival time T_n + tau_mn
    amplitude: float    # linear magnitude beta_mn
    phase_rad: float    # in [0, 2*pi)

    def __post_init__(self):
        if self.delay_ns < 0.0:
            raise ValueError(f"tap delay must be >= 0 ns, got {self.delay_ns}")
        if self.amplitude < 0.0:
            raise ValueError(f"tap amplitude must be >= 0, got {self.amplitude}")
        if not 0.0 <= self.phase_rad < TWO_PI:
            raise ValueError(f"tap phase must lie in [0, 2*pi), got {self.phase_rad}")

    @property
    def power(self) -> float:
        """Linear tap power beta^2."""
        return self.amplitude * self.amplitude


@dataclass
class Cir:
    """Sparse channel impulse response: ray taps sorted by delay.

    Keeps a reference to the parameter set that produced it and the seed of
    the generator stream, so a realization can be reproduced exactly.
    """

    taps: list            # RayTap, non-decreasing delay
    params: SvParameterSet
    seed: int

    def __post_init__(self):
        if not self.taps:
            raise ValueError("a CIR must contain at least one tap")
        delays = [t.delay_ns for t in self.taps]
        if any(b < a for a, b in zip(delays, delays[1:])):
            raise ValueError("CIR taps must be sorted by non-decreasing delay")
        clusters = {t.cluster_index for t in self.taps}
        if len(clusters) > self.params.n_clusters:
            raise ValueError(
                f"CIR references {len(clusters)} clusters, parameter set has "
                f"{self.params.n_clusters}"
            )

    def delays(self) -> np.ndarray:
        return np.array([t.delay_ns for t in self.taps])

    def powers(self) -> np.ndarray:
        return np.array([t.power for t in self.taps])

    def cluster_indices(self) -> np.ndarray:
        return np.array([t.cluster_index for t in self.taps], dtype=int)


def ray_power(beta_11_sq, cluster_offset_ns, ray_offset_ns, params, cluster_index):
    """Tap power from the double-exponential decay law.

    beta^2 = beta_11^2 * exp(-(T_n - T_1)/Gamma) * exp(-tau_mn/gamma_n),
    with the intra-cluster decay gamma_n taken from the tap's cluster.

    Parameters
    ----------
    beta_11_sq : linear power of the very first ray of the first cluster
    cluster_offset_ns : T_n - T_1, arrival of cluster n relative to cluster 1
    ray_offset_ns : tau_mn, arrival of the ray within its cluster
    params : SvParameterSet supplying Gamma and gamma_n
    cluster_index : 1-based cluster number n
    """
    if not 1 <= cluster_index <= params.n_clusters:
        raise ValueError(
            f"cluster_index must lie in [1, {params.n_clusters}], got {cluster_index}"
        )
    if cluster_offset_ns < 0.0 or ray_offset_ns < 0.0:
        raise ValueError("cluster and ray offsets must be >= 0 ns")
    gamma = params.ray_decays[cluster_index - 1]
    return beta_11_sq * math.exp(-cluster_offset_ns / params.cluster_decay) * math.exp(
        -ray_offset_ns / gamma
    )


def _exponential_gap(u, rate_per_ns):
    """Inverse-CDF map of a uniform draw u in (0, 1] to an Exp(rate) gap."""
    return -np.log(u) / rate_per_ns


def sample_cluster_gap(rate_per_ns, rng, size=None):
    """Draw T_n - T_{n-1}, the gap to the next cluster, Exp(Lambda) distributed.

    Uses the inverse CDF -ln(u)/rate with u drawn from (0, 1], so a gap is
    always finite and strictly positive and the stream is reproducible from
    the generator state. ``size=None`` returns a scalar.
    """
    if not rate_per_ns > 0.0:
        raise ValueError(f"arrival rate must be > 0 (1/ns), got {rate_per_ns}")
    u = 1.0 - rng.random(size)  # maps [0, 1) draws onto (0, 1]
    gap = _exponential_gap(u, rate_per_ns)
    return float(gap) if size is None else gap


def sample_ray_gap(rate_per_ns, rng, size=None):
    """Draw tau_mn - tau_{m-1,n}, the gap to the next ray, Exp(lambda_i) distributed."""
    return sample_cluster_gap(rate_per_ns, rng, size)


def sample_phase(rng, size=None):
    """Draw a tap phase, uniform on [0, 2*pi).

    The recorded data is magnitude-only, so the phase law is a modeling
    convention; it does not affect any power delay profile.
    """
    phase = TWO_PI * rng.random(size)
    return float(phase) if size is None else phase
