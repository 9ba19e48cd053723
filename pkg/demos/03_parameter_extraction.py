"""Estimate model parameters back out of profiles.

The extraction pipeline mirrors how the parameter tables were built from
measurements: keep the peaks above the profile average as major multipath
components, split them into clusters at the widest delay gaps, regress dB
power against delay for the decay constants, and invert mean gaps for the
arrival rates.

On a clean synthetic profile the recovery is exact. On profiles simulated
from the model itself it is much rougher: clusters overlap, the second O2I
cluster often decays below the detection threshold, and a short ray window
biases the measured gaps. The second half of the demo shows those errors
honestly.

Run:  python demos/03_parameter_extraction.py
"""

import math

import numpy as np

from svchannel import (
    Pdp,
    Scenario,
    SimConfig,
    aggregate_over_bin,
    detect_mpcs,
    extract_parameters,
    lookup_parameters,
    normalize_pdp,
    realization_rng,
    segment_clusters,
    simulate_pdp,
)


def clean_synthetic():
    print("Clean synthetic profile (two clusters, exact envelope):")
    gamma1, gamma2, big_gamma, t2, dt = 0.2, 0.5, 1.5, 4.0, 0.1
    powers = np.zeros(100)
    for j in (0, 2, 4, 6):
        powers[j] = math.exp(-j * dt / gamma1)
        powers[40 + j] = math.exp(-t2 / big_gamma) * math.exp(-j * dt / gamma2)
    pdp = Pdp(powers=powers, delay_resolution_ns=dt)

    peaks = detect_mpcs(normalize_pdp(pdp))
    labeled = segment_clusters(peaks, 2)
    print(f"  detected {peaks.n_peaks} peaks, split into clusters of "
          f"{np.bincount(labeled.labels)[1:]} peaks")
    result = extract_parameters(pdp, 2)
    print(f"  gamma_1 {result.ray_decays[0]:.6f} (true {gamma1})")
    print(f"  gamma_2 {result.ray_decays[1]:.6f} (true {gamma2})")
    print(f"  Gamma   {result.cluster_decay:.6f} (true {big_gamma})")
    print(f"  lambda  {result.ray_rates[0]:.3f}, {result.ray_rates[1]:.3f} /ns "
          f"(peaks every 0.2 ns)")
    print(f"  Lambda  {result.cluster_rate:.4f} /ns (lead gap 4 ns)")


def model_round_trip(scenario, psi, n_realizations=200):
    params = lookup_parameters(scenario, psi)
    config = SimConfig(
        seed=777,
        shadowing_sigma_db=0.0,
        delay_resolution_ns=0.02,
        max_delay_ns=40.0,
        truncation_multiple=2.0,
    )
    entries = []
    for i in range(n_realizations):
        pdp = simulate_pdp(scenario, psi, config, rng=realization_rng(config.seed, i))
        try:
            entries.append(extract_parameters(pdp, params.n_clusters))
        except ValueError:
            continue
    agg = aggregate_over_bin(entries, bin=params.bin)
    print(f"\n{scenario.value} {params.bin.label}: extracted over {len(entries)} realizations")
    for i in range(params.n_clusters):
        print(f"  lambda_{i+1} {agg.ray_rates[i]:6.2f} vs {params.ray_rates[i]:5.2f}  "
              f"({agg.ray_rates[i]/params.ray_rates[i]-1:+.0%})   "
              f"gamma_{i+1} {agg.ray_decays[i]:5.2f} vs {params.ray_decays[i]:5.2f}  "
              f"({agg.ray_decays[i]/params.ray_decays[i]-1:+.0%})")
    print(f"  Lambda   {agg.cluster_rate:6.2f} vs {params.cluster_rate:5.2f}  "
          f"({agg.cluster_rate/params.cluster_rate-1:+.0%})   "
          f"Gamma   {agg.cluster_decay:5.2f} vs {params.cluster_decay:5.2f}  "
          f"({agg.cluster_decay/params.cluster_decay-1:+.0%})")


def main():
    clean_synthetic()
    print("\nRound trip on model-simulated profiles (errors are expected; the")
    print("detection threshold and largest-gap segmentation were designed for")
    print("measured traces, and the model's own realizations violate their")
    print("assumptions; see the acceptance suite for the full picture):")
    model_round_trip(Scenario.O2I, 5.0)
    model_round_trip(Scenario.O2O, 5.0)


if __name__ == "__main__":
    main()
