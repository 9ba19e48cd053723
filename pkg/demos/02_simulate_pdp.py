"""Simulate directional power delay profiles.

One realization grows clusters at exponential gaps (rate Lambda), fills each
cluster with rays at exponential gaps (rate lambda_i), shapes powers with the
double-exponential envelope, and bins |amplitude|^2 onto the 0.125 ns grid of
the sounding sweep. Averaging many normalized realizations gives the smooth
ensemble profile whose RMS delay spread the model is judged on.

Run:  python demos/02_simulate_pdp.py   (writes demos/output/*.png if
matplotlib is available)
"""

from pathlib import Path

import numpy as np

from svchannel import (
    Pdp,
    Scenario,
    SimConfig,
    generate_cir,
    lookup_parameters,
    normalize_pdp,
    realization_rng,
    rms_delay_spread,
    simulate_pdp,
)

OUT_DIR = Path(__file__).parent / "output"


def describe_one_realization():
    config = SimConfig(seed=7, shadowing_sigma_db=0.0)
    cir = generate_cir(Scenario.O2O, 5.0, config)
    params = cir.params
    print(f"One O2O realization at psi = 5 deg (bin {params.bin.label}):")
    print(f"  clusters: {params.n_clusters}, taps: {len(cir.taps)}")
    for c in range(1, params.n_clusters + 1):
        taps = [t for t in cir.taps if t.cluster_index == c]
        lead = min(taps, key=lambda t: t.delay_ns)
        print(
            f"  cluster {c}: {len(taps):3d} rays, arrives {lead.delay_ns:6.2f} ns, "
            f"lead power {10 * np.log10(lead.power):6.1f} dB"
        )
    pdp = normalize_pdp(simulate_pdp(Scenario.O2O, 5.0, config))
    print(f"  binned: {pdp.powers.size} bins x {pdp.delay_resolution_ns} ns, "
          f"RMS delay spread {rms_delay_spread(pdp):.2f} ns")
    return pdp


def ensemble(scenario, psi, n_realizations=200, seed=20240):
    config = SimConfig(seed=seed, shadowing_sigma_db=0.0)
    powers = []
    for i in range(n_realizations):
        rng = realization_rng(seed, i)
        powers.append(normalize_pdp(simulate_pdp(scenario, psi, config, rng=rng)).powers)
    return normalize_pdp(Pdp(np.mean(powers, axis=0), config.delay_resolution_ns))


def main():
    OUT_DIR.mkdir(exist_ok=True)
    single = describe_one_realization()

    print("\nEnsemble RMS delay spread over 200 realizations:")
    profiles = {}
    for scenario in (Scenario.O2I, Scenario.O2O):
        for psi, label in ((0.0, "LOS"), (5.0, "(0,10] deg"), (20.0, ">10 deg")):
            profile = ensemble(scenario, psi)
            profiles[(scenario, label)] = profile
            params = lookup_parameters(scenario, psi)
            print(f"  {scenario.value} {label:11s} (Gamma {params.cluster_decay:4.2f} ns): "
                  f"{rms_delay_spread(profile):.2f} ns")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("\nmatplotlib not installed; skipping plots")
        return

    fig, axes = plt.subplots(1, 2, figsize=(11, 4), sharey=True)
    for ax, scenario in zip(axes, (Scenario.O2I, Scenario.O2O)):
        for (scen, label), profile in profiles.items():
            if scen is scenario:
                db = 10 * np.log10(np.maximum(profile.powers, 1e-6))
                ax.plot(profile.delays(), db, label=label)
        ax.set_title(f"{scenario.value.upper()} ensemble PDPs")
        ax.set_xlabel("delay [ns]")
        ax.set_ylim(-45, 2)
        ax.legend()
    axes[0].set_ylabel("normalized power [dB]")
    fig.tight_layout()
    target = OUT_DIR / "ensemble_pdps.png"
    fig.savefig(target, dpi=120)
    print(f"\nwrote {target}")

    fig, ax = plt.subplots(figsize=(7, 4))
    db = 10 * np.log10(np.maximum(single.powers, 1e-6))
    ax.stem(single.delays(), db, basefmt=" ")
    ax.set_xlabel("delay [ns]")
    ax.set_ylabel("normalized power [dB]")
    ax.set_ylim(-45, 2)
    ax.set_title("Single O2O realization, psi = 5 deg")
    fig.tight_layout()
    target = OUT_DIR / "single_realization.png"
    fig.savefig(target, dpi=120)
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
