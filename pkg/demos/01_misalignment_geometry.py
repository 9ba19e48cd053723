"""Total misalignment angles and parameter bins.

A fixed 60 GHz uplink points the receiver at the transmitter; any residual
elevation offset (theta) and azimuth offset (phi) combine into one total
misalignment angle psi = acos(cos(theta) cos(phi)). The channel statistics
only depend on which angular bin psi falls in: LOS, (0, 10] deg, or beyond
10 deg.

Run:  python demos/01_misalignment_geometry.py
"""

from svchannel import AngularPose, bin_for, is_extrapolated, total_misalignment

# Every angle row of the published O2I and O2O comparison tables.
POSES = [
    ("O2I", 5.0, 5.0), ("O2I", 0.0, 5.0), ("O2I", -5.0, 0.0),
    ("O2I", 5.0, -10.0), ("O2I", -5.0, 30.0), ("O2I", 0.0, -20.0),
    ("O2O", -4.33, -2.5), ("O2O", 8.66, -5.0), ("O2O", -4.33, 2.5),
    ("O2O", 0.0, 25.0), ("O2O", -4.33, 17.5), ("O2O", -4.33, -12.5),
]


def main():
    print(f"{'scenario':>8} {'theta':>7} {'phi':>7} {'psi':>8}  bin")
    print("-" * 48)
    for scenario, theta, phi in POSES:
        psi = total_misalignment(AngularPose(theta, phi))
        bin_ = bin_for(psi)
        extra = "  (beyond the measured sweep)" if is_extrapolated(psi) else ""
        print(f"{scenario:>8} {theta:>7.2f} {phi:>7.2f} {psi:>7.2f}deg  {bin_.label}{extra}")

    print()
    print("The composition is symmetric and dominated by the larger component:")
    for theta, phi in [(10.0, 0.0), (0.0, 10.0), (10.0, 10.0), (45.0, 45.0)]:
        psi = total_misalignment(AngularPose(theta, phi))
        print(f"  psi({theta:g}, {phi:g}) = {psi:.4f} deg")


if __name__ == "__main__":
    main()
