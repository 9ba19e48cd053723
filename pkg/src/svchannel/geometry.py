"""Misalignment-angle arithmetic and the angular binning that selects parameter sets.

A fixed directional link is described by the receiver's boresight offset from
perfect alignment, split into an elevation component (theta) and an azimuth
component (phi). The single number that drives the channel statistics is the
total misalignment angle psi, obtained by composing the two rotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

# The parameter tables were derived from sweeps reaching roughly 25 deg of
# total misalignment; larger angles reuse the widest bin's parameters and are
# reported as extrapolated.
MEASURED_PSI_MAX_DEG = 25.0

# psi at or below this is treated as exact boresight alignment.
LOS_TOLERANCE_DEG = 1e-9


class MisalignmentBin(Enum):
    """Angular range over which one parameter set applies."""

    LOS = "los"    # psi = 0, boresights aligned
    NEAR = "near"  # 0 < psi <= 10 deg
    FAR = "far"    # psi > 10 deg (tables cover up to 25 deg)

    @property
    def label(self) -> str:
        return _BIN_LABELS[self]


_BIN_LABELS = {
    MisalignmentBin.LOS: "LOS",
    MisalignmentBin.NEAR: "(0, 10] deg",
    MisalignmentBin.FAR: "> 10 deg",
}


@dataclass(frozen=True)
class AngularPose:
    """Receiver boresight offset from perfect alignment, degrees."""

    theta_deg: float  # elevation-plane misalignment
    phi_deg: float    # azimuth-plane misalignment

    def __post_init__(self):
        for name, value in (("theta_deg", self.theta_deg), ("phi_deg", self.phi_deg)):
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            if abs(value) > 90.0:
                raise ValueError(f"{name} must lie in [-90, 90] deg, got {value}")


def total_misalignment(pose: AngularPose) -> float:
    """Total misalignment angle psi = acos(cos(theta) * cos(phi)), degrees.

    Symmetric in the sign of both components and never smaller than either
    component alone. Computed in double precision with no small-angle
    approximation.
    """
    ct = math.cos(math.radians(pose.theta_deg))
    cp = math.cos(math.radians(pose.phi_deg))
    # The product is mathematically in [-1, 1]; clamp against rounding.
    return math.degrees(math.acos(max(-1.0, min(1.0, ct * cp))))


def bin_for(psi_deg: float) -> MisalignmentBin:
    """Map a total misalignment angle to its parameter bin.

    0 maps to LOS (within 1e-9 deg), (0, 10] to NEAR, everything above 10 deg
    to FAR. Angles beyond the measured sweep still resolve to FAR; callers can
    mark them via :func:`is_extrapolated`.
    """
    if not math.isfinite(psi_deg) or psi_deg < 0.0:
        raise ValueError(f"psi must be a finite angle >= 0 deg, got {psi_deg!r}")
    if psi_deg <= LOS_TOLERANCE_DEG:
        return MisalignmentBin.LOS
    if psi_deg <= 10.0:
        return MisalignmentBin.NEAR
    return MisalignmentBin.FAR


def is_extrapolated(psi_deg: float) -> bool:
    """True when psi lies beyond the angular range the tables were fit on."""
    return psi_deg > MEASURED_PSI_MAX_DEG
