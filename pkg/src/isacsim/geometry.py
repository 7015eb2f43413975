"""Geometry primitives: positions, direction angles, antenna elements.

Conventions used throughout the package:

* Cartesian vectors are float64 arrays of shape (3,), in meters (or m/s).
* Zenith angle theta is measured from the +z axis, range [0, pi].
* Azimuth angle phi is measured in the x-y plane from +x toward +y,
  range (-pi, pi].
* A propagation direction is the unit vector pointing from the observing
  node toward the far end of the ray (arrival directions point from the
  receiver toward where the wave comes from).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ISOTROPIC = "isotropic"
SECTORIZED_38901 = "sectorized-38901"
PATTERNS = (ISOTROPIC, SECTORIZED_38901)


def vec3(x, y=None, z=None) -> np.ndarray:
    """Build a float64 3-vector from components or any length-3 sequence."""
    if y is None:
        v = np.asarray(x, dtype=float)
    else:
        v = np.array([x, y, z], dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    return v


@dataclass
class DirectionAngles:
    """Zenith/azimuth pair in radians; fields may be scalars or equal-shape arrays."""

    zenith: np.ndarray
    azimuth: np.ndarray

    def __post_init__(self):
        self.zenith = np.asarray(self.zenith, dtype=float)
        self.azimuth = np.asarray(self.azimuth, dtype=float)

    def as_degrees(self):
        return np.degrees(self.zenith), np.degrees(self.azimuth)


def spherical_unit_vector(angles: DirectionAngles) -> np.ndarray:
    """Unit vector(s) [sin(th)cos(ph), sin(th)sin(ph), cos(th)], shape (..., 3)."""
    st = np.sin(angles.zenith)
    return np.stack(
        [st * np.cos(angles.azimuth), st * np.sin(angles.azimuth), np.cos(angles.zenith)],
        axis=-1,
    )


def angles_between(from_pos: np.ndarray, to_pos: np.ndarray) -> DirectionAngles:
    """Direction angles of the line of sight from ``from_pos`` toward ``to_pos``."""
    d = np.asarray(to_pos, dtype=float) - np.asarray(from_pos, dtype=float)
    r = float(np.linalg.norm(d))
    if r == 0.0 or not np.isfinite(r):
        raise ValueError("degenerate geometry: coincident or non-finite positions")
    zenith = float(np.arccos(np.clip(d[2] / r, -1.0, 1.0)))
    azimuth = float(np.arctan2(d[1], d[0]))
    return DirectionAngles(zenith=zenith, azimuth=azimuth)


def rotation_matrix(bearing: float, downtilt: float, slant: float) -> np.ndarray:
    """Intrinsic z-y-x rotation (angles in radians) mapping local to global frame."""
    ca, sa = np.cos(bearing), np.sin(bearing)
    cb, sb = np.cos(downtilt), np.sin(downtilt)
    cg, sg = np.cos(slant), np.sin(slant)
    rz = np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cg, -sg], [0.0, sg, cg]])
    return rz @ ry @ rx


@dataclass
class AntennaElement:
    """One radiating element of an array.

    offset_m: element phase-center offset from the node reference point,
    in the global frame. pattern selects the magnitude pattern; slant_deg
    splits the gain between the theta/phi polarization components.
    ``orientation_deg`` = (bearing, downtilt, slant rotation) applied to the
    pattern only; the polarization split stays the plain slant decomposition.
    """

    offset_m: np.ndarray = field(default_factory=lambda: np.zeros(3))
    pattern: str = ISOTROPIC
    slant_deg: float = 0.0
    orientation_deg: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        self.offset_m = vec3(self.offset_m)
        if self.pattern not in PATTERNS:
            raise ValueError(
                f"unknown antenna pattern {self.pattern!r}; supported: {PATTERNS}"
            )


def uniform_linear_array(
    count: int,
    spacing_m: float,
    pattern: str = ISOTROPIC,
    slant_deg: float = 0.0,
    axis: int = 1,
) -> list:
    """Centered ULA along the given axis (default y, broadside toward +x)."""
    if count < 1:
        raise ValueError("element count must be >= 1")
    elements = []
    for i in range(count):
        offset = np.zeros(3)
        offset[axis] = (i - (count - 1) / 2.0) * spacing_m
        elements.append(
            AntennaElement(offset_m=offset, pattern=pattern, slant_deg=slant_deg)
        )
    return elements


@dataclass
class NodeState:
    """Kinematic state of a terminal: position, velocity, and its antenna array.

    micro_velocity_mps models internal motion of a scattering object (for
    example limb or rotor movement) on top of the bulk velocity; it is zero
    for ordinary transceivers.
    """

    position_m: np.ndarray
    velocity_mps: np.ndarray = field(default_factory=lambda: np.zeros(3))
    micro_velocity_mps: np.ndarray = field(default_factory=lambda: np.zeros(3))
    elements: list = field(default_factory=lambda: [AntennaElement()])

    def __post_init__(self):
        self.position_m = vec3(self.position_m)
        self.velocity_mps = vec3(self.velocity_mps)
        self.micro_velocity_mps = vec3(self.micro_velocity_mps)
        if not self.elements:
            raise ValueError("a node needs at least one antenna element")

    @property
    def total_velocity_mps(self) -> np.ndarray:
        return self.velocity_mps + self.micro_velocity_mps


def _pattern_gain_db(pattern: str, zenith, azimuth):
    """Element power pattern in dB for local-frame angles (radians)."""
    if pattern == ISOTROPIC:
        return np.zeros(np.broadcast(zenith, azimuth).shape)
    # Single-element pattern of TR 38.901 Table 7.3-1: 65 deg HPBW in both
    # cuts, 30 dB side limits, 8 dBi peak.
    theta_deg = np.degrees(zenith)
    phi_deg = np.degrees(azimuth)
    a_v = -np.minimum(12.0 * ((theta_deg - 90.0) / 65.0) ** 2, 30.0)
    a_h = -np.minimum(12.0 * (phi_deg / 65.0) ** 2, 30.0)
    return 8.0 - np.minimum(-(a_v + a_h), 30.0)


def field_components(element: AntennaElement, direction: DirectionAngles):
    """Complex field components (F_theta, F_phi) of an element toward ``direction``.

    The direction is rotated into the element frame for pattern lookup; the
    amplitude sqrt of the power pattern is split onto the two polarization
    axes by the slant angle (cos onto theta, sin onto phi).
    """
    orient = element.orientation_deg
    if any(a != 0.0 for a in orient):
        rot = rotation_matrix(*np.radians(element.orientation_deg))
        u = spherical_unit_vector(direction)
        local = u @ rot  # row-wise R^T @ u
        lz = np.arccos(np.clip(local[..., 2], -1.0, 1.0))
        la = np.arctan2(local[..., 1], local[..., 0])
    else:
        lz, la = direction.zenith, direction.azimuth
    gain_db = _pattern_gain_db(element.pattern, lz, la)
    amp = 10.0 ** (gain_db / 20.0)
    slant = np.radians(element.slant_deg)
    f_theta = amp * np.cos(slant) + 0.0j
    f_phi = amp * np.sin(slant) + 0.0j
    return f_theta, f_phi
