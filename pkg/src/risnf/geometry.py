"""Uniform planar array layouts on the Y-Z plane and near-field responses.

Every array (RIS, BS, UE) is a UPA lying in the ``x = 0`` plane with its
first element at the origin. Element ``k`` (1-based) sits at
``[0, i*delta, j*delta]`` with ``i = (k-1) mod count_h`` and
``j = (k-1) // count_h``. Scatterers are given in the array's own frame by
azimuth, elevation and distance from the origin.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidArgumentError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class SystemConfig:
    """Carrier settings shared by all arrays."""

    carrier_frequency: float = 3e9

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise InvalidArgumentError("carrier_frequency must be positive")

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def wavenumber(self):
        return 2 * np.pi / self.wavelength


class Role(Enum):
    RIS = "RIS"
    BS = "BS"
    UE = "UE"


@dataclass(frozen=True)
class ArrayConfig:
    """A UPA with ``count_h`` columns and ``count_v`` rows, spacing in meters."""

    role: Role
    count_h: int
    count_v: int
    spacing: float

    def __post_init__(self):
        if int(self.count_h) < 1 or int(self.count_v) < 1:
            raise InvalidArgumentError("element counts must be positive")
        if not self.spacing > 0:
            raise InvalidArgumentError("spacing must be positive")

    @classmethod
    def from_wavelengths(cls, role, count_h, count_v, spacing_wl, system):
        """Build an array whose spacing is given in units of the wavelength."""
        return cls(Role(role), int(count_h), int(count_v),
                   float(spacing_wl) * system.wavelength)

    @property
    def total(self):
        return self.count_h * self.count_v

    def grid_indices(self):
        """Zero-based horizontal and vertical grid indices of every element."""
        k = np.arange(self.total)
        return k % self.count_h, k // self.count_h

    def positions(self):
        """``(total, 3)`` array of element coordinates in meters."""
        i, j = self.grid_indices()
        return np.column_stack([np.zeros(self.total), i * self.spacing,
                                j * self.spacing])


@dataclass(frozen=True)
class ScattererLocation:
    """Scatterer seen from an array: angles in radians, distance in meters."""

    azimuth: float
    elevation: float
    distance: float

    def __post_init__(self):
        half = np.pi / 2 + 1e-12
        if abs(self.azimuth) > half or abs(self.elevation) > half:
            raise InvalidArgumentError("angles must lie in [-pi/2, pi/2]")
        if not self.distance > 0:
            raise InvalidArgumentError("scatterer distance must be positive")

    @classmethod
    def from_degrees(cls, azimuth_deg, elevation_deg, distance):
        return cls(np.deg2rad(azimuth_deg), np.deg2rad(elevation_deg), distance)

    def cartesian(self):
        return scatterer_cartesian(self.azimuth, self.elevation, self.distance)


def scatterer_cartesian(azimuth, elevation, distance):
    """Cartesian coordinates ``(..., 3)`` of scatterers given in polar form."""
    azimuth, elevation, distance = np.broadcast_arrays(
        np.asarray(azimuth, float), np.asarray(elevation, float),
        np.asarray(distance, float))
    ce = np.cos(elevation)
    return np.stack([distance * ce * np.cos(azimuth),
                     distance * ce * np.sin(azimuth),
                     distance * np.sin(elevation)], axis=-1)


def element_position(cfg, index):
    """Position of element ``index`` (1-based) as a length-3 array."""
    index = int(index)
    if not 1 <= index <= cfg.total:
        raise InvalidArgumentError(
            f"element index {index} outside [1, {cfg.total}]")
    i = (index - 1) % cfg.count_h
    j = (index - 1) // cfg.count_h
    return np.array([0.0, i * cfg.spacing, j * cfg.spacing])


def element_distances(cfg, azimuth, elevation, distance):
    """Element-to-scatterer distances for many scatterers at once.

    Parameters
    ----------
    cfg : ArrayConfig
    azimuth, elevation, distance : array_like, shape (n,)
        Scatterer coordinates in the array frame.

    Returns
    -------
    ndarray, shape (cfg.total, n)
    """
    az = np.atleast_1d(np.asarray(azimuth, float))
    el = np.atleast_1d(np.asarray(elevation, float))
    d = np.atleast_1d(np.asarray(distance, float))
    i, j = cfg.grid_indices()
    ce = np.cos(el)
    x = d * ce * np.cos(az)
    y = d * ce * np.sin(az)
    z = d * np.sin(el)
    dy = y[None, :] - i[:, None] * cfg.spacing
    dz = z[None, :] - j[:, None] * cfg.spacing
    return np.sqrt(x[None, :] ** 2 + dz ** 2 + dy ** 2)


def element_distance(system, cfg, index, s):
    """Distance in meters between element ``index`` (1-based) and scatterer ``s``."""
    element_position(cfg, index)  # range check
    return float(element_distances(cfg, s.azimuth, s.elevation,
                                   s.distance)[index - 1, 0])


def nearfield_responses(system, cfg, azimuth, elevation, distance):
    """Near-field response vectors as columns, shape ``(cfg.total, n)``.

    Entry ``k`` of each column is ``exp(-1j*2*pi/lambda*(d_k - d))``. The
    path difference is formed as ``(d_k^2 - d^2)/(d_k + d)`` so that distant
    scatterers do not lose precision to cancellation.
    """
    az = np.atleast_1d(np.asarray(azimuth, float))
    el = np.atleast_1d(np.asarray(elevation, float))
    d = np.atleast_1d(np.asarray(distance, float))
    i, j = cfg.grid_indices()
    py = i[:, None] * cfg.spacing
    pz = j[:, None] * cfg.spacing
    ce = np.cos(el)
    y = d * ce * np.sin(az)
    z = d * np.sin(el)
    # |s - p|^2 - |s|^2 = |p|^2 - 2 s.p
    num = py ** 2 + pz ** 2 - 2 * (py * y[None, :] + pz * z[None, :])
    dk = np.sqrt(np.maximum(d[None, :] ** 2 + num, 0.0))
    diff = num / (dk + d[None, :])
    return np.exp(-1j * system.wavenumber * diff)


def nearfield_response(system, cfg, s):
    """Near-field response vector of ``cfg`` toward a single scatterer."""
    return nearfield_responses(system, cfg, s.azimuth, s.elevation,
                               s.distance)[:, 0]
