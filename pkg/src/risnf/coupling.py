"""Dipole mutual impedance, coupling matrices and coupling-aware correlations.

Elements are thin half-wave dipoles oriented along +z on the Y-Z plane, so a
pair displaced purely along y is side-by-side, purely along z is co-linear,
and otherwise parallel-in-echelon. Impedances follow the induced-EMF method
with sinusoidal current distributions; each arrangement is evaluated in
closed form through sine and cosine integrals.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import sici

from .correlation import CorrelationMatrix, _normalize
from .errors import (IllConditionedCouplingError, InvalidArgumentError,
                     UnsupportedConfigurationError)

FREE_SPACE_IMPEDANCE = 376.730313668
EULER_GAMMA = 0.5772156649015329
ZERO_TOL = 1e-12


def sine_cosine_integrals(x):
    """``(Si(x), Ci(x))`` for ``x >= 0``; ``Ci`` is undefined at zero."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidArgumentError("Si/Ci are evaluated for x >= 0 only")
    if np.any(x == 0):
        raise InvalidArgumentError("Ci has a logarithmic singularity at x = 0")
    si, ci = sici(x)
    return si, ci


@dataclass(frozen=True)
class DipoleConfig:
    """Half-wave dipole parameters; lengths in wavelengths, resistance in Ohms.

    ``wire_radius`` only enters co-linear pairs, whose filaments would
    otherwise overlap on a shared axis when the vertical spacing is below the
    dipole length.
    """

    dipole_length: float = 0.5
    dissipation_resistance: float = 73.08
    wire_radius: float = 1e-3

    def __post_init__(self):
        if not self.dipole_length > 0:
            raise InvalidArgumentError("dipole_length must be positive")
        if not self.dissipation_resistance > 0:
            raise InvalidArgumentError("dissipation resistance must be positive")
        if not self.wire_radius > 0:
            raise InvalidArgumentError("wire radius must be positive")


def _require_half_wave(cfg):
    if abs(cfg.dipole_length - 0.5) > 1e-12:
        raise UnsupportedConfigurationError(
            "only half-wave dipoles (dipole_length = 0.5 wavelengths) are supported")


def _F(w):
    """Primitive of ``exp(-1j*w)/w``: ``Ci(w) - 1j*Si(w)``."""
    si, ci = sici(w)
    return ci - 1j * si


def _primitive(sigma, t, d, k):
    """Primitive in ``t`` of ``exp(-1j*k*(R - sigma*t))/R``, ``R = hypot(d, t)``.

    ``R + t`` and ``R - t`` are formed without cancellation.
    """
    R = np.hypot(d, t)
    if sigma < 0:
        w = np.where(t >= 0, R + t, d * d / (R - t))
        return _F(k * w)
    w = np.where(t <= 0, R - t, d * d / (R + t))
    return -_F(k * w)


def _half_wave_pair(d, h, k):
    """Mutual impedance of two parallel half-wave filaments.

    ``d`` is the lateral separation (> 0) and ``h`` the offset between the
    centers along the dipole axis. The induced-EMF integral is split into the
    two current halves and the two end-point sources of the radiating dipole;
    each piece integrates exactly to ``Ci``/``Si`` terms.
    """
    d = np.asarray(d, float)
    h = np.asarray(h, float)
    L = np.pi / (2 * k)
    total = np.zeros(np.broadcast(d, h).shape, dtype=complex)

    def piece(sigma, c, za, zb):
        pre = np.exp(1j * sigma * k * c)
        return pre * (_primitive(sigma, zb - c, d, k)
                      - _primitive(sigma, za - c, d, k))

    for c in (L, -L):
        total += np.exp(1j * k * (L - h)) * piece(+1, c, h - L, h)
        total -= np.exp(-1j * k * (L - h)) * piece(-1, c, h - L, h)
        total += np.exp(1j * k * (L + h)) * piece(-1, c, h, h + L)
        total -= np.exp(-1j * k * (L + h)) * piece(+1, c, h, h + L)
    return FREE_SPACE_IMPEDANCE / (8 * np.pi) * total


def self_impedance(cfg, system):
    """Input impedance of an isolated half-wave dipole (thin-wire limit).

    This is the zero-separation limit of the side-by-side form,
    ``eta/(4 pi) * (Cin(2 pi) + 1j Si(2 pi))``.
    """
    _require_half_wave(cfg)
    si, ci = sici(2 * np.pi)
    cin = EULER_GAMMA + np.log(2 * np.pi) - ci
    return FREE_SPACE_IMPEDANCE / (4 * np.pi) * (cin + 1j * si)


def _side_by_side(d, k):
    l = np.pi / k
    s = np.sqrt(d * d + l * l)
    u0, u1, u2 = k * d, k * (s + l), k * d * d / (s + l)
    si0, ci0 = sici(u0)
    si1, ci1 = sici(u1)
    si2, ci2 = sici(u2)
    eta = FREE_SPACE_IMPEDANCE / (4 * np.pi)
    return eta * (2 * ci0 - ci1 - ci2) - 1j * eta * (2 * si0 - si1 - si2)


def mutual_impedance(cfg, system, displacement):
    """Mutual impedance in Ohms for a pair displaced by ``(dy, dz)`` meters."""
    _require_half_wave(cfg)
    dy, dz = (abs(float(v)) for v in displacement)
    if dy < ZERO_TOL and dz < ZERO_TOL:
        raise InvalidArgumentError("zero displacement; use self_impedance")
    k = system.wavenumber
    if dz < ZERO_TOL:
        return complex(_side_by_side(dy, k))
    if dy < ZERO_TOL:
        return complex(_colinear(dz, cfg.wire_radius * system.wavelength, k))
    return complex(_half_wave_pair(dy, dz, k))


def _colinear(dz, radius, k):
    # filaments on one axis diverge when they overlap; offset by the wire radius
    return _half_wave_pair(radius, dz, k)


@dataclass(frozen=True, eq=False)
class ImpedanceMatrix:
    entries: np.ndarray

    @property
    def total(self):
        return self.entries.shape[0]


def build_impedance_matrix(cfg, system, array):
    """Impedance matrix of a UPA of z-oriented half-wave dipoles.

    The UPA is translation invariant, so only one impedance per distinct
    ``(|di|, |dj|)`` grid offset is evaluated.
    """
    _require_half_wave(cfg)
    k = system.wavenumber
    H, V = array.count_h, array.count_v
    di = np.arange(H) * array.spacing
    dj = np.arange(V) * array.spacing
    table = np.empty((H, V), dtype=complex)
    table[0, 0] = self_impedance(cfg, system)
    if H > 1:
        table[1:, 0] = _side_by_side(di[1:], k)
    if V > 1:
        table[0, 1:] = _colinear(dj[1:], cfg.wire_radius * system.wavelength, k)
    if H > 1 and V > 1:
        Dy, Dz = np.meshgrid(di[1:], dj[1:], indexing="ij")
        table[1:, 1:] = _half_wave_pair(Dy, Dz, k)
    i, j = array.grid_indices()
    Z = table[np.abs(i[:, None] - i[None, :]), np.abs(j[:, None] - j[None, :])]
    return ImpedanceMatrix(Z)


def _principal_sqrt(M):
    w, V = np.linalg.eig(M)
    if np.linalg.cond(V) > 1e8:
        from scipy.linalg import sqrtm
        S = sqrtm(M)
    else:
        S = (V * np.sqrt(w)) @ np.linalg.inv(V)
    # the principal root of a complex-symmetric matrix is symmetric
    return 0.5 * (S + S.T)


class CouplingMatrix:
    """``M = (Z + r_d I)^{-1}`` together with its principal square root."""

    def __init__(self, entries, sqrt=None):
        self.entries = np.asarray(entries)
        self._sqrt = sqrt

    @property
    def total(self):
        return self.entries.shape[0]

    @property
    def sqrt(self):
        if self._sqrt is None:
            self._sqrt = _principal_sqrt(self.entries)
        return self._sqrt

    @classmethod
    def identity(cls, n):
        I = np.eye(n, dtype=complex)
        return cls(I, I.copy())


def coupling_matrix(Z, r_d):
    """Invert ``Z + r_d I`` and cache the principal square root of the result."""
    Z = np.asarray(getattr(Z, "entries", Z))
    A = Z + r_d * np.eye(Z.shape[0])
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e12:
        raise IllConditionedCouplingError(
            f"Z + r_d I is ill conditioned (cond = {cond:.3e})", cond)
    Minv = np.linalg.inv(A)
    Minv = 0.5 * (Minv + Minv.T)
    cm = CouplingMatrix(Minv)
    cm.sqrt  # computed eagerly so the object is immutable afterwards
    return cm


def array_coupling(array, system, dipole=None):
    """Coupling matrix of ``array`` under the given dipole model."""
    dipole = dipole or DipoleConfig()
    Z = build_impedance_matrix(dipole, system, array)
    return coupling_matrix(Z, dipole.dissipation_resistance)


def coupled_correlation(R, M, literal_paper_form=False):
    """Correlation seen through coupling, trace-renormalized.

    The default is the congruence ``S R S^H`` with ``S = M^{1/2}``, which is
    PSD by construction. ``literal_paper_form`` evaluates ``S R S`` instead;
    its Hermitian part is projected onto the PSD cone before normalization.
    """
    entries = np.asarray(getattr(R, "entries", R))
    if entries.shape[0] != M.total:
        raise InvalidArgumentError("correlation and coupling sizes differ")
    S = M.sqrt
    if literal_paper_form:
        out = S @ entries @ S
        out = 0.5 * (out + out.conj().T)
        w, V = np.linalg.eigh(out)
        out = (V * np.clip(w, 0, None)) @ V.conj().T
    else:
        out = S @ entries @ S.conj().T
    kind = getattr(R, "kind", None)
    out = _normalize(out, entries.shape[0])
    if kind is None:
        return CorrelationMatrix(out, coupled=True)
    return CorrelationMatrix(out, kind, coupled=True)


def apply_coupling_to_channel(H, M_rx, M_tx):
    """Effective channel ``M_rx^{1/2} H M_tx^{1/2}``."""
    H = np.asarray(H)
    if H.shape != (M_rx.total, M_tx.total):
        raise InvalidArgumentError(
            f"channel shape {H.shape} does not match couplings "
            f"({M_rx.total}, {M_tx.total})")
    return M_rx.sqrt @ H @ M_tx.sqrt
