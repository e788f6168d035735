"""Near-field spatial correlation synthesis and Kronecker-structured covariances.

Two kinds of correlation matrix are produced:

* *exact clustered*: a finite sum of ``a a^H`` over rays drawn around
  randomly placed scattering clusters;
* *subspace*: the integral of ``a a^H`` over every plausible scatterer
  location (the whole angular region times a distance interval), whose
  dominant eigenvectors span any clustered matrix drawn from that region.

All emitted matrices are trace-normalized to the array size, which folds the
average channel gain into the normalization.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError
from .geometry import nearfield_responses
from .spectral import hermitian_eig, kron_eigs

HALF_PI = np.pi / 2


class CorrelationKind(Enum):
    EXACT_CLUSTERED = 0
    SUBSPACE = 1


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Hermitian PSD correlation matrix with its provenance."""

    entries: np.ndarray
    kind: CorrelationKind = CorrelationKind.EXACT_CLUSTERED
    coupled: bool = False

    @property
    def trace(self):
        return float(np.real(np.trace(self.entries)))

    @property
    def total(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _normalize(R, total):
    R = 0.5 * (R + R.conj().T)
    tr = np.real(np.trace(R))
    if not tr > 0:
        raise DegenerateInputError("correlation matrix has zero trace")
    return R * (total / tr)


@dataclass(frozen=True)
class ClusterSet:
    """Random scattering clusters, each realized as ``rays_per_cluster`` rays.

    Angles and spreads are radians, distances meters. Cluster centers are
    uniform over the configured box (uniform in elevation, or in
    ``sin(elevation)`` when ``solid_angle_weighting`` is set); rays are
    Gaussian perturbations of their center and are discarded when they leave
    ``[-pi/2, pi/2]^2`` or reach non-positive distance.
    """

    cluster_count: int = 10
    az_range: tuple = (-HALF_PI, HALF_PI)
    el_range: tuple = (-HALF_PI, HALF_PI)
    distance_range: tuple = (10.0, 20.0)
    rays_per_cluster: int = 100
    angular_spread_std: float = float(np.deg2rad(5.0))
    distance_spread_std: float = 0.5
    seed: int = 0
    average_gain: float = 1.0
    solid_angle_weighting: bool = False

    def __post_init__(self):
        if self.cluster_count < 1 or self.rays_per_cluster < 1:
            raise InvalidArgumentError("need at least one cluster and one ray")
        for lo, hi in (self.az_range, self.el_range):
            if not -HALF_PI - 1e-12 <= lo <= hi <= HALF_PI + 1e-12:
                raise InvalidArgumentError("angular ranges must lie in [-pi/2, pi/2]")
        lo, hi = self.distance_range
        if not 0 < lo <= hi:
            raise InvalidArgumentError("distance range must be positive")
        if self.angular_spread_std < 0 or self.distance_spread_std < 0:
            raise InvalidArgumentError("spreads must be non-negative")
        if self.average_gain < 0:
            raise InvalidArgumentError("average gain must be non-negative")

    def with_seed(self, seed):
        return ClusterSet(**{**self.__dict__, "seed": int(seed)})


def draw_rays(clusters):
    """Ray coordinates and weights of a cluster set.

    Returns
    -------
    az, el, d, w : ndarray
        Surviving rays; ``w`` sums to one.
    """
    rng = np.random.Generator(np.random.Philox(clusters.seed))
    n, L = clusters.cluster_count, clusters.rays_per_cluster
    az_c = rng.uniform(*clusters.az_range, size=n)
    if clusters.solid_angle_weighting:
        lo, hi = np.sin(clusters.el_range)
        el_c = np.arcsin(rng.uniform(lo, hi, size=n))
    else:
        el_c = rng.uniform(*clusters.el_range, size=n)
    d_c = rng.uniform(*clusters.distance_range, size=n)

    sa, sd = clusters.angular_spread_std, clusters.distance_spread_std
    az = (az_c[:, None] + sa * rng.standard_normal((n, L))).ravel()
    el = (el_c[:, None] + sa * rng.standard_normal((n, L))).ravel()
    d = (d_c[:, None] + sd * rng.standard_normal((n, L))).ravel()
    keep = (np.abs(az) <= HALF_PI) & (np.abs(el) <= HALF_PI) & (d > 0)
    if not keep.any():
        raise DegenerateInputError("every ray fell outside the angular region")
    az, el, d = az[keep], el[keep], d[keep]
    w = np.full(az.size, 1.0 / az.size)
    return az, el, d, w


def correlation_from_rays(system, cfg, az, el, d, w, chunk=4096):
    """Unnormalized ``sum_r w_r a(s_r) a(s_r)^H``, accumulated in fixed order."""
    if np.size(az) == 0:
        raise InvalidArgumentError("empty ray set")
    R = np.zeros((cfg.total, cfg.total), dtype=complex)
    for start in range(0, np.size(az), chunk):
        sl = slice(start, start + chunk)
        A = nearfield_responses(system, cfg, az[sl], el[sl], d[sl])
        R += (A * w[sl]) @ A.conj().T
    return R


def synthesize_cluster_correlation(system, cfg, clusters):
    """Exact clustered near-field correlation matrix with trace ``cfg.total``."""
    az, el, d, w = draw_rays(clusters)
    R = correlation_from_rays(system, cfg, az, el, d,
                              clusters.average_gain * w)
    return CorrelationMatrix(_normalize(R, cfg.total),
                             CorrelationKind.EXACT_CLUSTERED)


@dataclass(frozen=True)
class SubspaceIntegrationGrid:
    """Quadrature used for the subspace correlation integral."""

    nodes_az: int = 24
    nodes_el: int = 24
    nodes_d: int = 8
    quadrature: str = "gauss-legendre"
    seed: int = 0
    samples: int = 100_000
    solid_angle_weighting: bool = False

    def __post_init__(self):
        if min(self.nodes_az, self.nodes_el, self.nodes_d) < 2:
            raise InvalidArgumentError("node counts must be at least 2")
        if self.quadrature not in ("gauss-legendre", "monte-carlo"):
            raise InvalidArgumentError(
                f"unknown quadrature {self.quadrature!r}")


def _gl(n, lo, hi):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def subspace_nodes(grid, distance_range):
    """Quadrature nodes and weights over the angular region times distances."""
    lo, hi = distance_range
    if not 0 < lo < hi:
        raise InvalidArgumentError("distance range must satisfy 0 < min < max")
    if grid.quadrature == "gauss-legendre":
        az, waz = _gl(grid.nodes_az, -HALF_PI, HALF_PI)
        el, wel = _gl(grid.nodes_el, -HALF_PI, HALF_PI)
        d, wd = _gl(grid.nodes_d, lo, hi)
        if grid.solid_angle_weighting:
            wel = wel * np.cos(el)
        A, E, D = np.meshgrid(az, el, d, indexing="ij")
        W = waz[:, None, None] * wel[None, :, None] * wd[None, None, :]
        return A.ravel(), E.ravel(), D.ravel(), W.ravel() / W.sum()
    rng = np.random.Generator(np.random.Philox(grid.seed))
    n = grid.samples
    az = rng.uniform(-HALF_PI, HALF_PI, n)
    if grid.solid_angle_weighting:
        el = np.arcsin(rng.uniform(-1.0, 1.0, n))
    else:
        el = rng.uniform(-HALF_PI, HALF_PI, n)
    d = rng.uniform(lo, hi, n)
    return az, el, d, np.full(n, 1.0 / n)


def subspace_correlation(system, cfg, grid=None, distance_range=(10.0, 20.0)):
    """Correlation integrated uniformly over all plausible scatterer locations."""
    grid = grid or SubspaceIntegrationGrid()
    az, el, d, w = subspace_nodes(grid, distance_range)
    R = correlation_from_rays(system, cfg, az, el, d, w)
    return CorrelationMatrix(_normalize(R, cfg.total), CorrelationKind.SUBSPACE)


class KroneckerCorrelation:
    """Lazy ``a ⊗ b`` of two correlation matrices."""

    def __init__(self, a, b):
        self.a = np.asarray(a)
        self.b = np.asarray(b)

    @property
    def shape(self):
        n = self.a.shape[0] * self.b.shape[0]
        return (n, n)

    @property
    def trace(self):
        return float(np.real(np.trace(self.a) * np.trace(self.b)))

    def eigenvalues(self):
        return kron_eigs([hermitian_eig(self.a), hermitian_eig(self.b)])

    def materialize(self):
        return np.kron(self.a, self.b)


def kron_correlation(r_a, r_b):
    return KroneckerCorrelation(r_a, r_b)


@dataclass(frozen=True, eq=False)
class FactoredCovariance:
    """Cascaded-channel covariance ``ris ⊗ ue ⊗ bs`` kept in factored form.

    The ordering matches the cascaded vector, whose index runs over
    (RIS element, UE antenna, BS antenna) with the BS index fastest.
    """

    ris_factor: np.ndarray
    ue_factor: np.ndarray
    bs_factor: np.ndarray
    _eigs: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dims(self):
        return (self.ris_factor.shape[0], self.ue_factor.shape[0],
                self.bs_factor.shape[0])

    @property
    def dim(self):
        K, N, M = self.dims
        return K * N * M

    @property
    def factors(self):
        return (self.ris_factor, self.ue_factor, self.bs_factor)

    @property
    def trace(self):
        return float(np.prod([np.real(np.trace(f)) for f in self.factors]))

    def eigensystems(self):
        """Per-factor eigensystems, computed once."""
        if "es" not in self._eigs:
            self._eigs["es"] = tuple(hermitian_eig(f) for f in self.factors)
        return self._eigs["es"]

    def eigenvalues(self):
        return kron_eigs(self.eigensystems())

    def materialize(self, limit=4096):
        if self.dim > limit:
            raise InvalidArgumentError(
                f"refusing to materialize a {self.dim}x{self.dim} covariance")
        return np.kron(np.kron(self.ris_factor, self.ue_factor), self.bs_factor)


def _check_psd(A, name):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"{name} must be square")
    w = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    if w.size and w[0] < -1e-10 * max(w[-1], 0.0) - 1e-300:
        raise InvalidArgumentError(f"{name} is not positive semidefinite")
    return A


def cascaded_covariance(R_HR, R_FR, R_HU, R_FB):
    """Covariance ``(R_HR ⊙ R_FR) ⊗ R_HU ⊗ R_FB`` of the cascaded channel."""
    R_HR, R_FR, R_HU, R_FB = (np.asarray(r) for r in (R_HR, R_FR, R_HU, R_FB))
    if R_HR.shape != R_FR.shape:
        raise InvalidArgumentError("RIS-side factors must have equal shape")
    for name, A in (("R_HR", R_HR), ("R_FR", R_FR), ("R_HU", R_HU),
                    ("R_FB", R_FB)):
        _check_psd(A, name)
    ris = R_HR * R_FR
    # Schur product theorem; checked rather than assumed
    _check_psd(ris, "R_HR ⊙ R_FR")
    return FactoredCovariance(0.5 * (ris + ris.conj().T), R_HU, R_FB)
