"""Link-level statistics for one scattering realization of the RIS-aided link.

A scenario fixes the three arrays and the scattering model. For a given
cluster seed it draws four independent cluster sets (UE->RIS seen from the
RIS and from the UE, RIS->BS seen from the RIS and from the BS), couples
every array end, and exposes the resulting cascaded covariances, RS-LS
subspace bases and a paired channel sampler.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .correlation import (ClusterSet, CorrelationKind, CorrelationMatrix,
                          FactoredCovariance, SubspaceIntegrationGrid,
                          cascaded_covariance, subspace_correlation,
                          synthesize_cluster_correlation)
from .coupling import CouplingMatrix, DipoleConfig, array_coupling, coupled_correlation
from .geometry import ArrayConfig, Role, SystemConfig
from .montecarlo import build_cascaded, complex_normal
from .spectral import DEFAULT_EPS, SourceKind, psd_sqrt, select_subspace

LINK_ENDS = ("HR", "FR", "HU", "FB")
_END_ARRAY = {"HR": "ris", "FR": "ris", "HU": "ue", "FB": "bs"}


@dataclass(frozen=True)
class Scenario:
    system: SystemConfig
    ris: ArrayConfig
    ue: ArrayConfig
    bs: ArrayConfig
    clusters: ClusterSet = ClusterSet()
    dipole: DipoleConfig = DipoleConfig()
    grid: SubspaceIntegrationGrid = SubspaceIntegrationGrid()
    eps: float = DEFAULT_EPS
    coupling: bool = True
    literal_paper_form: bool = False

    @classmethod
    def from_wavelengths(cls, system, ris, ue, bs, **kwargs):
        """Arrays given as ``(count_h, count_v, spacing/lambda)`` tuples."""
        mk = lambda role, t: ArrayConfig.from_wavelengths(role, *t, system)
        return cls(system, mk(Role.RIS, ris), mk(Role.UE, ue), mk(Role.BS, bs),
                   **kwargs)

    @property
    def dims(self):
        return (self.ris.total, self.ue.total, self.bs.total)

    def array(self, name):
        return getattr(self, name)

    def end_seed(self, seed, end):
        """Cluster seed of one link end, derived from the realization seed."""
        ss = np.random.SeedSequence([int(seed), LINK_ENDS.index(end)])
        return int(ss.generate_state(1, dtype=np.uint64)[0])

    def statistics(self, seed, store=None):
        """Statistics of one cluster realization.

        ``store``, if given, is called as ``store(key, producer, magic)`` and
        must return the matrix ``producer()`` would; it lets callers cache
        correlation and impedance matrices on disk.
        """
        return LinkStatistics(self, int(seed), store)


def _no_store(key, producer, magic):
    return producer()


@dataclass(eq=False)
class LinkStatistics:
    scenario: Scenario
    seed: int
    store: object = None
    _cache: dict = field(default_factory=dict, repr=False)

    def _stored(self, key, producer, magic):
        return (self.store or _no_store)(key, producer, magic)

    @cached_property
    def couplings(self):
        sc = self.scenario
        out = {}
        for name in ("ris", "ue", "bs"):
            arr = sc.array(name)
            if not sc.coupling:
                out[name] = CouplingMatrix.identity(arr.total)
                continue
            key = {"what": "coupling", "system": sc.system, "array": arr,
                   "dipole": sc.dipole}
            M = self._stored(key, lambda arr=arr: array_coupling(
                arr, sc.system, sc.dipole).entries, "coupling")
            out[name] = CouplingMatrix(M)
        return out

    @cached_property
    def exact(self):
        """Uncoupled clustered correlations keyed by link end."""
        sc = self.scenario
        out = {}
        for end in LINK_ENDS:
            arr = sc.array(_END_ARRAY[end])
            clusters = sc.clusters.with_seed(sc.end_seed(self.seed, end))
            key = {"what": "exact", "system": sc.system, "array": arr,
                   "clusters": clusters}
            R = self._stored(key, lambda arr=arr, c=clusters: synthesize_cluster_correlation(
                sc.system, arr, c).entries, "correlation")
            out[end] = CorrelationMatrix(R, CorrelationKind.EXACT_CLUSTERED)
        return out

    @cached_property
    def subspace(self):
        """Uncoupled subspace correlations keyed by array name."""
        sc = self.scenario
        out = {}
        for name in ("ris", "ue", "bs"):
            arr = sc.array(name)
            key = {"what": "subspace", "system": sc.system, "array": arr,
                   "grid": sc.grid, "distance_range": sc.clusters.distance_range}
            R = self._stored(key, lambda arr=arr: subspace_correlation(
                sc.system, arr, sc.grid, sc.clusters.distance_range).entries,
                "correlation")
            out[name] = CorrelationMatrix(R, CorrelationKind.SUBSPACE)
        return out

    def correlation(self, end, kind=CorrelationKind.EXACT_CLUSTERED, coupled=False):
        key = ("corr", end, kind, coupled)
        if key not in self._cache:
            name = _END_ARRAY[end]
            base = (self.exact[end] if kind == CorrelationKind.EXACT_CLUSTERED
                    else self.subspace[name])
            self._cache[key] = (coupled_correlation(base, self.couplings[name],
                                                    self.scenario.literal_paper_form)
                                if coupled else base)
        return self._cache[key]

    def covariance(self, kind=CorrelationKind.EXACT_CLUSTERED, coupled=True):
        """Cascaded covariance ``(R_HR ⊙ R_FR) ⊗ R_HU ⊗ R_FB`` at unit average gain.

        Coupling makes the diagonals of ``R_HR`` and ``R_FR`` unequal, so their
        Hadamard product no longer has trace ``K``; the RIS factor is rescaled
        to trace ``K`` so that ``tr(R_cc) = K N M`` in every case.
        """
        key = ("cov", kind, coupled)
        if key not in self._cache:
            R = {end: self.correlation(end, kind, coupled).entries for end in LINK_ENDS}
            cov = cascaded_covariance(R["HR"], R["FR"], R["HU"], R["FB"])
            ris = cov.ris_factor
            ris = ris * (ris.shape[0] / np.real(np.trace(ris)))
            self._cache[key] = FactoredCovariance(ris, cov.ue_factor, cov.bs_factor)
        return self._cache[key]

    def bases(self, kind=CorrelationKind.EXACT_CLUSTERED, coupled=True):
        """RS-LS bases ``(U_RIS, U_UE, U_BS)`` from the chosen statistics."""
        key = ("bases", kind, coupled)
        if key not in self._cache:
            cov = self.covariance(kind, coupled)
            tag = SourceKind.of(kind, coupled)
            self._cache[key] = tuple(
                select_subspace(es, self.scenario.eps, tag)
                for es in cov.eigensystems())
        return self._cache[key]

    @cached_property
    def _sampling_roots(self):
        return {end: psd_sqrt(self.exact[end].entries) for end in LINK_ENDS}

    @cached_property
    def _coupling_gains(self):
        """Scalars applied to coupled draws of ``H`` and ``F``.

        Each link is first brought to unit average element gain; ``H`` then
        carries one more factor so that the cascade has ``E||c||^2 = K N M``,
        matching the normalization of :meth:`covariance`.
        """
        gains = {}
        S = {n: c.sqrt for n, c in self.couplings.items()}
        diag = {}
        for link, (rx, tx) in {"H": ("HR", "HU"), "F": ("FB", "FR")}.items():
            tr = 1.0
            size = 1
            for end in (rx, tx):
                A = S[_END_ARRAY[end]]
                R = self.exact[end].entries
                d = np.real(np.einsum("ij,jk,ik->i", A, R, A.conj()))
                diag[end] = d
                tr *= d.sum()
                size *= R.shape[0]
            gains[link] = np.sqrt(size / tr)
        a, b = diag["HR"], diag["FR"]
        gains["H"] *= np.sqrt(a.sum() * b.sum() / (a.size * np.dot(a, b)))
        return gains

    def sample(self, rng, coupled=True):
        """Draw one realization; with ``coupled`` the arrays' coupling is applied.

        The uncoupled draw is transformed by ``M^{1/2}`` on both ends and
        rescaled, so the cascade is distributed with covariance
        :meth:`covariance` of the exact coupled statistics.
        """
        K, N, M = self.scenario.dims
        r = self._sampling_roots
        H = r["HR"] @ complex_normal(rng, (K, N)) @ r["HU"].T
        F = r["FB"] @ complex_normal(rng, (M, K)) @ r["FR"].T
        if coupled:
            S = {n: c.sqrt for n, c in self.couplings.items()}
            g = self._coupling_gains
            H = g["H"] * (S["ris"] @ H @ S["ue"])
            F = g["F"] * (S["bs"] @ F @ S["ris"])
        return build_cascaded(H, F)
