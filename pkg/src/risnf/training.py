"""Pilot and RIS phase-shift training design and the structured observation operator.

Training runs for ``T_p`` steps split into ``T_p / N`` intervals of length
``N``. The RIS configuration is constant within an interval and the UE sends
the columns of an ``N x N`` orthogonal pilot block, one per step. With the
cascaded vector ``c`` indexed by (RIS element, UE antenna, BS antenna), step
``l`` observes ``(phi_l^T ⊗ x_l^T ⊗ I_M) c``.

The observation matrix ``Q`` is never formed in production code: its Gram
is ``(N * Phi^H Phi) ⊗ I_{NM}`` and its adjoint is applied blockwise.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

Q_MATERIALIZE_LIMIT = 64


@dataclass(frozen=True)
class TrainingDesign:
    """Training length, per-symbol pilot power and noise variance."""

    T_p: int
    pilot_power: float = 1.0
    noise_variance: float = 1.0

    def __post_init__(self):
        if self.T_p < 1:
            raise InvalidArgumentError("T_p must be positive")
        if not self.pilot_power > 0 or not self.noise_variance > 0:
            raise InvalidArgumentError("pilot power and noise variance must be positive")

    @property
    def snr(self):
        return self.pilot_power / self.noise_variance

    @classmethod
    def from_snr_db(cls, T_p, snr_db, noise_variance=1.0):
        return cls(int(T_p), noise_variance * 10 ** (snr_db / 10), noise_variance)

    def validate(self, K, N):
        """Check ``T_p >= K N`` and that ``T_p`` splits into whole intervals."""
        if self.T_p % N:
            raise InvalidArgumentError(f"T_p={self.T_p} is not a multiple of N={N}")
        if self.T_p < K * N:
            raise InvalidArgumentError(
                f"T_p={self.T_p} < K*N={K * N}; the cascaded channel is not identifiable")


@dataclass(frozen=True, eq=False)
class PhaseSchedule:
    """One RIS configuration per training interval, shape ``(T_p/N, K)``."""

    phi: np.ndarray

    @property
    def intervals(self):
        return self.phi.shape[0]

    @property
    def K(self):
        return self.phi.shape[1]


@dataclass(frozen=True, eq=False)
class PilotMatrix:
    """Unitary ``N x N`` pilot basis; column ``n`` is sent at step ``n`` of an interval.

    Each UE antenna transmits a unit-modulus symbol, so the block actually
    sent is ``sqrt(N) * x`` (see :attr:`symbols`).
    """

    x: np.ndarray

    @property
    def N(self):
        return self.x.shape[0]

    @property
    def symbols(self):
        return np.sqrt(self.N) * self.x


def dft_phase_schedule(K, T_p, N):
    """Rows of the K-point DFT matrix, one per interval, repeating cyclically."""
    K, T_p, N = int(K), int(T_p), int(N)
    if K < 1 or N < 1 or T_p < 1:
        raise InvalidArgumentError("K, N and T_p must be positive")
    if T_p % N:
        raise InvalidArgumentError(f"T_p={T_p} is not a multiple of N={N}")
    rows = np.arange(T_p // N) % K
    k = np.arange(K)
    return PhaseSchedule(np.exp(-2j * np.pi * np.outer(rows, k) / K))


def orthonormal_pilots(N):
    """Unitary DFT pilot basis."""
    N = int(N)
    if N < 1:
        raise InvalidArgumentError("N must be positive")
    n = np.arange(N)
    return PilotMatrix(np.exp(-2j * np.pi * np.outer(n, n) / N) / np.sqrt(N))


def phase_gram(phi):
    """``Phi^T Phi^*`` for a compact schedule (one row per interval)."""
    P = np.asarray(getattr(phi, "phi", phi))
    return P.T @ P.conj()


@dataclass(frozen=True, eq=False)
class FactoredGram:
    """``Q^H Q = ris_factor ⊗ I_{identity_dim}``."""

    ris_factor: np.ndarray
    identity_dim: int

    @property
    def K(self):
        return self.ris_factor.shape[0]

    @property
    def dim(self):
        return self.K * self.identity_dim

    def scaled_identity(self, rtol=1e-12):
        """The scalar ``g`` when ``ris_factor == g I``, else ``None``."""
        G = self.ris_factor
        g = np.real(np.trace(G)) / self.K
        if g > 0 and np.abs(G - g * np.eye(self.K)).max() <= rtol * g:
            return float(g)
        return None

    def materialize(self, limit=4096):
        if self.dim > limit:
            raise InvalidArgumentError(f"refusing to materialize a {self.dim}^2 Gram")
        return np.kron(self.ris_factor, np.eye(self.identity_dim))


def gram(phi, N, M):
    """Factored Gram of the observation matrix.

    The RIS factor is ``N * Phi^H Phi``, i.e. ``N * conj(Phi^T Phi^*)``;
    the conjugate vanishes whenever ``Phi^T Phi^*`` is real, as for DFT
    schedules.
    """
    P = np.asarray(getattr(phi, "phi", phi))
    return FactoredGram(int(N) * (P.conj().T @ P), int(N) * int(M))


def step_vectors(phi, pilots, T_p=None):
    """Per-step RIS configurations ``(T_p, K)`` and pilot symbols ``(T_p, N)``."""
    P = np.asarray(getattr(phi, "phi", phi))
    N = pilots.N
    T_p = T_p or P.shape[0] * N
    steps = np.arange(T_p)
    return P[steps // N], pilots.symbols.T[steps % N]


def observation_matrix(phi, pilots, M):
    """Explicit ``Q`` (``T_p M x K N M``); only for small verification problems."""
    P = np.asarray(getattr(phi, "phi", phi))
    K, N = P.shape[1], pilots.N
    if K * N * M > Q_MATERIALIZE_LIMIT:
        raise InvalidArgumentError(
            f"K*N*M={K * N * M} exceeds {Q_MATERIALIZE_LIMIT}; use the factored operators")
    ph, xs = step_vectors(P, pilots)
    I_M = np.eye(M)
    return np.vstack([np.kron(np.kron(p[None, :], x[None, :]), I_M)
                      for p, x in zip(ph, xs)])


@dataclass(frozen=True, eq=False)
class ObservationBatch:
    """Received vectors ``y_l`` stacked as rows, shape ``(T_p, M)``."""

    y: np.ndarray

    @property
    def T_p(self):
        return self.y.shape[0]

    def vector(self):
        return self.y.reshape(-1)


def apply_forward(phi, pilots, c, M):
    """``Q c`` as a ``(T_p, M)`` array, without forming ``Q``."""
    P = np.asarray(getattr(phi, "phi", phi))
    K, N = P.shape[1], pilots.N
    C = np.asarray(c).reshape(K, N, M)
    ph, xs = step_vectors(P, pilots)
    return np.einsum("lk,ln,knm->lm", ph, xs, C, optimize=True)


def apply_adjoint(phi, pilots, obs):
    """``Q^H y`` computed step by step, returned with length ``K N M``."""
    P = np.asarray(getattr(phi, "phi", phi))
    y = np.asarray(getattr(obs, "y", obs))
    T_p = P.shape[0] * pilots.N
    if y.ndim != 2 or y.shape[0] != T_p:
        raise InvalidArgumentError(
            f"expected {T_p} observation rows, got shape {y.shape}")
    ph, xs = step_vectors(P, pilots)
    out = np.einsum("lk,ln,lm->knm", ph.conj(), xs.conj(), y, optimize=True)
    return out.reshape(-1)
