"""Channel sampling, observation simulation and empirical NMSE.

Random streams use NumPy's Philox counter-based generator. Trial ``t`` of a
run with master seed ``s`` draws from ``Philox(SeedSequence(s, spawn_key=(t,)))``,
so any trial can be reproduced in isolation and trials can run in any order.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .spectral import psd_sqrt


def trial_rng(seed, trial):
    """Independent generator for one trial of a seeded run."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng, shape, variance=1.0):
    """Circularly symmetric complex Gaussian samples."""
    scale = np.sqrt(variance / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _root(R):
    A = np.asarray(getattr(R, "entries", R))
    return psd_sqrt(A)


def sample_channel(R_rx, R_tx, rows, cols, rng, roots=None):
    """Draw ``X`` with ``E[X_ij X_kl^*] = R_rx[i, k] R_tx[j, l]``.

    Realized as ``R_rx^{1/2} W (R_tx^{1/2})^T`` for i.i.d. ``W``. Square roots
    can be passed in through ``roots`` to skip recomputing them per draw.
    """
    A, B = roots if roots is not None else (_root(R_rx), _root(R_tx))
    if A.shape != (rows, rows) or B.shape != (cols, cols):
        raise InvalidArgumentError("correlation sizes do not match the channel shape")
    W = complex_normal(rng, (rows, cols))
    return A @ W @ B.T


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """UE->RIS channel ``H`` (K x N), RIS->BS channel ``F`` (M x K) and cascade ``c``."""

    H: np.ndarray
    F: np.ndarray
    c: np.ndarray

    @property
    def dims(self):
        return (self.H.shape[0], self.H.shape[1], self.F.shape[0])


def build_cascaded(H, F):
    """Cascade ``c = vec(H^T ⋄ F)``; column ``k`` of the Khatri-Rao product is
    ``H[k, :] ⊗ F[:, k]``."""
    H = np.asarray(H)
    F = np.asarray(F)
    if H.ndim != 2 or F.ndim != 2 or F.shape[1] != H.shape[0]:
        raise InvalidArgumentError(f"incompatible shapes H{H.shape} and F{F.shape}")
    c = np.einsum("kn,mk->knm", H, F).reshape(-1)
    return ChannelRealization(H, F, c)


def simulate_observations(design, phi, pilots, realization, rng):
    """Received training signal ``y_l = sqrt(p) F diag(phi_l) H x_l + n_l``."""
    from .training import ObservationBatch

    P = np.asarray(getattr(phi, "phi", phi))
    H, F = realization.H, realization.F
    X = pilots.symbols
    # one (M x N) block per interval, columns are the N steps of that interval
    blocks = np.einsum("mk,ik,kn,nj->ijm", F, P, H, X, optimize=True)
    y = np.sqrt(design.pilot_power) * blocks.reshape(-1, F.shape[0])
    y = y + complex_normal(rng, y.shape, design.noise_variance)
    return ObservationBatch(y)


def empirical_nmse(estimates, truths):
    """``sum ||c_hat - c||^2 / sum ||c||^2`` over paired trials."""
    estimates = list(estimates)
    truths = list(truths)
    if not truths or len(estimates) != len(truths):
        raise InvalidArgumentError("need equally many non-zero estimates and truths")
    err = sum(float(np.sum(np.abs(np.asarray(e) - np.asarray(t)) ** 2))
              for e, t in zip(estimates, truths))
    ref = sum(float(np.sum(np.abs(np.asarray(t)) ** 2)) for t in truths)
    if ref == 0:
        raise InvalidArgumentError("all true channels are zero")
    return err / ref
