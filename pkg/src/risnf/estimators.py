"""LS, MMSE and reduced-subspace LS estimators of the cascaded channel.

Estimators take ``Q^H y`` (see :func:`risnf.training.apply_adjoint`) and the
factored Gram, and work on the cascaded vector reshaped to a ``(K, N, M)``
tensor so that Kronecker factors act one mode at a time.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (InvalidArgumentError, SubspaceMismatchError,
                     UnderdeterminedDesignError, UnsupportedFastPathError)
from .spectral import SubspaceBasis, kron_eigs
from .training import gram as _gram

COND_LIMIT = 1e12
DENSE_LIMIT = 512


@dataclass(frozen=True, eq=False)
class ErrorCovarianceFactored:
    """Error covariance ``scale * ris_block ⊗ I_{identity_dim}``."""

    ris_block: np.ndarray
    scale: float
    identity_dim: int

    @property
    def trace(self):
        return float(self.scale * np.real(np.trace(self.ris_block)) * self.identity_dim)

    def materialize(self, limit=4096):
        n = self.ris_block.shape[0] * self.identity_dim
        if n > limit:
            raise InvalidArgumentError(f"refusing to materialize a {n}^2 matrix")
        return self.scale * np.kron(self.ris_block, np.eye(self.identity_dim))


@dataclass(frozen=True)
class NMSEResult:
    nmse_linear: float

    @property
    def nmse_db(self):
        with np.errstate(divide="ignore"):
            return float(10 * np.log10(self.nmse_linear))


@dataclass(frozen=True, eq=False)
class MMSEErrorSpectrum:
    """Eigenvalues of the MMSE error covariance (``None`` on the dense path)."""

    eigenvalues: np.ndarray
    trace: float


def _modes(vec, dims):
    return np.asarray(vec).reshape(dims)


def _mode_product(T, A, axis):
    """Multiply tensor ``T`` by matrix ``A`` along ``axis``."""
    return np.moveaxis(np.tensordot(A, T, axes=([1], [axis])), 0, axis)


def _checked_inverse(A, exc, what):
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise exc(f"{what} is singular (cond = {cond:.3e})")
    return np.linalg.inv(A)


def ls_estimate(adjoint_y, gram, p_t):
    """``(1/sqrt(p_t)) (Q^H Q)^{-1} Q^H y`` through the factored Gram."""
    G = gram.ris_factor
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise UnderdeterminedDesignError(
            f"Gram factor is singular (cond = {cond:.3e}); need T_p >= K N")
    Y = np.asarray(adjoint_y).reshape(gram.K, gram.identity_dim)
    return (np.linalg.solve(G, Y) / np.sqrt(p_t)).reshape(-1)


def ls_error_covariance(phi, snr, N, M):
    """LS error covariance ``(1/(snr N)) (Phi^H Phi)^{-1} ⊗ I_{NM}``."""
    G = _gram(phi, N, M).ris_factor / N
    inv = _checked_inverse(G, UnderdeterminedDesignError, "Phi^T Phi^*")
    return ErrorCovarianceFactored(inv, 1.0 / (snr * N), int(N) * int(M))


def mmse_estimate(adjoint_y, gram, R_cc, design):
    """Linear MMSE estimate ``sqrt(p) R Q^H (p Q R Q^H + s2 I)^{-1} y``.

    Rewritten as ``sqrt(p) (p R G + s2 I)^{-1} R Q^H y``. When the Gram is
    ``g I`` this is diagonal in the Kronecker eigenbasis of ``R_cc`` and no
    ``KNM``-sized matrix is formed; otherwise a dense solve is used up to
    ``KNM = 512``.
    """
    p, s2 = design.pilot_power, design.noise_variance
    dims = R_cc.dims
    z = _modes(adjoint_y, dims)
    g = gram.scaled_identity()
    if g is not None:
        es = R_cc.eigensystems()
        for axis, e in enumerate(es):
            z = _mode_product(z, e.eigenvectors.conj().T, axis)
        d = kron_eigs(es).reshape(dims)
        z = z * (np.sqrt(p) * d / (p * g * d + s2))
        for axis, e in enumerate(es):
            z = _mode_product(z, e.eigenvectors, axis)
        return z.reshape(-1)
    if R_cc.dim > DENSE_LIMIT:
        raise UnsupportedFastPathError(
            f"non-identity Gram at KNM={R_cc.dim} > {DENSE_LIMIT}")
    R = R_cc.materialize()
    G = gram.materialize()
    A = p * R @ G + s2 * np.eye(R_cc.dim)
    return np.linalg.solve(A, np.sqrt(p) * R @ z.reshape(-1))


def mmse_error_covariance(R_cc, gram, snr):
    """Spectrum and trace of ``(R_cc^{-1} + snr Q^H Q)^{-1}``.

    Evaluated as ``d / (1 + snr g d)`` per eigenvalue ``d`` of ``R_cc`` when
    the Gram is ``g I``, which stays finite for rank-deficient ``R_cc``. The
    dense fallback uses ``R (I + snr G R)^{-1}`` for the same reason.
    """
    g = gram.scaled_identity()
    if g is not None:
        d = np.clip(R_cc.eigenvalues(), 0.0, None)
        e = d / (1.0 + snr * g * d)
        return MMSEErrorSpectrum(e, float(e.sum()))
    if R_cc.dim > DENSE_LIMIT:
        raise UnsupportedFastPathError(
            f"non-identity Gram at KNM={R_cc.dim} > {DENSE_LIMIT}")
    R = R_cc.materialize()
    G = gram.materialize()
    E = np.linalg.solve((np.eye(R_cc.dim) + snr * G @ R).T, R.T).T
    return MMSEErrorSpectrum(None, float(np.real(np.trace(E))))


def _basis(b):
    return np.asarray(getattr(b, "basis", b))


def rsls_estimate(adjoint_y, gram, bases, p_t):
    """RS-LS estimate with ``U_1 = U_RIS ⊗ U_UE ⊗ U_BS``.

    ``U_1^H Q^H Q U_1`` equals ``(U_RIS^H G U_RIS) ⊗ I``, so only the
    ``r_RIS x r_RIS`` reduced Gram is inverted.
    """
    U_ris, U_ue, U_bs = (_basis(b) for b in bases)
    K, N, M = U_ris.shape[0], U_ue.shape[0], U_bs.shape[0]
    if K * N * M != gram.dim or K != gram.K:
        raise InvalidArgumentError("subspace bases do not match the Gram dimensions")
    reduced = U_ris.conj().T @ gram.ris_factor @ U_ris
    inv = _checked_inverse(reduced, SubspaceMismatchError, "reduced Gram")
    z = _modes(adjoint_y, (K, N, M))
    z = _mode_product(z, inv @ U_ris.conj().T, 0)
    z = _mode_product(z, U_ue.conj().T, 1)
    z = _mode_product(z, U_bs.conj().T, 2)
    z = _mode_product(z, U_ris, 0)
    z = _mode_product(z, U_ue, 1)
    z = _mode_product(z, U_bs, 2)
    return z.reshape(-1) / np.sqrt(p_t)


def rsls_error_covariance(U_ris, phi, snr, N, M):
    """RS-LS error covariance with the RIS-side reduction only.

    ``(1/(snr N)) U (U^H Phi^H Phi U)^{-1} U^H ⊗ I_{NM}``, where the UE and
    BS bases are taken as full.
    """
    U = _basis(U_ris)
    G = _gram(phi, N, M).ris_factor / N
    inv = _checked_inverse(U.conj().T @ G @ U, SubspaceMismatchError, "reduced Gram")
    return ErrorCovarianceFactored(U @ inv @ U.conj().T, 1.0 / (snr * N),
                                   int(N) * int(M))


def rsls_expected_error(bases, R_cc, gram, snr):
    """Expected squared error of :func:`rsls_estimate` for channels ``~ CN(0, R_cc)``.

    Covers subspaces that do not contain the channel: the noiseless RS-LS
    output is ``T c`` with ``T = T_RIS ⊗ P_UE ⊗ P_BS``, so the bias term
    ``tr((I - T) R (I - T)^H)`` splits into per-factor traces. The noise term
    is ``(1/snr) tr(U_RIS (U_RIS^H G U_RIS)^{-1} U_RIS^H) r_UE r_BS``.
    """
    U_ris, U_ue, U_bs = (_basis(b) for b in bases)
    G = gram.ris_factor
    inv = _checked_inverse(U_ris.conj().T @ G @ U_ris, SubspaceMismatchError,
                           "reduced Gram")
    T_ris = U_ris @ inv @ U_ris.conj().T @ G
    P_ue = U_ue @ U_ue.conj().T
    P_bs = U_bs @ U_bs.conj().T
    Rr, Ru, Rb = R_cc.factors

    def tr(A):
        return np.real(np.trace(A))

    full = tr(Rr) * tr(Ru) * tr(Rb)
    cross = np.trace(T_ris @ Rr) * tr(P_ue @ Ru) * tr(P_bs @ Rb)
    proj = (tr(T_ris @ Rr @ T_ris.conj().T) * tr(P_ue @ Ru @ P_ue)
            * tr(P_bs @ Rb @ P_bs))
    bias = full - 2 * np.real(cross) + proj
    noise = tr(U_ris @ inv @ U_ris.conj().T) * U_ue.shape[1] * U_bs.shape[1] / snr
    return float(bias + noise)


def nmse(error_trace, R_cc):
    """``error_trace / tr(R_cc)``."""
    if isinstance(R_cc, np.ndarray):
        total = float(np.real(np.trace(R_cc)))
    else:
        total = R_cc.trace
    if not total > 0:
        raise InvalidArgumentError("covariance trace must be positive")
    return NMSEResult(float(error_trace) / total)


def full_bases(K, N, M):
    """Bases that make RS-LS identical to LS."""
    return (SubspaceBasis.full(K), SubspaceBasis.full(N), SubspaceBasis.full(M))
