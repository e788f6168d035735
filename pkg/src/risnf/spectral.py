"""Dense eigen kernels, PSD square roots, effective rank and Kronecker spectra."""

from dataclasses import dataclass
from enum import Enum
from functools import reduce

import numpy as np

from .errors import (EmptySubspaceError, InvalidArgumentError, NotPSDError)

DEFAULT_EPS = 1e-5
DB_FLOOR = -300.0


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending with eigenvectors as matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def size(self):
        return self.eigenvalues.size


class SourceKind(Enum):
    EXACT_WITH_MC = "exact_with_mc"
    EXACT_WITHOUT_MC = "exact_without_mc"
    SUBSPACE_WITH_MC = "subspace_with_mc"
    SUBSPACE_WITHOUT_MC = "subspace_without_mc"

    @classmethod
    def of(cls, kind, coupled):
        name = getattr(kind, "name", str(kind)).upper()
        exact = name.startswith("EXACT")
        if exact:
            return cls.EXACT_WITH_MC if coupled else cls.EXACT_WITHOUT_MC
        return cls.SUBSPACE_WITH_MC if coupled else cls.SUBSPACE_WITHOUT_MC


@dataclass(frozen=True)
class SubspaceBasis:
    basis: np.ndarray
    threshold_used: float
    source_kind: SourceKind = None

    @property
    def rank(self):
        return self.basis.shape[1]

    @property
    def dim(self):
        return self.basis.shape[0]

    @classmethod
    def full(cls, n):
        """The whole space, i.e. no reduction."""
        return cls(np.eye(n, dtype=complex), 0.0)


@dataclass(frozen=True)
class RankReport:
    rank: int
    eigenvalues_db: np.ndarray
    threshold: float


def _as_array(R):
    return np.asarray(getattr(R, "entries", R))


def hermitian_eig(R):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The input is symmetrized as ``(R + R^H)/2`` first. Equal eigenvalues keep
    the order LAPACK returned them in, so results are reproducible.
    """
    A = _as_array(R)
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("matrix has non-finite entries")
    A = 0.5 * (A + A.conj().T)
    w, V = np.linalg.eigh(A)
    order = np.argsort(-w, kind="stable")
    return EigenSystem(w[order], V[:, order])


def psd_sqrt(R, eig=None):
    """Hermitian PSD square root ``S`` with ``S @ S == R``.

    Eigenvalues down to ``-1e-10 * lambda_max`` are treated as round-off and
    clamped to zero; anything more negative raises :class:`NotPSDError`.
    Eigenvalues at the round-off floor ``n * eps_mach * lambda_max`` are also
    zeroed, since their square roots would leak ``~1e-8`` of energy out of the
    column space of a rank-deficient ``R``.
    """
    es = eig if eig is not None else hermitian_eig(R)
    w = es.eigenvalues
    top = max(w[0], 0.0) if w.size else 0.0
    if w.size and w[-1] < -1e-10 * top:
        raise NotPSDError(
            f"eigenvalue {w[-1]:.3e} below -1e-10 * {top:.3e}")
    floor = w.size * np.finfo(float).eps * top
    root = np.sqrt(np.where(w > floor, w, 0.0))
    V = es.eigenvectors
    S = (V * root) @ V.conj().T
    return 0.5 * (S + S.conj().T)


def effective_rank(eig, eps=DEFAULT_EPS):
    """Count of eigenvalues at or above ``eps`` times the largest one."""
    if not 0 < eps < 1:
        raise InvalidArgumentError("eps must lie in (0, 1)")
    w = eig.eigenvalues
    top = w[0] if w.size else 0.0
    with np.errstate(divide="ignore"):
        db = 10 * np.log10(np.clip(w, 0.0, None))
    db = np.maximum(db, DB_FLOOR)
    if top <= 0:
        return RankReport(0, db, eps)
    return RankReport(int(np.count_nonzero(w >= eps * top)), db, eps)


def select_subspace(eig, eps=DEFAULT_EPS, source_kind=None):
    """Orthonormal basis of the eigenvectors whose eigenvalues pass ``eps``."""
    r = effective_rank(eig, eps).rank
    if r == 0:
        raise EmptySubspaceError("no eigenvalue passes the threshold")
    return SubspaceBasis(eig.eigenvectors[:, :r], eps, source_kind)


def kron_eigs(factors):
    """Eigenvalues of a Kronecker product from the eigenvalues of its factors.

    The result is ordered like ``np.kron`` of the factor eigenvalue vectors,
    which is deterministic but not sorted.
    """
    factors = list(factors)
    if not factors:
        raise InvalidArgumentError("need at least one factor")
    vals = [np.asarray(getattr(f, "eigenvalues", f), float) for f in factors]
    return reduce(np.kron, vals)
