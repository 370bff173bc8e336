"""Dense symmetric linear algebra primitives.

Everything here operates on plain ``numpy`` arrays; symmetric matrices are
passed as full square arrays and symmetrized defensively on entry.
"""

from dataclasses import dataclass

import numpy as np

from lurecert import backend
from lurecert.errors import InvalidInput, NotRankOne

RANK_TOL_DEFAULT = 1e-6


def symmetrize(S):
    """Return the symmetric part (S + S.T)/2 as a float array."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {S.shape}")
    return 0.5 * (S + S.T)


@dataclass(frozen=True)
class EigDecomposition:
    """Eigenvalues sorted descending and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eig(S):
    """Eigendecomposition of a symmetric matrix (cyclic Jacobi backend).

    Raises
    ------
    InvalidInput
        If the input contains non-finite entries or is not square.
    """
    S = symmetrize(S)
    if not np.all(np.isfinite(S)):
        raise InvalidInput("matrix has non-finite entries")
    w, V = backend.jacobi_eig(S)
    return EigDecomposition(eigenvalues=w, eigenvectors=V)


def project_psd(S):
    """Frobenius-nearest positive semidefinite matrix (eigenvalue clipping)."""
    eig = sym_eig(S)
    w = np.maximum(eig.eigenvalues, 0.0)
    V = eig.eigenvectors
    return symmetrize(V @ (w[:, None] * V.T))


def rank_one_factor(H, rank_tol=RANK_TOL_DEFAULT):
    """Factor a PSD matrix as h h^T, or return None when rank exceeds one.

    The factor is ``sqrt(l1) * v1`` with the sign chosen so that the entry of
    largest magnitude is positive. ``None`` is returned when the relative
    second eigenvalue ``|l2|/l1`` exceeds ``rank_tol``.

    Raises
    ------
    NotRankOne
        If ``H`` is (numerically) zero, so no direction exists.
    InvalidInput
        If ``H`` is not PSD within ``rank_tol`` (relative).
    """
    eig = sym_eig(H)
    w = eig.eigenvalues
    l1 = w[0]
    if l1 <= 0.0:
        raise NotRankOne("matrix is numerically zero or negative", ratio=None)
    if w[-1] < -rank_tol * l1:
        raise InvalidInput(f"matrix is not PSD: min eigenvalue {w[-1]:.3e}")
    ratio = abs(w[1]) / l1 if len(w) > 1 else 0.0
    if ratio > rank_tol:
        return None
    h = np.sqrt(l1) * eig.eigenvectors[:, 0]
    if h[np.argmax(np.abs(h))] < 0:
        h = -h
    return h


def svec(S):
    """Vectorize a symmetric matrix isometrically (off-diagonals scaled by sqrt 2)."""
    S = symmetrize(S)
    d = S.shape[0]
    iu = np.triu_indices(d)
    scale = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    return S[iu] * scale


def smat(v, dim=None):
    """Inverse of :func:`svec`. ``dim`` may be omitted and inferred."""
    v = np.asarray(v, dtype=float)
    if dim is None:
        dim = int(round((np.sqrt(8 * v.size + 1) - 1) / 2))
    if dim * (dim + 1) // 2 != v.size:
        raise InvalidInput(f"vector of length {v.size} is not svec of a {dim}x{dim} matrix")
    S = np.zeros((dim, dim))
    iu = np.triu_indices(dim)
    scale = np.where(iu[0] == iu[1], 1.0, 1.0 / np.sqrt(2.0))
    S[iu] = v * scale
    S = S + S.T - np.diag(np.diag(S))
    return S


def svec_dim(d):
    """Length of svec of a d x d symmetric matrix."""
    return d * (d + 1) // 2
