"""Cone definitions, membership tests, and Euclidean projections.

A :class:`ConeSpec` names one factor of the product cone a feasibility problem
lives in. Matrix-shaped cones (PSD, hollow) carry their side length ``dim``;
the flat vector length used by the solver is :attr:`ConeSpec.size`.
"""

from dataclasses import dataclass

import numpy as np

from lurecert import matrix_core
from lurecert.errors import InvalidInput

#: cone kinds
PSD = "psd"                  # svec'd positive semidefinite matrices
NONNEG = "nonneg"            # entrywise nonnegative vectors
ZERO_DIAG_Z = "zero_diag_z"  # hollow Z-matrices: zero diagonal, offdiag <= 0
HOLLOW = "hollow"            # hollow matrices: zero diagonal, offdiag free
FREE = "free"                # unconstrained vectors
ZERO = "zero"                # the origin

TOL_DEFAULT = 1e-9


@dataclass(frozen=True)
class ConeSpec:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in (PSD, NONNEG, ZERO_DIAG_Z, HOLLOW, FREE, ZERO):
            raise InvalidInput(f"unknown cone kind {self.kind!r}")
        if self.dim < 1:
            raise InvalidInput("cone dimension must be positive")

    @property
    def size(self):
        """Flat vector length of a member."""
        if self.kind == PSD:
            return matrix_core.svec_dim(self.dim)
        if self.kind in (ZERO_DIAG_Z, HOLLOW):
            return self.dim * self.dim
        return self.dim


def project(cone, point):
    """Euclidean projection of a flat vector onto the cone."""
    point = np.asarray(point, dtype=float)
    if point.shape != (cone.size,):
        raise InvalidInput(f"point of shape {point.shape} does not match cone size {cone.size}")
    if cone.kind == FREE:
        return point.copy()
    if cone.kind == ZERO:
        return np.zeros_like(point)
    if cone.kind == NONNEG:
        return np.maximum(point, 0.0)
    if cone.kind == PSD:
        return matrix_core.svec(matrix_core.project_psd(matrix_core.smat(point, cone.dim)))
    M = point.reshape(cone.dim, cone.dim).copy()
    np.fill_diagonal(M, 0.0)
    if cone.kind == ZERO_DIAG_Z:
        mask = ~np.eye(cone.dim, dtype=bool)
        M[mask] = np.minimum(M[mask], 0.0)
    return M.ravel()


def distance(cone, point):
    """Euclidean distance from the flat vector to the cone."""
    return float(np.linalg.norm(np.asarray(point, dtype=float) - project(cone, point)))


def is_doubly_hyperdominant(M, tol=TOL_DEFAULT):
    """Z-matrix with nonnegative row and column sums, all within ``tol``."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInput("expected a square matrix")
    off = M[~np.eye(M.shape[0], dtype=bool)]
    return bool(
        np.all(off <= tol)
        and np.all(M.sum(axis=1) >= -tol)
        and np.all(M.sum(axis=0) >= -tol)
    )


def _comparison_matrix(M):
    """Keep the diagonal, replace off-diagonals by minus their magnitude."""
    Md = -np.abs(M)
    np.fill_diagonal(Md, np.diag(M))
    return Md


def is_doubly_dominant(M, tol=TOL_DEFAULT):
    """Diagonal dominates absolute off-diagonal mass row- and column-wise."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInput("expected a square matrix")
    Md = _comparison_matrix(M)
    return bool(np.all(Md.sum(axis=1) >= -tol) and np.all(Md.sum(axis=0) >= -tol))


def decompose_dd_vars(M_d, M_od, M_od_bar, tol=TOL_DEFAULT):
    """Check the split-variable conditions that certify double dominance.

    ``M_d`` must be diagonal, ``M_od`` and ``M_od_bar`` hollow. Returns True
    iff, within ``tol``: ``(M_d - M_od_bar) 1 >= 0`` (rows and columns),
    ``M_od_bar - M_od >= 0`` and ``M_od_bar + M_od >= 0`` entrywise. When
    these hold, ``M_d + M_od`` is doubly dominant.
    """
    M_d = np.asarray(M_d, dtype=float)
    M_od = np.asarray(M_od, dtype=float)
    M_od_bar = np.asarray(M_od_bar, dtype=float)
    if np.any(M_d[~np.eye(M_d.shape[0], dtype=bool)] != 0.0):
        raise InvalidInput("M_d must be diagonal")
    for name, X in (("M_od", M_od), ("M_od_bar", M_od_bar)):
        if np.any(np.diag(X) != 0.0):
            raise InvalidInput(f"{name} must have a zero diagonal")
    G = M_d - M_od_bar
    return bool(
        np.all(G.sum(axis=1) >= -tol)
        and np.all(G.sum(axis=0) >= -tol)
        and np.all(M_od_bar - M_od >= -tol)
        and np.all(M_od_bar + M_od >= -tol)
    )
