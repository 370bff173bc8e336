"""Assembly of the stability LMIs and their duals as conic feasibility problems.

Two multiplier classes are supported: ``DHD`` (doubly hyperdominant, for
slope-restricted nonlinearities) and ``DD`` (doubly dominant, valid only when
the nonlinearity is additionally odd). Primal problems accept a general slope
band [mu, nu] with mu <= 0 <= nu; the duals are built only for the band
[0, 1], where the positive-definiteness requirement on the Lyapunov variable
becomes automatic and the plant's direct feedthrough must be a contraction.
"""

import logging
from dataclasses import dataclass

import numpy as np

from lurecert import cones, matrix_core
from lurecert.cones import ConeSpec
from lurecert.errors import InvalidInput, UnsupportedBand
from lurecert.sdp import ConicFeasibilityProblem

log = logging.getLogger("lurecert.lmi")

DHD = "dhd"
DD = "dd"


@dataclass(frozen=True)
class StateSpace:
    """The LTI plant x' = A x + B w, z = C x + D w.

    Construction validates the two standing assumptions: A is Hurwitz and the
    feedthrough D is a strict contraction (spectral norm < 1).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A, B, C, D = (np.asarray(M, dtype=float) for M in (self.A, self.B, self.C, self.D))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        n = A.shape[0]
        if A.shape != (n, n):
            raise InvalidInput("A must be square")
        m = B.shape[1]
        if B.shape != (n, m) or C.shape != (m, n) or D.shape != (m, m):
            raise InvalidInput(
                f"inconsistent dimensions: A{A.shape} B{B.shape} C{C.shape} D{D.shape}"
            )
        if not all(np.all(np.isfinite(M)) for M in (A, B, C, D)):
            raise InvalidInput("state-space data must be finite")
        spectral_abscissa = np.max(np.linalg.eigvals(A).real)
        if spectral_abscissa >= 0:
            raise InvalidInput(f"A is not Hurwitz (spectral abscissa {spectral_abscissa:.3e})")
        dnorm = np.linalg.norm(D, 2)
        if dnorm >= 1:
            # The contraction bound backs the well-posedness argument, but it is
            # not always satisfied in practice; warn and let the loop solver's
            # own convergence checks be the arbiter.
            log.warning(
                "feedthrough is not a contraction (||D|| = %.4f >= 1); "
                "well-posedness of the algebraic loop is not guaranteed", dnorm
            )

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in "ABCD"}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(*(np.array(data[k], dtype=float) for k in "ABCD"))
        except KeyError as exc:
            raise InvalidInput(f"missing matrix {exc.args[0]!r} in system data") from exc


@dataclass(frozen=True)
class SlopeBand:
    mu: float = 0.0
    nu: float = 1.0

    def __post_init__(self):
        if not (self.mu <= 0.0 <= self.nu):
            raise InvalidInput(f"slope band must satisfy mu <= 0 <= nu, got [{self.mu}, {self.nu}]")

    @property
    def is_unit(self):
        return self.mu == 0.0 and self.nu == 1.0


def _check_class(mclass):
    if mclass not in (DHD, DD):
        raise InvalidInput(f"multiplier class must be {DHD!r} or {DD!r}, got {mclass!r}")


def ozf_multiplier(M, band=SlopeBand()):
    """Quadratic-form multiplier of a slope-restriction matrix M.

    Returns the symmetric 2m x 2m matrix T^T N T with N = [[0, M], [M^T, 0]]
    and T = [[nu I, -I], [-mu I, I]]. For the unit band this reduces to
    [[0, M], [M^T, -M - M^T]].
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInput("M must be square")
    m = M.shape[0]
    I = np.eye(m)
    N = np.block([[np.zeros((m, m)), M], [M.T, np.zeros((m, m))]])
    T = np.block([[band.nu * I, -I], [-band.mu * I, I]])
    return matrix_core.symmetrize(T.T @ N @ T)


def iqc_lhs(sys, P, Pi):
    """Left-hand side of the stability LMI for Lyapunov variable P and multiplier Pi."""
    n, m = sys.n, sys.m
    P = np.asarray(P, dtype=float)
    Pi = np.asarray(Pi, dtype=float)
    if P.shape != (n, n) or Pi.shape != (2 * m, 2 * m):
        raise InvalidInput("dimension mismatch in iqc_lhs")
    lyap = np.block([
        [sys.A.T @ P + P @ sys.A, P @ sys.B],
        [sys.B.T @ P, np.zeros((m, m))],
    ])
    V = np.block([[sys.C, sys.D], [np.zeros((m, n)), np.eye(m)]])
    return matrix_core.symmetrize(lyap + V.T @ Pi @ V)


def dual_output_map(sys, H):
    """The m x m map Y(H) = H12^T C^T + H22 (D^T - I) of the dual equalities.

    Fixed for the unit band; validated by the Lagrangian trace identity
    trace(iqc_lhs(P, Pi(M)) H) = trace(P He{A H11 + B H12^T}) + 2 trace(M Y(H))
    and by its rank-1 specialization w*(z* - w*)^T.
    """
    n, m = sys.n, sys.m
    H = np.asarray(H, dtype=float)
    H12 = H[:n, n:]
    H22 = H[n:, n:]
    return H12.T @ sys.C.T + H22 @ (sys.D.T - np.eye(m))


def strictness_margin(sys):
    """Default epsilon for turning the strict LMI into a closed constraint."""
    return 1e-6 * (1.0 + np.linalg.norm(sys.A) + np.linalg.norm(sys.C) ** 2)


def _problem_from_affine(blocks, constraint_fn, normalization=None):
    """Build the dense equality system by probing an affine constraint map."""
    blocks = tuple(blocks)
    total = sum(spec.size for _, spec in blocks)
    c0 = constraint_fn(np.zeros(total))
    E = np.empty((c0.size, total))
    e = np.zeros(total)
    for j in range(total):
        e[j] = 1.0
        E[:, j] = constraint_fn(e) - c0
        e[j] = 0.0
    return ConicFeasibilityProblem(
        blocks=blocks, eq_matrix=E, rhs=-c0, normalization=normalization
    )


def _hollow(v, m):
    X = np.asarray(v).reshape(m, m).copy()
    np.fill_diagonal(X, 0.0)
    return X


def build_primal(sys, band=SlopeBand(), mclass=DHD, eps=None):
    """Assemble the primal (stability-certificate) feasibility problem.

    The strict matrix inequality is closed as "<= -eps I" via an explicit PSD
    slack S: iqc_lhs + eps I + S = 0. For the unit band the Lyapunov variable
    stays a free symmetric matrix; for other bands it is constrained PSD.
    """
    _check_class(mclass)
    n, m = sys.n, sys.m
    if eps is None:
        eps = strictness_margin(sys)
    p_kind = cones.FREE if band.is_unit else cones.PSD
    nP = matrix_core.svec_dim(n)
    nL = matrix_core.svec_dim(n + m)
    epsI = eps * np.eye(n + m)

    if mclass == DHD:
        blocks = [
            ("P", ConeSpec(p_kind, nP if p_kind == cones.FREE else n)),
            ("M_diag", ConeSpec(cones.FREE, m)),
            ("M_off", ConeSpec(cones.ZERO_DIAG_Z, m)),
            ("S", ConeSpec(cones.PSD, n + m)),
            ("row_sums", ConeSpec(cones.NONNEG, m)),
            ("col_sums", ConeSpec(cones.NONNEG, m)),
        ]
        problem_blocks = tuple(blocks)

        def constraint_fn(y):
            v = _unpack_by(problem_blocks, y)
            P = matrix_core.smat(v["P"], n)
            M = np.diag(v["M_diag"]) + _hollow(v["M_off"], m)
            S = matrix_core.smat(v["S"], n + m)
            L = iqc_lhs(sys, P, ozf_multiplier(M, band)) + epsI + S
            one = np.ones(m)
            return np.concatenate([
                matrix_core.svec(L),
                M @ one - v["row_sums"],
                M.T @ one - v["col_sums"],
            ])

        return _problem_from_affine(problem_blocks, constraint_fn)

    blocks = [
        ("P", ConeSpec(p_kind, nP if p_kind == cones.FREE else n)),
        ("M_d", ConeSpec(cones.FREE, m)),
        ("M_od", ConeSpec(cones.HOLLOW, m)),
        ("M_od_bar", ConeSpec(cones.HOLLOW, m)),
        ("S", ConeSpec(cones.PSD, n + m)),
        ("row_sums", ConeSpec(cones.NONNEG, m)),
        ("col_sums", ConeSpec(cones.NONNEG, m)),
        ("upper_gap", ConeSpec(cones.NONNEG, m * m)),
        ("lower_gap", ConeSpec(cones.NONNEG, m * m)),
    ]
    problem_blocks = tuple(blocks)

    def constraint_fn(y):
        v = _unpack_by(problem_blocks, y)
        P = matrix_core.smat(v["P"], n)
        M_d = np.diag(v["M_d"])
        M_od = _hollow(v["M_od"], m)
        M_od_bar = _hollow(v["M_od_bar"], m)
        S = matrix_core.smat(v["S"], n + m)
        L = iqc_lhs(sys, P, ozf_multiplier(M_d + M_od, band)) + epsI + S
        one = np.ones(m)
        G = M_d - M_od_bar
        return np.concatenate([
            matrix_core.svec(L),
            G @ one - v["row_sums"],
            G.T @ one - v["col_sums"],
            (M_od_bar - M_od).ravel() - v["upper_gap"],
            (M_od_bar + M_od).ravel() - v["lower_gap"],
        ])

    return _problem_from_affine(problem_blocks, constraint_fn)


def build_dual(sys, mclass=DHD, band=SlopeBand()):
    """Assemble the dual (instability-side) feasibility problem.

    Only the unit slope band is supported; the derivation replacing the
    semidefinite constraint He{A H11 + B H12^T} >= 0 by an equality relies on
    it, as does the contraction assumption ||D|| < 1.
    """
    _check_class(mclass)
    if not band.is_unit:
        raise UnsupportedBand("the dual problem is only built for the band [0, 1]")
    n, m = sys.n, sys.m
    one = np.ones(m)
    off_mask = ~np.eye(m, dtype=bool)

    if mclass == DHD:
        blocks = (
            ("H", ConeSpec(cones.PSD, n + m)),
            ("f", ConeSpec(cones.NONNEG, m)),
            ("g", ConeSpec(cones.NONNEG, m)),
            ("X", ConeSpec(cones.ZERO_DIAG_Z, m)),
        )

        def constraint_fn(y):
            v = _unpack_by(blocks, y)
            H = matrix_core.smat(v["H"], n + m)
            H11, H12 = H[:n, :n], H[:n, n:]
            he = sys.A @ H11 + sys.B @ H12.T
            he = he + he.T
            Y = dual_output_map(sys, H)
            X = _hollow(v["X"], m)
            E2 = Y - np.outer(one, v["f"]) - np.outer(v["g"], one) - X
            return np.concatenate([matrix_core.svec(he), E2.ravel()])

        def norm_fn(y):
            v = _unpack_by(blocks, y)
            H = matrix_core.smat(v["H"], n + m)
            return np.trace(H) + v["f"].sum() + v["g"].sum() - _hollow(v["X"], m)[off_mask].sum()

    else:
        blocks = (
            ("H", ConeSpec(cones.PSD, n + m)),
            ("f", ConeSpec(cones.NONNEG, m)),
            ("g", ConeSpec(cones.NONNEG, m)),
            ("X", ConeSpec(cones.ZERO_DIAG_Z, m)),
            ("Z", ConeSpec(cones.ZERO_DIAG_Z, m)),
        )

        def constraint_fn(y):
            v = _unpack_by(blocks, y)
            H = matrix_core.smat(v["H"], n + m)
            H11, H12 = H[:n, :n], H[:n, n:]
            he = sys.A @ H11 + sys.B @ H12.T
            he = he + he.T
            Y = dual_output_map(sys, H)
            X = _hollow(v["X"], m)
            Z = _hollow(v["Z"], m)
            fg = np.outer(one, v["f"]) + np.outer(v["g"], one)
            diag_eq = np.diag(Y) - np.diag(fg)
            od1 = _hollow(Y - X + Z, m)
            od2 = _hollow(X + Z + fg, m)
            return np.concatenate([
                matrix_core.svec(he), diag_eq, od1[off_mask], od2[off_mask],
            ])

        def norm_fn(y):
            v = _unpack_by(blocks, y)
            H = matrix_core.smat(v["H"], n + m)
            return (
                np.trace(H) + v["f"].sum() + v["g"].sum()
                - _hollow(v["X"], m)[off_mask].sum() - _hollow(v["Z"], m)[off_mask].sum()
            )

    total = sum(spec.size for _, spec in blocks)
    row = np.empty(total)
    e = np.zeros(total)
    base = norm_fn(e)
    for j in range(total):
        e[j] = 1.0
        row[j] = norm_fn(e) - base
        e[j] = 0.0
    return _problem_from_affine(blocks, constraint_fn, normalization=(row, 1.0))


def _unpack_by(blocks, y):
    out = {}
    k = 0
    for name, spec in blocks:
        out[name] = y[k:k + spec.size]
        k += spec.size
    return out


def primal_multiplier(problem_point, mclass, m):
    """Recover the multiplier matrix M from a primal solution point."""
    _check_class(mclass)
    if mclass == DHD:
        return np.diag(problem_point["M_diag"]) + _hollow(problem_point["M_off"], m)
    return np.diag(problem_point["M_d"]) + _hollow(problem_point["M_od"], m)
