"""Conic feasibility solving.

All four constraint systems share one shape after vectorization: find y with
``E y = rhs``, y in a product of cones, plus an affine normalization fixing
the scale of homogeneous systems. This module solves that shape with relaxed
Douglas-Rachford splitting (averaged alternating projections) between the
affine subspace and the cone product.

Feasibility of the returned point is always re-established from scratch;
infeasibility is never declared by a lone solve, only through the
alternative-pair protocol (:func:`solve_alternative_pair`).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from lurecert import cones, matrix_core
from lurecert.errors import InvalidInput, ToleranceConflict

log = logging.getLogger("lurecert.sdp")

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class ConicFeasibilityProblem:
    """Equality system plus product-of-cones membership.

    blocks        ordered (name, ConeSpec) pairs; names unique
    eq_matrix     dense operator on the concatenated flat blocks, shape (q, N)
    rhs           right-hand side, shape (q,)
    normalization optional (row, value) affine slice for homogeneous systems
    """

    blocks: tuple
    eq_matrix: np.ndarray
    rhs: np.ndarray
    normalization: tuple = None

    def __post_init__(self):
        names = [name for name, _ in self.blocks]
        if len(set(names)) != len(names):
            raise InvalidInput("duplicate block names")
        if self.eq_matrix.shape != (self.rhs.size, self.size):
            raise InvalidInput(
                f"equality map shape {self.eq_matrix.shape} does not match "
                f"{self.rhs.size} rows x {self.size} variables"
            )

    @property
    def size(self):
        return sum(spec.size for _, spec in self.blocks)

    def offsets(self):
        out = {}
        k = 0
        for name, spec in self.blocks:
            out[name] = (k, k + spec.size)
            k += spec.size
        return out

    def unpack(self, y):
        off = self.offsets()
        return {name: np.asarray(y)[off[name][0]:off[name][1]].copy() for name, _ in self.blocks}

    def pack(self, values):
        return np.concatenate([np.asarray(values[name], dtype=float).ravel() for name, _ in self.blocks])

    def project_cones(self, y):
        out = np.empty_like(y)
        k = 0
        for _, spec in self.blocks:
            out[k:k + spec.size] = cones.project(spec, y[k:k + spec.size])
            k += spec.size
        return out

    def cone_distance(self, y):
        return float(np.linalg.norm(y - self.project_cones(y)))

    def equality_residual(self, y):
        r = np.abs(self.eq_matrix @ y - self.rhs).max() if self.rhs.size else 0.0
        if self.normalization is not None:
            row, val = self.normalization
            r = max(r, abs(float(row @ y) - val))
        return float(r)


@dataclass(frozen=True)
class SolverConfig:
    eq_tol: float = 1e-8
    cone_tol: float = 1e-8
    max_iter: int = 200_000
    relaxation: float = 1.8
    check_every: int = 100
    stall_checks: int = 60          # consecutive checks without improvement before giving up
    stall_factor: float = 0.98
    seed: int = 42
    rank_one_block: str = None      # PSD block to bias toward rank one after phase 1
    polish_iter: int = 50_000
    track_residuals: bool = False


@dataclass
class SolveReport:
    status: str
    point: dict = None
    residuals: tuple = (np.inf, np.inf)   # (equality inf-norm, cone distance)
    iterations: int = 0
    certificate_note: str = ""
    step_norms: np.ndarray = field(default=None, repr=False)


def verify_point(problem, point, eq_tol, cone_tol):
    """Re-check a block-valued point against the raw constraints.

    Returns ``(ok, eq_residual, cone_distance)`` computed from scratch,
    independent of any solver state.
    """
    y = problem.pack(point)
    eq_res = problem.equality_residual(y)
    cone_dist = problem.cone_distance(y)
    return eq_res <= eq_tol and cone_dist <= cone_tol, eq_res, cone_dist


def _affine_projector(problem):
    rows = [problem.eq_matrix]
    rhs = [problem.rhs]
    if problem.normalization is not None:
        row, val = problem.normalization
        rows.append(row[None, :])
        rhs.append(np.array([val]))
    E = np.vstack(rows)
    b = np.concatenate(rhs)
    if E.shape[0] == 0:
        raise InvalidInput("problem has no equality constraints")
    Ep = np.linalg.pinv(E)

    def proj(y):
        return y - Ep @ (E @ y - b)

    return proj, E, b


def _rank_one_psd_project(spec, v):
    """Project an svec'd matrix onto the rank<=1 PSD cone (top eigenpair)."""
    eig = matrix_core.sym_eig(matrix_core.smat(v, spec.dim))
    lam = max(eig.eigenvalues[0], 0.0)
    u = eig.eigenvectors[:, 0]
    return matrix_core.svec(lam * np.outer(u, u))


def _iterate(problem, proj_affine, cone_project, y0, cfg, max_iter):
    """Relaxed Douglas-Rachford loop. Returns (point_or_None, y, iters, norms)."""
    y = y0.copy()
    rho = cfg.relaxation
    best = np.inf
    since_best = 0
    norms = [] if cfg.track_residuals else None
    it = 0
    while it < max_iter:
        pa = proj_affine(y)
        pc = cone_project(2.0 * pa - y)
        step = pc - pa
        y += rho * step
        it += 1
        if norms is not None:
            norms.append(np.linalg.norm(step))
        if it % cfg.check_every == 0 or it == max_iter:
            eq_res = problem.equality_residual(pc)
            cone_dist = float(np.linalg.norm(pa - cone_project(pa)))
            score = min(eq_res, cone_dist)
            if eq_res <= cfg.eq_tol:
                return pc, y, it, norms
            if cone_dist <= cfg.cone_tol and problem.equality_residual(pa) <= cfg.eq_tol:
                return pa, y, it, norms
            if score < cfg.stall_factor * best:
                best = score
                since_best = 0
            else:
                since_best += 1
                if since_best >= cfg.stall_checks:
                    log.info("stalled after %d iterations (best residual %.3e)", it, best)
                    break
    return None, y, it, norms


def solve(problem, cfg=SolverConfig()):
    """Search for a point of the conic feasibility problem.

    Returns a :class:`SolveReport` whose status is ``feasible`` (point passed
    independent re-checking) or ``undetermined``; ``infeasible`` is only ever
    assigned by :func:`solve_alternative_pair`.
    """
    if not isinstance(problem, ConicFeasibilityProblem):
        raise InvalidInput("expected a ConicFeasibilityProblem")
    proj_affine, _, _ = _affine_projector(problem)
    rng = np.random.default_rng(cfg.seed)
    y0 = 1e-3 * rng.standard_normal(problem.size)

    sol, y_end, iters, norms = _iterate(
        problem, proj_affine, problem.project_cones, y0, cfg, cfg.max_iter
    )
    note = ""
    if sol is not None and cfg.rank_one_block is not None:
        polished, extra, note = _rank_one_polish(problem, proj_affine, y_end, cfg)
        iters += extra
        if polished is not None:
            sol = polished
    if sol is None:
        return SolveReport(
            status=UNDETERMINED,
            iterations=iters,
            certificate_note="no feasible point found within the iteration budget",
            step_norms=np.asarray(norms) if norms is not None else None,
        )
    point = problem.unpack(sol)
    ok, eq_res, cone_dist = verify_point(problem, point, cfg.eq_tol, cfg.cone_tol)
    if not ok:
        return SolveReport(
            status=UNDETERMINED,
            iterations=iters,
            residuals=(eq_res, cone_dist),
            certificate_note="candidate failed independent re-checking",
        )
    return SolveReport(
        status=FEASIBLE,
        point=point,
        residuals=(eq_res, cone_dist),
        iterations=iters,
        certificate_note=("feasible point found" + (f"; {note}" if note else "")),
        step_norms=np.asarray(norms) if norms is not None else None,
    )


def _rank_one_polish(problem, proj_affine, y_warm, cfg):
    """Second phase biasing one PSD block toward rank one.

    The convex solve can land anywhere in a fat feasible set; re-running the
    same splitting with the flagged block projected onto the (nonconvex)
    rank<=1 PSD cone, warm-started from the convex solution, steers toward an
    extreme ray. The polished point is only accepted after passing the usual
    feasibility re-check, so the nonconvexity cannot produce a false positive.
    """
    names = {name: spec for name, spec in problem.blocks}
    if cfg.rank_one_block not in names:
        raise InvalidInput(f"unknown block {cfg.rank_one_block!r}")
    spec1 = names[cfg.rank_one_block]
    if spec1.kind != cones.PSD:
        raise InvalidInput("rank-one bias requires a PSD block")
    lo, hi = problem.offsets()[cfg.rank_one_block]

    def cone_project_r1(y):
        out = problem.project_cones(y)
        out[lo:hi] = _rank_one_psd_project(spec1, y[lo:hi])
        return out

    sol, _, iters, _ = _iterate(problem, proj_affine, cone_project_r1, y_warm, cfg, cfg.polish_iter)
    if sol is None:
        return None, iters, "rank-one polish did not converge; convex point kept"
    eq_res = problem.equality_residual(sol)
    if eq_res > cfg.eq_tol or problem.cone_distance(sol) > cfg.cone_tol:
        return None, iters, "rank-one polish rejected by re-check; convex point kept"
    return sol, iters, "rank-one polish applied"


def solve_alternative_pair(primal, dual, cfg=SolverConfig(), dual_cfg=None):
    """Solve a primal/dual alternative pair.

    Exactly one side can be feasible; a side is marked infeasible only when
    the other side produced a verified feasible point.
    """
    for p in (primal, dual):
        if p.eq_matrix.shape[0] == 0 and p.normalization is None:
            raise InvalidInput("degenerate problem with no constraints")
    primal_report = solve(primal, cfg)
    dual_report = solve(dual, dual_cfg if dual_cfg is not None else cfg)
    if primal_report.status == FEASIBLE and dual_report.status == FEASIBLE:
        raise ToleranceConflict(
            "both sides of the alternative pair are feasible at the stated tolerances"
        )
    if primal_report.status == FEASIBLE:
        dual_report.status = INFEASIBLE
        dual_report.certificate_note = "infeasible: the paired primal problem is feasible"
    elif dual_report.status == FEASIBLE:
        primal_report.status = INFEASIBLE
        primal_report.certificate_note = "infeasible: the paired dual problem is feasible"
    return primal_report, dual_report
