"""Instability witness extraction and destabilizing nonlinearity construction.

A feasible dual point with a rank-1 semidefinite block factors as
H = [h1; h2][h1; h2]^T. From it we read off the stationary loop signals
z* = C h1 + D h2 and w* = h2, check the slope-consistency inequalities the
dual equalities guarantee, and interpolate a piecewise-linear map through the
(z*_i, w*_i) pairs (mirrored through the origin for the odd variant).
"""

import json
from dataclasses import dataclass

import numpy as np

from lurecert import backend, lmi, matrix_core, sdp
from lurecert.errors import (
    InconsistentWitness,
    InvalidInput,
    NotRankOne,
    SolverInconsistency,
)


@dataclass(frozen=True)
class ExtractionTolerances:
    rank_tol: float = 1e-6          # relative second eigenvalue of H
    slope_tol: float = 1e-8         # slack on the slope-consistency inequalities
    equilibrium_rel_tol: float = 1e-6   # on ||A h1 + B h2|| relative to ||h||
    eq_tol: float = 1e-7            # re-check tolerance on the dual equalities
    cone_tol: float = 1e-7


@dataclass(frozen=True)
class DualWitness:
    """Rank-1 factored dual solution and the loop signals it pins down."""

    H: np.ndarray
    f: np.ndarray
    g: np.ndarray
    X: np.ndarray
    Z: np.ndarray          # None for the DHD class
    h1: np.ndarray
    h2: np.ndarray
    z_star: np.ndarray
    w_star: np.ndarray
    mclass: str
    residuals: dict

    @property
    def n(self):
        return self.h1.size

    @property
    def m(self):
        return self.h2.size


@dataclass(frozen=True)
class PiecewiseLinear:
    """Breakpoint representation of a scalar piecewise-linear map.

    Constant extension beyond the first/last breakpoint. Always passes through
    the origin and keeps every segment slope within [0, 1] (validated).
    """

    z_bp: np.ndarray
    w_bp: np.ndarray
    slope_tol: float = 1e-9

    def __post_init__(self):
        z = np.asarray(self.z_bp, dtype=float)
        w = np.asarray(self.w_bp, dtype=float)
        object.__setattr__(self, "z_bp", z)
        object.__setattr__(self, "w_bp", w)
        if z.size != w.size or z.size < 1:
            raise InvalidInput("breakpoint arrays must be nonempty and aligned")
        if z.size > 1 and np.any(np.diff(z) <= 0):
            raise InvalidInput("breakpoint abscissas must be strictly increasing")
        scale = 1.0 + np.abs(z).max()
        if abs(self(0.0)) > 1e-9 * scale:
            raise InvalidInput("piecewise-linear map must pass through the origin")

    def __call__(self, z):
        return backend.pwl_eval_array(self.z_bp, self.w_bp, z)

    @property
    def left_value(self):
        return float(self.w_bp[0])

    @property
    def right_value(self):
        return float(self.w_bp[-1])

    def slopes(self):
        if self.z_bp.size < 2:
            return np.array([])
        return np.diff(self.w_bp) / np.diff(self.z_bp)

    def is_odd(self, tol=1e-12):
        zs = np.concatenate([self.z_bp, -self.z_bp])
        return bool(np.max(np.abs(self(zs) + self(-zs))) <= tol * (1.0 + np.abs(self.w_bp).max()))


def eval_pwl(pwl, z):
    """Evaluate the map at ``z`` (scalar or array)."""
    return pwl(z)


def extract(report, sys, mclass, tols=ExtractionTolerances()):
    """Turn a feasible dual solve report into a certified DualWitness.

    Raises
    ------
    SolverInconsistency
        If the reported point fails re-checking against the dual constraints.
    NotRankOne
        If the semidefinite block is not rank one within ``tols.rank_tol``.
    InconsistentWitness
        If a slope-consistency inequality is violated beyond tolerance.
    """
    lmi._check_class(mclass)
    if report.status != sdp.FEASIBLE or report.point is None:
        raise InvalidInput("witness extraction needs a feasible dual report")
    problem = lmi.build_dual(sys, mclass)
    ok, eq_res, cone_dist = sdp.verify_point(problem, report.point, tols.eq_tol, tols.cone_tol)
    if not ok:
        raise SolverInconsistency(
            f"dual point failed re-checking: equality {eq_res:.3e}, cone {cone_dist:.3e}"
        )
    n, m = sys.n, sys.m
    H = matrix_core.smat(report.point["H"], n + m)
    eig = matrix_core.sym_eig(H)
    h = matrix_core.rank_one_factor(H, rank_tol=tols.rank_tol)
    if h is None:
        ratio = abs(eig.eigenvalues[1]) / eig.eigenvalues[0]
        raise NotRankOne(
            f"dual solution is not rank one: eigenvalue ratio {ratio:.3e}", ratio=ratio
        )
    h1, h2 = h[:n], h[n:]
    hnorm = np.linalg.norm(h)
    z_star = sys.C @ h1 + sys.D @ h2
    w_star = h2.copy()

    eq_dir = np.abs(sys.A @ h1 + sys.B @ h2).max()
    if eq_dir > tols.equilibrium_rel_tol * hnorm:
        raise InconsistentWitness(
            f"A h1 + B h2 residual {eq_dir:.3e} exceeds {tols.equilibrium_rel_tol:.0e} * ||h||"
        )
    _check_slope_consistency(z_star, w_star, mclass, tols.slope_tol * (1.0 + hnorm) ** 2)

    X = report.point["X"].reshape(m, m)
    Z = report.point["Z"].reshape(m, m) if mclass == lmi.DD else None
    return DualWitness(
        H=H,
        f=report.point["f"].copy(),
        g=report.point["g"].copy(),
        X=X,
        Z=Z,
        h1=h1,
        h2=h2,
        z_star=z_star,
        w_star=w_star,
        mclass=mclass,
        residuals={
            "dual_equality": eq_res,
            "dual_cone": cone_dist,
            "rank_ratio": float(abs(eig.eigenvalues[1]) / eig.eigenvalues[0]),
            "equilibrium": float(eq_dir),
        },
    )


def _check_slope_consistency(z, w, mclass, tol):
    """The inequalities that make a slope-[0, 1] interpolant exist."""
    m = z.size
    bad = []
    for i in range(m):
        if w[i] * (z[i] - w[i]) < -tol:
            bad.append(f"channel {i}: w(z - w) = {w[i] * (z[i] - w[i]):.3e}")
        for j in range(i + 1, m):
            dv = (w[i] - w[j]) * ((z[i] - z[j]) - (w[i] - w[j]))
            if dv < -tol:
                bad.append(f"pair ({i},{j}): difference form {dv:.3e}")
            if mclass == lmi.DD:
                sv = (w[i] + w[j]) * ((z[i] + z[j]) - (w[i] + w[j]))
                if sv < -tol:
                    bad.append(f"pair ({i},{j}): mirrored form {sv:.3e}")
    if bad:
        raise InconsistentWitness("slope consistency violated: " + "; ".join(bad))


def build_pwl(witness, odd=False):
    """Construct the destabilizing piecewise-linear map from a witness.

    Anchors the map at the origin and at every (z*_i, w*_i); the odd variant
    additionally anchors the mirrored pairs (-z*_i, -w*_i). Near-duplicate
    abscissas are merged; a merge with conflicting ordinates means the witness
    never satisfied its guarantees and raises InconsistentWitness.
    """
    if odd and witness.mclass != lmi.DD:
        raise InvalidInput("the odd construction needs a doubly-dominant-class witness")
    zs = np.concatenate([[0.0], witness.z_star])
    ws = np.concatenate([[0.0], witness.w_star])
    if odd:
        zs = np.concatenate([zs, -witness.z_star])
        ws = np.concatenate([ws, -witness.w_star])
    order = np.argsort(zs)
    zs, ws = zs[order], ws[order]
    merge_tol = 1e-9 * (1.0 + np.abs(zs).max())
    z_out, w_out = [zs[0]], [ws[0]]
    for zk, wk in zip(zs[1:], ws[1:]):
        if zk - z_out[-1] <= merge_tol:
            if abs(wk - w_out[-1]) > merge_tol:
                raise InconsistentWitness(
                    f"duplicate breakpoint z = {zk:.6g} with conflicting values "
                    f"{w_out[-1]:.6g} vs {wk:.6g}"
                )
            continue
        z_out.append(zk)
        w_out.append(wk)
    return PiecewiseLinear(z_bp=np.array(z_out), w_bp=np.array(w_out))


def verify_slope(pwl, band=None, samples=1000, seed=42, tol=1e-9):
    """Check every segment slope and a randomized set of secants against [0, 1].

    The breakpoint check is exact for piecewise-linear maps; the sampled
    secants are belt-and-braces.
    """
    if band is not None and not band.is_unit:
        raise InvalidInput("slope verification is defined for the band [0, 1]")
    s = pwl.slopes()
    if s.size and (s.min() < -tol or s.max() > 1.0 + tol):
        return False
    rng = np.random.default_rng(seed)
    lo = pwl.z_bp[0] - 1.0
    hi = pwl.z_bp[-1] + 1.0
    p = rng.uniform(lo, hi, size=samples)
    q = rng.uniform(lo, hi, size=samples)
    keep = np.abs(p - q) > 1e-9
    sec = (pwl(p[keep]) - pwl(q[keep])) / (p[keep] - q[keep])
    return bool(sec.size == 0 or (sec.min() >= -tol and sec.max() <= 1.0 + tol))


def to_json_dict(witness, pwl=None):
    """Serializable view of a witness (plus optional constructed map)."""
    out = {
        "class": witness.mclass,
        "h1": witness.h1.tolist(),
        "h2": witness.h2.tolist(),
        "z_star": witness.z_star.tolist(),
        "w_star": witness.w_star.tolist(),
        "residuals": {k: float(v) for k, v in witness.residuals.items()},
    }
    if pwl is not None:
        out["breakpoints"] = [[float(z), float(w)] for z, w in zip(pwl.z_bp, pwl.w_bp)]
    return out


def save_json(path, witness, pwl=None):
    with open(path, "w") as fh:
        json.dump(to_json_dict(witness, pwl), fh, indent=2)


def pwl_from_json(data):
    """Rebuild the piecewise-linear map from a serialized witness dict."""
    if "breakpoints" in data:
        bp = np.asarray(data["breakpoints"], dtype=float)
        return PiecewiseLinear(z_bp=bp[:, 0], w_bp=bp[:, 1])
    raise InvalidInput("witness data carries no breakpoints")


def load_pwl(path):
    with open(path) as fh:
        return pwl_from_json(json.load(fh))
