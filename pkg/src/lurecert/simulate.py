"""Closed-loop simulation of the plant with a piecewise-linear nonlinearity.

The output equation z = C x + D phi(z) is an algebraic loop; with ||D|| < 1
and unit-slope-bounded phi it is a contraction, solved by plain fixed-point
iteration at every integration stage (classical RK4, fixed step).
"""

from dataclasses import dataclass

import numpy as np

from lurecert import backend
from lurecert.errors import InvalidInput, UnsupportedDimension, WellPosednessError

OUTPUT_TOL_DEFAULT = 1e-12
MAX_LOOP_ITER = 10_000
DT_DEFAULT = 1e-3
T_END_DEFAULT = 10.0


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray     # (k, n)
    outputs: np.ndarray    # (k, m)
    inputs: np.ndarray     # (k, m)

    def to_csv(self, path):
        n = self.states.shape[1]
        m = self.outputs.shape[1]
        header = ",".join(
            ["t"]
            + [f"x{i + 1}" for i in range(n)]
            + [f"z{i + 1}" for i in range(m)]
            + [f"w{i + 1}" for i in range(m)]
        )
        data = np.column_stack([self.times, self.states, self.outputs, self.inputs])
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def solve_output(sys, pwl, x, output_tol=OUTPUT_TOL_DEFAULT, z0=None):
    """Solve the algebraic loop at state ``x``; returns (z, w)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.n,):
        raise InvalidInput(f"state of shape {x.shape}, expected ({sys.n},)")
    cx = sys.C @ x
    z0 = cx if z0 is None else np.asarray(z0, dtype=float)
    z, it = backend.fixed_point_output(
        cx, sys.D, pwl.z_bp, pwl.w_bp, z0, output_tol, MAX_LOOP_ITER
    )
    if it < 0:
        raise WellPosednessError(
            "output loop did not converge; contraction preconditions are likely violated"
        )
    return z, np.asarray(pwl(z))


def integrate(sys, pwl, x0, t_end=T_END_DEFAULT, dt=DT_DEFAULT, output_tol=OUTPUT_TOL_DEFAULT):
    """Fixed-step RK4 integration of the closed loop from ``x0``."""
    if dt <= 0:
        raise InvalidInput("dt must be positive")
    nsteps = int(round(t_end / dt))
    xs, zs, ws, ok = backend.rk4_closed_loop(
        sys.A, sys.B, sys.C, sys.D, pwl.z_bp, pwl.w_bp,
        np.asarray(x0, dtype=float), float(dt), nsteps, output_tol, MAX_LOOP_ITER,
    )
    if not ok:
        raise WellPosednessError("output loop failed to converge during integration")
    return Trajectory(
        times=dt * np.arange(nsteps + 1),
        states=np.asarray(xs),
        outputs=np.asarray(zs),
        inputs=np.asarray(ws),
    )


def verify_equilibrium(sys, pwl, x_eq, tol=1e-6, output_tol=OUTPUT_TOL_DEFAULT):
    """Residual ||A x + B phi(z(x))||_inf at a candidate equilibrium.

    Returns ``(residual, is_equilibrium)``.
    """
    z, w = solve_output(sys, pwl, x_eq, output_tol=output_tol)
    residual = float(np.abs(sys.A @ np.asarray(x_eq, dtype=float) + sys.B @ w).max())
    return residual, residual <= tol


def vector_field_grid(sys, pwl, ranges, resolution=21, output_tol=OUTPUT_TOL_DEFAULT):
    """Sample the closed-loop vector field on a planar grid.

    ``ranges`` is ((x1_min, x1_max), (x2_min, x2_max)). Returns an array with
    rows (x1, x2, dx1, dx2). Only defined for two-dimensional state.
    """
    if sys.n != 2:
        raise UnsupportedDimension("vector-field grids are only emitted for planar systems")
    (a0, a1), (b0, b1) = ranges
    g1 = np.linspace(a0, a1, resolution)
    g2 = np.linspace(b0, b1, resolution)
    rows = np.empty((resolution * resolution, 4))
    k = 0
    for x1 in g1:
        for x2 in g2:
            x = np.array([x1, x2])
            _, w = solve_output(sys, pwl, x, output_tol=output_tol)
            dx = sys.A @ x + sys.B @ w
            rows[k] = (x1, x2, dx[0], dx[1])
            k += 1
    return rows


def save_vector_field_csv(path, rows):
    np.savetxt(path, rows, delimiter=",", header="x1,x2,dx1,dx2", comments="", fmt="%.17g")
