"""Pure-NumPy implementations of the numerical hot kernels.

These are the fallback twins of the Cython module ``_kernels_cy``; both expose
the same four functions with identical semantics so that ``backend`` can pick
either at import time.
"""

import numpy as np

__all__ = ["jacobi_eig", "pwl_eval_array", "fixed_point_output", "rk4_closed_loop"]

_JACOBI_TOL = 1e-14
_MAX_SWEEPS = 100


def jacobi_eig(S):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with eigenvalues ``w`` sorted descending and orthonormal
    eigenvectors in the columns of ``V``. Convergence is declared when the
    off-diagonal Frobenius mass drops below ``1e-14 * ||S||_F``.
    """
    A = np.array(S, dtype=float, copy=True)
    d = A.shape[0]
    V = np.eye(d)
    norm = np.linalg.norm(A)
    if norm == 0.0 or d == 1:
        w = np.diag(A).copy()
        order = np.argsort(w)[::-1]
        return w[order], V[:, order]
    tol = _JACOBI_TOL * norm
    for _ in range(_MAX_SWEEPS):
        off = np.sqrt(max(np.sum(A**2) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= tol:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if abs(apq) <= tol / (d * d):
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp = A[:, p].copy()
                rq = A[:, q].copy()
                A[:, p] = c * rp - s * rq
                A[:, q] = s * rp + c * rq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    w = np.diag(A).copy()
    order = np.argsort(w)[::-1]
    return w[order], V[:, order]


def pwl_eval_array(zb, wb, z):
    """Evaluate a piecewise-linear map at the points ``z``.

    ``zb``/``wb`` are the sorted breakpoint abscissas and values; outside the
    breakpoint range the map extends by its boundary values (constant).
    """
    z = np.asarray(z, dtype=float)
    # np.interp already clamps to the end values outside the range.
    return np.interp(z, zb, wb)


def fixed_point_output(cx, D, zb, wb, z0, tol, maxit):
    """Solve the algebraic output loop z = cx + D*phi(z) by fixed-point iteration.

    Returns ``(z, n_iter)``; ``n_iter`` is -1 when the iteration failed to
    reach ``tol`` (possible only when the contraction preconditions fail).
    """
    z = np.array(z0, dtype=float, copy=True)
    for k in range(maxit):
        z_new = cx + D @ np.interp(z, zb, wb)
        err = np.max(np.abs(z_new - z))
        z = z_new
        if err <= tol:
            return z, k + 1
    return z, -1


def rk4_closed_loop(A, B, C, D, zb, wb, x0, dt, nsteps, tol, maxit):
    """Integrate dx/dt = A x + B phi(C x + D phi(...)) with classical RK4.

    The algebraic loop is re-solved at every stage, warm-started from the
    previous stage's output. Returns ``(xs, zs, ws, ok)`` where the sample
    arrays have ``nsteps + 1`` rows and ``ok`` is False iff any loop solve
    failed.
    """
    n = A.shape[0]
    m = C.shape[0]
    xs = np.zeros((nsteps + 1, n))
    zs = np.zeros((nsteps + 1, m))
    ws = np.zeros((nsteps + 1, m))
    x = np.array(x0, dtype=float, copy=True)
    z = C @ x
    ok = True

    def deriv(xk, z_guess):
        nonlocal ok
        zk, it = fixed_point_output(C @ xk, D, zb, wb, z_guess, tol, maxit)
        if it < 0:
            ok = False
        wk = np.interp(zk, zb, wb)
        return A @ xk + B @ wk, zk, wk

    for k in range(nsteps + 1):
        f1, z, w = deriv(x, z)
        xs[k] = x
        zs[k] = z
        ws[k] = w
        if k == nsteps or not ok:
            break
        f2, z2, _ = deriv(x + 0.5 * dt * f1, z)
        f3, z3, _ = deriv(x + 0.5 * dt * f2, z2)
        f4, z4, _ = deriv(x + dt * f3, z3)
        x = x + (dt / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
        z = z4
    return xs, zs, ws, ok
