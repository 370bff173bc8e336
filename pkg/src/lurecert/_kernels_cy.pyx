# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementations of the numerical hot kernels.

Mirrors the pure-NumPy twin ``_kernels_py``; same functions, same semantics.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

__all__ = ["jacobi_eig", "pwl_eval_array", "fixed_point_output", "rk4_closed_loop"]

cdef double _JACOBI_TOL = 1e-14
cdef int _MAX_SWEEPS = 100


def jacobi_eig(S):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.array(S, dtype=np.float64, copy=True, order="C")
    cdef Py_ssize_t d = A.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V = np.eye(d)
    cdef double norm = 0.0, off, apq, theta, t, c, s, tmp1, tmp2, tol, small
    cdef Py_ssize_t p, q, i, sweep

    for i in range(d):
        for p in range(d):
            norm += A[i, p] * A[i, p]
    norm = sqrt(norm)
    if norm == 0.0 or d == 1:
        w = np.diag(A).copy()
        order = np.argsort(w)[::-1]
        return w[order], V[:, order]
    tol = _JACOBI_TOL * norm
    small = tol / (d * d)
    for sweep in range(_MAX_SWEEPS):
        off = 0.0
        for p in range(d):
            for q in range(d):
                if p != q:
                    off += A[p, q] * A[p, q]
        if sqrt(off) <= tol:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if fabs(apq) <= small:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for i in range(d):
                    tmp1 = A[i, p]
                    tmp2 = A[i, q]
                    A[i, p] = c * tmp1 - s * tmp2
                    A[i, q] = s * tmp1 + c * tmp2
                for i in range(d):
                    tmp1 = A[p, i]
                    tmp2 = A[q, i]
                    A[p, i] = c * tmp1 - s * tmp2
                    A[q, i] = s * tmp1 + c * tmp2
                for i in range(d):
                    tmp1 = V[i, p]
                    tmp2 = V[i, q]
                    V[i, p] = c * tmp1 - s * tmp2
                    V[i, q] = s * tmp1 + c * tmp2
    w = np.diag(A).copy()
    order = np.argsort(w)[::-1]
    return w[order], V[:, order]


cdef double _pwl_scalar(double[::1] zb, double[::1] wb, double z) nogil:
    cdef Py_ssize_t l = zb.shape[0]
    cdef Py_ssize_t lo, hi, mid
    if z <= zb[0]:
        return wb[0]
    if z >= zb[l - 1]:
        return wb[l - 1]
    lo = 0
    hi = l - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if zb[mid] <= z:
            lo = mid
        else:
            hi = mid
    return wb[lo] + (wb[hi] - wb[lo]) * (z - zb[lo]) / (zb[hi] - zb[lo])


def pwl_eval_array(zb, wb, z):
    """Evaluate a piecewise-linear map at the points ``z`` (constant outside)."""
    cdef double[::1] zbv = np.ascontiguousarray(zb, dtype=np.float64)
    cdef double[::1] wbv = np.ascontiguousarray(wb, dtype=np.float64)
    cdef cnp.ndarray zarr = np.atleast_1d(np.asarray(z, dtype=np.float64))
    cdef double[::1] zv = np.ascontiguousarray(zarr.ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(zv.shape[0])
    cdef Py_ssize_t i
    for i in range(zv.shape[0]):
        out[i] = _pwl_scalar(zbv, wbv, zv[i])
    if np.isscalar(z) or np.asarray(z).ndim == 0:
        return out[0]
    return out.reshape(np.asarray(z).shape)


cdef int _fixed_point(double[::1] cx, double[:, ::1] D, double[::1] zb,
                      double[::1] wb, double[::1] z, double[::1] wrk,
                      double tol, int maxit) nogil:
    """In-place loop solve; returns iteration count, -1 on failure."""
    cdef Py_ssize_t m = cx.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double err, acc, diff
    for k in range(maxit):
        for i in range(m):
            wrk[i] = _pwl_scalar(zb, wb, z[i])
        err = 0.0
        for i in range(m):
            acc = cx[i]
            for j in range(m):
                acc += D[i, j] * wrk[j]
            diff = fabs(acc - z[i])
            if diff > err:
                err = diff
            z[i] = acc
        if err <= tol:
            return k + 1
    return -1


def fixed_point_output(cx, D, zb, wb, z0, tol, maxit):
    """Solve the algebraic output loop z = cx + D*phi(z) by fixed-point iteration."""
    cdef double[::1] cxv = np.ascontiguousarray(cx, dtype=np.float64)
    cdef double[:, ::1] Dv = np.ascontiguousarray(D, dtype=np.float64)
    cdef double[::1] zbv = np.ascontiguousarray(zb, dtype=np.float64)
    cdef double[::1] wbv = np.ascontiguousarray(wb, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z = np.array(z0, dtype=np.float64, copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wrk = np.empty_like(z)
    cdef int it = _fixed_point(cxv, Dv, zbv, wbv, z, wrk, tol, maxit)
    return z, it


def rk4_closed_loop(A, B, C, D, zb, wb, x0, dt_, nsteps_, tol_, maxit_):
    """Closed-loop RK4 integration with per-stage algebraic loop solves."""
    cdef double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[:, ::1] Bv = np.ascontiguousarray(B, dtype=np.float64)
    cdef double[:, ::1] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef double[:, ::1] Dv = np.ascontiguousarray(D, dtype=np.float64)
    cdef double[::1] zbv = np.ascontiguousarray(zb, dtype=np.float64)
    cdef double[::1] wbv = np.ascontiguousarray(wb, dtype=np.float64)
    cdef double dt = dt_, tol = tol_
    cdef int nsteps = nsteps_, maxit = maxit_
    cdef Py_ssize_t n = Av.shape[0]
    cdef Py_ssize_t m = Cv.shape[0]

    cdef cnp.ndarray[cnp.float64_t, ndim=2] xs = np.zeros((nsteps + 1, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] zs = np.zeros((nsteps + 1, m))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ws = np.zeros((nsteps + 1, m))

    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.array(x0, dtype=np.float64, copy=True)
    cdef double[::1] xv = x
    cdef double[::1] z = np.zeros(m)
    cdef double[::1] w = np.zeros(m)
    cdef double[::1] cx = np.zeros(m)
    cdef double[::1] wrk = np.zeros(m)
    cdef double[::1] xstage = np.zeros(n)
    cdef double[:, ::1] f = np.zeros((4, n))
    cdef Py_ssize_t i, j, k, stage
    cdef double acc, coef
    cdef int it
    cdef bint ok = True

    for i in range(m):
        acc = 0.0
        for j in range(n):
            acc += Cv[i, j] * xv[j]
        z[i] = acc

    for k in range(nsteps + 1):
        for stage in range(4):
            if stage == 0:
                for j in range(n):
                    xstage[j] = xv[j]
            elif stage == 1 or stage == 2:
                for j in range(n):
                    xstage[j] = xv[j] + 0.5 * dt * f[stage - 1, j]
            else:
                for j in range(n):
                    xstage[j] = xv[j] + dt * f[2, j]
            for i in range(m):
                acc = 0.0
                for j in range(n):
                    acc += Cv[i, j] * xstage[j]
                cx[i] = acc
            it = _fixed_point(cx, Dv, zbv, wbv, z, wrk, tol, maxit)
            if it < 0:
                ok = False
            for i in range(m):
                w[i] = _pwl_scalar(zbv, wbv, z[i])
            for j in range(n):
                acc = 0.0
                for i in range(n):
                    acc += Av[j, i] * xstage[i]
                for i in range(m):
                    acc += Bv[j, i] * w[i]
                f[stage, j] = acc
            if stage == 0:
                for j in range(n):
                    xs[k, j] = xv[j]
                for i in range(m):
                    zs[k, i] = z[i]
                    ws[k, i] = w[i]
            if (k == nsteps and stage == 0) or not ok:
                break
        if k == nsteps or not ok:
            break
        for j in range(n):
            xv[j] = xv[j] + (dt / 6.0) * (f[0, j] + 2.0 * f[1, j] + 2.0 * f[2, j] + f[3, j])
    return xs, zs, ws, bool(ok)
