import numpy as np
import pytest

from lurecert import cli, demos, lmi


def random_doubly_hyperdominant(rng, m, scale=1.0):
    """Random member of the doubly hyperdominant cone."""
    M = -np.abs(rng.standard_normal((m, m))) * scale
    np.fill_diagonal(M, 0.0)
    row = -M.sum(axis=1)
    col = -M.sum(axis=0)
    d = np.maximum(row, col) + np.abs(rng.standard_normal(m)) * scale
    return M + np.diag(d)


def random_doubly_dominant(rng, m, scale=1.0):
    """Random doubly dominant matrix with mixed-sign off-diagonals."""
    M = rng.standard_normal((m, m)) * scale
    np.fill_diagonal(M, 0.0)
    row = np.abs(M).sum(axis=1)
    col = np.abs(M).sum(axis=0)
    d = np.maximum(row, col) + np.abs(rng.standard_normal(m)) * scale
    return M + np.diag(d)


def random_slope_pwl(rng, n_segments=6, span=3.0, odd=False):
    """Random piecewise-linear map with every segment slope in [0, 1].

    Built by integrating random slopes outward from the origin so it always
    passes through (0, 0); the odd variant mirrors the right half.
    """
    from lurecert.witness import PiecewiseLinear

    right_z = np.sort(rng.uniform(0.05, span, n_segments))
    right_s = rng.uniform(0.0, 1.0, n_segments)
    zr = np.concatenate([[0.0], right_z])
    wr = np.concatenate([[0.0], np.cumsum(right_s * np.diff(zr))])
    if odd:
        z = np.concatenate([-zr[:0:-1], zr])
        w = np.concatenate([-wr[:0:-1], wr])
    else:
        zl = np.concatenate([np.sort(rng.uniform(-span, -0.05, n_segments)), [0.0]])
        left_s = rng.uniform(0.0, 1.0, n_segments)
        wl = np.zeros(zl.size)
        for i in range(zl.size - 2, -1, -1):
            wl[i] = wl[i + 1] - left_s[i] * (zl[i + 1] - zl[i])
        z = np.concatenate([zl[:-1], zr])
        w = np.concatenate([wl[:-1], wr])
    return PiecewiseLinear(z_bp=z, w_bp=w)


def random_stable_system(rng, n=2, m=3, d_norm_max=0.8):
    R = rng.standard_normal((n, n))
    A = R - (np.max(np.linalg.eigvals(R).real) + rng.uniform(0.2, 1.0)) * np.eye(n)
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((m, n))
    D = rng.standard_normal((m, m))
    D *= rng.uniform(0.1, d_norm_max) / np.linalg.norm(D, 2)
    return lmi.StateSpace(A, B, C, D)


@pytest.fixture(scope="session")
def dhd_verdict():
    return cli.analyze(demos.DEMO_DHD, lmi.DHD)


@pytest.fixture(scope="session")
def dd_verdict():
    return cli.analyze(demos.DEMO_DD, lmi.DD)
