"""Pure-numpy versions of the compiled kernels.

Every function here has the same signature and output as its counterpart in
``_kernels.pyx``; the test suite checks both against each other.
"""

import numpy as np


def _blocks(alpha, L):
    """Stack of truncated displacement matrices, one per entry of ``alpha``."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.complex128))
    D = np.empty((alpha.size, L, L), dtype=np.complex128)
    ac = alpha.conj()
    D[:, 0, 0] = np.exp(-0.5 * np.abs(alpha) ** 2)
    sq = np.sqrt(np.arange(L, dtype=np.float64))
    for m in range(1, L):
        D[:, m, 0] = alpha * D[:, m - 1, 0] / sq[m]
    for n in range(1, L):
        D[:, 0, n] = -ac * D[:, 0, n - 1] / sq[n]
        D[:, 1:, n] = (sq[1:L] * D[:, :-1, n - 1] - ac[:, None] * D[:, 1:, n - 1]) / sq[n]
    return D


def displacement_block(alpha, L):
    return _blocks(alpha, L)[0]


def weyl_trace_grid(F, a, b):
    F = np.asarray(F, dtype=np.complex128)
    alpha = (-np.asarray(b, dtype=np.float64) + 1j * np.asarray(a, dtype=np.float64)) / np.sqrt(2.0)
    D = _blocks(alpha, F.shape[0])
    return np.einsum("nm,kmn->k", F, D)


def translate_trace_grid(F, G, a, b):
    F = np.asarray(F, dtype=np.complex128)
    G = np.asarray(G, dtype=np.complex128)
    alpha = (-np.asarray(b, dtype=np.float64) + 1j * np.asarray(a, dtype=np.float64)) / np.sqrt(2.0)
    D = _blocks(alpha, F.shape[0])
    GD = np.einsum("pq,kqi->kpi", G, D)
    return np.einsum("ij,kpj,kpi->k", F, D.conj(), GD)


def gaussian_gram(points, mean, cov, form):
    X = np.asarray(points, dtype=np.float64)
    diff = X[None, :, :] - X[:, None, :]  # diff[k, l] = x_l - x_k
    quad = np.einsum("kli,ij,klj->kl", diff, cov, diff)
    lin = diff @ np.asarray(mean, dtype=np.float64)
    tw = X @ np.asarray(form, dtype=np.float64) @ X.T
    return np.exp(-0.5 * quad + 1j * (lin - 0.5 * tw))
