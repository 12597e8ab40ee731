"""Hybrid phase spaces, their commutation forms, and linear maps between them.

Coordinates of a space built by :func:`make_hybrid` are ordered
``(q_1..q_n, p_1..p_n, x_1..x_s)``. Spaces built by :func:`direct_sum` keep
block order instead, so nothing downstream may assume canonical order: every
operation reads the form from ``PhaseSpace.sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ANTISYM_TOL = 1e-12


def _frozen(arr, dtype=float):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PhaseSpace:
    """Real vector space with an antisymmetric (possibly degenerate) form.

    ``n`` is the number of quantum degrees of freedom (half the rank of
    ``sigma``) and ``s`` the dimension of its null space.
    """

    sigma: np.ndarray
    n: int = field(init=False)
    s: int = field(init=False)

    def __post_init__(self):
        sig = np.asarray(self.sigma, dtype=float)
        if sig.size == 0:
            sig = np.zeros((0, 0))
        if sig.ndim != 2 or sig.shape[0] != sig.shape[1]:
            raise ValueError(f"sigma must be square, got shape {sig.shape}")
        if sig.size and np.max(np.abs(sig + sig.T)) > ANTISYM_TOL:
            raise ValueError("sigma is not antisymmetric")
        sig = 0.5 * (sig - sig.T)
        object.__setattr__(self, "sigma", _frozen(sig))
        rank = int(np.linalg.matrix_rank(sig, tol=1e-10)) if sig.size else 0
        object.__setattr__(self, "n", rank // 2)
        object.__setattr__(self, "s", sig.shape[0] - rank)

    @property
    def dim(self):
        return self.sigma.shape[0]

    @property
    def is_classical(self):
        return self.n == 0

    def null_space(self):
        """Orthonormal basis (columns) of the classical subspace."""
        if self.dim == 0:
            return np.zeros((0, 0))
        u, sv, vt = np.linalg.svd(self.sigma)
        return vt[2 * self.n:].T

    def reversed(self):
        """The same space with the opposite form."""
        return PhaseSpace(-self.sigma)

    def restrict(self, indices):
        idx = np.asarray(indices, dtype=int)
        return PhaseSpace(self.sigma[np.ix_(idx, idx)])

    def check_vector(self, xi):
        xi = np.asarray(xi, dtype=float)
        if xi.shape[-1:] != (self.dim,):
            raise ValueError(f"vector of length {xi.shape[-1:]} does not fit a {self.dim}-dim space")
        return xi

    def same_as(self, other, tol=1e-12):
        return self.dim == other.dim and (self.dim == 0 or np.max(np.abs(self.sigma - other.sigma)) <= tol)

    def to_json(self):
        canon = canonical_sigma(self.n, self.s)
        if canon.shape == self.sigma.shape and np.array_equal(canon, self.sigma):
            return {"n": self.n, "s": self.s}
        return {"sigma": self.sigma.tolist()}

    @classmethod
    def from_json(cls, obj):
        if "sigma" in obj:
            return cls(np.asarray(obj["sigma"], dtype=float).reshape(len(obj["sigma"]), -1))
        if "n" in obj or "s" in obj:
            return make_hybrid(int(obj.get("n", 0)), int(obj.get("s", 0)))
        raise KeyError("space needs either 'sigma' or 'n'/'s'")

    def __repr__(self):
        return f"PhaseSpace(dim={self.dim}, n={self.n}, s={self.s})"


def canonical_sigma(n, s):
    d = 2 * n + s
    sig = np.zeros((d, d))
    sig[:n, n:2 * n] = np.eye(n)
    sig[n:2 * n, :n] = -np.eye(n)
    return sig


def make_hybrid(n, s):
    """Canonical hybrid with ``n`` quantum modes and ``s`` classical coordinates."""
    if n < 0 or s < 0:
        raise ValueError("n and s must be non-negative")
    if n + s == 0:
        raise ValueError("make_hybrid needs at least one degree of freedom; use trivial_space() for {0}")
    return PhaseSpace(canonical_sigma(n, s))


def trivial_space():
    """The zero-dimensional phase space (a system with a single state)."""
    return PhaseSpace(np.zeros((0, 0)))


def direct_sum(*spaces):
    """Block-diagonal composite; coordinates are concatenated in argument order."""
    dims = [sp.dim for sp in spaces]
    total = sum(dims)
    sig = np.zeros((total, total))
    offset = 0
    for sp in spaces:
        sig[offset:offset + sp.dim, offset:offset + sp.dim] = sp.sigma
        offset += sp.dim
    return PhaseSpace(sig)


def block_slices(*spaces):
    """Index slices of each summand inside ``direct_sum(*spaces)``."""
    out, offset = [], 0
    for sp in spaces:
        out.append(slice(offset, offset + sp.dim))
        offset += sp.dim
    return out


@dataclass(frozen=True, eq=False)
class PhaseMap:
    """Linear map ``S`` from a channel's output space to its input space.

    ``matrix`` has shape ``(target.dim, source.dim)``. The data flow on states
    runs the other way (through the transpose).
    """

    source: PhaseSpace
    target: PhaseSpace
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float).reshape(self.target.dim, self.source.dim)
        object.__setattr__(self, "matrix", _frozen(mat))

    def __call__(self, xi):
        return np.asarray(xi, dtype=float) @ self.matrix.T

    def then(self, other):
        """Matrix product ``other.matrix @ self.matrix`` (apply self, then other)."""
        if not self.target.same_as(other.source):
            raise ValueError("maps are not composable")
        return PhaseMap(self.source, other.target, other.matrix @ self.matrix)

    @classmethod
    def identity(cls, space):
        return cls(space, space, np.eye(space.dim))


def delta_sigma(S):
    """``sigma_out - S^T sigma_in S``: the form the noise must be positive for."""
    mat = S.matrix
    d = S.source.sigma - mat.T @ S.target.sigma @ mat
    return 0.5 * (d - d.T)


def translate_weyl_phase(space, xi, eta):
    """Multiplier ``exp(-i/2 xi.sigma.eta)`` in ``W(xi) W(eta) = phase * W(xi + eta)``."""
    xi = space.check_vector(xi)
    eta = space.check_vector(eta)
    return np.exp(-0.5j * np.einsum("...i,ij,...j->...", xi, space.sigma, eta))
