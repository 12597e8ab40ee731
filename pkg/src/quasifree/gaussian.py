"""Closed Gaussian sub-calculus: channels ``(S, lam, B)`` with noise function
``f(xi) = exp(i lam.xi - xi.B.xi / 2)``.

Direction convention: ``S`` maps the output phase space to the input phase
space. A state's characteristic function transforms as
``chi_out(xi) = f(xi) chi_in(S xi)``, so on Gaussian data
``mean' = S^T mean + lam`` and ``cov' = S^T A S + B``.

``compose_gaussian(later, first)`` means "apply ``first`` to the state, then
``later``".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charfun import (
    PositivityError,
    TwistedPDReport,
    gaussian_charfn,
    quantum_admissible_gaussian,
)
from .phasespace import PhaseMap, PhaseSpace, delta_sigma, direct_sum

ADMISSIBLE_TOL = 1e-9


def _ro(arr):
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GaussianChannel:
    S: PhaseMap
    lam: np.ndarray
    B: np.ndarray
    delta: np.ndarray
    min_eigenvalue: float

    @property
    def in_space(self):
        return self.S.target

    @property
    def out_space(self):
        return self.S.source

    @property
    def noise_space(self):
        return PhaseSpace(self.delta)

    @property
    def noise(self):
        """Noise function as a characteristic function on ``(Xi_out, delta_sigma)``."""
        return gaussian_charfn(self.noise_space, self.lam, self.B)

    def to_json(self):
        return {
            "S": self.S.matrix.tolist(),
            "lam": self.lam.tolist(),
            "B": self.B.tolist(),
            "in": self.in_space.to_json(),
            "out": self.out_space.to_json(),
        }


@dataclass(frozen=True, eq=False)
class BlochMessiah:
    """``S = S1 @ S2 @ S3`` with ``S1, S3`` orthogonal symplectic and ``S2`` diagonal."""

    S1: np.ndarray
    S2: np.ndarray
    S3: np.ndarray

    @property
    def squeezing(self):
        """Log of the first half of the diagonal of ``S2`` (one entry per mode)."""
        d = np.diag(self.S2)
        return np.log(d[: len(d) // 2])


def make_gaussian_channel(S, lam=None, B=None):
    """Build a Gaussian channel, rejecting noise that violates ``B + (i/2) delta >= 0``."""
    d = S.source.dim
    lam = np.zeros(d) if lam is None else np.asarray(lam, dtype=float).reshape(d)
    B = np.zeros((d, d)) if B is None else np.asarray(B, dtype=float).reshape(d, d)
    if d and np.max(np.abs(B - B.T)) > 1e-12 * max(1.0, np.max(np.abs(B))):
        raise ValueError("noise covariance B is not symmetric")
    B = 0.5 * (B + B.T)
    delta = delta_sigma(S)
    ok, mn = quantum_admissible_gaussian(delta, B)
    if not ok:
        report = TwistedPDReport("fail", mn, float("nan"), exact=True, exact_min_eigenvalue=mn)
        raise PositivityError(
            f"B + (i/2) delta_sigma has eigenvalue {mn:.6g} < 0: not completely positive",
            report,
            delta,
        )
    return GaussianChannel(S, _ro(lam), _ro(B), _ro(delta), mn)


def identity_channel(space):
    return make_gaussian_channel(PhaseMap.identity(space))


def apply_gaussian(ch, state):
    if not state.is_gaussian:
        raise TypeError("apply_gaussian needs a Gaussian state")
    if not state.space.same_as(ch.in_space):
        raise ValueError("state does not live on the channel's input space")
    S = ch.S.matrix
    return gaussian_charfn(ch.out_space, S.T @ state.mean + ch.lam, S.T @ state.cov @ S + ch.B)


def compose_gaussian(later, first):
    """Channel that applies ``first`` and then ``later`` (state order)."""
    if not first.out_space.same_as(later.in_space):
        raise ValueError("output of the first channel does not match input of the second")
    S1 = later.S.matrix
    S = PhaseMap(later.out_space, first.in_space, first.S.matrix @ S1)
    return make_gaussian_channel(S, later.lam + S1.T @ first.lam, later.B + S1.T @ first.B @ S1)


def tensor_gaussian(t1, t2):
    out = direct_sum(t1.out_space, t2.out_space)
    inn = direct_sum(t1.in_space, t2.in_space)
    S = np.zeros((inn.dim, out.dim))
    S[: t1.in_space.dim, : t1.out_space.dim] = t1.S.matrix
    S[t1.in_space.dim:, t1.out_space.dim:] = t2.S.matrix
    B = np.zeros((out.dim, out.dim))
    B[: t1.out_space.dim, : t1.out_space.dim] = t1.B
    B[t1.out_space.dim:, t1.out_space.dim:] = t2.B
    return make_gaussian_channel(PhaseMap(out, inn, S), np.concatenate([t1.lam, t2.lam]), B)


def restrict_gaussian(ch, keep):
    """Marginal on the output coordinates ``keep``."""
    idx = np.asarray(list(keep), dtype=int)
    out = ch.out_space.restrict(idx)
    S = PhaseMap(out, ch.in_space, ch.S.matrix[:, idx])
    return make_gaussian_channel(S, ch.lam[idx], ch.B[np.ix_(idx, idx)])


def noise_factorize(ch):
    """Split ``ch`` into an expansion followed by a noiseless channel.

    Returns ``(expansion, noiseless, env_space)`` where ``env_space`` is
    ``(Xi_out, delta_sigma)``, and
    ``compose_gaussian(noiseless, expansion)`` reproduces ``ch``.
    """
    env = ch.noise_space
    big = direct_sum(ch.in_space, env)
    din, dout = ch.in_space.dim, ch.out_space.dim
    SN = np.vstack([ch.S.matrix, np.eye(dout)])
    noiseless = make_gaussian_channel(PhaseMap(ch.out_space, big, SN))
    SE = np.hstack([np.eye(din), np.zeros((din, dout))])
    lamE = np.concatenate([np.zeros(din), ch.lam])
    BE = np.zeros((big.dim, big.dim))
    BE[din:, din:] = ch.B
    expansion = make_gaussian_channel(PhaseMap(big, ch.in_space, SE), lamE, BE)
    return expansion, noiseless, env


def noise_factorize_minimal(ch, tol=1e-10):
    """Factorisation through the quotient by the subspace where ``|f| = 1``.

    That subspace is ``ker B`` (intersected with ``ker delta_sigma``). The
    displacement ``lam`` moves entirely into the noiseless part.
    """
    dout, din = ch.out_space.dim, ch.in_space.dim
    M = np.vstack([ch.B, ch.delta]) if dout else np.zeros((0, 0))
    if dout:
        _, sv, vt = np.linalg.svd(M)
        rank = int(np.sum(sv > tol * max(1.0, sv[0] if sv.size else 0.0)))
        Q = vt[:rank].T  # orthonormal basis of the complement of N
    else:
        Q = np.zeros((0, 0))
    mid = PhaseSpace(Q.T @ ch.delta @ Q)
    big = direct_sum(ch.in_space, mid)
    SN = np.vstack([ch.S.matrix, Q.T])
    noiseless = make_gaussian_channel(PhaseMap(ch.out_space, big, SN), ch.lam)
    SE = np.hstack([np.eye(din), np.zeros((din, mid.dim))])
    BE = np.zeros((big.dim, big.dim))
    BE[din:, din:] = Q.T @ ch.B @ Q
    expansion = make_gaussian_channel(PhaseMap(big, ch.in_space, SE), None, BE)
    return expansion, noiseless, mid


def classify(ch, tol=1e-10):
    """Flags ``noiseless`` (delta = 0 and B = 0) and ``smoothing`` (B strictly positive)."""
    d = ch.out_space.dim
    noiseless = bool(np.all(np.abs(ch.delta) <= tol) and np.all(np.abs(ch.B) <= tol))
    smoothing = bool(d > 0 and np.linalg.eigvalsh(ch.B)[0] > tol)
    return {"noiseless": noiseless, "smoothing": smoothing, "generic": not (noiseless or smoothing)}


# ---------------------------------------------------------------------------
# Bloch-Messiah


def _canonical_form(n):
    sig = np.zeros((2 * n, 2 * n))
    sig[:n, n:] = np.eye(n)
    sig[n:, :n] = -np.eye(n)
    return sig


def _isotropic_basis(vecs, sig):
    """Greedy symplectic-orthonormal half basis of a sigma-invariant subspace."""
    basis = []
    remaining = [v for v in vecs.T]
    span = []
    while remaining:
        v = remaining.pop(0)
        for w in span:
            v = v - (w @ v) * w
        nv = np.linalg.norm(v)
        if nv < 1e-8:
            continue
        v = v / nv
        basis.append(v)
        partner = -sig @ v
        span.extend([v, partner / np.linalg.norm(partner)])
    return basis


def bloch_messiah(S, tol=1e-10):
    """Decompose a symplectic matrix on a purely quantum canonical space.

    Polar decomposition ``S = U P`` followed by an orthogonal-symplectic
    diagonalisation of ``P``.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        raise ValueError("expected a square matrix of even size")
    n = S.shape[0] // 2
    sig = _canonical_form(n)
    if np.max(np.abs(S.T @ sig @ S - sig)) > tol * max(1.0, np.linalg.norm(S) ** 2):
        raise ValueError("matrix is not symplectic")

    w, v = np.linalg.eigh(S.T @ S)
    P = (v * np.sqrt(w)) @ v.T
    U = S @ (v / np.sqrt(w)) @ v.T

    d, vecs = np.linalg.eigh(P)
    qcols, dvals = [], []
    big = d > 1 + 1e-9
    for j in np.flatnonzero(big):
        u = vecs[:, j]
        partner = sig @ u  # eigenvector for 1/d
        # keep whichever of the pair points more along position axes
        if np.linalg.norm(partner[:n]) > np.linalg.norm(u[:n]):
            qcols.append(partner)
            dvals.append(1.0 / d[j])
        else:
            qcols.append(u)
            dvals.append(d[j])
    unit = np.flatnonzero(np.abs(d - 1) <= 1e-9)
    for u in _isotropic_basis(vecs[:, unit], sig):
        qcols.append(u)
        dvals.append(1.0)

    qcols = [q * np.sign(q[np.argmax(np.abs(q))]) for q in qcols]
    Qm = np.column_stack(qcols)
    O = np.hstack([Qm, -sig @ Qm])
    dvals = np.array(dvals)
    D = np.diag(np.concatenate([dvals, 1.0 / dvals]))
    return BlochMessiah(U @ O, D, O.T)
