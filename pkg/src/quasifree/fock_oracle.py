"""Truncated Fock-space numerics, used only to cross-check the phase-space calculus.

Conventions: ``Q = (a + a^+)/sqrt 2``, ``P = (a - a^+)/(i sqrt 2)`` and
``W(q, p) = exp(i(q Q + p P))``, which is the displacement ``D(alpha)`` with
``alpha = (-p + i q)/sqrt 2``.

Two truncations of ``W`` are available. ``"expm"`` exponentiates the
truncated generator; its matrix elements go wrong near the cutoff. The
``"compressed"`` form keeps the exact elements ``<m|D(alpha)|n>`` for
``m, n < N`` (computed by ``kernels``), so only leakage above the cutoff is
lost. Quadratures always use the exact elements on the support of the test
operators, so they carry no truncation error at all.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from math import lgamma

import numpy as np
from scipy.linalg import expm

from . import kernels

DEFAULT_CUTOFF = 40
HEAVY_CUTOFF = 60
QUAD_RADIUS = 8.0
QUAD_POINTS = 161
TAIL_TOL = 1e-10
_CACHE_LIMIT = 4096
_KEY_SCALE = 1e12


@dataclass(eq=False)
class FockRep:
    """Oscillator matrices for ``modes`` modes (1 or 2), each cut off at ``N`` levels."""

    N: int = DEFAULT_CUTOFF
    modes: int = 1
    a: np.ndarray = field(init=False, repr=False)
    Q: list = field(init=False, repr=False)
    P: list = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False, default_factory=dict)
    _lock: threading.Lock = field(init=False, repr=False, default_factory=threading.Lock)

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("cutoff must be at least 2")
        if self.modes not in (1, 2):
            raise ValueError("the oracle handles one or two modes")
        a = np.diag(np.sqrt(np.arange(1, self.N, dtype=float)), 1).astype(complex)
        self.a = a
        one = np.eye(self.N)
        q = (a + a.conj().T) / np.sqrt(2)
        p = (a - a.conj().T) / (1j * np.sqrt(2))
        if self.modes == 1:
            self.Q, self.P = [q], [p]
        else:
            self.Q = [np.kron(q, one), np.kron(one, q)]
            self.P = [np.kron(p, one), np.kron(one, p)]

    @property
    def dim(self):
        return self.N ** self.modes

    def ccr_residual(self):
        """``max |[Q,P] - i|`` on the leading ``N-2`` levels (one mode)."""
        q, p = self.Q[0], self.P[0]
        if self.modes != 1:
            raise ValueError("ccr_residual is defined for one mode")
        c = q @ p - p @ q - 1j * np.eye(self.N)
        k = self.N - 2
        return float(np.max(np.abs(c[:k, :k])))

    def weyl(self, xi, method="expm"):
        xi = np.asarray(xi, dtype=float).reshape(2 * self.modes)
        key = (method,) + tuple(int(round(v * _KEY_SCALE)) for v in xi)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        n = self.modes
        if method == "expm":
            gen = sum(xi[j] * self.Q[j] + xi[n + j] * self.P[j] for j in range(n))
            W = expm(1j * gen)
        elif method == "compressed":
            W = np.ones((1, 1), dtype=complex)
            for j in range(n):
                alpha = (-xi[n + j] + 1j * xi[j]) / np.sqrt(2)
                W = np.kron(W, kernels.displacement_block(alpha, self.N))
        else:
            raise ValueError(f"unknown Weyl construction {method!r}")
        W.setflags(write=False)
        with self._lock:
            if len(self._cache) >= _CACHE_LIMIT:
                self._cache.clear()
            W = self._cache.setdefault(key, W)
        return W


def weyl_matrix(rep, xi, method="expm"):
    return rep.weyl(xi, method)


def _support(*ops):
    L = 1
    for F in ops:
        nz = np.nonzero(np.abs(F) > 0)
        if nz[0].size:
            L = max(L, int(max(nz[0].max(), nz[1].max())) + 1)
    return L


def charfn_of_density(rep, rho, xi):
    """``tr(rho W(xi))`` through the matrix exponential."""
    rho = np.asarray(rho, dtype=complex)
    tr = np.trace(rho)
    if abs(tr - 1) > 1e-8:
        raise ValueError(f"density matrix has trace {tr:.12g}, expected 1")
    return complex(np.trace(rho @ rep.weyl(xi)))


def fourier_weyl(rep, F, xi):
    """``tr(F W(xi))`` for one mode; ``xi`` may be a single pair or an ``(k, 2)`` array."""
    F = np.asarray(F, dtype=complex)
    X = np.atleast_2d(np.asarray(xi, dtype=float))
    L = _support(F)
    vals = kernels.weyl_trace_grid(np.ascontiguousarray(F[:L, :L]), X[:, 0].copy(), X[:, 1].copy())
    return complex(vals[0]) if np.ndim(xi) == 1 else vals


def _coefficients(kind, N, alpha=0.0, r=0.0):
    n = np.arange(N)
    if kind == "coherent":
        alpha = complex(alpha)
        logmag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha) if alpha else 1.0) - 0.5 * np.array([lgamma(k + 1) for k in n])
        c = np.exp(logmag) * np.exp(1j * np.angle(alpha) * n)
        if alpha == 0:
            c = (n == 0).astype(complex)
        return c
    if kind == "squeezed":
        c = np.zeros(N, dtype=complex)
        th = np.tanh(r)
        for m in range(0, (N + 1) // 2):
            k = 2 * m
            if k >= N:
                break
            c[k] = np.sign(th) ** m * np.exp(m * np.log(abs(th) or 1e-300) + 0.5 * lgamma(k + 1) - m * np.log(2) - lgamma(m + 1))
        return c / np.sqrt(np.cosh(r))
    raise ValueError(kind)


def gaussian_state_matrix(rep, kind, alpha=0.0, t=0.0, r=0.0):
    """Density matrix of a standard one-mode Gaussian state.

    ``kind`` is ``vacuum``, ``coherent`` (amplitude ``alpha``), ``thermal``
    (``(1-t) sum t^n |n><n|``) or ``squeezed`` (``Var Q = e^{2r}/2``).
    Raises if more than ``1e-10`` of the probability lies above the cutoff.
    """
    N = rep.N
    if kind == "vacuum":
        rho = np.zeros((N, N), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    if kind == "thermal":
        if not 0 <= t < 1:
            raise ValueError("thermal parameter t must lie in [0, 1)")
        tail = t ** N
        diag = (1 - t) * t ** np.arange(N)
        rho = np.diag(diag).astype(complex)
    elif kind in ("coherent", "squeezed"):
        c = _coefficients(kind, N, alpha, r)
        tail = 1.0 - float(np.sum(np.abs(c) ** 2))
        rho = np.outer(c, c.conj())
    else:
        raise ValueError(f"unknown state kind {kind!r}")
    if tail > TAIL_TOL:
        raise ValueError(f"cutoff {N} leaves tail mass {tail:.3g} > {TAIL_TOL}")
    return rho


def thermal_psi(rep, beta):
    """``exp(-beta H)`` normalised to unit Hilbert-Schmidt norm (``H = N + 1/2``)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    d = np.exp(-beta * (np.arange(rep.N) + 0.5))
    return np.diag(d / np.linalg.norm(d)).astype(complex)


# ---------------------------------------------------------------------------
# quadrature checks


@dataclass(frozen=True)
class OracleResult:
    lhs: complex
    rhs: complex
    abs_error: float
    rel_error: float
    quad_error: float
    coarse: bool

    def to_json(self):
        return {
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "abs_error": self.abs_error,
            "rel_error": self.rel_error,
            "quad_error": self.quad_error,
            "coarse": self.coarse,
        }


def _grid(R, n):
    x = np.linspace(-R, R, n)
    A, B = np.meshgrid(x, x, indexing="ij")
    return A.ravel(), B.ravel(), (x[1] - x[0]) ** 2


def _result(lhs, integral, integral_coarse, tol):
    lhs = complex(lhs)
    rhs = complex(integral)
    err = abs(lhs - rhs)
    rel = err / abs(lhs) if abs(lhs) > 1e-14 else err
    quad = abs(integral - integral_coarse)
    return OracleResult(lhs, rhs, float(err), float(rel), float(quad), bool(quad > tol))


def _quadrature(integrand, R, n):
    a, b, w = _grid(R, n)
    fine = np.sum(integrand(a, b)) * w
    a2, b2, w2 = _grid(R, (n + 1) // 2)
    return fine, np.sum(integrand(a2, b2)) * w2


def parseval_check(rep, F, G, R=QUAD_RADIUS, n=QUAD_POINTS, tol=1e-3):
    """``tr(F^+ G)`` against ``(2 pi)^{-1} int conj(tr F W) tr G W``; the second
    integral on a grid of half resolution gives the quadrature error estimate."""
    F = np.asarray(F, dtype=complex)
    G = np.asarray(G, dtype=complex)
    L = _support(F, G)
    if L > max(1, rep.N // 3):
        raise ValueError("test operators must live on the lowest N/3 Fock levels")
    Fl = np.ascontiguousarray(F[:L, :L])
    Gl = np.ascontiguousarray(G[:L, :L])

    def integrand(a, b):
        return np.conj(kernels.weyl_trace_grid(Fl, a, b)) * kernels.weyl_trace_grid(Gl, a, b) / (2 * np.pi)

    fine, coarse = _quadrature(integrand, R, n)
    return _result(np.trace(F.conj().T @ G), fine, coarse, tol)


def translate_average_check(rep, F, G, R=QUAD_RADIUS, n=QUAD_POINTS, tol=5e-3):
    """``int tr(F W^+ G W) dxi`` against ``2 pi tr F tr G`` (one mode)."""
    F = np.asarray(F, dtype=complex)
    G = np.asarray(G, dtype=complex)
    L = _support(F, G)
    Fl = np.ascontiguousarray(F[:L, :L])
    Gl = np.ascontiguousarray(G[:L, :L])

    def integrand(a, b):
        return kernels.translate_trace_grid(Fl, Gl, a, b)

    fine, coarse = _quadrature(integrand, R, n)
    return _result(2 * np.pi * np.trace(F) * np.trace(G), fine, coarse, tol)


# ---------------------------------------------------------------------------
# residual suites


def weyl_relation_residual(rep, xi, eta, levels=20, method="compressed"):
    """``||(W(xi)W(eta) - e^{-i xi.sigma.eta/2} W(xi+eta)) Pi_levels||`` (spectral norm).

    With ``method="expm"`` the residual at ``N = 60`` reaches ``2e-3`` for
    ``|xi| = |eta| = 2``; the compressed construction stays below ``1e-8``.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    n = rep.modes
    form = xi[:n] @ eta[n:] - xi[n:] @ eta[:n]
    W = lambda z: rep.weyl(z, method)  # noqa: E731
    diff = W(xi) @ W(eta) - np.exp(-0.5j * form) * W(xi + eta)
    return float(np.linalg.norm(diff[:, :levels], 2))


def vacuum_residual(rep, points):
    """Max ``|<0|W(xi)|0> - exp(-xi^2/4)|`` over ``points``."""
    worst = 0.0
    for xi in np.atleast_2d(points):
        val = rep.weyl(xi)[0, 0]
        worst = max(worst, abs(val - np.exp(-0.25 * xi @ xi)))
    return worst


def instrument_shape_residual(rep, beta, points):
    """Relative error of ``tr(Psi W)/tr(Psi)`` against ``exp(-coth(beta/2) xi^2/4)``."""
    psi = thermal_psi(rep, beta)
    X = np.atleast_2d(points)
    vals = fourier_weyl(rep, psi, X) / np.trace(psi)
    pred = np.exp(-0.25 / np.tanh(beta / 2) * np.sum(X ** 2, axis=1))
    return float(np.max(np.abs(vals - pred) / pred))


def instrument_noise_residual(rep, beta, noise, points):
    """Compare ``noise(xi, eta)`` with ``tr(Psi W(xi) Psi W(xi+eta)^+)``.

    This is the operator form of the phase-space instrument's noise function
    (quantum output ``xi``, classical output ``eta``).
    """
    psi = thermal_psi(rep, beta)
    worst = 0.0
    for z in np.atleast_2d(points):
        xi, eta = z[:2], z[2:]
        ref = np.trace(psi @ rep.weyl(xi) @ psi @ rep.weyl(xi + eta).conj().T)
        worst = max(worst, abs(ref - noise(z)))
    return worst


def beam_splitter_residual(rho, chi_rho, points, N=25, theta=np.pi / 4):
    """Single-mode marginal of ``U (rho x |0><0|) U^+`` against a prediction.

    ``chi_rho`` maps a one-mode point to the predicted output value; returns
    the max deviation from the truncated two-mode computation.
    """
    rep = FockRep(N, modes=2)
    a = rep.a
    one = np.eye(N)
    a1, a2 = np.kron(a, one), np.kron(one, a)
    U = expm(theta * (a1.conj().T @ a2 - a1 @ a2.conj().T))
    vac = np.zeros((N, N), dtype=complex)
    vac[0, 0] = 1
    big = U @ np.kron(rho, vac) @ U.conj().T
    worst = 0.0
    for xi in np.atleast_2d(points):
        W1 = rep.weyl([xi[0], 0.0, xi[1], 0.0])
        worst = max(worst, abs(np.trace(big @ W1) - chi_rho(xi)))
    return worst


def displaced_thermal_distance(nu, shift, cutoff=80):
    """``||rho_nu - D rho_nu D^+||_1`` for a one-mode thermal state with ``A = nu I``
    and a position shift ``shift``."""
    if nu < 0.5 - 1e-12:
        raise ValueError("covariance below the vacuum level")
    if shift == 0:
        return 0.0
    t = max(0.0, (2 * nu - 1) / (2 * nu + 1))
    rep = FockRep(cutoff)
    rho = np.diag((1 - t) * t ** np.arange(cutoff)).astype(complex)
    D = rep.weyl([0.0, -float(shift)])  # W(0, -d) shifts Q by d
    diff = rho - D @ rho @ D.conj().T
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))
