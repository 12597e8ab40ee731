"""Characteristic functions of hybrid states and the twisted positivity test.

Convention: a Gaussian characteristic function is
``chi(xi) = exp(i m.xi - xi.A.xi / 2)`` and it belongs to a state on
``(Xi, sigma)`` iff ``A + (i/2) sigma`` is positive semidefinite. With this
normalisation the oscillator ground state has ``A = I/2``.

General (non-Gaussian) bodies wrap a user evaluator. Evaluators must be pure
and vectorised: called with an array of shape ``(..., dim)`` they return a
complex array of shape ``(...)``. They may be called from several threads at
once.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .phasespace import PhaseSpace, make_hybrid

SYM_TOL = 1e-12
NORM_TOL = 1e-9


def _ro(arr):
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Gaussian:
    mean: np.ndarray
    cov: np.ndarray


@dataclass(frozen=True, eq=False)
class General:
    evaluator: Callable
    description: str = ""


@dataclass(frozen=True, eq=False)
class CharFn:
    space: PhaseSpace
    body: Gaussian | General

    @property
    def is_gaussian(self):
        return isinstance(self.body, Gaussian)

    @property
    def mean(self):
        return self.body.mean if self.is_gaussian else None

    @property
    def cov(self):
        return self.body.cov if self.is_gaussian else None

    @property
    def description(self):
        if self.is_gaussian:
            return "gaussian"
        return self.body.description

    def __call__(self, xi):
        return evaluate(self, xi)

    def with_space(self, space):
        """Same function, reinterpreted on another form of equal dimension."""
        if space.dim != self.space.dim:
            raise ValueError("dimension mismatch")
        return CharFn(space, self.body)

    def to_json(self):
        if not self.is_gaussian:
            raise TypeError("general characteristic functions are not serialisable")
        return {"space": self.space.to_json(), "mean": self.mean.tolist(), "cov": self.cov.tolist()}


@dataclass(frozen=True)
class TwistedPDReport:
    """Outcome of a twisted positive-definiteness test.

    ``verdict`` is ``"pass"``, ``"fail"`` or ``"inconclusive"``. For general
    bodies "pass" only means that no violation was found. ``exact`` is True
    when the verdict came from the closed-form Gaussian criterion, whose
    eigenvalue is then in ``exact_min_eigenvalue``. On failure
    ``witness_points`` rebuild a Gram matrix whose smallest eigenvalue is
    ``min_eigenvalue``.
    """

    verdict: str
    min_eigenvalue: float
    max_eigenvalue: float
    witness_points: tuple = ()
    samples_used: int = 0
    seed: int | None = None
    exact: bool = False
    exact_min_eigenvalue: float | None = None

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_json(self):
        return {
            "verdict": self.verdict,
            "min_eigenvalue": self.min_eigenvalue,
            "max_eigenvalue": self.max_eigenvalue,
            "witness_points": [np.asarray(p).tolist() for p in self.witness_points],
            "samples_used": self.samples_used,
            "seed": self.seed,
            "exact": self.exact,
            "exact_min_eigenvalue": self.exact_min_eigenvalue,
        }


class PositivityError(ValueError):
    """Raised when a noise function fails its twisted positivity test."""

    def __init__(self, message, report, form=None):
        super().__init__(message)
        self.report = report
        self.form = form


@dataclass(frozen=True)
class SamplingPolicy:
    """How :func:`twisted_pd_check` draws point sets for general bodies.

    Each of the ``n_sets`` Gram matrices uses ``set_size`` i.i.d. points from
    ``N(0, scale^2 I)``, cycling through ``scales``. All pairs and triples of
    ``explicit_points`` (plus the origin) are tested as well. A sampled Gram
    matrix fails when its smallest eigenvalue is below ``-tol * max(1, top)``.
    """

    n_sets: int = 64
    set_size: int = 8
    scales: tuple = (0.25, 1.0, 4.0)
    seed: int = 0
    explicit_points: tuple = field(default=())
    workers: int = 1
    tol: float = 1e-7


# ---------------------------------------------------------------------------
# construction


def gaussian_charfn(space, mean=None, cov=None):
    d = space.dim
    m = np.zeros(d) if mean is None else np.asarray(mean, dtype=float).reshape(d)
    A = np.zeros((d, d)) if cov is None else np.asarray(cov, dtype=float).reshape(d, d)
    if d and np.max(np.abs(A - A.T)) > SYM_TOL * max(1.0, np.max(np.abs(A))):
        raise ValueError("covariance matrix is not symmetric")
    A = 0.5 * (A + A.T)
    return CharFn(space, Gaussian(_ro(m), _ro(A)))


def general_charfn(space, evaluator, description="", vectorized=True, check=True):
    """Wrap an evaluator; checks ``chi(0) = 1`` and ``|chi| <= 1`` on 32 seeded points."""
    if not vectorized:
        scalar = evaluator

        def evaluator(X, _f=scalar):
            X = np.asarray(X, dtype=float)
            flat = X.reshape(-1, X.shape[-1])
            vals = np.array([_f(x) for x in flat], dtype=complex)
            return vals.reshape(X.shape[:-1])

    chi = CharFn(space, General(evaluator, description))
    if check:
        at0 = complex(evaluate(chi, np.zeros(space.dim)))
        if abs(at0 - 1) > NORM_TOL:
            raise ValueError(f"characteristic function must be 1 at the origin, got {at0}")
        pts = np.random.default_rng(20240).normal(size=(32, space.dim))
        vals = np.abs(evaluate(chi, pts))
        if np.max(vals) > 1 + NORM_TOL:
            raise ValueError(f"|chi| exceeds 1 (max {np.max(vals):.6g})")
    return chi


def point_measure(space, at=None):
    """Classical point mass (characteristic function is a pure phase)."""
    return gaussian_charfn(space, at, None)


def vacuum(n=1):
    return gaussian_charfn(make_hybrid(n, 0), None, 0.5 * np.eye(2 * n))


def coherent(q, p):
    """Single-mode coherent state with mean position ``q`` and momentum ``p``."""
    return gaussian_charfn(make_hybrid(1, 0), [q, p], 0.5 * np.eye(2))


def thermal(t):
    """Single-mode thermal state ``(1-t) sum t^n |n><n|``."""
    return gaussian_charfn(make_hybrid(1, 0), None, 0.5 * (1 + t) / (1 - t) * np.eye(2))


def squeezed_vacuum(r):
    return gaussian_charfn(make_hybrid(1, 0), None, 0.5 * np.diag([np.exp(2 * r), np.exp(-2 * r)]))


# ---------------------------------------------------------------------------
# evaluation


def evaluate(chi, xi):
    xi = chi.space.check_vector(xi)
    body = chi.body
    if isinstance(body, Gaussian):
        lin = xi @ body.mean
        quad = np.einsum("...i,ij,...j->...", xi, body.cov, xi)
        return np.exp(1j * lin - 0.5 * quad)
    return np.asarray(body.evaluator(xi), dtype=complex)


def _hermitian(A, form):
    return np.asarray(A, dtype=complex) + 0.5j * np.asarray(form, dtype=float)


def quantum_admissible_gaussian(space_or_form, A):
    """Whether ``A`` is the covariance of a state for the given form.

    Returns ``(ok, min_eigenvalue)`` for the Hermitian matrix ``A + (i/2) form``.
    """
    form = space_or_form.sigma if isinstance(space_or_form, PhaseSpace) else np.asarray(space_or_form, dtype=float)
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return True, 0.0
    ev = np.linalg.eigvalsh(_hermitian(A, form))
    tol = 1e-9 * max(1.0, np.linalg.norm(A, 2))
    return bool(ev[0] >= -tol), float(ev[0])


def twisted_gram(chi, form, points):
    """Hermitised matrix ``chi(x_l - x_k) exp(-i/2 x_k.form.x_l)``."""
    X = np.asarray(points, dtype=float)
    if isinstance(chi, CharFn) and chi.is_gaussian:
        M = kernels.gaussian_gram(X, chi.mean, chi.cov, form)
    else:
        fn = chi if not isinstance(chi, CharFn) else (lambda Z: evaluate(chi, Z))
        diff = X[None, :, :] - X[:, None, :]
        M = np.asarray(fn(diff), dtype=complex) * np.exp(-0.5j * (X @ form @ X.T))
    return 0.5 * (M + M.conj().T)


def _point_sets(dim, policy):
    rng = np.random.default_rng(policy.seed)
    sets = []
    for k in range(policy.n_sets):
        scale = policy.scales[k % len(policy.scales)]
        sets.append(rng.normal(scale=scale, size=(policy.set_size, dim)))
    expl = [np.asarray(p, dtype=float) for p in policy.explicit_points]
    if expl:
        pool = [np.zeros(dim)] + expl
        for i in range(len(pool)):
            for j in range(i + 1, len(pool)):
                sets.append(np.array([pool[i], pool[j]]))
                for k in range(j + 1, len(pool)):
                    sets.append(np.array([pool[i], pool[j], pool[k]]))
    return sets


def _eigenvector_sets(A, form):
    """Point sets aligned with the most negative direction of ``A + (i/2) form``."""
    w, v = np.linalg.eigh(_hermitian(A, form))
    z = v[:, 0]
    x, y = z.real, z.imag
    sets = []
    for t in (0.5, 1.0, 1.5, 2.0, 3.0, 4.0):
        sets.append(np.array([np.zeros_like(x), t * x, t * y]))
        sets.append(np.array([-t * x, np.zeros_like(x), t * y, t * (x + y), -t * y]))
    return sets


def _search(chi, form, sets, workers):
    def one(pts):
        return np.linalg.eigvalsh(twisted_gram(chi, form, pts)), pts

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, sets))
    else:
        results = [one(s) for s in sets]
    worst_min, worst_pts, top = np.inf, None, 0.0
    for ev, pts in results:
        top = max(top, float(ev[-1]))
        if ev[0] < worst_min:
            worst_min, worst_pts = float(ev[0]), pts
    return worst_min, worst_pts, top


def twisted_pd_check(chi, form=None, policy=None):
    """Test ``chi`` for twisted positive definiteness w.r.t. ``form``.

    Gaussian bodies get the exact covariance criterion (any mean). Other
    bodies are sampled: the check can falsify but never certify.
    """
    policy = policy or SamplingPolicy()
    if isinstance(chi, CharFn):
        dim = chi.space.dim
        form = chi.space.sigma if form is None else np.asarray(form, dtype=float)
    else:
        if form is None:
            raise ValueError("a bare evaluator needs an explicit form")
        form = np.asarray(form, dtype=float)
        dim = form.shape[0]
    if form.shape != (dim, dim) or (dim and np.max(np.abs(form + form.T)) > 1e-12):
        raise ValueError("form must be an antisymmetric matrix matching the space")
    if dim == 0:
        return TwistedPDReport("pass", 0.0, 1.0, (), 0, policy.seed, exact=True, exact_min_eigenvalue=0.0)

    if isinstance(chi, CharFn) and chi.is_gaussian:
        ok, mn = quantum_admissible_gaussian(form, chi.cov)
        top = float(np.linalg.eigvalsh(_hermitian(chi.cov, form))[-1])
        if ok:
            return TwistedPDReport("pass", mn, top, (), 0, policy.seed, exact=True, exact_min_eigenvalue=mn)
        sets = _eigenvector_sets(chi.cov, form) + _point_sets(dim, policy)
        wmin, wpts, wtop = _search(chi, form, sets, policy.workers)
        witness = tuple(wpts) if wmin < 0 else ()
        return TwistedPDReport(
            "fail", wmin if witness else mn, wtop, witness, sum(len(s) for s in sets),
            policy.seed, exact=True, exact_min_eigenvalue=mn,
        )

    sets = _point_sets(dim, policy)
    if not sets or all(len(s) == 0 for s in sets):
        raise ValueError("sampling policy produces no points")
    wmin, wpts, top = _search(chi, form, sets, policy.workers)
    used = sum(len(s) for s in sets)
    if wmin < -policy.tol * max(1.0, top):
        return TwistedPDReport("fail", wmin, top, tuple(wpts), used, policy.seed)
    return TwistedPDReport("pass", wmin, top, (), used, policy.seed)


# ---------------------------------------------------------------------------
# transformations


def translate(chi, eta):
    """Phase-space translate: ``chi'(xi) = exp(i eta.xi) chi(xi)``."""
    eta = chi.space.check_vector(eta)
    if chi.is_gaussian:
        return gaussian_charfn(chi.space, chi.mean + eta, chi.cov)
    inner = chi.body.evaluator

    def shifted(X, _eta=eta.copy(), _inner=inner):
        X = np.asarray(X, dtype=float)
        return np.exp(1j * (X @ _eta)) * _inner(X)

    return CharFn(chi.space, General(shifted, f"translate({chi.description})"))


def convolve(chi1, chi2, signs=(1, 1)):
    """Pointwise product, living on the form ``s1 sigma1 + s2 sigma2``."""
    if chi1.space.dim != chi2.space.dim:
        raise ValueError("convolution needs spaces of equal dimension")
    s1, s2 = signs
    space = PhaseSpace(s1 * chi1.space.sigma + s2 * chi2.space.sigma)
    if chi1.is_gaussian and chi2.is_gaussian:
        return gaussian_charfn(space, chi1.mean + chi2.mean, chi1.cov + chi2.cov)
    e1, e2 = _evaluator(chi1), _evaluator(chi2)
    return CharFn(space, General(lambda X: e1(X) * e2(X), f"({chi1.description})*({chi2.description})"))


def marginal(chi, subset):
    """Restriction to the coordinates in ``subset`` (the others set to zero)."""
    idx = np.asarray(list(subset), dtype=int)
    space = chi.space.restrict(idx)
    if chi.is_gaussian:
        return gaussian_charfn(space, chi.mean[idx], chi.cov[np.ix_(idx, idx)])
    inner = chi.body.evaluator
    dim = chi.space.dim

    def restricted(X, _idx=idx, _inner=inner, _dim=dim):
        X = np.asarray(X, dtype=float)
        full = np.zeros(X.shape[:-1] + (_dim,))
        full[..., _idx] = X
        return _inner(full)

    return CharFn(space, General(restricted, f"marginal({chi.description})"))


def pullback(chi, L, space):
    """``xi -> chi(L xi)`` on ``space``; ``L`` has shape ``(chi.space.dim, space.dim)``."""
    L = np.asarray(L, dtype=float).reshape(chi.space.dim, space.dim)
    if chi.is_gaussian:
        return gaussian_charfn(space, L.T @ chi.mean, L.T @ chi.cov @ L)
    inner = chi.body.evaluator
    return CharFn(space, General(lambda X, _L=L.copy(): inner(np.asarray(X, dtype=float) @ _L.T), chi.description))


def _evaluator(chi):
    if chi.is_gaussian:
        return lambda X: evaluate(chi, X)
    return chi.body.evaluator
