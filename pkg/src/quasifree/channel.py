"""Quasifree channels ``(S, f)`` with arbitrary (possibly non-Gaussian) noise.

The noise function ``f`` is stored as a characteristic function on
``(Xi_out, delta_sigma)``; complete positivity of the channel is twisted
positive definiteness of ``f`` for that form. For Gaussian ``f`` the check is
exact, otherwise only sampled, which is why ``cp_status`` distinguishes
``"verified_exact"`` from ``"sampled_ok"``. A ``"sampled_ok"`` channel is
*not* certified.

Every combinator keeps Gaussian data Gaussian and delegates to
:mod:`quasifree.gaussian`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import charfun as cf
from . import gaussian as ga
from .charfun import CharFn, General, PositivityError, TwistedPDReport
from .phasespace import PhaseMap, PhaseSpace, delta_sigma, direct_sum, trivial_space

_STATUS_RANK = {"verified_exact": 2, "sampled_ok": 1, "unchecked": 0}


@dataclass(frozen=True, eq=False)
class QuasifreeChannel:
    S: PhaseMap
    f: CharFn
    cp_status: str
    report: TwistedPDReport | None = None
    gaussian: ga.GaussianChannel | None = None

    @property
    def in_space(self):
        return self.S.target

    @property
    def out_space(self):
        return self.S.source

    @property
    def delta(self):
        return self.f.space.sigma

    @property
    def is_gaussian(self):
        return self.gaussian is not None

    def noise(self, xi):
        return cf.evaluate(self.f, xi)


def _weakest(*statuses):
    return min(statuses, key=_STATUS_RANK.__getitem__)


def from_gaussian(gch):
    return QuasifreeChannel(
        gch.S,
        gch.noise,
        "verified_exact",
        TwistedPDReport("pass", gch.min_eigenvalue, float("nan"), exact=True,
                        exact_min_eigenvalue=gch.min_eigenvalue),
        gch,
    )


def make_channel(S, f=None, verify="auto", policy=None):
    """Build a channel from ``S`` and a noise function.

    ``f`` may be a :class:`CharFn` of the right dimension (its own form is
    replaced by ``delta_sigma(S)``), a vectorised callable, or ``None`` for
    ``f = 1``. ``verify`` is ``"auto"`` (exact for Gaussian, sampled
    otherwise), ``"sample"`` or ``"none"``.
    """
    delta = delta_sigma(S)
    noise_space = PhaseSpace(delta)
    if f is None:
        f = cf.point_measure(noise_space)
    elif not isinstance(f, CharFn):
        f = cf.general_charfn(noise_space, f, description=getattr(f, "__name__", "noise"))
    if f.space.dim != S.source.dim:
        raise ValueError(f"noise function has dimension {f.space.dim}, output space has {S.source.dim}")
    f = f.with_space(noise_space)

    if f.is_gaussian and verify != "none":
        try:
            gch = ga.make_gaussian_channel(S, f.mean, f.cov)
        except PositivityError as exc:
            report = cf.twisted_pd_check(f, delta, policy)
            raise PositivityError(str(exc), report, delta) from None
        return from_gaussian(gch)
    if verify == "none":
        gch = None
        if f.is_gaussian:
            gch = ga.make_gaussian_channel(S, f.mean, f.cov)
            return from_gaussian(gch)
        return QuasifreeChannel(S, f, "unchecked")
    if verify not in ("auto", "sample"):
        raise ValueError(f"unknown verification policy {verify!r}")
    report = cf.twisted_pd_check(f, delta, policy)
    if report.verdict == "fail":
        raise PositivityError(
            f"noise function is not twisted positive definite (Gram eigenvalue {report.min_eigenvalue:.6g})",
            report,
            delta,
        )
    return QuasifreeChannel(S, f, "sampled_ok", report)


def identity(space):
    return from_gaussian(ga.identity_channel(space))


def preparation(state):
    """Channel from the trivial system that prepares ``state``."""
    S = PhaseMap(state.space, trivial_space(), np.zeros((0, state.space.dim)))
    return make_channel(S, state)


def depolarizing(space, state):
    """``S = 0``: every input is replaced by ``state``."""
    S = PhaseMap(state.space, space, np.zeros((space.dim, state.space.dim)))
    return make_channel(S, state)


def destructive(space):
    """Discard everything; the output is the trivial system."""
    return make_channel(PhaseMap(trivial_space(), space, np.zeros((space.dim, 0))))


def noiseless_map(out_space, in_space, matrix, lam=None):
    """Channel with ``f = exp(i lam.xi)``; raises unless ``delta_sigma = 0``."""
    S = PhaseMap(out_space, in_space, matrix)
    ch = from_gaussian(ga.make_gaussian_channel(S, lam))
    if np.max(np.abs(ch.delta), initial=0.0) > 1e-12:
        raise ValueError("map does not preserve the forms, a noiseless channel needs delta_sigma = 0")
    return ch


def apply(ch, state):
    """``chi_out(xi) = f(xi) chi_in(S xi)``."""
    if not state.space.same_as(ch.in_space):
        raise ValueError("state does not live on the channel's input space")
    if ch.is_gaussian and state.is_gaussian:
        return ga.apply_gaussian(ch.gaussian, state)
    f, S = ch.f, ch.S.matrix
    inner = state

    def out(X):
        X = np.asarray(X, dtype=float)
        return cf.evaluate(f, X) * cf.evaluate(inner, X @ S.T)

    return CharFn(ch.out_space, General(out, f"T({state.description})"))


def heisenberg_weyl(ch, xi_out):
    """Heisenberg image of ``W_out(xi)``: returns ``(f(xi), S xi)``."""
    xi = ch.out_space.check_vector(xi_out)
    return complex(ch.noise(xi)), ch.S(xi)


def concatenate(later, first):
    """Apply ``first``, then ``later`` (state order).

    ``S = S_first S_later`` and ``f(xi) = f_later(xi) f_first(S_later xi)``.
    """
    if not first.out_space.same_as(later.in_space):
        raise ValueError("output of the first channel does not match input of the second")
    if later.is_gaussian and first.is_gaussian:
        return from_gaussian(ga.compose_gaussian(later.gaussian, first.gaussian))
    S1 = later.S.matrix
    S = later.S.then(first.S)
    f1, f2 = later.f, first.f

    def f(X):
        X = np.asarray(X, dtype=float)
        return cf.evaluate(f1, X) * cf.evaluate(f2, X @ S1.T)

    noise = CharFn(PhaseSpace(delta_sigma(S)), General(f, f"{f1.description}.{f2.description}"))
    status = _weakest(later.cp_status, first.cp_status)
    return QuasifreeChannel(S, noise, status)


def tensor(t1, t2):
    if t1.is_gaussian and t2.is_gaussian:
        return from_gaussian(ga.tensor_gaussian(t1.gaussian, t2.gaussian))
    out = direct_sum(t1.out_space, t2.out_space)
    inn = direct_sum(t1.in_space, t2.in_space)
    M = np.zeros((inn.dim, out.dim))
    d1i, d1o = t1.in_space.dim, t1.out_space.dim
    M[:d1i, :d1o] = t1.S.matrix
    M[d1i:, d1o:] = t2.S.matrix
    S = PhaseMap(out, inn, M)
    f1, f2 = t1.f, t2.f

    def f(X):
        X = np.asarray(X, dtype=float)
        return cf.evaluate(f1, X[..., :d1o]) * cf.evaluate(f2, X[..., d1o:])

    noise = CharFn(PhaseSpace(delta_sigma(S)), General(f, f"{f1.description}x{f2.description}"))
    return QuasifreeChannel(S, noise, _weakest(t1.cp_status, t2.cp_status))


def restriction(space, keep):
    """Noiseless channel keeping output coordinates ``keep`` of ``space``."""
    idx = np.asarray(list(keep), dtype=int)
    kept = space.restrict(idx)
    E = np.zeros((space.dim, idx.size))
    E[idx, np.arange(idx.size)] = 1.0
    return noiseless_map(kept, space, E)


def marginal_channel(ch, keep):
    return concatenate(restriction(ch.out_space, keep), ch)


def translate_channel(ch, xi_out):
    """Translate the noise state: ``f -> exp(i xi.eta) f``; ``S`` unchanged."""
    eta = ch.out_space.check_vector(xi_out)
    if ch.is_gaussian:
        g = ch.gaussian
        return from_gaussian(ga.make_gaussian_channel(g.S, g.lam + eta, g.B))
    return QuasifreeChannel(ch.S, cf.translate(ch.f, eta), ch.cp_status, ch.report)


def permutation(spaces, order):
    """Noiseless reordering: output summands are ``spaces[order[0]], spaces[order[1]], ...``."""
    inn = direct_sum(*spaces)
    out = direct_sum(*[spaces[k] for k in order])
    offsets = np.cumsum([0] + [sp.dim for sp in spaces])
    M = np.zeros((inn.dim, out.dim))
    col = 0
    for k in order:
        d = spaces[k].dim
        M[offsets[k]:offsets[k] + d, col:col + d] = np.eye(d)
        col += d
    return noiseless_map(out, inn, M)


def noise_factorize(ch):
    """``(expansion, noiseless, env_space)`` with ``concatenate(noiseless, expansion) == ch``.

    The environment is ``(Xi_out, delta_sigma)`` carrying the noise state;
    the expansion adjoins it (``f_E(xi1 + xi2) = f(xi2)``) and the noiseless
    part is ``S_N xi = S xi + xi`` with ``f_N = 1``.
    """
    if ch.is_gaussian:
        e, n, env = ga.noise_factorize(ch.gaussian)
        return from_gaussian(e), from_gaussian(n), env
    env = PhaseSpace(ch.delta)
    big = direct_sum(ch.in_space, env)
    din, dout = ch.in_space.dim, ch.out_space.dim
    noiseless = noiseless_map(ch.out_space, big, np.vstack([ch.S.matrix, np.eye(dout)]))
    SE = PhaseMap(big, ch.in_space, np.hstack([np.eye(din), np.zeros((din, dout))]))
    f = ch.f

    def fE(X):
        return cf.evaluate(f, np.asarray(X, dtype=float)[..., din:])

    noise = CharFn(PhaseSpace(delta_sigma(SE)), General(fE, f"adjoin({f.description})"))
    return QuasifreeChannel(SE, noise, ch.cp_status, ch.report), noiseless, env


def classify(ch, samples=256, seed=0):
    """Noiseless / smoothing flags; the general-noise case is a sampled necessary check."""
    if ch.is_gaussian:
        return ga.classify(ch.gaussian)
    pts = np.random.default_rng(seed).normal(scale=2.0, size=(samples, ch.out_space.dim))
    unimodular = bool(np.all(np.abs(np.abs(ch.noise(pts)) - 1) <= 1e-10))
    noiseless = unimodular and bool(np.all(np.abs(ch.delta) <= 1e-10))
    return {"noiseless": noiseless, "smoothing": None, "generic": not noiseless}


# ---------------------------------------------------------------------------
# norm distance


def gaussian_tv(delta_mean, cov):
    """L1 distance ``||N(0, cov) - N(delta_mean, cov)||_1`` in ``[0, 2]``."""
    d = np.asarray(delta_mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if not np.any(d):
        return 0.0
    w = np.linalg.lstsq(cov, d, rcond=None)[0]
    if np.linalg.norm(cov @ w - d) > 1e-9 * max(1.0, np.linalg.norm(d)):
        return 2.0  # shift leaves the support: mutually singular
    mahal = float(np.sqrt(d @ w))
    return 2.0 * (2.0 * norm.cdf(mahal / 2.0) - 1.0)


def cb_distance_gaussian(t1, t2, cutoff=80):
    """``||T1 - T2||_cb`` for Gaussian channels that differ only by ``lam``.

    Equals the norm distance of the two noise states. Classical noise
    (``delta_sigma = 0``) uses the Gaussian total-variation formula; a single
    quantum noise mode is reduced to a displaced thermal state and evaluated
    in a truncated Fock basis.
    """
    if not (t1.is_gaussian and t2.is_gaussian):
        raise TypeError("cb_distance_gaussian needs Gaussian channels")
    g1, g2 = t1.gaussian, t2.gaussian
    if g1.S.matrix.shape != g2.S.matrix.shape or not np.allclose(g1.S.matrix, g2.S.matrix, atol=1e-12, rtol=0):
        raise ValueError("channels must share S")
    if not np.allclose(g1.B, g2.B, atol=1e-12, rtol=0):
        raise ValueError("channels must share the noise covariance B")
    dl = g1.lam - g2.lam
    delta = g1.delta
    if np.max(np.abs(delta), initial=0.0) <= 1e-12:
        return gaussian_tv(dl, g1.B)
    if delta.shape == (2, 2):
        from .fock_oracle import displaced_thermal_distance

        T = _symplectic_basis(delta)
        cov = T.T @ g1.B @ T
        shift = T.T @ dl
        nu = float(np.sqrt(np.linalg.det(cov)))
        # cov = nu * M M^T with M symplectic; move the shift into the normal frame
        Msq = cov / nu
        w, v = np.linalg.eigh(Msq)
        Minv_half = (v / np.sqrt(np.sqrt(w))) @ v.T
        amount = float(np.linalg.norm(Minv_half @ shift))
        return displaced_thermal_distance(nu, amount, cutoff)
    raise NotImplementedError("cb distance is implemented for classical noise or one quantum noise mode")


def _symplectic_basis(form):
    """``T`` with ``T^T form T`` the canonical one-mode form (2x2 forms only)."""
    b = form[0, 1]
    T = np.eye(2)
    T[1, 1] = 1.0 / b
    return T
