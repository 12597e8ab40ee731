"""Standard protocols assembled from channel primitives.

Observables, position and phase-space instruments, ideal-copier maps,
teleportation and dense coding through a two-mode squeezed resource, plus
parameter sweeps that tabulate the resulting noise figures.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy import integrate

from . import channel as chn
from . import charfun as cf
from . import gaussian as ga
from .channel import QuasifreeChannel
from .phasespace import PhaseMap, PhaseSpace, delta_sigma, direct_sum, make_hybrid


def _one_mode():
    return make_hybrid(1, 0)


def _require_quantum(tau, n=None):
    if tau.space.is_classical or tau.space.s:
        raise ValueError("noise state must live on a purely quantum phase space")
    if n is not None and tau.space.n != n:
        raise ValueError(f"noise state has {tau.space.n} modes, expected {n}")
    if not tau.space.same_as(make_hybrid(tau.space.n, 0)):
        raise ValueError("noise state must use canonical (q, p) coordinates")


# ---------------------------------------------------------------------------
# observables


def position_observable(n_modes, noise):
    """Position measurement with classical noise ``noise`` on ``R^n``.

    ``S: k -> (k, 0)``, so the output distribution is ``noise * rho^Q``.
    """
    if not noise.space.is_classical or noise.space.dim != n_modes:
        raise ValueError("position noise must be a classical state on R^n")
    inn, out = make_hybrid(n_modes, 0), make_hybrid(0, n_modes)
    M = np.vstack([np.eye(n_modes), np.zeros((n_modes, n_modes))])
    return chn.make_channel(PhaseMap(out, inn, M), noise)


def phasespace_observable(tau):
    """Covariant phase-space observable with density ``tau``.

    ``S = I`` from the classical copy of the phase space, ``delta_sigma = -sigma``.
    The noise function is ``chi_tau(-xi)``, the reflected state, which is
    positive for the reversed form whatever ``tau`` is.
    """
    _require_quantum(tau)
    n = tau.space.n
    inn, out = tau.space, make_hybrid(0, 2 * n)
    S = PhaseMap(out, inn, np.eye(2 * n))
    return chn.make_channel(S, cf.pullback(tau, -np.eye(2 * n), out))


def husimi(n_modes=1):
    """Phase-space observable with vacuum noise: output covariance ``A + I/2``."""
    return phasespace_observable(cf.vacuum(n_modes))


# ---------------------------------------------------------------------------
# instruments


def _position_instrument_maps(n):
    inn = make_hybrid(n, 0)
    out = direct_sum(inn, make_hybrid(0, n))
    I, Z = np.eye(n), np.zeros((n, n))
    S = np.block([[I, Z, I], [Z, I, Z]])
    L = np.block([[Z, Z, -I], [Z, I, Z]])  # (q, p, k) -> (-k, p)
    return inn, out, S, L


def position_instrument(tau, shift=None):
    """Position measurement with post-measurement state.

    Output coordinates are ``(q, p, k)``: the quantum system followed by the
    outcome. ``S(q, p, k) = (q + k, p)`` and the noise function is
    ``f(q, p, k) = exp(i shift.q) chi_tau(-k, p)``. The classical marginal
    adds ``tau``'s position distribution (reflected) to the outcome, the
    quantum marginal kicks momentum by ``tau``'s momentum distribution and
    translates position by ``shift``.
    """
    _require_quantum(tau)
    n = tau.space.n
    inn, out, S, L = _position_instrument_maps(n)
    shift = np.zeros(n) if shift is None else np.asarray(shift, dtype=float).reshape(n)
    f = cf.translate(cf.pullback(tau, L, out), np.concatenate([shift, np.zeros(2 * n)]))
    return chn.make_channel(PhaseMap(out, inn, S), f)


def position_instrument_marginals(tau, shift=None):
    """Predicted marginals: ``(classical noise, disturbance noise)`` as characteristic functions.

    Classical noise is ``k -> chi_tau(-k, 0)`` on ``R^n``; the disturbance
    noise on ``(q, p)`` is ``exp(i shift.q) chi_tau(0, p)``.
    """
    n = tau.space.n
    I, Z = np.eye(n), np.zeros((n, n))
    shift = np.zeros(n) if shift is None else np.asarray(shift, dtype=float).reshape(n)
    classical = cf.pullback(tau, np.vstack([-I, Z]), make_hybrid(0, n))
    kick = cf.pullback(tau, np.block([[Z, Z], [Z, I]]), PhaseSpace(np.zeros((2 * n, 2 * n))))
    kick = cf.translate(kick, np.concatenate([shift, np.zeros(n)]))
    return classical, kick


def minimal_uncertainty_tau(v):
    """One-mode squeezed vacuum with ``Var Q = v`` and ``Var P = 1/(4v)``."""
    if v <= 0:
        raise ValueError("variance must be positive")
    return cf.gaussian_charfn(_one_mode(), None, np.diag([v, 0.25 / v]))


@dataclass(frozen=True, eq=False)
class PhaseSpaceInstrument:
    """Gaussian covariant phase-space instrument with Kraus data ``Psi ~ exp(-beta H)``."""

    beta: float
    channel: QuasifreeChannel

    @property
    def quantum_noise_variance(self):
        """Variance of the translation noise on the post-measurement state."""
        return math.tanh(self.beta / 2)

    @property
    def classical_noise_variance(self):
        """Variance added to the outcome; ``exp(-2 beta H)`` has ``A = coth(beta)/2``."""
        return 0.5 / math.tanh(self.beta)

    @property
    def observable_thermal_t(self):
        """``Psi^* Psi`` is thermal with ``t = exp(-2 beta)``."""
        return math.exp(-2 * self.beta)

    def translation_density(self, z):
        """Probability density ``m`` of the phase-space translations applied to the quantum output."""
        z = np.asarray(z, dtype=float)
        c = 1.0 / math.tanh(self.beta / 2)
        return c / (2 * np.pi) * np.exp(-0.5 * c * np.sum(z ** 2, axis=-1))

    def psi_fourier_shape(self, xi):
        """``tr(Psi W(xi)) / tr(Psi) = exp(-coth(beta/2) xi^2 / 4)``."""
        xi = np.asarray(xi, dtype=float)
        return np.exp(-0.25 / math.tanh(self.beta / 2) * np.sum(xi ** 2, axis=-1))


def phasespace_instrument_noise_cov(beta):
    x = math.tanh(beta / 2)
    z = 0.5 / math.tanh(beta)
    I = np.eye(2)
    return np.block([[x * I, 0.5 * x * I], [0.5 * x * I, z * I]])


def phasespace_instrument_gaussian(beta):
    """One-mode phase-space instrument; output is the quantum system then the outcome."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    X = _one_mode()
    out = direct_sum(X, make_hybrid(0, 2))
    S = PhaseMap(out, X, np.hstack([np.eye(2), np.eye(2)]))
    ch = chn.from_gaussian(ga.make_gaussian_channel(S, None, phasespace_instrument_noise_cov(beta)))
    return PhaseSpaceInstrument(float(beta), ch)


# ---------------------------------------------------------------------------
# cloning


def cloner(n_out):
    """Ideal-copier map ``S(xi_1 + ... + xi_N) = sum xi_j`` for one mode."""
    if n_out < 2:
        raise ValueError("a cloner needs at least two outputs")
    X = _one_mode()
    out = direct_sum(*[X] * n_out)
    return PhaseMap(out, X, np.hstack([np.eye(2)] * n_out))


def cloner_channel(n_out, B):
    """Gaussian cloner with noise covariance ``B`` (scalar means ``B * I``)."""
    S = cloner(n_out)
    d = S.source.dim
    B = np.asarray(B, dtype=float)
    if B.ndim == 0:
        B = float(B) * np.eye(d)
    return chn.from_gaussian(ga.make_gaussian_channel(S, None, B))


def cloner_min_eigenvalue(n_out, b):
    """Smallest eigenvalue of ``b I + (i/2) delta_sigma`` for the ``1 -> n_out`` cloner."""
    S = cloner(n_out)
    M = b * np.eye(S.source.dim) + 0.5j * delta_sigma(S)
    return float(np.linalg.eigvalsh(M)[0])


def cloner_boundary(n_out, lo=0.0, hi=None, tol=1e-9):
    """Bisection for the smallest admissible isotropic noise level."""
    hi = float(n_out) if hi is None else hi
    if cloner_min_eigenvalue(n_out, hi) < 0 or cloner_min_eigenvalue(n_out, lo) >= 0:
        raise ValueError("bracket does not contain the boundary")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cloner_min_eigenvalue(n_out, mid) >= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def clone_marginal(ch, j):
    return chn.marginal_channel(ch, [2 * j, 2 * j + 1])


# ---------------------------------------------------------------------------
# entanglement-assisted transmission


def resource_space():
    X = _one_mode()
    return direct_sum(X, X.reversed())


def two_mode_squeezed(lam):
    """``chi(xi + eta) = exp(-(e^{2 lam}(xi-eta)^2 + e^{-2 lam}(xi+eta)^2)/4)`` on ``sigma + (-sigma)``."""
    c, s = math.cosh(2 * lam), math.sinh(2 * lam)
    I = np.eye(2)
    return cf.gaussian_charfn(resource_space(), None, np.block([[c * I, -s * I], [-s * I, c * I]]))


def _check_resource(resource):
    if not resource.space.same_as(resource_space()):
        raise ValueError("resource must live on (Xi + Xi, sigma + (-sigma)) with canonical blocks")


def _diagonal(dim):
    return np.vstack([np.eye(dim), np.eye(dim)])


def _closed_form_check(ch, resource, seed=0, n=32, tol=1e-12):
    d = ch.out_space.dim
    if ch.S.matrix.shape != (d, d) or np.max(np.abs(ch.S.matrix - np.eye(d))) > tol:
        raise RuntimeError("composed transmission channel does not have S = I")
    pts = np.random.default_rng(seed).normal(size=(n, d))
    got = ch.noise(pts)
    want = cf.evaluate(resource, np.hstack([pts, pts]))
    if np.max(np.abs(got - want)) > tol:
        raise RuntimeError("composed noise differs from chi(xi + xi)")


def teleport(resource, verify=True):
    """Teleportation channel assembled from preparation, sender and receiver boxes.

    The sender measures her input jointly with her half of the resource
    (``S c = c + c``, a noiseless map onto a classical 2-vector); the
    receiver displaces his half by the message (``S xi = xi + xi``). The
    end-to-end channel has ``S = I`` and noise ``chi_resource(xi + xi)``.
    """
    _check_resource(resource)
    X = _one_mode()
    Xr = X.reversed()
    C = make_hybrid(0, 2)
    prep = chn.concatenate(chn.permutation([X, Xr], [1, 0]), chn.preparation(resource))
    share = chn.tensor(chn.identity(X), prep)  # X -> X + Xr + X
    sender = chn.noiseless_map(C, direct_sum(X, Xr), _diagonal(2))
    receiver = chn.noiseless_map(X, direct_sum(C, X), _diagonal(2))
    ch = chn.concatenate(receiver, chn.concatenate(chn.tensor(sender, chn.identity(X)), share))
    if verify:
        _closed_form_check(ch, resource)
    return ch


def dense_code(resource, verify=True):
    """Dense-coding channel: classical 2-vector in, classical 2-vector out."""
    _check_resource(resource)
    X = _one_mode()
    Xr = X.reversed()
    C = make_hybrid(0, 2)
    share = chn.tensor(chn.identity(C), chn.preparation(resource))  # C -> C + X + Xr
    encoder = chn.noiseless_map(X, direct_sum(C, X), _diagonal(2))
    decoder = chn.noiseless_map(C, direct_sum(X, Xr), _diagonal(2))
    ch = chn.concatenate(decoder, chn.concatenate(chn.tensor(encoder, chn.identity(Xr)), share))
    if verify:
        _closed_form_check(ch, resource)
    return ch


def displacement_fidelity(B):
    """Coherent-state fidelity of ``S = I`` Gaussian noise ``B`` (any input coherent state)."""
    B = np.asarray(B, dtype=float)
    return float(1.0 / math.sqrt(np.linalg.det(np.eye(B.shape[0]) + B)))


def fidelity_quadrature(ch, radius=12.0):
    """``(2 pi)^{-1} int f(xi) |chi_alpha(xi)|^2 dxi`` by adaptive quadrature.

    ``|chi_alpha|^2 = exp(-xi^2/2)`` for every coherent state, so the average
    over inputs equals the value for any one of them.
    """
    if ch.out_space.dim != 2:
        raise ValueError("fidelity quadrature is implemented for one mode")

    def integrand(y, x):
        return (ch.noise(np.array([x, y])) * math.exp(-0.5 * (x * x + y * y))).real

    val, _ = integrate.dblquad(integrand, -radius, radius, -radius, radius, epsabs=1e-13, epsrel=1e-12)
    return val / (2 * np.pi)


def isotropic_tv(s1, s2):
    """L1 distance between centred isotropic 2D Gaussians with variances ``s1``, ``s2``."""
    if s1 == s2:
        return 0.0
    lo, hi = sorted((s1, s2))
    r2 = 2 * lo * hi * math.log(hi / lo) / (hi - lo)  # where the densities cross
    return 2.0 * (math.exp(-r2 / (2 * hi)) - math.exp(-r2 / (2 * lo)))


def dense_code_tv(ch, input_variance=0.5):
    """Distance between a Gaussian-smeared message and its decoded version."""
    B = ch.gaussian.B
    b = float(B[0, 0])
    if not np.allclose(B, b * np.eye(2), atol=1e-12):
        raise ValueError("expected isotropic dense-coding noise")
    return isotropic_tv(input_variance, input_variance + b)


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class TradeoffRow:
    protocol: str
    parameter: str
    value: float
    noise_exponent: float = math.nan
    classical_variance: float = math.nan
    quantum_variance: float = math.nan
    fidelity: float = math.nan
    uncertainty_product: float = math.nan
    tv_distance: float = math.nan
    min_eigenvalue: float = math.nan


CSV_COLUMNS = tuple(f.name for f in fields(TradeoffRow))

DEFAULT_GRIDS = {
    "teleport": (0.0, 1.0, 2.0),
    "densecode": (0.0, 1.0, 2.0),
    "instrument-position": (0.1, 0.5, 1.0, 2.0, 10.0),
    "instrument-phasespace": (0.5, 1.0, 2.0),
    "cloner": (2, 3, 4),
    "husimi": (1.0,),
}
PROTOCOLS = tuple(DEFAULT_GRIDS)


def _row_teleport(lam):
    res = two_mode_squeezed(lam)
    ch = teleport(res)
    B = ch.gaussian.B
    return TradeoffRow("teleport", "lambda", float(lam), noise_exponent=math.exp(-2 * lam),
                       quantum_variance=float(B[0, 0]), fidelity=displacement_fidelity(B),
                       min_eigenvalue=cf.quantum_admissible_gaussian(res.space, res.cov)[1])


def _row_densecode(lam):
    res = two_mode_squeezed(lam)
    ch = dense_code(res)
    return TradeoffRow("densecode", "lambda", float(lam), noise_exponent=math.exp(-2 * lam),
                       classical_variance=float(ch.gaussian.B[0, 0]), tv_distance=dense_code_tv(ch),
                       min_eigenvalue=cf.quantum_admissible_gaussian(res.space, res.cov)[1])


def _row_position(v):
    ch = position_instrument(minimal_uncertainty_tau(v))
    obs = chn.marginal_channel(ch, [2]).gaussian
    dist = chn.marginal_channel(ch, [0, 1]).gaussian
    cv, qv = float(obs.B[0, 0]), float(dist.B[1, 1])
    return TradeoffRow("instrument-position", "v", float(v), classical_variance=cv, quantum_variance=qv,
                       uncertainty_product=cv * qv, min_eigenvalue=ch.gaussian.min_eigenvalue)


def _row_phasespace(beta):
    inst = phasespace_instrument_gaussian(beta)
    obs = chn.marginal_channel(inst.channel, [2, 3]).gaussian
    dist = chn.marginal_channel(inst.channel, [0, 1]).gaussian
    cv, qv = float(obs.B[0, 0]), float(dist.B[0, 0])
    return TradeoffRow("instrument-phasespace", "beta", float(beta), classical_variance=cv,
                       quantum_variance=qv, uncertainty_product=cv * qv,
                       min_eigenvalue=inst.channel.gaussian.min_eigenvalue)


def _row_cloner(n):
    n = int(n)
    b = cloner_boundary(n)
    return TradeoffRow("cloner", "n_out", float(n), quantum_variance=b,
                       min_eigenvalue=cloner_min_eigenvalue(n, b))


def _row_husimi(s):
    tau = cf.gaussian_charfn(_one_mode(), None, np.diag([0.5 * s, 0.5 / s]))
    ch = phasespace_observable(tau)
    out = chn.apply(ch, cf.vacuum(1))
    B = ch.gaussian.B
    return TradeoffRow("husimi", "squeeze", float(s), classical_variance=float(out.cov[0, 0]),
                       quantum_variance=float(out.cov[1, 1]), uncertainty_product=float(B[0, 0] * B[1, 1]),
                       min_eigenvalue=ch.gaussian.min_eigenvalue)


_ROWS = {
    "teleport": _row_teleport,
    "densecode": _row_densecode,
    "instrument-position": _row_position,
    "instrument-phasespace": _row_phasespace,
    "cloner": _row_cloner,
    "husimi": _row_husimi,
}


def sweep(protocol, grid=None):
    if protocol not in _ROWS:
        raise KeyError(f"unknown protocol {protocol!r}; valid ids: {', '.join(PROTOCOLS)}")
    grid = DEFAULT_GRIDS[protocol] if grid is None else grid
    return [_ROWS[protocol](x) for x in grid]


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def rows_to_csv(rows, extra=None):
    """CSV with a fixed header; floats are written with ``repr`` (round-trip precision)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    extra = dict(extra or {})
    w.writerow(list(CSV_COLUMNS) + list(extra))
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS] + [_fmt(v) for v in extra.values()])
    return buf.getvalue()


def rows_to_json(rows):
    out = []
    for r in rows:
        d = asdict(r)
        out.append({k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()})
    return out
