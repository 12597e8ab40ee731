import numpy as np
import pytest

from quasifree import charfun as cf
from quasifree import fock_oracle as fo

DISC = np.array([[r * np.cos(t), r * np.sin(t)] for r in (0.0, 0.7, 1.5, 2.2, 3.0) for t in np.linspace(0, 2 * np.pi, 9)[:-1]])


@pytest.fixture(scope="module")
def rep40():
    return fo.FockRep(fo.DEFAULT_CUTOFF)


def basis(N, m, n):
    E = np.zeros((N, N), dtype=complex)
    E[m, n] = 1
    return E


def test_rep_structure(rep40):
    assert rep40.ccr_residual() < 1e-10
    a = rep40.a
    assert np.allclose(np.tril(a), 0) and np.allclose(np.diag(a, 1), np.sqrt(np.arange(1, 40)))
    with pytest.raises(ValueError):
        fo.FockRep(1)
    with pytest.raises(ValueError):
        fo.FockRep(10, modes=3)


def test_weyl_zero_and_cache(rep40):
    W = fo.weyl_matrix(rep40, [0.0, 0.0])
    assert np.allclose(W, np.eye(40))
    assert fo.weyl_matrix(rep40, [0.3, 0.1]) is fo.weyl_matrix(rep40, [0.3, 0.1])
    with pytest.raises(ValueError):
        rep40.weyl([0.1, 0.1], method="bogus")


def test_vacuum_characteristic(rep40):
    assert fo.vacuum_residual(rep40, DISC) < 1e-8


def test_methods_agree_on_low_block(rep40):
    xi = [0.8, -1.3]
    We = rep40.weyl(xi, "expm")
    Wc = rep40.weyl(xi, "compressed")
    assert np.max(np.abs(We[:15, :15] - Wc[:15, :15])) < 1e-8
    U = Wc[:15, :]
    assert np.allclose(U @ U.conj().T, np.eye(15), atol=1e-10)


def test_weyl_relation_compressed():
    rep = fo.FockRep(fo.HEAVY_CUTOFF)
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(10):
        xi, eta = rng.uniform(-1.4, 1.4, size=(2, 2))
        worst = max(worst, fo.weyl_relation_residual(rep, xi, eta))
    corner = np.array([np.sqrt(2), np.sqrt(2)])
    worst = max(worst, fo.weyl_relation_residual(rep, corner, corner))
    assert worst < 1e-6


def test_weyl_expm_at_80():
    rep = fo.FockRep(80)
    xi, eta = np.array([1.2, -0.5]), np.array([-0.3, 1.1])
    assert fo.weyl_relation_residual(rep, xi, eta, method="expm") < 1e-6


def test_truncation_convergence():
    xi, eta = np.array([1.5, 0.4]), np.array([-0.2, 1.7])
    w = [fo.weyl_relation_residual(fo.FockRep(N), xi, eta, method="expm") for N in (20, 40, 80)]
    assert w[0] > w[1] > w[2]
    v = [fo.vacuum_residual(fo.FockRep(N), [[2.5, 1.0]]) for N in (8, 16, 32)]
    assert v[0] > v[1] > v[2]


def test_state_matrices(rep40):
    vac = fo.gaussian_state_matrix(rep40, "vacuum")
    assert np.array_equal(vac, basis(40, 0, 0))
    th = fo.gaussian_state_matrix(rep40, "thermal", t=0.5)
    assert abs(np.trace(th) - 1) < 1e-12
    for kind, kw in (("coherent", {"alpha": 1.0 - 0.5j}), ("squeezed", {"r": 0.5})):
        rho = fo.gaussian_state_matrix(rep40, kind, **kw)
        assert abs(np.trace(rho) - 1) < 1e-10
        assert np.linalg.eigvalsh(rho)[0] > -1e-12
    with pytest.raises(ValueError):
        fo.gaussian_state_matrix(fo.FockRep(10), "thermal", t=0.5)
    with pytest.raises(ValueError):
        fo.gaussian_state_matrix(rep40, "coherent", alpha=5.0)
    with pytest.raises(ValueError):
        fo.gaussian_state_matrix(rep40, "cat")


def test_thermal_characteristic(rep40):
    rho = fo.gaussian_state_matrix(rep40, "thermal", t=0.5)
    chi = cf.gaussian_charfn(cf.vacuum(1).space, None, 1.5 * np.eye(2))
    worst = max(abs(fo.charfn_of_density(rep40, rho, x) - chi(x)) for x in DISC)
    assert worst < 1e-6


def test_squeezed_characteristic(rep40):
    r = 0.5
    rho = fo.gaussian_state_matrix(rep40, "squeezed", r=r)
    chi = cf.gaussian_charfn(cf.vacuum(1).space, None, 0.5 * np.diag([np.exp(2 * r), np.exp(-2 * r)]))
    worst = max(abs(fo.charfn_of_density(rep40, rho, x) - chi(x)) for x in DISC)
    assert worst < 1e-6


def test_coherent_characteristic(rep40):
    alpha = 0.6 + 0.3j
    rho = fo.gaussian_state_matrix(rep40, "coherent", alpha=alpha)
    chi = cf.coherent(np.sqrt(2) * alpha.real, np.sqrt(2) * alpha.imag)
    vac = cf.vacuum(1)
    for x in DISC:
        got = fo.charfn_of_density(rep40, rho, x)
        assert abs(got - chi(x)) < 1e-6
        assert abs(abs(got) - abs(vac(x))) < 1e-6  # displacement only adds a phase


def test_hermiticity(rep40):
    rho = fo.gaussian_state_matrix(rep40, "coherent", alpha=0.4 + 0.8j)
    for x in DISC[:10]:
        a = fo.charfn_of_density(rep40, rho, x)
        b = fo.charfn_of_density(rep40, rho, -x)
        assert abs(a - np.conj(b)) < 1e-12


def test_charfn_rejects_unnormalised(rep40):
    with pytest.raises(ValueError):
        fo.charfn_of_density(rep40, 2 * basis(40, 0, 0), [0.1, 0.2])


def test_fourier_weyl(rep40):
    vals = fo.fourier_weyl(rep40, basis(40, 0, 0), DISC)
    assert np.allclose(vals, np.exp(-0.25 * np.sum(DISC ** 2, axis=1)), atol=1e-12)
    rep60 = fo.FockRep(fo.HEAVY_CUTOFF)
    assert fo.instrument_shape_residual(rep60, 1.0, DISC[DISC[:, 0] ** 2 + DISC[:, 1] ** 2 <= 4]) < 1e-4
    ident = np.abs(fo.fourier_weyl(rep40, np.eye(40), np.array([[0.0, 0.0], [0.5, 0.0], [2.0, 0.0]])))
    assert ident[0] > ident[1] > ident[2]


def test_parseval_examples(rep40):
    e00, e11, e10 = basis(40, 0, 0), basis(40, 1, 1), basis(40, 1, 0)
    r = fo.parseval_check(rep40, e00, e00)
    assert r.rel_error < 1e-3 and abs(r.rhs - 1) < 1e-3 and not r.coarse
    assert fo.parseval_check(rep40, e00, e11).abs_error < 1e-3
    assert fo.parseval_check(rep40, e10, e10).rel_error < 1e-3
    with pytest.raises(ValueError):
        fo.parseval_check(rep40, basis(40, 20, 20), e00)


def test_parseval_coarse_flag(rep40):
    e00 = basis(40, 0, 0)
    r = fo.parseval_check(rep40, e00, e00, R=8.0, n=9, tol=1e-3)
    assert r.coarse


def test_translate_average_examples(rep40):
    e00, e11, e10 = basis(40, 0, 0), basis(40, 1, 1), basis(40, 1, 0)
    r = fo.translate_average_check(rep40, e00, e00)
    assert abs(r.lhs - 2 * np.pi) < 1e-12 and r.rel_error < 5e-3
    G = (e10 + e10.T) / np.sqrt(2)
    assert fo.translate_average_check(rep40, e00, G).abs_error < 1e-3
    assert fo.translate_average_check(rep40, e00 + e11, e00).rel_error < 5e-3
    assert fo.OracleResult(1, 1, 0, 0, 0, False).to_json()["lhs"] == [1, 0]


def test_beam_splitter_convolution():
    from quasifree import channel as chn
    from quasifree import gaussian as ga
    from quasifree.phasespace import PhaseMap, make_hybrid

    N = 25
    rep = fo.FockRep(N)
    rho = fo.gaussian_state_matrix(rep, "thermal", t=0.2)
    c = 1 / np.sqrt(2)
    S = np.array([[c, 0], [c, 0], [0, c], [0, c]])
    bs = ga.make_gaussian_channel(PhaseMap(make_hybrid(1, 0), make_hybrid(2, 0), S))
    A = np.zeros((4, 4))
    A[np.ix_([0, 2], [0, 2])] = cf.thermal(0.2).cov
    A[np.ix_([1, 3], [1, 3])] = cf.vacuum(1).cov
    joint = cf.gaussian_charfn(make_hybrid(2, 0), None, A)
    out = chn.apply(chn.from_gaussian(bs), joint)
    pts = DISC[:20] * 0.6
    th, vac = cf.thermal(0.2), cf.vacuum(1)
    assert np.allclose(out(pts), th(c * pts) * vac(c * pts), atol=1e-14)
    assert fo.beam_splitter_residual(rho, out, pts, N=N) < 1e-6


def test_displaced_thermal_distance():
    assert fo.displaced_thermal_distance(0.5, 0.0) < 1e-12
    pure = fo.displaced_thermal_distance(0.5, 1.2)
    assert abs(pure - 2 * np.sqrt(1 - np.exp(-0.5 * 1.2 ** 2))) < 1e-8
