import numpy as np
import pytest
from hypothesis import given
from scipy.integrate import quad
from scipy.stats import norm

from quasifree import channel as chn
from quasifree import charfun as cf
from quasifree import gaussian as ga
from quasifree import protocols as pr
from quasifree.charfun import PositivityError
from quasifree.phasespace import PhaseMap, direct_sum, make_hybrid, trivial_space

from strategies import HYBRID_11, random_channel, random_state, seeds

X = make_hybrid(1, 0)


def cauchy_noise(space, gamma=0.4):
    return cf.general_charfn(space, lambda Z: np.exp(-gamma * np.linalg.norm(Z, axis=-1)) + 0j, "cauchy")


def smoothing_channel(space, gamma=0.4):
    """S = I with classical Cauchy noise on a purely classical mixed form (delta = 0)."""
    return chn.make_channel(PhaseMap.identity(space), cauchy_noise(space, gamma))


def test_preparation_from_trivial():
    vac = cf.vacuum(1)
    prep = chn.preparation(vac)
    assert prep.in_space.dim == 0 and prep.cp_status == "verified_exact"
    out = chn.apply(prep, cf.point_measure(trivial_space()))
    assert np.allclose(out.cov, vac.cov)


def test_identity_and_amplifier_rejection():
    ch = chn.make_channel(PhaseMap.identity(X))
    assert ch.cp_status == "verified_exact" and ch.is_gaussian
    with pytest.raises(PositivityError) as exc:
        chn.make_channel(PhaseMap(X, X, np.sqrt(2) * np.eye(2)))
    rep = exc.value.report
    assert rep.min_eigenvalue < -0.1 and len(rep.witness_points) >= 2
    M = cf.twisted_gram(cf.point_measure(make_hybrid(0, 2)), exc.value.form, np.array(rep.witness_points))
    assert abs(np.linalg.eigvalsh(M)[0] - rep.min_eigenvalue) < 1e-12


def test_general_noise_sampled_and_rejected():
    C = make_hybrid(0, 2)
    ok = chn.make_channel(PhaseMap(C, X, np.eye(2)), cf.pullback(cf.vacuum(1), -np.eye(2), C), verify="sample")
    assert ok.cp_status == "verified_exact"  # Gaussian bodies are always decided exactly
    gen = chn.make_channel(PhaseMap.identity(C), cauchy_noise(C))
    assert gen.cp_status == "sampled_ok" and not gen.report.exact
    with pytest.raises(PositivityError):
        chn.make_channel(PhaseMap(C, X, np.eye(2)), cauchy_noise(C, 0.05))
    unchecked = chn.make_channel(PhaseMap(C, X, np.eye(2)), cauchy_noise(C, 0.05), verify="none")
    assert unchecked.cp_status == "unchecked"


def test_heisenberg_weyl_examples():
    assert chn.heisenberg_weyl(chn.identity(X), [0.3, 0.4])[0] == 1
    pos = pr.position_observable(1, cf.point_measure(make_hybrid(0, 1)))
    c, img = chn.heisenberg_weyl(pos, [0.8])
    assert c == 1 and np.allclose(img, [0.8, 0])
    xi = np.array([0.5, -1.0])
    c, img = chn.heisenberg_weyl(pr.husimi(), xi)
    assert abs(c - np.exp(-0.25 * xi @ xi)) < 1e-15 and np.allclose(img, xi)


def test_mixed_concatenation_pointwise(rng):
    C = make_hybrid(0, 2)
    gen = chn.make_channel(PhaseMap.identity(C), cauchy_noise(C))
    het = chn.make_channel(PhaseMap(C, X, np.eye(2)), cf.pullback(cf.vacuum(1), -np.eye(2), C))
    both = chn.concatenate(gen, het)
    assert both.cp_status == "sampled_ok"
    rho = random_state(rng, X)
    pts = rng.normal(size=(100, 2))
    seq = chn.apply(gen, chn.apply(het, rho))
    assert np.max(np.abs(chn.apply(both, rho)(pts) - seq(pts))) < 1e-12
    f1, _ = chn.heisenberg_weyl(gen, pts[0])
    f2, _ = chn.heisenberg_weyl(het, gen.S(pts[0]))
    assert abs(chn.heisenberg_weyl(both, pts[0])[0] - f1 * f2) < 1e-14


@given(seeds)
def test_covariance_property(seed):
    rng = np.random.default_rng(seed)
    ch = chn.from_gaussian(random_channel(rng, HYBRID_11))
    gen = chn.concatenate(smoothing_channel(HYBRID_11), ch)
    rho = random_state(rng, HYBRID_11)
    xi = rng.normal(size=3)
    pts = rng.normal(size=(10, 3))
    for c in (ch, gen):
        lhs = chn.apply(c, cf.translate(rho, xi))
        rhs = cf.translate(chn.apply(c, rho), c.S.matrix.T @ xi)
        assert np.max(np.abs(lhs(pts) - rhs(pts))) < 1e-12


@given(seeds)
def test_concatenate_associative_general(seed):
    rng = np.random.default_rng(seed)
    C = make_hybrid(0, 2)
    a = chn.make_channel(PhaseMap(C, C, rng.normal(size=(2, 2))), cauchy_noise(C, 0.3), verify="none")
    b = chn.from_gaussian(random_channel(rng, C))
    c = chn.make_channel(PhaseMap(C, C, rng.normal(size=(2, 2))), cauchy_noise(C, 0.7), verify="none")
    l = chn.concatenate(chn.concatenate(c, b), a)
    r = chn.concatenate(c, chn.concatenate(b, a))
    pts = rng.normal(size=(20, 2))
    assert np.allclose(l.S.matrix, r.S.matrix, atol=1e-13)
    assert np.max(np.abs(l.noise(pts) - r.noise(pts))) < 1e-12


@given(seeds)
def test_tensor_marginal_factor(seed):
    rng = np.random.default_rng(seed)
    t1 = chn.from_gaussian(random_channel(rng, X))
    C = make_hybrid(0, 2)
    t2 = chn.make_channel(PhaseMap.identity(C), cauchy_noise(C))
    t = chn.tensor(t1, t2)
    r1, r2 = random_state(rng, X), random_state(rng, C)
    prod = chn.tensor(chn.preparation(r1), chn.preparation(r2))
    joint = chn.apply(chn.concatenate(t, prod), cf.point_measure(trivial_space()))
    m = cf.marginal(joint, [0, 1])
    pts = rng.normal(size=(10, 2))
    want = chn.apply(t1, r1)
    assert np.max(np.abs(m(pts) - want(pts))) < 1e-12
    via = chn.marginal_channel(t, [0, 1])
    inner = chn.apply(chn.concatenate(via, prod), cf.point_measure(trivial_space()))
    assert np.max(np.abs(inner(pts) - want(pts))) < 1e-12


def test_marginal_keep_all_and_none(rng):
    ch = chn.from_gaussian(random_channel(rng, HYBRID_11))
    full = chn.marginal_channel(ch, range(3))
    assert np.allclose(full.S.matrix, ch.S.matrix) and np.allclose(full.gaussian.B, ch.gaussian.B)
    none = chn.marginal_channel(ch, [])
    assert none.out_space.dim == 0 and none.S.matrix.shape == (3, 0)
    assert none.S.matrix.shape == chn.destructive(HYBRID_11).S.matrix.shape


def test_translate_channel():
    idc = chn.identity(X)
    same = chn.translate_channel(idc, [0.0, 0.0])
    assert np.allclose(same.gaussian.lam, 0)
    disp = chn.translate_channel(idc, [1.0, -2.0])
    out = chn.apply(disp, cf.vacuum(1))
    assert np.allclose(out.mean, [1.0, -2.0]) and ga.classify(disp.gaussian)["noiseless"]
    back = chn.translate_channel(disp, [-1.0, 2.0])
    assert np.allclose(back.gaussian.lam, 0)
    C = make_hybrid(0, 2)
    gen = chn.make_channel(PhaseMap.identity(C), cauchy_noise(C))
    tr = chn.translate_channel(gen, [0.5, 0.0])
    z = np.array([0.3, 0.2])
    assert abs(tr.noise(z) - np.exp(0.15j) * gen.noise(z)) < 1e-15


def test_noiseless_homomorphism(rng):
    th = 0.4
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    ch = chn.noiseless_map(X, X, R, lam=[0.3, 0.1])
    pts = rng.normal(size=(30, 2))
    assert np.allclose(np.abs(ch.noise(pts)), 1)
    x, y = pts[0], pts[1]
    assert abs(ch.noise(x + y) - ch.noise(x) * ch.noise(y)) < 1e-14
    with pytest.raises(ValueError):
        chn.noiseless_map(X, X, 2 * np.eye(2))


def test_permutation():
    A, B = make_hybrid(1, 0), make_hybrid(0, 1)
    sw = chn.permutation([A, B], [1, 0])
    assert sw.out_space.same_as(direct_sum(B, A))
    rho = cf.gaussian_charfn(make_hybrid(1, 1), [1.0, 2.0, 3.0], np.diag([1.0, 2.0, 3.0]))
    out = chn.apply(sw, rho)
    assert np.allclose(out.mean, [3.0, 1.0, 2.0])


def test_general_noise_factorize(rng):
    C = make_hybrid(0, 2)
    ch = chn.make_channel(PhaseMap(C, C, rng.normal(size=(2, 2))), cauchy_noise(C))
    e, n, env = chn.noise_factorize(ch)
    r = chn.concatenate(n, e)
    pts = rng.normal(size=(100, 2))
    assert np.array_equal(r.S.matrix, ch.S.matrix)
    assert np.max(np.abs(r.noise(pts) - ch.noise(pts))) < 1e-12


def test_classify_general():
    C = make_hybrid(0, 2)
    flags = chn.classify(chn.make_channel(PhaseMap.identity(C), cauchy_noise(C)))
    assert not flags["noiseless"] and flags["generic"]


def test_cb_distance_classical():
    C = make_hybrid(0, 1)
    S = PhaseMap.identity(C)
    t0 = chn.from_gaussian(ga.make_gaussian_channel(S, [0.0], [[1.0]]))
    assert chn.cb_distance_gaussian(t0, t0) == 0
    t2 = chn.translate_channel(t0, [2.0])
    exact = quad(lambda x: abs(norm.pdf(x) - norm.pdf(x, 2.0)), -20, 20, epsabs=1e-13)[0]
    assert abs(chn.cb_distance_gaussian(t0, t2) - exact) < 1e-10
    assert abs(exact - 2 * (2 * norm.cdf(1) - 1)) < 1e-10
    with pytest.raises(ValueError):
        chn.cb_distance_gaussian(t0, chn.from_gaussian(ga.make_gaussian_channel(S, [0.0], [[2.0]])))


def test_cb_distance_quantum_noise():
    # heterodyne-free example: S = 0 on one mode, noise = vacuum, shifted
    S = PhaseMap(X, X, np.zeros((2, 2)))
    t0 = chn.from_gaussian(ga.make_gaussian_channel(S, None, 0.5 * np.eye(2)))
    t1 = chn.translate_channel(t0, [0.0, 1.2])
    ref = 2 * np.sqrt(1 - np.exp(-0.5 * 1.2 ** 2))  # pure states
    assert abs(chn.cb_distance_gaussian(t0, t1) - ref) < 1e-8
    th = chn.from_gaussian(ga.make_gaussian_channel(S, None, np.diag([2.0, 0.5])))
    d = chn.cb_distance_gaussian(th, chn.translate_channel(th, [0.7, 0.0]))
    assert 0 < d < 2


def test_cb_distance_unsupported():
    A = make_hybrid(2, 0)
    S = PhaseMap(A, A, np.zeros((4, 4)))
    t0 = chn.from_gaussian(ga.make_gaussian_channel(S, None, 0.5 * np.eye(4)))
    with pytest.raises(NotImplementedError):
        chn.cb_distance_gaussian(t0, chn.translate_channel(t0, [1, 0, 0, 0]))


def test_apply_space_mismatch():
    with pytest.raises(ValueError):
        chn.apply(chn.identity(X), cf.vacuum(2))
    with pytest.raises(ValueError):
        chn.concatenate(chn.identity(X), chn.identity(HYBRID_11))
