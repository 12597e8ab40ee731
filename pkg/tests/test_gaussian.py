import numpy as np
import pytest
from hypothesis import given

from quasifree import charfun as cf
from quasifree import gaussian as ga
from quasifree.charfun import PositivityError
from quasifree.phasespace import PhaseMap, PhaseSpace, direct_sum, make_hybrid

from strategies import HYBRID_11, random_channel, random_state, seeds

X = make_hybrid(1, 0)
C2 = make_hybrid(0, 2)


def amplifier(B=0.5):
    return ga.make_gaussian_channel(PhaseMap(X, X, np.sqrt(2) * np.eye(2)), None, B * np.eye(2))


def heterodyne():
    return ga.make_gaussian_channel(PhaseMap(C2, X, np.eye(2)), None, 0.5 * np.eye(2))


def test_identity_valid():
    ch = ga.identity_channel(HYBRID_11)
    assert not np.any(ch.delta) and ch.min_eigenvalue == 0


def test_amplifier_minimal_noise():
    ch = amplifier()
    assert np.allclose(ch.delta, -X.sigma)
    assert abs(ch.min_eigenvalue) < 1e-12
    assert np.allclose(np.linalg.eigvalsh(ch.B + 0.5j * ch.delta), [0, 1])


def test_amplifier_without_noise_rejected():
    with pytest.raises(PositivityError) as exc:
        amplifier(0.0)
    assert exc.value.report.verdict == "fail" and exc.value.report.min_eigenvalue < 0


def test_asymmetric_noise_rejected():
    with pytest.raises(ValueError):
        ga.make_gaussian_channel(PhaseMap.identity(X), None, [[1, 0.3], [0, 1]])


def test_apply_amplifier_and_heterodyne():
    out = ga.apply_gaussian(amplifier(), cf.vacuum(1))
    assert np.allclose(out.cov, 1.5 * np.eye(2))
    husimi = ga.apply_gaussian(heterodyne(), cf.vacuum(1))
    assert husimi.space.is_classical and np.allclose(husimi.cov, np.eye(2))


def test_apply_space_mismatch():
    with pytest.raises(ValueError):
        ga.apply_gaussian(amplifier(), cf.gaussian_charfn(HYBRID_11, None, np.eye(3)))


def test_two_amplifiers_pin_order():
    amp = amplifier()
    two = ga.compose_gaussian(amp, amp)
    assert np.allclose(two.S.matrix, 2 * np.eye(2))
    assert np.allclose(two.B, 1.5 * np.eye(2))
    seq = ga.apply_gaussian(amp, ga.apply_gaussian(amp, cf.vacuum(1)))
    assert np.allclose(ga.apply_gaussian(two, cf.vacuum(1)).cov, seq.cov)
    # asymmetric pair: a displacement then an amplifier differs from the reverse
    shift = ga.make_gaussian_channel(PhaseMap.identity(X), [1.0, 0.0])
    a_then_s = ga.compose_gaussian(shift, amp)
    s_then_a = ga.compose_gaussian(amp, shift)
    assert np.allclose(a_then_s.lam, [1, 0]) and np.allclose(s_then_a.lam, [np.sqrt(2), 0])


def test_compose_identity_either_side(rng):
    ch = random_channel(rng, HYBRID_11)
    idc = ga.identity_channel(HYBRID_11)
    for c in (ga.compose_gaussian(ch, idc), ga.compose_gaussian(idc, ch)):
        assert np.allclose(c.S.matrix, ch.S.matrix) and np.allclose(c.B, ch.B) and np.allclose(c.lam, ch.lam)


def test_discard_marginal():
    ch = ga.restrict_gaussian(amplifier(), [])
    d = ga.compose_gaussian(ch, amplifier())
    assert d.out_space.dim == 0 and d.S.matrix.shape == (2, 0)


def test_tensor_examples():
    idt = ga.tensor_gaussian(ga.identity_channel(X), ga.identity_channel(X))
    assert np.allclose(idt.S.matrix, np.eye(4)) and not np.any(idt.B)
    t = ga.tensor_gaussian(amplifier(), ga.identity_channel(X))
    two_vac = cf.gaussian_charfn(direct_sum(X, X), None, 0.5 * np.eye(4))
    out = ga.apply_gaussian(t, two_vac)
    assert np.allclose(out.cov, np.diag([1.5, 1.5, 0.5, 0.5]))
    back = ga.restrict_gaussian(t, [0, 1])
    assert np.allclose(back.S.matrix[:2], amplifier().S.matrix) and np.allclose(back.B, amplifier().B)


@given(seeds)
def test_compose_equals_sequential(seed):
    rng = np.random.default_rng(seed)
    t1, t2 = random_channel(rng, HYBRID_11), random_channel(rng, HYBRID_11)
    rho = random_state(rng, HYBRID_11)
    both = ga.compose_gaussian(t2, t1)
    a = ga.apply_gaussian(both, rho)
    b = ga.apply_gaussian(t2, ga.apply_gaussian(t1, rho))
    assert np.max(np.abs(a.mean - b.mean)) < 1e-12 and np.max(np.abs(a.cov - b.cov)) < 1e-12
    assert both.min_eigenvalue >= -1e-9 * max(1, np.abs(both.B).max())


@given(seeds)
def test_noiseless_closed_under_compose(seed):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=3)
    P = np.array([[np.cos(q[0]), -np.sin(q[0])], [np.sin(q[0]), np.cos(q[0])]]) @ np.diag([np.exp(q[1]), np.exp(-q[1])])
    u = ga.make_gaussian_channel(PhaseMap(X, X, P), rng.normal(size=2))
    v = ga.make_gaussian_channel(PhaseMap(X, X, P.T), rng.normal(size=2))
    assert ga.classify(ga.compose_gaussian(u, v))["noiseless"]


def test_classify_examples():
    assert ga.classify(ga.identity_channel(X))["noiseless"]
    assert ga.classify(heterodyne())["smoothing"]
    pos = ga.make_gaussian_channel(PhaseMap(make_hybrid(0, 1), X, [[1.0], [0.0]]))
    flags = ga.classify(pos)
    assert flags["noiseless"] and not flags["smoothing"]


def _check_factorization(ch, rng):
    e, n, env = ga.noise_factorize(ch)
    r = ga.compose_gaussian(n, e)
    assert np.array_equal(r.S.matrix, ch.S.matrix)
    pts = rng.normal(size=(100, ch.out_space.dim))
    assert np.max(np.abs(cf.evaluate(r.noise, pts) - cf.evaluate(ch.noise, pts))) < 1e-12
    assert ga.classify(n)["noiseless"]
    assert np.allclose(env.sigma, ch.delta)
    return env


def test_noise_factorize_examples(rng):
    env = _check_factorization(ga.identity_channel(X), rng)
    assert env.is_classical
    env = _check_factorization(amplifier(), rng)
    assert np.allclose(env.sigma, -X.sigma)
    env = _check_factorization(heterodyne(), rng)
    assert np.allclose(env.sigma, -X.sigma)


@given(seeds)
def test_noise_factorize_random(seed):
    rng = np.random.default_rng(seed)
    _check_factorization(random_channel(rng, HYBRID_11), rng)


def test_noise_factorize_minimal(rng):
    for ch in (amplifier(), heterodyne(), ga.identity_channel(X), random_channel(rng, HYBRID_11)):
        e, n, mid = ga.noise_factorize_minimal(ch)
        r = ga.compose_gaussian(n, e)
        assert np.allclose(r.S.matrix, ch.S.matrix, atol=1e-12)
        assert np.allclose(r.B, ch.B, atol=1e-12) and np.allclose(r.lam, ch.lam, atol=1e-12)
        assert ga.classify(n)["noiseless"]
    assert ga.noise_factorize_minimal(ga.identity_channel(X))[2].dim == 0


def test_bloch_messiah_normal_form():
    D = np.diag([np.exp(0.3), np.exp(-0.3)])
    bm = ga.bloch_messiah(D)
    assert np.allclose(bm.S1, np.eye(2)) and np.allclose(bm.S3, np.eye(2)) and np.allclose(bm.S2, D)
    assert np.allclose(bm.squeezing, [0.3])


def test_bloch_messiah_orthogonal():
    th = 0.7
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    assert np.allclose(ga.bloch_messiah(R).S2, np.eye(2))


def _random_symplectic(rng, n):
    from scipy.linalg import expm

    sig = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    H = rng.normal(size=(2 * n, 2 * n))
    return expm(sig @ (H + H.T) / 2), sig


@given(seeds)
def test_bloch_messiah_reconstruction(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    S, sig = _random_symplectic(rng, n)
    bm = ga.bloch_messiah(S)
    assert np.max(np.abs(bm.S1 @ bm.S2 @ bm.S3 - S)) < 1e-10 * max(1, np.linalg.norm(S))
    for O in (bm.S1, bm.S3):
        assert np.allclose(O.T @ O, np.eye(2 * n), atol=1e-10)
        assert np.allclose(O.T @ sig @ O, sig, atol=1e-10)
    assert np.allclose(bm.S2, np.diag(np.diag(bm.S2)))


def test_bloch_messiah_degenerate_identity_block():
    S = np.eye(4)
    S[0, 0], S[2, 2] = 2.0, 0.5  # mode 1 squeezed, mode 2 untouched
    bm = ga.bloch_messiah(S)
    assert np.allclose(bm.S1 @ bm.S2 @ bm.S3, S)


def test_bloch_messiah_rejects_non_symplectic():
    with pytest.raises(ValueError):
        ga.bloch_messiah(np.diag([2.0, 2.0]))
    with pytest.raises(ValueError):
        ga.bloch_messiah(np.eye(3))


def test_channel_json():
    js = amplifier().to_json()
    assert js["in"] == {"n": 1, "s": 0} and np.allclose(js["B"], 0.5 * np.eye(2))


def test_noise_space_form():
    assert amplifier().noise_space.same_as(PhaseSpace(-X.sigma))
