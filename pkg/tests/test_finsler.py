import numpy as np
import pytest

from finslerkit import finsler as fs
from finslerkit import jets
from finslerkit.jets import fd_oracle
from conftest import unit
from oracles import christoffel_exp, spray_exp


def samples(M, rng, count=50, margin=0.1):
    pad = margin * (M.upper - M.lower)
    X = M.lower + pad + rng.random((count, M.dimension)) * (M.upper - M.lower - 2 * pad)
    return X, unit(rng, count, M.dimension) * rng.uniform(0.5, 2, (count, 1))


CATALOG = [fs.catalog(name, 2) for name in fs.CATALOG] + [fs.catalog("randers-exp", 3), fs.catalog("riemannian-exp", 3)]


def test_riemannian_spray_closed_form(riemannian_exp):
    x, y = np.array([0.3, -0.2]), np.array([0.7, 1.1])
    G = fs.spray(riemannian_exp, x, y)
    np.testing.assert_allclose(G, [-0.5 * np.exp(2 * x[0]) * y[1] ** 2, y[0] * y[1]], atol=1e-14)
    N = fs.nonlinear_connection(riemannian_exp, x, y)
    np.testing.assert_allclose(N, [[0, -np.exp(2 * x[0]) * y[1]], [y[1], y[0]]], atol=1e-14)


@pytest.mark.parametrize("n", [2, 3])
def test_chern_matches_christoffel_oracle(n, rng):
    M = fs.catalog("riemannian-exp", n)
    X, Y = samples(M, rng, 20)
    b = fs.curvature_bundle(M, X, Y)
    oracle = christoffel_exp(n)
    for k in range(20):
        np.testing.assert_allclose(b.Gamma[k], oracle(X[k]), atol=1e-9)
        np.testing.assert_allclose(b.G[k], spray_exp(X[k], Y[k]), atol=1e-9)
    for name in ("A", "B", "E", "L", "J", "P"):
        assert np.abs(getattr(b, name)).max() <= 1e-9, name


def test_locally_minkowski_is_flat(rng):
    M = fs.catalog("minkowski", 2, {"norm": "quartic-smoothed"})
    X, Y = samples(M, rng, 10)
    b = fs.curvature_bundle(M, X, Y)
    for name in ("G", "N", "Gamma", "B", "S", "hdtau"):
        assert np.abs(getattr(b, name)).max() < 1e-13, name


@pytest.mark.parametrize("M", CATALOG, ids=lambda M: f"{M.label}-{M.dimension}")
def test_homogeneity_ladder(M, rng):
    X, Y = samples(M, rng, 50)
    b1 = fs.curvature_bundle(M, X, Y)
    for lam in (0.5, 2.0):
        b2 = fs.curvature_bundle(M, X, lam * Y)
        for name, deg in (("G", 2), ("N", 1), ("Gamma", 0), ("B", -1)):
            a, c = getattr(b2, name), lam**deg * getattr(b1, name)
            assert np.abs(a - c).max() <= 1e-8 * max(1.0, np.abs(c).max()), name
    assert np.abs(fs.spray(M, X, 2 * Y) - 4 * fs.spray(M, X, Y)).max() < 1e-9


@pytest.mark.parametrize("M", CATALOG, ids=lambda M: f"{M.label}-{M.dimension}")
def test_euler_contractions_and_symmetries(M, rng):
    X, Y = samples(M, rng, 50)
    b = fs.curvature_bundle(M, X, Y)
    assert np.abs(np.einsum("bij,bj->bi", b.N, Y) - 2 * b.G).max() < 1e-9
    assert np.abs(np.einsum("bijk,bj->bik", b.Gamma, Y) - b.N).max() < 1e-8
    assert np.abs(np.einsum("bijkl,bl->bijk", b.B, Y)).max() < 1e-9
    assert np.abs(np.einsum("bjkl,bj->bkl", b.L, Y)).max() < 1e-9
    assert np.abs(np.einsum("bk,bk->b", b.J, Y)).max() < 1e-9
    assert np.abs(np.einsum("bi,bi->b", b.hdtau, Y) - b.S).max() < 1e-8
    assert np.abs(b.Gamma - b.Gamma.swapaxes(-1, -2)).max() < 1e-12
    assert np.abs(b.P - b.P.swapaxes(-3, -2)).max() < 1e-10
    assert np.abs(b.E - b.E.swapaxes(-1, -2)).max() < 1e-12
    for ax in ((-1, -2), (-2, -3)):
        assert np.abs(b.B - b.B.swapaxes(*ax)).max() < 1e-9
        assert np.abs(b.L - b.L.swapaxes(*ax)).max() < 1e-9
    # definitional traces
    np.testing.assert_allclose(b.E, 0.5 * np.einsum("bmmjk->bjk", b.B), atol=1e-12)
    ginv = np.linalg.inv(b.g)
    np.testing.assert_allclose(b.J, np.einsum("bjl,bjkl->bk", ginv, b.L), atol=1e-12)
    # S is 1-homogeneous
    assert np.abs(fs.s_curvature(M, X, 3 * Y) - 3 * b.S).max() < 1e-8
    # Berwald => Landsberg and mean Berwald zero, per sample
    small = np.abs(b.B).reshape(len(X), -1).max(axis=1) < 1e-9
    assert np.all(np.abs(b.L[small]).max(initial=0) < 1e-9)
    assert np.all(np.abs(b.E[small]).max(initial=0) < 1e-9)


def test_non_berwald_randers_against_fd(randers_exp):
    M = randers_exp
    x, y = np.array([0.2, -0.1]), np.array([0.6, 0.8])
    b = fs.curvature_bundle(M, x, y)
    assert np.abs(b.B).max() > 1e-3 and np.abs(b.E).max() > 1e-4
    assert np.abs(b.L).max() > 1e-4 and np.abs(b.P).max() > 1e-4
    # B^i_{jkl} as third y-differences of the spray
    for i in range(2):
        est = fd_oracle(lambda v: fs.spray(M, x, v)[i], y, (2, 1), richardson=True).value
        assert b.B[i, 0, 0, 1] == pytest.approx(est, abs=1e-5)
    # L from the FD Berwald tensor and the computed g
    Bfd = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    idx = [0, 0]
                    for a in (j, k, l):
                        idx[a] += 1
                    Bfd[i, j, k, l] = fd_oracle(lambda v: fs.spray(M, x, v)[i], y, idx, richardson=True).value
    yl = b.g @ y
    np.testing.assert_allclose(b.L, -0.5 * np.einsum("i,ijkl->jkl", yl, Bfd), atol=1e-5)
    # P = -F dGamma/dy against finite differences of the Chern coefficients
    for l in range(2):
        idx = [0, 0]
        idx[l] = 1
        est = fd_oracle(lambda v: fs.chern_coefficients(M, x, v)[0, 1, 1], y, idx, richardson=True).value
        assert b.P[0, 1, 1, l] == pytest.approx(-b.F * est, abs=1e-6)


def test_randers_polar_is_berwald_not_flat(rng):
    M = fs.catalog("randers-polar", 2)
    X, Y = samples(M, rng, 20)
    b = fs.curvature_bundle(M, X, Y)
    assert np.abs(b.N).max() > 0.1
    assert np.abs(b.B).max() < 1e-9 and np.abs(b.L).max() < 1e-9
    assert np.abs(b.A).max() > 1e-3


def test_distortion_examples(rng):
    E = fs.catalog("euclidean", 2)
    b = fs.curvature_bundle(E, [0.1, 0.2], [1.0, 0.0])
    assert b.tau == 0 and b.S == 0 and np.all(b.hdtau == 0)
    R = fs.catalog("riemannian-exp", 3)
    X, Y = samples(R, rng, 10)
    b = fs.curvature_bundle(R, X, Y)
    assert np.abs(b.tau).max() < 1e-12 and np.abs(b.S).max() < 1e-12
    Mk = fs.catalog("minkowski", 2)
    b = fs.curvature_bundle(Mk, *samples(Mk, rng, 10))
    assert np.abs(b.S).max() < 1e-13 and np.abs(b.hdtau).max() < 1e-13
    assert np.abs(b.tau).max() > 1e-3  # tau itself need not vanish


def test_custom_volume_from_expr():
    M = fs.from_expr("sqrt(y1^2+exp(2*x1)*y2^2)", 2, volume="custom", sigma="exp(x1)")
    b = fs.curvature_bundle(M, [0.3, 0.1], [0.4, 0.9])
    assert abs(b.tau) < 1e-12 and abs(b.S) < 1e-12


def test_expr_metric_matches_catalog():
    M1 = fs.from_expr("sqrt(y1^2+exp(2*x1)*y2^2)+0.3*y1", 2)
    M2 = fs.catalog("randers-exp", 2)
    b1 = fs.curvature_bundle(M1, [0.3, 0.1], [0.4, 0.9])
    b2 = fs.curvature_bundle(M2, [0.3, 0.1], [0.4, 0.9])
    for name in ("G", "N", "Gamma", "B", "L", "P"):
        np.testing.assert_allclose(getattr(b1, name), getattr(b2, name), atol=1e-12)


def test_classify_examples():
    rep = fs.classify(fs.catalog("euclidean", 2))
    assert all(rep.verdicts.values()) and rep.theorem11_consistent
    rep = fs.classify(fs.catalog("minkowski", 2, {"norm": "quartic-smoothed"}))
    assert rep.verdicts["berwald"] and not rep.verdicts["riemannian"]
    assert rep.norms["A"] > 1e-3 and rep.norms["B"] < 1e-9
    rep = fs.classify(fs.catalog("randers-exp", 2))
    assert not any(rep.verdicts.values()) and rep.theorem11_consistent
    assert rep.unicorn_candidates == []
    d = rep.as_dict()
    assert set(d["witnesses"]["B"]) == {"x", "y", "value"}


def test_metric_errors():
    with pytest.raises(fs.MetricError):
        fs.catalog("randers-exp", 2, {"b": [0.99, 0.5]})
    with pytest.raises(fs.MetricError):
        fs.catalog("nope", 2)
    with pytest.raises(fs.MetricError):
        fs.catalog("randers-polar", 3)
    with pytest.raises(ValueError):
        fs.curvature_bundle(fs.catalog("euclidean", 2), [0, 0], [1, 0], order=4)


def test_jet_order_six_agrees_with_five(randers_exp):
    x, y = np.array([0.1, 0.2]), np.array([0.3, -0.9])
    b5 = fs.curvature_bundle(randers_exp, x, y, order=5)
    b6 = fs.curvature_bundle(randers_exp, x, y, order=6)
    for name in ("B", "L", "P", "S"):
        np.testing.assert_allclose(getattr(b5, name), getattr(b6, name), atol=1e-12)
