import warnings

import numpy as np
import pytest

from finslerkit import jets
from finslerkit import minkowski as mk
from finslerkit.jets import fd_oracle
from conftest import unit

ALL_NORMS = [
    ("euclidean", {}), ("randers", {"b": [0.5, 0.0, 0.0]}), ("quartic-smoothed", {}),
    ("linear-image", {"matrix": [[2, 0.3, 0], [0, 1, 0.2], [0.1, 0, 1.5]], "base": "randers",
                      "base_params": {"b": [0.3, 0, 0]}}),
]


def test_catalog_values():
    assert mk.catalog("euclidean", 3)([1, 2, 2]) == pytest.approx(3.0)
    assert mk.catalog("randers", 2, {"b": [0.5, 0]})([1, 0]) == pytest.approx(1.5)


def test_quartic_smoothed_positive_definite():
    F = mk.catalog("quartic-smoothed", 3, {"eps": 0.1})
    rep = mk.check_minkowski(F, mk.default_directions(3, 200))
    assert rep.valid and rep.min_eigenvalue > 0


def test_check_minkowski_examples(randers2):
    rep = mk.check_minkowski(mk.catalog("euclidean", 3))
    assert rep.homogeneity < 1e-12 and rep.euler < 1e-12
    assert rep.min_eigenvalue == pytest.approx(1.0, abs=1e-12)
    rep = mk.check_minkowski(randers2)
    assert rep.valid and rep.homogeneity < 1e-10 and rep.euler < 1e-10 and rep.min_eigenvalue > 0
    assert set(rep.as_dict()) >= {"homogeneity", "euler", "min_eigenvalue", "witness", "valid"}


def test_construction_errors():
    with pytest.raises(mk.NormError):
        mk.catalog("linear-image", 2, {"matrix": [[1, 2], [2, 4]]})
    with pytest.raises(mk.NormError):
        mk.catalog("randers", 2, {"b": [0.8, 0.7]})
    with pytest.raises(mk.NormError):
        mk.catalog("nope", 2)
    with pytest.raises(mk.NormError):
        mk.from_expr("x1*y1", 1)


def test_fundamental_tensor_examples(randers2, rng):
    np.testing.assert_allclose(mk.fundamental_tensor(mk.catalog("euclidean", 3), [0.3, -1, 2]), np.eye(3), atol=1e-14)
    g = mk.fundamental_tensor(randers2, [1.0, 0.0])
    np.testing.assert_allclose(g, np.diag([2.25, 1.5]), atol=1e-14)
    for i, j in [(0, 0), (0, 1), (1, 1)]:
        idx = [0, 0]
        idx[i] += 1
        idx[j] += 1
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # g_12 = 0 here
            est = fd_oracle(lambda v: 0.5 * randers2(v) ** 2, [1.0, 0.0], idx, richardson=True).value
        assert g[i, j] == pytest.approx(est, abs=1e-8)
    Y = rng.normal(size=(10, 2))
    np.testing.assert_allclose(mk.fundamental_tensor(randers2, 2 * Y), mk.fundamental_tensor(randers2, Y), atol=1e-10)


def test_cartan_tensor_examples(randers2, rng):
    assert np.abs(mk.cartan_tensor(mk.catalog("euclidean", 3), [1.0, 2, 3])).max() < 1e-15
    y = np.array([1.0, 0.3])
    A = mk.cartan_tensor(randers2, y)
    assert np.abs(A).max() > 1e-3
    # A_ijk = F/4 d^3 F^2 against finite differences
    est = fd_oracle(lambda v: randers2(v) ** 2, y, (2, 1), richardson=True).value
    assert A[0, 0, 1] == pytest.approx(randers2(y) / 4 * est, rel=1e-6)
    for name, params in ALL_NORMS:
        F = mk.catalog(name, 3, params)
        Y = unit(rng, 50, 3)
        assert np.abs(np.einsum("bijk,bi->bjk", mk.cartan_tensor(F, Y), Y)).max() < 1e-10


def test_cartan_form_examples(randers2, rng):
    assert np.abs(mk.cartan_form(mk.catalog("euclidean", 3), [1.0, 2, 3])).max() < 1e-14
    # reflection symmetry y2 -> -y2 plus Euler force eta(e1) = 0 exactly
    np.testing.assert_allclose(mk.cartan_form(randers2, [1.0, 0.0]), 0.0, atol=1e-14)
    y = np.array([1.0, 0.3])
    eta = mk.cartan_form(randers2, y)
    assert np.abs(eta).max() > 1e-3 and abs(eta @ y) < 1e-10
    # finite-difference route through log sqrt det g
    def logvol(v):
        return 0.5 * np.log(np.linalg.det(mk.fundamental_tensor(randers2, v)))
    est = [fd_oracle(logvol, y, idx, richardson=True).value for idx in [(1, 0), (0, 1)]]
    np.testing.assert_allclose(eta, est, atol=1e-7)
    # eta is the y-gradient of a 0-homogeneous function: degree -1, so F * eta is 0-homogeneous
    Y = rng.normal(size=(10, 2))
    np.testing.assert_allclose(mk.cartan_form(randers2, 2 * Y), mk.cartan_form(randers2, Y) / 2, atol=1e-10)


def test_angular_metric(randers2, rng):
    np.testing.assert_allclose(mk.angular_metric(mk.catalog("euclidean", 2), [1.0, 0.0]), np.diag([0, 1]), atol=1e-15)
    Y = rng.normal(size=(20, 2))
    t = mk.norm_tensors(randers2, Y)
    np.testing.assert_allclose(t.g, t.h + np.einsum("bi,bj->bij", t.dF, t.dF), atol=1e-10)
    for name, params in ALL_NORMS:
        F = mk.catalog(name, 3, params)
        h = mk.norm_tensors(F, rng.normal(size=(20, 3))).h
        ev = np.linalg.eigvalsh(h)
        assert np.all(np.abs(ev[:, 0]) < 1e-10) and np.all(ev[:, 1] > 1e-6)


def test_relative_invariance(rng):
    F = mk.catalog("randers", 3, {"b": [0.3, 0.2, 0]})
    worst = 0.0
    for _ in range(20):
        L = rng.normal(size=(3, 3)) + 2 * np.eye(3)
        y = rng.normal(size=3)
        Ft = mk.catalog("linear-image", 3, {"matrix": L, "base": F})
        t, s = mk.norm_tensors(Ft, y), mk.norm_tensors(F, L @ y)
        worst = max(worst, np.abs(t.g - L.T @ s.g @ L).max())
        worst = max(worst, np.abs(t.A - np.einsum("abc,ai,bj,ck->ijk", s.A, L, L, L)).max())
        worst = max(worst, np.abs(t.eta - L.T @ s.eta).max())
    assert worst < 1e-8


def test_inner_product_norms_have_no_cartan(rng):
    Q = rng.normal(size=(3, 3))
    F = mk.catalog("linear-image", 3, {"matrix": Q + 3 * np.eye(3)})
    t = mk.norm_tensors(F, rng.normal(size=(10, 3)))
    assert np.abs(t.A).max() < 1e-12 and np.abs(t.eta).max() < 1e-12


def test_zero_homogeneity(rng):
    for name, params in ALL_NORMS:
        F = mk.catalog(name, 3, params)
        Y = rng.normal(size=(10, 3))
        t = mk.norm_tensors(F, Y)
        for lam in (0.5, 2.0, 10.0):
            s = mk.norm_tensors(F, lam * Y)
            np.testing.assert_allclose(s.g, t.g, atol=1e-10)
            np.testing.assert_allclose(s.A, t.A, atol=1e-10)
            np.testing.assert_allclose(s.F[:, None] * s.eta, t.F[:, None] * t.eta, atol=1e-10)


def test_zero_vector_rejected(randers2):
    with pytest.raises(mk.NormError):
        mk.norm_tensors(randers2, [0.0, 0.0])


def test_norm_from_radial():
    F = mk.norm_from_radial("1", 3)
    assert F([1, 2, 2]) == pytest.approx(3.0, rel=1e-12)
    F = mk.norm_from_radial(lambda u: 1 / jets.sqrt(2 * u[0] * u[0] + u[1] * u[1]), 2)
    y = np.array([0.3, -1.2])
    assert F(y) == pytest.approx(np.sqrt(2 * 0.09 + 1.44), rel=1e-12)
    with pytest.raises(mk.NormConstructionError) as exc:
        mk.norm_from_radial("1+y1^4", 2)
    assert exc.value.min_eigenvalue < 0 and exc.value.witness is not None
    # the milder bump 1 + 0.5 u1^4 keeps the indicatrix convex
    mk.norm_from_radial("1+0.5*y1^4", 2)


def test_default_directions_reproducible():
    for n in (2, 3, 5):
        D = mk.default_directions(n, 50, seed=3)
        assert D.shape == (50, n)
        np.testing.assert_allclose(np.linalg.norm(D, axis=1), 1.0)
        np.testing.assert_array_equal(D, mk.default_directions(n, 50, seed=3))
