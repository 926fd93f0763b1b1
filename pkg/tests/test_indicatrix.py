import time
from itertools import permutations

import numpy as np
import pytest

from finslerkit import indicatrix as ind
from finslerkit import minkowski as mk
from conftest import unit

RANDERS3 = {"b": [0.3, 0.2, 0.0]}


def test_indicatrix_point_examples(randers2, rng):
    p = ind.indicatrix_point(mk.catalog("euclidean", 3), [0, 0, 1])
    np.testing.assert_allclose(p.v, [0, 0, 1], atol=1e-15)
    assert np.abs(p.basis[:, 2]).max() < 1e-15
    np.testing.assert_allclose(ind.indicatrix_point(randers2, [1, 0]).v, [2 / 3, 0], atol=1e-15)
    for name in mk.CATALOG:
        params = {"matrix": np.diag([1, 2, 3.0])} if name == "linear-image" else ({"b": [0.4, 0, 0]} if name == "randers" else {})
        F = mk.catalog(name, 3, params)
        for u in unit(rng, 100, 3):
            p = ind.indicatrix_point(F, u)
            assert np.abs(p.basis @ p.tensors.dF).max() < 1e-10


def test_induced_metric(rng):
    F = mk.catalog("euclidean", 3)
    np.testing.assert_allclose(ind.induced_metric(F, ind.indicatrix_point(F, [1, 2, 3])), np.eye(2), atol=1e-14)
    F = mk.catalog("randers", 3, RANDERS3)
    for u in unit(rng, 50, 3):
        p = ind.indicatrix_point(F, u)
        assert np.abs(ind.induced_metric(F, p) - ind.angular_pullback(F, p)).max() < 1e-10
    Q = mk.catalog("quartic-smoothed", 3)
    ev = [np.linalg.eigvalsh(ind.induced_metric(Q, ind.indicatrix_point(Q, u)))[0] for u in mk.default_directions(3, 200)]
    assert min(ev) > 0


def test_cubic_form(randers2, rng):
    E = mk.catalog("euclidean", 3)
    assert np.abs(ind.cubic_form(E, ind.indicatrix_point(E, [1, 0, 0]))).max() < 1e-14
    F = mk.catalog("randers", 3, RANDERS3)
    for u in unit(rng, 50, 3):
        C = ind.cubic_form(F, ind.indicatrix_point(F, u))
        for perm in permutations(range(3)):
            assert np.abs(C - C.transpose(perm)).max() < 1e-12
    p = ind.indicatrix_point(randers2, [0, 1])
    d = ind.centroaffine_data(randers2, p)
    assert ind.tensor_norm(d.Chat, d.hinv) > 1e-3


def test_tchebychev_routes(rng):
    E = mk.catalog("euclidean", 3)
    assert np.abs(ind.tchebychev_form(E, ind.indicatrix_point(E, [1, 1, 0]))).max() < 1e-14
    F = mk.catalog("randers", 3, RANDERS3)
    for k, u in enumerate(unit(rng, 50, 3)):
        p = ind.indicatrix_point(F, u)
        T = ind.tchebychev_form(F, p)
        assert np.abs(T - ind.tchebychev_trace(F, p)).max() < 1e-8
        if k < 10:
            assert np.abs(T - ind.tchebychev_volume(F, p)).max() < 1e-4


def test_semi_c_residual(randers2, rng):
    E = mk.catalog("euclidean", 3)
    pE = ind.indicatrix_point(E, [1, 0, 0])
    for q in (-0.5, 1.0, 2.0, 7.0):
        assert ind.semi_c_residual(E, pE, q) == 0.0
    for F in (randers2, mk.catalog("randers", 3, RANDERS3)):
        for u in unit(rng, 50, F.dimension):
            assert ind.semi_c_residual(F, ind.indicatrix_point(F, u), 2.0) < 1e-8
    with pytest.raises(ValueError):
        ind.semi_c_residual(E, pE, -2.0)


def test_best_fit_q_finds_two_for_randers(rng):
    F = mk.catalog("randers", 3, RANDERS3)
    q, r = ind.best_fit_q(F, ind.indicatrix_point(F, unit(rng, 1, 3)[0]))
    assert q == pytest.approx(2.0, abs=1e-6) and r < 1e-8


def test_quartic_is_not_semi_c(rng):
    F = mk.catalog("quartic-smoothed", 3)
    q, r = ind.best_fit_q(F, ind.indicatrix_point(F, [0.6, 0.3, 0.2]))
    assert r > 1e-3


def test_norm_identity_example():
    T = np.array([0.7, 0.0, 0.0])
    C = ind.semi_c_cubic_form(T, 2.0, 4)
    assert ind.tensor_norm(C, np.eye(3)) ** 2 == pytest.approx(5.4 * 0.49, rel=1e-13)
    assert ind.cubic_norm_ratio(4, 2.0) == pytest.approx(5.4)


def test_synthetic_identity_grid(rng):
    for n in (4, 5):
        for q in (2.0, 0.5, -1.0):
            T = rng.normal(size=n - 1)
            C = ind.semi_c_cubic_form(T, q, n)
            lhs = ind.tensor_norm(C, np.eye(n - 1)) ** 2
            assert abs(lhs - ind.cubic_norm_ratio(n, q) * T @ T) <= 1e-12 * max(1, lhs)
            # its normalised trace is T again, so the form annihilates M^q
            np.testing.assert_allclose(np.einsum("abb->a", C) / (n - 1), T, atol=1e-13)
            assert np.abs(ind.semi_c_tensor(C, np.eye(n - 1), T, q, n)).max() < 1e-12


def test_matched_invariants_under_linear_maps(rng):
    F = mk.catalog("randers", 3, RANDERS3)
    L = rng.normal(size=(3, 3)) + 2 * np.eye(3)
    Ft = mk.catalog("linear-image", 3, {"matrix": L, "base": F})
    for u in unit(rng, 20, 3):
        a = ind.matched_scalar_invariants(Ft, ind.indicatrix_point(Ft, u))
        b = ind.matched_scalar_invariants(F, ind.indicatrix_point(F, L @ u))
        np.testing.assert_allclose(a, b, atol=1e-8)


def test_equivalence_check_examples(randers2, rng):
    E = mk.catalog("euclidean", 2)
    assert ind.equivalence_check(E, E, np.eye(2)) == 0.0
    Li = mk.catalog("linear-image", 2, {"matrix": np.diag([2.0, 1.0])})
    assert ind.equivalence_check(Li, E, np.diag([2.0, 1.0])) < 1e-12
    best = min(ind.equivalence_check(E, randers2, rng.normal(size=(2, 2))) for _ in range(200))
    assert best > 0.05
    with pytest.raises(ValueError):
        ind.equivalence_check(E, E, np.zeros((2, 2)))


def test_equivalence_solve_examples(randers2):
    E = mk.catalog("euclidean", 2)
    Li = mk.catalog("linear-image", 2, {"matrix": np.diag([2.0, 1.0])})
    res = ind.equivalence_solve(E, Li)
    assert res.success and res.residual < 1e-6
    F1 = mk.catalog("randers", 2, {"b": [0.3, 0.0]})
    r = np.random.default_rng(7)
    while True:
        L0 = r.normal(size=(2, 2))
        if np.linalg.cond(L0) < 5:
            break
    F2 = mk.catalog("linear-image", 2, {"matrix": L0, "base": F1})
    res = ind.equivalence_solve(F1, F2, seed=7)
    assert res.success and res.residual < 1e-6
    assert ind.equivalence_check(F1, F2, res.L) < 1e-6
    res = ind.equivalence_solve(E, randers2)
    assert not res.success and res.residual > 1e-2
    assert set(res.as_dict()) == {"L", "residual", "success", "restarts", "history"}


def test_cartan_pullback_signs():
    F1 = mk.catalog("randers", 2, {"b": [0.3, 0.0]})
    L0 = np.array([[1.2, 0.4], [-0.3, 0.9]])
    F2 = mk.catalog("linear-image", 2, {"matrix": np.linalg.inv(L0), "base": F1})
    # F1(u) = F2(L0 u) exactly
    signs, mixed = ind.cartan_pullback_signs(F1, F2, L0)
    assert not mixed and np.all(signs == 1)


def test_blaschke_deicke(randers2):
    assert max(ind.blaschke_deicke_residual(mk.catalog("euclidean", 3))) < 1e-10
    Li = mk.catalog("linear-image", 3, {"matrix": [[2, 1, 0], [0, 1, 0.5], [0.2, 0, 1]]})
    assert max(ind.blaschke_deicke_residual(Li)) < 1e-8
    eta, fit = ind.blaschke_deicke_residual(randers2)
    assert eta > 1e-2 and fit > 1e-2
