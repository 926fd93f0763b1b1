import numpy as np
import pytest
from scipy.integrate import solve_ivp

from finslerkit import finsler as fs
from finslerkit import transport as tr
from conftest import unit
from oracles import christoffel_exp

CATALOG = [fs.catalog(name, 2) for name in fs.CATALOG]


def random_curves(M, rng, count, length=0.5):
    pad = 0.15 * (M.upper - M.lower)
    lo, hi = M.lower + pad, M.upper - pad
    out = []
    while len(out) < count:
        p, q = lo + rng.random((2, M.dimension)) * (hi - lo)
        if np.linalg.norm(q - p) > 0.1:
            out.append(tr.Segment(p, p + length * (q - p) / np.linalg.norm(q - p)) if rng.random() < 0.5
                       else tr.PolynomialCurve([p, q - p, 0.3 * (p - q)]))
            try:
                out[-1].check_inside(M)
            except tr.TransportError:
                out.pop()
    return out


def linear_oracle(seg, y0, n=2):
    gam = christoffel_exp(n)

    def rhs(t, y):
        return -np.einsum("ijk,j,k->i", gam(seg.point(t)), seg.velocity(t), y)

    sol = solve_ivp(rhs, (0, 1), y0, method="DOP853", rtol=1e-13, atol=1e-13)
    return sol.y[:, -1]


def test_euclidean_is_identity(rng):
    M = fs.catalog("euclidean", 2)
    for c in random_curves(M, rng, 5):
        y0 = rng.normal(size=2)
        assert np.all(tr.transport(M, c, y0).y == y0)
        np.testing.assert_array_equal(tr.transport_differential(M, c, y0, [0.3, 0.7]), [0.3, 0.7])


def test_riemannian_matches_linear_oracle(riemannian_exp, rng):
    for c in random_curves(riemannian_exp, rng, 6):
        y0 = rng.normal(size=2)
        np.testing.assert_allclose(tr.transport(riemannian_exp, c, y0).y, linear_oracle(c, y0), atol=1e-8)


def test_riemannian_differential_is_transport_matrix(riemannian_exp):
    c = tr.Segment([-0.3, 0.2], [0.4, -0.1])
    res = tr.transport_with_differential(riemannian_exp, c, np.array([0.6, 0.8]))
    U = np.column_stack([linear_oracle(c, e) for e in np.eye(2)])
    np.testing.assert_allclose(res.U, U, atol=1e-8)


@pytest.mark.parametrize("M", CATALOG, ids=lambda M: M.label)
def test_norm_drift_homogeneity_reversibility(M, rng):
    curves = random_curves(M, rng, 10)
    for c in curves:
        Y0 = unit(rng, 5, 2) * rng.uniform(0.5, 2, (5, 1))
        out = tr.transport(M, c, np.vstack([Y0, 0.5 * Y0, 2 * Y0, 10 * Y0]))
        assert out.drift[0].max() == 0.0
        assert out.max_relative_drift() <= 1e-8
        P = out.y[:5]
        for k, lam in enumerate((0.5, 2.0, 10.0)):
            Pl = out.y[5 * (k + 1): 5 * (k + 2)]
            assert np.abs(Pl - lam * P).max() <= 1e-9 * lam * np.abs(P).max()
        back = tr.transport(M, c.reversed(), P)
        assert np.abs(back.y - Y0).max() <= 1e-8


def test_differential_against_symmetric_difference(randers_exp):
    c = tr.PolynomialCurve([[0.1, -0.2], [0.4, 0.3], [-0.2, 0.1]])
    y0, u, v = np.array([0.5, 0.9]), np.array([0.3, -0.4]), np.array([1.0, 0.2])
    du = tr.transport_differential(randers_exp, c, y0, u)
    s = 1e-5
    fd = (tr.transport(randers_exp, c, y0 + s * u).y - tr.transport(randers_exp, c, y0 - s * u).y) / (2 * s)
    assert np.linalg.norm(du - fd) <= 1e-5 * np.linalg.norm(du)
    res = tr.transport_with_differential(randers_exp, c, y0)
    a, b = 0.7, -1.3
    np.testing.assert_allclose(res.U @ (a * u + b * v), a * (res.U @ u) + b * (res.U @ v), atol=1e-10)


def test_pullback_examples(randers_exp, riemannian_exp, rng):
    E = fs.catalog("euclidean", 2)
    c = tr.Segment([-0.3, 0.2], [0.4, -0.1])
    y0 = np.array([0.6, 0.8])
    from finslerkit.minkowski import norm_tensors
    t0 = norm_tensors(E.norm_at(c.point(0)), y0)
    np.testing.assert_allclose(tr.pullback_tensor(E, c, 1.0, "ghat", y0), t0.g / t0.F**2, atol=1e-12)
    np.testing.assert_allclose(tr.pullback_tensor(E, c, 1.0, "Ahat", y0), t0.A / t0.F, atol=1e-12)
    np.testing.assert_allclose(tr.pullback_tensor(E, c, 1.0, "eta", y0), t0.eta, atol=1e-12)
    t0 = norm_tensors(riemannian_exp.norm_at(c.point(0)), y0)
    np.testing.assert_allclose(tr.pullback_tensor(riemannian_exp, c, 1.0, "ghat", y0), t0.g / t0.F**2, atol=1e-7)
    worst = 0.0
    for k in range(5):
        p = rng.uniform(-0.3, 0.3, 2)
        cc = tr.Segment(p, p + 0.5 * unit(rng, 1, 2)[0])
        y = unit(rng, 1, 2)[0]
        s0 = norm_tensors(randers_exp.norm_at(cc.point(0)), y)
        worst = max(worst, np.abs(tr.pullback_tensor(randers_exp, cc, 0.5, "Ahat", y) - s0.A / s0.F).max())
    assert worst > 1e-4
    val = tr.pullback_tensor(E, c, 1.0, "ghat", y0, vectors=[[1, 0], [1, 0]])
    assert val == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        tr.pullback_tensor(E, c, 1.0, "nope", y0)


def test_stability_rate_examples(riemannian_exp, rng):
    p, y, d = np.array([0.1, 0.2]), np.array([0.6, 0.8]), np.array([0.6, -0.8])
    for w, r in tr.stability_rates(riemannian_exp, p, y, d).items():
        assert np.abs(r).max() < 1e-6, w
    Mk = fs.catalog("minkowski", 2)
    for w, r in tr.stability_rates(Mk, p, y, d).items():
        assert np.abs(r).max() < 1e-8, w
    with pytest.raises(ValueError):
        tr.stability_rate(Mk, p, y, [0, 0])


def test_ghat_rate_calibration(randers_exp, rng):
    """The measured rate is -2 L(., ., d) / F^2 (Berwald h-derivative of g)."""
    for _ in range(5):
        p = rng.uniform(-0.6, 0.6, 2)
        y, d = unit(rng, 2, 2)
        rate = tr.stability_rate(randers_exp, p, y, d, "ghat")
        L, _ = fs.landsberg_curvature(randers_exp, p, y)
        F = randers_exp(p, y)
        assert np.abs(rate).max() > 1e-4
        np.testing.assert_allclose(rate, -2 * np.einsum("ijk,k->ij", L, d) / F**2, atol=1e-7)


def test_linearity_residual_examples(riemannian_exp, randers_exp, rng):
    Ys = unit(rng, 6, 2)
    c = tr.Segment([-0.4, -0.3], [0.4, 0.3])
    assert tr.linearity_residual(riemannian_exp, c, 1.0, Ys).residual < 1e-7
    assert tr.linearity_residual(fs.catalog("randers-polar", 2), tr.Segment([0.8, -0.5], [1.6, 0.3]), 1.0, Ys).residual < 1e-7
    r = tr.linearity_residual(fs.catalog("minkowski", 2), c, 1.0, Ys)
    assert r.residual < 1e-14 and r.additivity < 1e-14
    r = tr.linearity_residual(randers_exp, c, 1.0, Ys)
    assert r.residual > 1e-3
    with pytest.raises(ValueError):
        tr.linearity_residual(randers_exp, c, 1.0, Ys[:3])
    with pytest.raises(ValueError):
        tr.linearity_residual(randers_exp, c, 1.0, np.outer(np.arange(1, 5), [1.0, 2.0]))


def test_tolerance_halving_within_error_estimate(randers_exp):
    c = tr.PolynomialCurve([[-0.5, 0.2], [0.9, -0.4], [0.1, 0.3]])
    y0 = np.array([0.3, 1.2])
    coarse = tr.transport(randers_exp, c, y0)
    fine = tr.transport(randers_exp, c, y0, rtol=5e-11, atol=5e-11)
    assert np.abs(coarse.y - fine.y).max() <= coarse.stats.error_estimate
    assert coarse.stats.steps > 0 and coarse.stats.rhs_evals >= 7 * coarse.stats.steps


def test_rk4_cross_check(randers_exp):
    c = tr.Segment([-0.5, 0.2], [0.3, -0.4])
    y0 = np.array([0.3, 1.2])
    a = tr.transport(randers_exp, c, y0)
    b = tr.transport(randers_exp, c, y0, method="rk4", rk4_steps=200)
    assert np.abs(a.y - b.y).max() < 1e-9


def test_piecewise_chain_equals_concatenated_segments(randers_exp):
    pts = [[-0.5, -0.5], [0.2, -0.3], [0.4, 0.5]]
    y0 = np.array([1.0, 0.2])
    whole = tr.transport(randers_exp, tr.PiecewiseLinear(pts), y0)
    first = tr.transport(randers_exp, tr.Segment(pts[0], pts[1]), y0)
    second = tr.transport(randers_exp, tr.Segment(pts[1], pts[2]), first.y)
    np.testing.assert_allclose(whole.y, second.y, atol=1e-9)
    assert 0.5 in list(whole.ts)


def test_partial_time_and_errors(randers_exp):
    c = tr.Segment([-0.5, 0.0], [0.5, 0.0])
    half = tr.transport(randers_exp, c, [1.0, 0.0], t=0.5)
    assert half.ts[-1] == pytest.approx(0.5)
    with pytest.raises(tr.TransportError) as exc:
        tr.transport(randers_exp, tr.Segment([0, 0], [0.99, 0]), [1.0, 0.0])
    assert exc.value.t is not None
    with pytest.raises(ValueError):
        tr.transport(randers_exp, c, [0.0, 0.0])
    with pytest.raises(ValueError):
        tr.transport(randers_exp, c, [1.0, 0.0], t=1.5)


def test_step_underflow_reports_time():
    def rhs(t, y):
        return np.array([1.0 / (0.5 - t) ** 2])

    with pytest.raises(tr.TransportError) as exc:
        tr.dopri45(rhs, 0.0, 1.0, [0.0])
    assert 0.4 < exc.value.t < 0.5


def test_csv_rows(randers_exp):
    res = tr.transport(randers_exp, tr.Segment([0, 0], [0.3, 0.2]), [1.0, 0.5])
    rows = res.csv_rows()
    assert len(rows[0]) == 5 and rows[0][0] == 0.0 and rows[0][-1] == 0.0
