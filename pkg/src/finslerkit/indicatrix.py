"""Centroaffine invariants of the indicatrix and the norm equivalence problem.

Points on the indicatrix ``{F = 1}`` carry a tangent frame spanning
``ker dF``.  In that frame:

* induced metric ``h = i* g_hat``  (``g_hat = g / F^2``)
* cubic form ``C_hat = -i* A_hat``
* Tchebychev form ``T_hat = -1/(n-1) i* eta``

and the semi-C-reducibility residual ``M^q`` is assembled from those three.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .minkowski import MinkowskiNorm, NormError, NormTensors, default_directions, norm_tensors

T_ZERO = 1e-9  # |T_hat| below this uses the T_hat = 0 branch of M^q


@dataclass(frozen=True)
class IndicatrixPoint:
    u: np.ndarray
    v: np.ndarray
    basis: np.ndarray  # (n-1, n) rows span ker dF(v), h-orthonormal
    tensors: NormTensors = field(repr=False)

    @property
    def dimension(self):
        return self.v.size


@dataclass(frozen=True)
class CentroaffineData:
    h: np.ndarray
    h_angular: np.ndarray
    Chat: np.ndarray
    That: np.ndarray
    That_trace: np.ndarray

    @property
    def hinv(self):
        return np.linalg.inv(self.h)


def _pullback(T, basis):
    """Contract every slot of a covariant tensor with the basis rows."""
    out = T
    for _ in range(T.ndim):
        out = np.tensordot(out, basis, axes=([0], [1]))
    return out


def indicatrix_point(F: MinkowskiNorm, u) -> IndicatrixPoint:
    u = np.asarray(u, dtype=float)
    nu = np.linalg.norm(u)
    if nu == 0:
        raise NormError("direction must be nonzero")
    u = u / nu
    v = u / F(u)
    t = norm_tensors(F, v)
    n = v.size
    ghat = t.g / t.F**2
    # projection along v onto ker dF(v); dF(v)(v) = F(v) = 1
    cands = np.eye(n) - np.outer(t.dF, v) / float(t.dF @ v)
    chosen = []
    for _ in range(n - 1):
        res = cands.copy()
        for b in chosen:
            res -= np.outer(res @ ghat @ b, b)
        norms = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", res, ghat, res), 0.0))
        k = int(np.argmax(norms))
        chosen.append(res[k] / norms[k])
    return IndicatrixPoint(u, v, np.array(chosen).reshape(n - 1, n), t)


def induced_metric(F: MinkowskiNorm, p: IndicatrixPoint) -> np.ndarray:
    t = p.tensors
    return _pullback(t.g / t.F**2, p.basis)


def angular_pullback(F: MinkowskiNorm, p: IndicatrixPoint) -> np.ndarray:
    return _pullback(p.tensors.h, p.basis)


def cubic_form(F: MinkowskiNorm, p: IndicatrixPoint) -> np.ndarray:
    t = p.tensors
    return -_pullback(t.A / t.F, p.basis)


def tchebychev_form(F: MinkowskiNorm, p: IndicatrixPoint) -> np.ndarray:
    n = p.dimension
    return -(p.basis @ p.tensors.eta) / (n - 1)


def tchebychev_trace(F: MinkowskiNorm, p: IndicatrixPoint) -> np.ndarray:
    n = p.dimension
    hinv = np.linalg.inv(induced_metric(F, p))
    return np.einsum("bc,abc->a", hinv, cubic_form(F, p)) / (n - 1)


def tchebychev_volume(F: MinkowskiNorm, p: IndicatrixPoint, step: float = 1e-4) -> np.ndarray:
    """Tchebychev form from finite differences of log |omega / omega(h)|.

    ``omega`` is the volume induced on the indicatrix by the ambient
    determinant with the position vector as transversal, ``omega(h)`` the
    Riemannian volume of the induced metric.  The chart is
    ``s -> phi(s) / F(phi(s))`` with ``phi(s) = v + s.basis``.
    """
    n = p.dimension
    B = p.basis

    def log_ratio(s):
        phi = p.v + s @ B
        t = norm_tensors(F, phi)
        Fp = float(t.F)
        v = phi / Fp
        tang = B / Fp - np.outer(B @ t.dF, phi) / Fp**2
        vol = abs(np.linalg.det(np.vstack([v, tang])))
        # g is 0-homogeneous, F(v) = 1
        H = tang @ t.g @ tang.T
        return np.log(vol) - 0.5 * np.log(np.linalg.det(H))

    grad = np.empty(n - 1)
    for a in range(n - 1):
        e = np.zeros(n - 1)
        e[a] = step
        d1 = (log_ratio(e) - log_ratio(-e)) / (2 * step)
        d2 = (log_ratio(2 * e) - log_ratio(-2 * e)) / (4 * step)
        grad[a] = (4 * d1 - d2) / 3
    return grad / (n - 1)


def centroaffine_data(F: MinkowskiNorm, p: IndicatrixPoint) -> CentroaffineData:
    return CentroaffineData(
        induced_metric(F, p), angular_pullback(F, p), cubic_form(F, p),
        tchebychev_form(F, p), tchebychev_trace(F, p),
    )


# ---------------------------------------------------------------------------
# semi-C-reducibility


def tensor_norm(T, hinv) -> float:
    """Norm of a covariant tensor with respect to the metric whose inverse is hinv."""
    out = T
    for k in range(T.ndim):
        out = np.tensordot(hinv, out, axes=([1], [k]))
        out = np.moveaxis(out, 0, k)
    return float(np.sqrt(max(np.sum(out * T), 0.0)))


def _sym_hT(h, T):
    return (np.einsum("ab,c->abc", h, T) + np.einsum("bc,a->abc", h, T)
            + np.einsum("ca,b->abc", h, T))


def semi_c_tensor(C, h, T, q: float, n: int | None = None) -> np.ndarray:
    """The tensor M^q on a tangent space of the indicatrix.

    ``n`` is the dimension of the ambient vector space (defaults to
    ``len(T) + 1``).
    """
    if n is None:
        n = len(T) + 1
    if q == 1 - n:
        raise ValueError(f"q = 1 - n = {1 - n} is excluded")
    hinv = np.linalg.inv(h)
    tn2 = float(T @ hinv @ T)
    if np.sqrt(tn2) < T_ZERO:
        return np.array(C, dtype=float)
    B = _sym_hT(h, T)
    TTT = np.einsum("a,b,c->abc", T, T, T)
    return C - (n - 1) / (n + q - 1) * (B + (q - 2) / tn2 * TTT)


def semi_c_residual(F: MinkowskiNorm, p: IndicatrixPoint, q: float) -> float:
    n = p.dimension
    if q == 1 - n:
        raise ValueError(f"q = 1 - n = {1 - n} is excluded")
    d = centroaffine_data(F, p)
    return tensor_norm(semi_c_tensor(d.Chat, d.h, d.That, q, n), d.hinv)


def best_fit_q(F: MinkowskiNorm, p: IndicatrixPoint, grid=None, delta: float = 0.05):
    """Semi-C residual minimised over q; returns ``(q, residual)``.

    A grid scan on ``[-(n-2)+delta, 10]`` (step 0.01) is refined by a bounded
    scalar minimisation around the best grid node.
    """
    n = p.dimension
    if grid is None:
        grid = np.round(np.arange(-(n - 2) + delta, 10.0 + 1e-9, 0.01), 10)
    d = centroaffine_data(F, p)
    hinv = d.hinv

    def resid(q):
        return tensor_norm(semi_c_tensor(d.Chat, d.h, d.That, float(q), n), hinv)

    vals = [(resid(q), float(q)) for q in grid if not np.isclose(q, 1 - n)]
    r0, q0 = min(vals)
    lo, hi = q0 - 0.01, q0 + 0.01
    if lo < 1 - n < hi:
        return q0, r0
    opt = minimize_scalar(resid, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    if opt.fun < r0:
        return float(opt.x), float(opt.fun)
    return q0, r0


def semi_c_cubic_form(T, q: float, n: int | None = None) -> np.ndarray:
    """Cubic form of a specially semi-C-reducible norm in an h-orthonormal frame.

    Built from a Tchebychev vector ``T`` (length n-1) and ``q``:
    ``C = (n-1)/(n+q-1) [ sym(delta T) + (q-2)/|T|^2 T T T ]``.
    """
    T = np.asarray(T, dtype=float)
    m = T.size
    if n is None:
        n = m + 1
    delta = np.eye(m)
    tn2 = float(T @ T)
    C = _sym_hT(delta, T) + (q - 2) / tn2 * np.einsum("a,b,c->abc", T, T, T)
    return (n - 1) / (n + q - 1) * C


def cubic_norm_ratio(n: int, q: float) -> float:
    """Closed-form |C|^2 / |T|^2 for a specially semi-C-reducible cubic form."""
    return (n - 1) ** 2 * (3 * (n - 2) + (q + 1) ** 2) / (n + q - 1) ** 2


# ---------------------------------------------------------------------------
# equivalence


def equivalence_check(F1: MinkowskiNorm, F2: MinkowskiNorm, L, samples=None) -> float:
    """sup over unit directions u of |F1(u) - F2(L u)|."""
    L = np.asarray(L, dtype=float)
    n = F1.dimension
    if L.shape != (n, n) or F2.dimension != n:
        raise NormError("dimension mismatch")
    sv = np.linalg.svd(L, compute_uv=False)
    if sv[-1] <= 1e-12 * max(sv[0], 1.0):
        raise NormError("L is singular")
    U = default_directions(n, 32 * n * n) if samples is None else np.atleast_2d(samples)
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    return float(np.max(np.abs(F1(U) - F2(U @ L.T))))


@dataclass
class EquivalenceResult:
    L: np.ndarray
    residual: float
    success: bool
    restarts: int
    history: list

    def as_dict(self):
        return {
            "L": self.L.tolist(), "residual": self.residual, "success": self.success,
            "restarts": self.restarts, "history": self.history,
        }


def _quadratic_fit(F: MinkowskiNorm, U):
    n = U.shape[1]
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    X = np.column_stack([U[:, i] * U[:, j] * (1 if i == j else 2) for i, j in pairs])
    F2v = F(U) ** 2
    coef, *_ = np.linalg.lstsq(X, F2v, rcond=None)
    Q = np.zeros((n, n))
    for c, (i, j) in zip(coef, pairs):
        Q[i, j] = Q[j, i] = c
    resid = X @ coef - F2v
    return Q, resid, F2v


def _sqrtm_spd(Q):
    w, V = np.linalg.eigh(Q)
    w = np.maximum(w, 1e-12)
    return (V * np.sqrt(w)) @ V.T


def _random_orthogonal(rng, n):
    Z = rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))


def _lm(F1v, F2, U, L0, tol, max_iter=200):
    """Damped Gauss-Newton on the entries of L; multiplicative damping schedule."""
    n = U.shape[1]

    def residual(L):
        Z = U @ L.T
        if np.min(np.linalg.norm(Z, axis=1)) < 1e-12:
            return None, None
        jet = F2.jet(Z, order=1)
        r = jet.value - F1v
        grad = jet.c[:, 1 : 1 + n]
        J = (grad[:, :, None] * U[:, None, :]).reshape(len(U), n * n)
        return r, J

    L = L0.copy()
    r, J = residual(L)
    if r is None:
        return L, np.inf
    cost = float(r @ r)
    lam = 1e-3
    for _ in range(max_iter):
        if np.max(np.abs(r)) < tol * 1e-3:
            break
        JtJ = J.T @ J
        g = J.T @ r
        scale = max(float(np.max(np.diag(JtJ))), 1e-300)
        improved = False
        for _ in range(30):
            step = np.linalg.solve(JtJ + lam * scale * np.eye(n * n), -g)
            Ln = L + step.reshape(n, n)
            rn, Jn = residual(Ln)
            if rn is not None and float(rn @ rn) < cost:
                L, r, J, cost = Ln, rn, Jn, float(rn @ rn)
                lam = max(lam * 0.5, 1e-12)
                improved = True
                break
            lam *= 2.0
        if not improved or np.linalg.norm(step) < 1e-15 * max(1.0, np.linalg.norm(L)):
            break
    return L, float(np.max(np.abs(r)))


def equivalence_solve(F1: MinkowskiNorm, F2: MinkowskiNorm, restarts: int = 20, seed: int = 0,
                      tol: float = 1e-6, samples=None) -> EquivalenceResult:
    """Search for L with F1(u) = F2(L u) on sampled directions.

    Starts: identity, the quadratic-fit (moment) alignment
    ``Q2^{-1/2} Q1^{1/2}``, then that alignment composed with seeded random
    orthogonal matrices.  ``L`` is only determined up to the linear symmetry
    group of the norms.
    """
    n = F1.dimension
    if F2.dimension != n:
        raise NormError("dimension mismatch")
    rng = np.random.default_rng(seed)
    U = default_directions(n, 32 * n * n, seed) if samples is None else np.atleast_2d(samples)
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    F1v = F1(U)
    Q1, *_ = _quadratic_fit(F1, U)
    Q2, *_ = _quadratic_fit(F2, U)
    align_r = _sqrtm_spd(Q1)
    align_l = np.linalg.inv(_sqrtm_spd(Q2))
    best = (np.eye(n), np.inf)
    history = []
    used = 0
    for k in range(max(1, restarts)):
        if k == 0:
            L0 = np.eye(n)
        elif k == 1:
            L0 = align_l @ align_r
        else:
            L0 = align_l @ _random_orthogonal(rng, n) @ align_r
        used = k + 1
        L, res = _lm(F1v, F2, U, L0, tol)
        history.append(res)
        if res < best[1]:
            best = (L, res)
        if res < tol:
            break
    L, res = best
    return EquivalenceResult(L, float(res), bool(res < tol), used, [float(h) for h in history])


def cartan_pullback_signs(F1: MinkowskiNorm, F2: MinkowskiNorm, L, samples=None, atol=1e-8):
    """Per-sample sign s with A1(y) = s * L^*A2(Ly); 0 when neither sign matches.

    Returns ``(signs, mixed)`` where ``mixed`` flags samples matching
    different signs.
    """
    L = np.asarray(L, dtype=float)
    n = F1.dimension
    U = default_directions(n, 50) if samples is None else np.atleast_2d(samples)
    t1 = norm_tensors(F1, U)
    t2 = norm_tensors(F2, U @ L.T)
    A1 = t1.A / t1.F[:, None, None, None]
    A2 = np.einsum("bijk,ia,jc,kd->bacd", t2.A / t2.F[:, None, None, None], L, L, L)
    signs = []
    for a1, a2 in zip(A1, A2):
        scale = max(1.0, np.abs(a1).max())
        plus = np.abs(a1 - a2).max() <= atol * scale
        minus = np.abs(a1 + a2).max() <= atol * scale
        if plus and minus:
            signs.append(1)  # both vanish
        elif plus:
            signs.append(1)
        elif minus:
            signs.append(-1)
        else:
            signs.append(0)
    signs = np.array(signs)
    mixed = bool(np.any(signs == 1) and np.any(signs == -1))
    return signs, mixed


def blaschke_deicke_residual(F: MinkowskiNorm, samples=None):
    """(sup |eta|_ghat, relative quadratic-fit residual of F^2) over samples."""
    n = F.dimension
    U = default_directions(n, 200) if samples is None else np.atleast_2d(samples)
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    t = norm_tensors(F, U)
    eta_n = np.sqrt(np.einsum("b,bi,bij,bj->b", t.F**2, t.eta, t.ginv, t.eta))
    Q, resid, F2v = _quadratic_fit(F, U)
    fit = float(np.sqrt(np.mean(resid**2)) / np.sqrt(np.mean(F2v**2)))
    return float(np.max(eta_n)), fit


def matched_scalar_invariants(F: MinkowskiNorm, p: IndicatrixPoint, q: float = 2.0):
    """Frame-independent scalars (|C_hat|_h, |T_hat|_h, |M^q|_h) at p."""
    d = centroaffine_data(F, p)
    hinv = d.hinv
    return (
        tensor_norm(d.Chat, hinv),
        tensor_norm(d.That, hinv),
        tensor_norm(semi_c_tensor(d.Chat, d.h, d.That, q, p.dimension), hinv),
    )


__all__ = [
    "CentroaffineData", "EquivalenceResult", "IndicatrixPoint", "T_ZERO", "angular_pullback",
    "best_fit_q", "blaschke_deicke_residual", "cartan_pullback_signs", "centroaffine_data",
    "cubic_form", "cubic_norm_ratio", "equivalence_check", "equivalence_solve",
    "indicatrix_point", "induced_metric", "matched_scalar_invariants", "semi_c_cubic_form",
    "semi_c_residual", "semi_c_tensor", "tchebychev_form", "tchebychev_trace",
    "tchebychev_volume", "tensor_norm",
]
