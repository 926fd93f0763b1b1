"""Nonlinear parallel transport along chart curves.

A fiber vector is carried along ``sigma`` by

    dy^i/dt + sigma'^j(t) N^i_j(sigma(t), y) = 0,

and its differential by the linearised system

    dU/dt = -sigma'^k (dN^i_k / dy^m) U.

Both are integrated with an adaptive Dormand-Prince 5(4) pair (fixed-step
RK4 is available for cross-checks).  States may be batched: ``y0`` of shape
``(m, n)`` is transported in one pass with a shared step sequence.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .finsler import FinslerMetric, connection_with_derivative, nonlinear_connection
from .minkowski import norm_tensors


class TransportError(RuntimeError):
    def __init__(self, message, t=None):
        self.t = t
        super().__init__(message if t is None else f"{message} at t = {t:.6g}")


# ---------------------------------------------------------------------------
# curves


class Curve:
    """Smooth map t -> sigma(t), t in [0, 1], with analytic velocity."""

    def point(self, t):
        raise NotImplementedError

    def velocity(self, t):
        raise NotImplementedError

    def knots(self):
        """Parameter values where the velocity may jump (always includes 0 and 1)."""
        return [0.0, 1.0]

    def reversed(self) -> "Curve":
        return _Reversed(self)

    def check_inside(self, M: FinslerMetric, margin: float = 0.05, samples: int = 33):
        for t in np.linspace(0, 1, samples):
            if not M.contains(self.point(t), margin):
                raise TransportError(f"curve leaves the chart interior ({margin:.0%} margin)", t)


class Segment(Curve):
    def __init__(self, x0, x1):
        self.x0 = np.asarray(x0, dtype=float)
        self.x1 = np.asarray(x1, dtype=float)

    def point(self, t):
        return self.x0 + t * (self.x1 - self.x0)

    def velocity(self, t):
        return self.x1 - self.x0

    def __repr__(self):
        return f"Segment({self.x0.tolist()} -> {self.x1.tolist()})"


class PolynomialCurve(Curve):
    """sigma(t) = sum_k coeffs[k] t^k."""

    def __init__(self, coeffs):
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))

    def point(self, t):
        return sum(c * t**k for k, c in enumerate(self.coeffs))

    def velocity(self, t):
        return sum(k * c * t ** (k - 1) for k, c in enumerate(self.coeffs) if k > 0) + 0 * self.coeffs[0]


class PiecewiseLinear(Curve):
    def __init__(self, points):
        self.points = np.asarray(points, dtype=float)
        if len(self.points) < 2:
            raise ValueError("need at least two points")
        self.m = len(self.points) - 1

    def _piece(self, t):
        k = min(int(t * self.m), self.m - 1)
        return k, t * self.m - k

    def point(self, t):
        k, s = self._piece(t)
        return self.points[k] + s * (self.points[k + 1] - self.points[k])

    def velocity(self, t):
        k, _ = self._piece(t)
        return self.m * (self.points[k + 1] - self.points[k])

    def knots(self):
        return list(np.linspace(0, 1, self.m + 1))

    def velocity_on(self, a, b):
        k = min(int(0.5 * (a + b) * self.m), self.m - 1)
        return self.m * (self.points[k + 1] - self.points[k])


class _Reversed(Curve):
    def __init__(self, base):
        self.base = base

    def point(self, t):
        return self.base.point(1 - t)

    def velocity(self, t):
        return -self.base.velocity(1 - t)

    def knots(self):
        return sorted(1 - k for k in self.base.knots())

    def reversed(self):
        return self.base


# ---------------------------------------------------------------------------
# integrators

_DP_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_DP_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


@dataclass
class IntegratorStats:
    method: str
    steps: int = 0
    rejected: int = 0
    rhs_evals: int = 0
    rtol: float = 0.0
    atol: float = 0.0
    error_estimate: float = 0.0

    def as_dict(self):
        return dict(self.__dict__)


def _velocity_fn(curve, a, b):
    if isinstance(curve, PiecewiseLinear):
        v = curve.velocity_on(a, b)
        return lambda t: v
    return curve.velocity


def dopri45(rhs, t0, t1, y0, rtol=1e-10, atol=1e-10, h0=None, stats=None, max_steps=100000):
    """Adaptive Dormand-Prince integration of ``y' = rhs(t, y)``; returns (ts, ys)."""
    y = np.array(y0, dtype=float)
    t = float(t0)
    span = float(t1) - t
    if span == 0:
        return [t], [y.copy()]
    direction = np.sign(span)
    h = abs(span) * 0.05 if h0 is None else abs(h0)
    ts, ys = [t], [y.copy()]
    k1 = rhs(t, y)
    if stats is not None:
        stats.rhs_evals += 1
    steps = 0
    while direction * (t1 - t) > 0:
        if steps > max_steps:
            raise TransportError("too many integration steps", t)
        h = min(h, abs(t1 - t))
        if h < 1e-14 * max(1.0, abs(t)):
            raise TransportError("step size underflow", t)
        hs = direction * h
        K = [k1]
        for s in range(1, 7):
            ys_ = y + hs * sum(a * k for a, k in zip(_DP_A[s], K))
            K.append(rhs(t + _DP_C[s] * hs, ys_))
        if stats is not None:
            stats.rhs_evals += 6
        y5 = y + hs * sum(b * k for b, k in zip(_DP_B5, K) if b != 0)
        err = hs * sum((b5 - b4) * k for b5, b4, k in zip(_DP_B5, _DP_B4, K))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        en = float(np.sqrt(np.mean((err / scale) ** 2)))
        steps += 1
        if en <= 1.0:
            t = t + hs
            y = y5
            k1 = K[6]  # first-same-as-last
            ts.append(t)
            ys.append(y.copy())
            if stats is not None:
                stats.steps += 1
                stats.error_estimate += float(np.max(np.abs(err)))
            fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** (-0.2)))
            h = h * fac
        else:
            if stats is not None:
                stats.rejected += 1
            h = h * max(0.2, 0.9 * en ** (-0.2))
    return ts, ys


def rk4(rhs, t0, t1, y0, steps=200, stats=None):
    y = np.array(y0, dtype=float)
    ts = np.linspace(t0, t1, steps + 1)
    out = [y.copy()]
    for a, b in zip(ts[:-1], ts[1:]):
        h = b - a
        k1 = rhs(a, y)
        k2 = rhs(a + h / 2, y + h / 2 * k1)
        k3 = rhs(a + h / 2, y + h / 2 * k2)
        k4 = rhs(b, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y.copy())
    if stats is not None:
        stats.steps += steps
        stats.rhs_evals += 4 * steps
    return list(ts), out


# ---------------------------------------------------------------------------
# transport


@dataclass
class TransportResult:
    ts: np.ndarray
    ys: np.ndarray  # (len(ts), ...) trajectory of the fiber vector(s)
    F0: np.ndarray
    Fs: np.ndarray
    stats: IntegratorStats
    U: np.ndarray | None = field(default=None, repr=False)  # differential at the end

    @property
    def y(self):
        return self.ys[-1]

    @property
    def drift(self):
        return np.abs(self.Fs - self.F0)

    def max_relative_drift(self):
        return float(np.max(self.drift / self.F0))

    def csv_rows(self):
        """Rows (t, y^1..y^n, F, drift) for a single transported vector."""
        if self.ys.ndim != 2:
            raise ValueError("CSV export needs a single transported vector")
        return [
            [float(t), *map(float, y), float(F), float(abs(F - self.F0))]
            for t, y, F in zip(self.ts, self.ys, self.Fs)
        ]


def _run(rhs, curve, t, y0, method, rtol, atol, rk4_steps, stats):
    knots = [k for k in curve.knots() if k < t] + [t]
    knots = sorted(set([0.0] + knots))
    ts_all, ys_all = [0.0], [np.array(y0, dtype=float)]
    y = ys_all[0]
    for a, b in zip(knots[:-1], knots[1:]):
        vel = _velocity_fn(curve, a, b)
        f = (lambda vel: (lambda s, state: rhs(s, state, vel)))(vel)
        if method == "rk45":
            ts, ys = dopri45(f, a, b, y, rtol, atol, stats=stats)
        elif method == "rk4":
            ts, ys = rk4(f, a, b, y, max(1, int(rk4_steps * (b - a))), stats)
        else:
            raise ValueError(f"unknown method {method!r}")
        ts_all.extend(ts[1:])
        ys_all.extend(ys[1:])
        y = ys[-1]
    return np.array(ts_all), np.array(ys_all)


def transport(M: FinslerMetric, sigma: Curve, y0, t: float = 1.0, method: str = "rk45",
              rtol: float = 1e-10, atol: float = 1e-10, rk4_steps: int = 400,
              margin: float = 0.05) -> TransportResult:
    """Parallel-transport ``y0`` (shape ``(n,)`` or ``(m, n)``) from sigma(0) to sigma(t)."""
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    y0 = np.asarray(y0, dtype=float)
    if np.any(np.linalg.norm(y0, axis=-1) == 0):
        raise ValueError("y0 must be nonzero")
    sigma.check_inside(M, margin)
    n = M.dimension

    def rhs(s, y, vel):
        if np.any(np.linalg.norm(y, axis=-1) < 1e-300):
            raise TransportError("fiber vector collapsed to zero", s)
        N = nonlinear_connection(M, sigma.point(s), y)
        return -np.einsum("...ij,j->...i", N, vel(s))

    stats = IntegratorStats(method, rtol=rtol, atol=atol)
    ts, ys = _run(rhs, sigma, t, y0, method, rtol, atol, rk4_steps, stats)
    Fs = np.array([M(sigma.point(s), y) for s, y in zip(ts, ys)])
    return TransportResult(ts, ys, np.asarray(M(sigma.point(0.0), y0)), Fs, stats)


def transport_with_differential(M: FinslerMetric, sigma: Curve, y0, t: float = 1.0,
                                rtol: float = 1e-11, atol: float = 1e-12,
                                margin: float = 0.05) -> TransportResult:
    """Transport a single vector together with its differential ``U = dP/dy0``."""
    y0 = np.asarray(y0, dtype=float)
    n = M.dimension
    if y0.shape != (n,):
        raise ValueError("differential transport takes a single vector")
    sigma.check_inside(M, margin)

    def rhs(s, state, vel):
        y = state[:n]
        U = state[n:].reshape(n, n)
        N, dN = connection_with_derivative(M, sigma.point(s), y)
        v = vel(s)
        dy = -N @ v
        dU = -np.einsum("ikm,k,mj->ij", dN, v, U)
        return np.concatenate([dy, dU.ravel()])

    stats = IntegratorStats("rk45", rtol=rtol, atol=atol)
    state0 = np.concatenate([y0, np.eye(n).ravel()])
    ts, states = _run(rhs, sigma, t, state0, "rk45", rtol, atol, 0, stats)
    ys = states[:, :n]
    Fs = np.array([M(sigma.point(s), y) for s, y in zip(ts, ys)])
    return TransportResult(ts, ys, np.asarray(M(sigma.point(0.0), y0)), Fs, stats,
                           U=states[-1, n:].reshape(n, n))


def transport_differential(M: FinslerMetric, sigma: Curve, y0, u, t: float = 1.0) -> np.ndarray:
    """(P_{sigma,t})_* u at y0."""
    res = transport_with_differential(M, sigma, y0, t)
    return res.U @ np.asarray(u, dtype=float)


# ---------------------------------------------------------------------------
# pullbacks and horizontal stability

WHICH = ("ghat", "Ahat", "eta")


def _fiber_tensors(M, x, y, which):
    t = norm_tensors(M.norm_at(x), y)
    F = float(t.F)
    table = {"ghat": lambda: t.g / F**2, "Ahat": lambda: t.A / F, "eta": lambda: t.eta}
    for w in which:
        if w not in table:
            raise ValueError(f"which must be one of {WHICH}")
    return {w: table[w]() for w in which}


def _contract(T, U):
    out = T
    for _ in range(T.ndim):
        out = np.tensordot(out, U, axes=([0], [0]))
    return out


def pullback_tensors(M: FinslerMetric, sigma: Curve, t: float, which, y0) -> dict:
    """Components at y0 of several pullbacks from a single transport."""
    res = transport_with_differential(M, sigma, y0, t)
    Ts = _fiber_tensors(M, sigma.point(t), res.y, which)
    return {w: _contract(T, res.U) for w, T in Ts.items()}


def pullback_tensor(M: FinslerMetric, sigma: Curve, t: float, which: str, y0, vectors=None):
    """Components at y0 of the transport pullback of ghat, Ahat or eta.

    With ``vectors`` (one per slot) the scalar value is returned instead.
    """
    out = pullback_tensors(M, sigma, t, (which,), y0)[which]
    if vectors is None:
        return out
    for v in vectors:
        out = np.tensordot(out, np.asarray(v, dtype=float), axes=([0], [0]))
    return float(out)


def stability_rates(M: FinslerMetric, p, y, direction, which=WHICH, step: float = 1e-4) -> dict:
    """d/dt at 0 of the pullbacks along the straight line through p with velocity ``direction``.

    Central difference with one Richardson extrapolation (steps h, 2h).
    """
    p = np.asarray(p, dtype=float)
    d = np.asarray(direction, dtype=float)
    if np.linalg.norm(d) == 0:
        raise ValueError("direction must be nonzero")
    vals = {k: pullback_tensors(M, Segment(p, p + k * step * d), 1.0, which, y) for k in (-2, -1, 1, 2)}
    out = {}
    for w in which:
        c1 = (vals[1][w] - vals[-1][w]) / (2 * step)
        c2 = (vals[2][w] - vals[-2][w]) / (4 * step)
        out[w] = (4 * c1 - c2) / 3
    return out


def stability_rate(M: FinslerMetric, p, y, direction, which: str = "ghat", step: float = 1e-4):
    return stability_rates(M, p, y, direction, (which,), step)[which]


@dataclass
class LinearityResult:
    residual: float
    additivity: float
    Lambda: np.ndarray


def linearity_residual(M: FinslerMetric, sigma: Curve, t: float, samples) -> LinearityResult:
    """How far P_{sigma,t} is from a linear map on the sample vectors."""
    Y = np.atleast_2d(np.asarray(samples, dtype=float))
    m, n = Y.shape
    if m < 2 * n:
        raise ValueError("need at least 2n sample vectors")
    sv = np.linalg.svd(Y, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise ValueError("sample vectors do not span")
    pairs = [(k, (k + 1) % m) for k in range(min(m, 2 * n))]
    sums = np.array([Y[a] + Y[b] for a, b in pairs])
    ok = np.linalg.norm(sums, axis=1) > 1e-6
    batch = np.vstack([Y, sums[ok]])
    out = transport(M, sigma, batch, t).y
    PY = out[:m]
    Lt, *_ = np.linalg.lstsq(Y, PY, rcond=1e-12)
    fit = Y @ Lt
    res = float(np.max(np.linalg.norm(PY - fit, axis=1) / np.linalg.norm(Y, axis=1)))
    add = 0.0
    for (a, b), Ps in zip([pq for pq, o in zip(pairs, ok) if o], out[m:]):
        add = max(add, float(np.linalg.norm(Ps - PY[a] - PY[b]) / (np.linalg.norm(Y[a]) + np.linalg.norm(Y[b]))))
    return LinearityResult(res, add, Lt.T)


__all__ = [
    "Curve", "IntegratorStats", "LinearityResult", "PiecewiseLinear", "PolynomialCurve",
    "Segment", "TransportError", "TransportResult", "WHICH", "dopri45", "linearity_residual",
    "pullback_tensor", "pullback_tensors", "rk4", "stability_rate", "stability_rates", "transport", "transport_differential",
    "transport_with_differential",
]
