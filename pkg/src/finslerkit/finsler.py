"""Finsler metrics on a single chart and their curvature invariants.

Conventions (natural coordinates ``(x, y)`` on ``TM``)::

    g_ij   = 1/2 [F^2]_{y^i y^j}
    G^i    = 1/4 g^il ([F^2]_{y^l x^k} y^k - [F^2]_{x^l})
    N^i_j  = dG^i/dy^j,          delta_k = d/dx^k - N^m_k d/dy^m
    Gamma^i_jk = 1/2 g^il (delta_k g_lj + delta_j g_lk - delta_l g_jk)
    B^i_jkl = d^3 G^i / dy^j dy^k dy^l,   E_jk = 1/2 B^m_mjk
    L_jkl  = -1/2 y_i B^i_jkl,   J_k = g^jl L_jkl
    P^i_jkl = -F dGamma^i_jk / dy^l
    tau    = log(sqrt(det g) / sigma(x)),   S = y^i d_x^i tau - 2 G^i d_y^i tau

All of these are read off one jet of ``F`` in the ``2n`` variables
``(x, y)``.  Evaluation points may be batched: ``x`` and ``y`` of shape
``(..., n)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import expr as _expr
from . import jets
from .jets import Jet
from .minkowski import MinkowskiNorm, catalog as norm_catalog, check_minkowski, default_directions

VOLUMES = ("coordinate", "riemannian-aux", "custom")
CATALOG = ("euclidean", "riemannian-exp", "randers-exp", "randers-polar", "minkowski")


class MetricError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FinslerMetric:
    """Gauge ``(x, y) -> F`` on an axis-aligned chart box.

    ``volume`` selects sigma(x): ``coordinate`` (sigma = 1),
    ``riemannian-aux`` or ``custom`` (``sigma`` callable on x components).
    """

    dimension: int
    gauge: Callable
    lower: np.ndarray
    upper: np.ndarray
    volume: str = "coordinate"
    sigma: Callable | None = None
    label: str = ""
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.volume not in VOLUMES:
            raise MetricError(f"unknown volume choice {self.volume!r}")
        if self.volume != "coordinate" and self.sigma is None:
            raise MetricError(f"volume {self.volume!r} needs a sigma(x) callable")
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != (self.dimension,) or hi.shape != (self.dimension,) or np.any(hi <= lo):
            raise MetricError("chart box must satisfy lower < upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        n = self.dimension
        out = self.gauge([x[..., i] for i in range(n)], [y[..., i] for i in range(n)])
        return float(out) if np.ndim(out) == 0 else np.broadcast_to(out, np.broadcast_shapes(x.shape[:-1], y.shape[:-1])).copy()

    def sigma_value(self, xs):
        if self.volume == "coordinate":
            return 1.0
        return self.sigma(xs)

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        pad = margin * (self.upper - self.lower)
        return bool(np.all(x >= self.lower + pad) and np.all(x <= self.upper - pad))

    def norm_at(self, x) -> MinkowskiNorm:
        x = [float(v) for v in np.asarray(x, dtype=float)]
        return MinkowskiNorm(self.dimension, lambda y: self.gauge(x, y), f"{self.label}@x", {})

    def __repr__(self):
        return f"FinslerMetric({self.label!r}, n={self.dimension}, volume={self.volume!r})"


# ---------------------------------------------------------------------------
# catalog


def _alpha_exp(x, y):
    e2 = jets.exp(2 * x[0])
    return jets.sqrt(y[0] * y[0] + e2 * sum(c * c for c in y[1:]))


def catalog(name: str, dimension: int = 2, params: Mapping | None = None) -> FinslerMetric:
    """Built-in metrics.

    ``euclidean``; ``riemannian-exp`` (a = diag(1, e^{2x1}, ...));
    ``randers-exp`` (that alpha plus constant-component drift ``b``,
    default (0.3, 0, ...), not Berwald); ``randers-polar`` (n = 2, the
    Euclidean plane in polar coordinates plus the parallel 1-form
    ``c d(r cos theta)``, Berwald); ``minkowski`` (locally Minkowski, takes
    ``norm`` and ``norm_params``).
    """
    params = dict(params or {})
    n = int(dimension)
    lo = np.asarray(params.get("lower", -np.ones(n)), dtype=float)
    hi = np.asarray(params.get("upper", np.ones(n)), dtype=float)
    if n < 2:
        raise MetricError("metrics need dimension >= 2")
    if name == "euclidean":
        return FinslerMetric(n, lambda x, y: jets.sqrt(sum(c * c for c in y)), lo, hi,
                             label="euclidean")
    if name == "riemannian-exp":
        return FinslerMetric(n, _alpha_exp, lo, hi, "riemannian-aux",
                             sigma=lambda x: jets.exp((n - 1) * x[0]), label="riemannian-exp")
    if name == "randers-exp":
        b = np.asarray(params.get("b", [0.3] + [0.0] * (n - 1)), dtype=float)
        if b.shape != (n,):
            raise MetricError(f"drift b must have length {n}")
        # |b|_alpha^2 = b1^2 + e^{-2 x1} sum_{i>1} b_i^2, largest at the box's smallest x1
        worst = b[0] ** 2 + np.exp(-2 * lo[0]) * np.sum(b[1:] ** 2)
        if worst >= 1:
            raise MetricError("drift too large: |b|_alpha >= 1 somewhere in the chart")
        bt = tuple(float(v) for v in b)

        def gauge(x, y):
            return _alpha_exp(x, y) + sum(bi * c for bi, c in zip(bt, y) if bi != 0.0)

        return FinslerMetric(n, gauge, lo, hi, label="randers-exp", params={"b": b.tolist()})
    if name == "randers-polar":
        if n != 2:
            raise MetricError("randers-polar is two-dimensional")
        c = float(params.get("c", 0.3))
        if abs(c) >= 1:
            raise MetricError("randers-polar needs |c| < 1")
        lo = np.asarray(params.get("lower", [0.5, -1.0]), dtype=float)
        hi = np.asarray(params.get("upper", [2.0, 1.0]), dtype=float)
        if lo[0] <= 0:
            raise MetricError("randers-polar needs r > 0 on the chart")

        def gauge(x, y):
            alpha = jets.sqrt(y[0] * y[0] + x[0] * x[0] * y[1] * y[1])
            return alpha + c * (jets.cos(x[1]) * y[0] - x[0] * jets.sin(x[1]) * y[1])

        return FinslerMetric(2, gauge, lo, hi, label="randers-polar", params={"c": c})
    if name == "minkowski":
        norm = params.get("norm", "randers")
        if not isinstance(norm, MinkowskiNorm):
            nparams = params.get("norm_params")
            if nparams is None and norm == "randers":
                nparams = {"b": [0.3] + [0.0] * (n - 1)}
            norm = norm_catalog(str(norm), n, nparams)
        return FinslerMetric(n, lambda x, y: norm.gauge(y), lo, hi,
                             label=f"minkowski({norm.label})", params={"norm": norm.label})
    raise MetricError(f"unknown metric {name!r}; known: {', '.join(CATALOG)}")


def from_expr(text: str, dimension: int, lower=None, upper=None, volume: str = "coordinate",
              sigma: str | None = None, label: str | None = None) -> FinslerMetric:
    """Metric from gauge text in ``x1..xn, y1..yn``; ``sigma`` is text in ``x1..xn``."""
    e = _expr.parse(text, dimension)
    lo = -np.ones(dimension) if lower is None else lower
    hi = np.ones(dimension) if upper is None else upper
    sig = None
    if sigma is not None:
        se = _expr.parse(sigma, dimension)
        if any(v.startswith("y") for v in se.variables()):
            raise MetricError("sigma may only depend on x")
        sig = lambda x: _expr.evaluate(se, _expr.bind(x=x))  # noqa: E731
    return FinslerMetric(
        dimension, _expr.ExprGauge(e), lo, hi, volume, sig, label=label or text,
        params={"expr": text, "sigma": sigma},
    )


def check_metric(M: FinslerMetric, points=None, directions=None, tol: float = 1e-9):
    """check_minkowski at each sampled chart point; returns the list of reports."""
    if points is None:
        points = chart_grid(M, 3)
    if directions is None:
        directions = default_directions(M.dimension, 60)
    return [check_minkowski(M.norm_at(x), directions, tol) for x in np.atleast_2d(points)]


def chart_grid(M: FinslerMetric, per_axis: int, margin: float = 0.05) -> np.ndarray:
    pad = margin * (M.upper - M.lower)
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in zip(M.lower + pad, M.upper - pad)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, M.dimension)


# ---------------------------------------------------------------------------
# jet pipeline


def _stack_last(items):
    return jets.stack(items, axis=-1)


def _deriv_all(j: Jet, offset: int, n: int) -> Jet:
    """Stack d/dz_{offset+k} for k < n along a new trailing axis."""
    return _stack_last([j.deriv(offset + k) for k in range(n)])


class _Pipeline:
    """Shared intermediate jets at a batch of points."""

    def __init__(self, M: FinslerMetric, x, y, order: int):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(np.linalg.norm(y, axis=-1) == 0):
            raise MetricError("y must be nonzero")
        x, y = np.broadcast_arrays(x, y)
        n = M.dimension
        if x.shape[-1] != n:
            raise MetricError(f"expected points of dimension {n}")
        self.M, self.n, self.order = M, n, order
        self.x, self.y = x, y
        zs = jets.variables(np.concatenate([x, y], axis=-1), order)
        self.xs, self.ys = zs[:n], zs[n:]
        F = M.gauge(self.xs, self.ys)
        if not isinstance(F, Jet):
            raise MetricError("gauge must depend on y")
        self.F = F
        self.F2 = F * F
        F2y = _deriv_all(self.F2, n, n)  # (.., n)
        self.g = 0.5 * _deriv_all(F2y, n, n)  # (.., n, n), order K-2
        gv = self.g.c[..., 0]
        if np.any(np.linalg.eigvalsh(gv)[..., 0] <= 0):
            raise MetricError("fundamental tensor is not positive definite")
        self.ginv = jets.inv(self.g)
        yv = _stack_last([yy.truncate(order - 2) for yy in self.ys])  # (.., n)
        F2yx = _deriv_all(F2y, 0, n)  # [l, k] = d_y^l d_x^k F^2
        F2x = _deriv_all(self.F2, 0, n).truncate(order - 2)
        w = (F2yx * yv.reshape(*yv.shape[:-1], 1, n)).sum(-1) - F2x
        self.yv = yv
        self.G = 0.25 * (self.ginv * w.reshape(*w.shape[:-1], 1, n)).sum(-1)

    @property
    def batch(self):
        return self.x.shape[:-1]

    def N(self) -> Jet:
        return _deriv_all(self.G, self.n, self.n)  # [i, j] = dG^i/dy^j


def _values(j: Jet):
    return j.c[..., 0].copy()


@dataclass(frozen=True)
class CurvatureBundle:
    x: np.ndarray
    y: np.ndarray
    F: np.ndarray
    g: np.ndarray
    A: np.ndarray
    G: np.ndarray
    N: np.ndarray
    Gamma: np.ndarray
    B: np.ndarray
    E: np.ndarray
    L: np.ndarray
    J: np.ndarray
    P: np.ndarray
    tau: np.ndarray
    S: np.ndarray
    hdtau: np.ndarray

    def as_dict(self):
        return {k: np.asarray(getattr(self, k)).tolist() for k in self.__dataclass_fields__}


def curvature_bundle(M: FinslerMetric, x, y, order: int = 5) -> CurvatureBundle:
    """Every curvature quantity at (x, y); ``order`` >= 5 (exact for B)."""
    if order < 5:
        raise ValueError("curvature_bundle needs jet order >= 5")
    p = _Pipeline(M, x, y, order)
    n = p.n
    bs = p.batch
    g, ginv, G = p.g, p.ginv, p.G
    N = p.N()  # order K-3
    # horizontal derivatives of g: [i, j, k] = delta_k g_ij
    dgx = _deriv_all(g, 0, n).truncate(order - 3)
    dgy = _deriv_all(g, n, n)  # [i, j, m]
    Nt = N.reshape(*bs, 1, 1, n, n)  # [., ., m, k]
    corr = (dgy.reshape(*bs, n, n, n, 1) * Nt).sum(-2)
    dg = dgx - corr  # [i, j, k]
    # Christoffel-type combination [l, j, k]
    comb = dg + dg.swapaxes(-1, -2) - dg.transpose(*range(len(bs)), len(bs) + 2, len(bs), len(bs) + 1)
    Gamma = 0.5 * (ginv.truncate(order - 3).reshape(*bs, n, n, 1, 1) * comb.reshape(*bs, 1, n, n, n)).sum(-3)
    # Berwald curvature
    dG = N
    ddG = _deriv_all(dG, n, n)
    B = _deriv_all(ddG, n, n)  # [i, j, k, l]
    # Chern h-v curvature
    Pj = _deriv_all(Gamma, n, n)  # [i, j, k, l]
    Fv = _values(p.F)
    P = -Fv[..., None, None, None, None] * _values(Pj)
    # distortion and S-curvature
    tau = 0.5 * jets.log(jets.det(g))
    sig = M.sigma_value([xx.truncate(order - 2) for xx in p.xs])
    if isinstance(sig, Jet):
        tau = tau - jets.log(sig)
    dtau_x = _values(_deriv_all(tau, 0, n))
    dtau_y = _values(_deriv_all(tau, n, n))
    Gv = _values(G)
    Nv = _values(N)
    Bv = _values(B)
    gv = _values(g)
    ginvv = _values(ginv)
    yv = p.y
    S = np.einsum("...i,...i->...", yv, dtau_x) - 2 * np.einsum("...i,...i->...", Gv, dtau_y)
    hdtau = dtau_x - np.einsum("...mi,...m->...i", Nv, dtau_y)
    E = 0.5 * np.einsum("...mmjk->...jk", Bv)
    ylow = np.einsum("...im,...m->...i", gv, yv)
    L = -0.5 * np.einsum("...i,...ijkl->...jkl", ylow, Bv)
    J = np.einsum("...jl,...jkl->...k", ginvv, L)
    # Cartan tensor A_ijk = 1/4 F [F^2]_{y^i y^j y^k}
    F2yyy = _deriv_all(_deriv_all(_deriv_all(p.F2, n, n), n, n), n, n)
    A = 0.25 * Fv[..., None, None, None] * _values(F2yyy)
    return CurvatureBundle(
        p.x, p.y, Fv, gv, A, Gv, Nv, _values(Gamma), Bv, E, L, J, P,
        _values(tau), S, hdtau,
    )


# individual entry points -------------------------------------------------


def spray(M: FinslerMetric, x, y) -> np.ndarray:
    return _values(_Pipeline(M, x, y, 2).G)


def nonlinear_connection(M: FinslerMetric, x, y) -> np.ndarray:
    return _values(_Pipeline(M, x, y, 3).N())


def connection_with_derivative(M: FinslerMetric, x, y):
    """``(N, dN)`` with ``dN[i, k, m] = d N^i_k / d y^m``."""
    p = _Pipeline(M, x, y, 4)
    N = p.N()
    return _values(N), _values(_deriv_all(N, p.n, p.n))


def chern_coefficients(M: FinslerMetric, x, y) -> np.ndarray:
    return curvature_bundle(M, x, y).Gamma


def berwald_curvature(M: FinslerMetric, x, y) -> np.ndarray:
    return curvature_bundle(M, x, y).B


def mean_berwald(M: FinslerMetric, x, y) -> np.ndarray:
    return curvature_bundle(M, x, y).E


def landsberg_curvature(M: FinslerMetric, x, y):
    """``(L, J)``: Landsberg curvature and mean Landsberg curvature."""
    b = curvature_bundle(M, x, y)
    return b.L, b.J


def mean_landsberg(M: FinslerMetric, x, y) -> np.ndarray:
    return curvature_bundle(M, x, y).J


def chern_hv_curvature(M: FinslerMetric, x, y) -> np.ndarray:
    return curvature_bundle(M, x, y).P


def distortion(M: FinslerMetric, x, y):
    return curvature_bundle(M, x, y).tau


def s_curvature(M: FinslerMetric, x, y):
    return curvature_bundle(M, x, y).S


def horizontal_dtau(M: FinslerMetric, x, y) -> np.ndarray:
    return curvature_bundle(M, x, y).hdtau


# ---------------------------------------------------------------------------
# classification

UNICORN_L = 1e-8
UNICORN_E = 1e-8
UNICORN_B = 1e-4


@dataclass
class ClassificationReport:
    label: str
    samples: int
    norms: dict
    thresholds: dict
    verdicts: dict
    theorem11_consistent: bool
    unicorn_candidates: list
    witnesses: dict

    def as_dict(self):
        return {
            "label": self.label, "samples": self.samples, "norms": self.norms,
            "thresholds": self.thresholds, "verdicts": self.verdicts,
            "theorem11_consistent": self.theorem11_consistent,
            "unicorn_candidates": self.unicorn_candidates, "witnesses": self.witnesses,
        }


def sample_points(M: FinslerMetric, points_per_axis: int = 3, directions: int = 8,
                  seed: int | None = None):
    """Grid of chart points times unit directions; seeded random directions when seed given."""
    X = chart_grid(M, points_per_axis)
    if seed is None:
        D = default_directions(M.dimension, directions)
    else:
        rng = np.random.default_rng(seed)
        D = rng.normal(size=(directions, M.dimension))
        D /= np.linalg.norm(D, axis=1, keepdims=True)
    xs = np.repeat(X, len(D), axis=0)
    ys = np.tile(D, (len(X), 1))
    return xs, ys


def _sup(T):
    T = np.asarray(T)
    return np.max(np.abs(T.reshape(T.shape[0], -1)), axis=1) if T.ndim > 1 else np.abs(T)


def classify(M: FinslerMetric, points_per_axis: int = 3, directions: int = 8,
             rtol: float = 1e-7, thresholds: Mapping | None = None, seed: int | None = None,
             chunk: int = 64) -> ClassificationReport:
    """Sup-norms of A, B, E, L, J, S, P over a sample grid plus verdicts.

    A quantity is "small" when its grid sup is at most
    ``rtol * (1 + grid sup of |g|)`` unless ``thresholds`` overrides it.
    """
    xs, ys = sample_points(M, points_per_axis, directions, seed)
    if len(xs) == 0:
        raise MetricError("empty grid")
    per = {k: [] for k in ("A", "B", "E", "L", "J", "S", "P", "g")}
    for s in range(0, len(xs), chunk):
        b = curvature_bundle(M, xs[s : s + chunk], ys[s : s + chunk])
        for k in per:
            per[k].append(_sup(getattr(b, k)))
    per = {k: np.concatenate(v) for k, v in per.items()}
    scale = float(per["g"].max())
    thr = {k: rtol * (1 + scale) for k in ("A", "B", "E", "L", "J", "S", "P")}
    thr.update(dict(thresholds or {}))
    norms = {k: float(per[k].max()) for k in thr}
    witnesses = {}
    for k in thr:
        i = int(np.argmax(per[k]))
        witnesses[k] = {"x": xs[i].tolist(), "y": ys[i].tolist(), "value": float(per[k][i])}
    small = {k: norms[k] <= thr[k] for k in thr}
    verdicts = {
        "riemannian": small["A"],
        "berwald": small["B"],
        "landsberg": small["L"],
        "weak_landsberg": small["J"],
    }
    uni = np.flatnonzero((per["L"] < UNICORN_L) & (per["E"] < UNICORN_E) & (per["B"] > UNICORN_B))
    candidates = [{"x": xs[i].tolist(), "y": ys[i].tolist(), "B": float(per["B"][i]),
                   "L": float(per["L"][i]), "E": float(per["E"][i])} for i in uni]
    consistent = not (small["L"] and small["E"] and not small["B"]) and not candidates
    return ClassificationReport(M.label, len(xs), norms, thr, verdicts, consistent, candidates, witnesses)


__all__ = [
    "CATALOG", "ClassificationReport", "CurvatureBundle", "FinslerMetric", "MetricError",
    "berwald_curvature", "catalog", "chart_grid", "check_metric", "chern_coefficients",
    "chern_hv_curvature", "classify", "connection_with_derivative", "curvature_bundle",
    "distortion", "from_expr", "horizontal_dtau", "landsberg_curvature", "mean_berwald",
    "mean_landsberg", "nonlinear_connection", "s_curvature", "sample_points", "spray",
]
