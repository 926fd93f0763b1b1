"""Minkowski norms on R^n and their fiber tensors.

Everything here is evaluated at a base vector ``y`` (or a batch of them,
shape ``(..., n)``):

* fundamental tensor ``g_ij = 1/2 [F^2]_{y^i y^j}``
* Cartan tensor ``A_ijk = 1/4 F [F^2]_{y^i y^j y^k}``
* Cartan form ``eta_i = d/dy^i log sqrt(det g)``
* angular metric ``h_ij = F F_{y^i y^j}``
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import expr as _expr
from . import jets
from .jets import Jet

CATALOG = ("euclidean", "randers", "quartic-smoothed", "linear-image")


class NormError(ValueError):
    pass


class NormConstructionError(NormError):
    def __init__(self, message, min_eigenvalue=None, witness=None):
        self.min_eigenvalue = min_eigenvalue
        self.witness = None if witness is None else np.asarray(witness)
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class MinkowskiNorm:
    """A gauge ``y -> F(y)``.

    ``gauge`` receives a list of ``n`` components (floats, arrays or jets)
    and must use only jet-compatible arithmetic.
    """

    dimension: int
    gauge: Callable
    label: str
    params: Mapping = field(default_factory=dict)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.dimension:
            raise NormError(f"expected vectors of length {self.dimension}")
        out = self.gauge([y[..., i] for i in range(self.dimension)])
        return float(out) if np.ndim(out) == 0 else np.asarray(out)

    def jet(self, y, order=3) -> Jet:
        return jets.jet_eval(self.gauge, y, order)

    def __repr__(self):
        return f"MinkowskiNorm({self.label!r}, n={self.dimension})"


@dataclass(frozen=True)
class NormTensors:
    y: np.ndarray
    F: np.ndarray
    dF: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    A: np.ndarray
    eta: np.ndarray
    eta_trace: np.ndarray
    h: np.ndarray


# ---------------------------------------------------------------------------
# catalog


def _euclid(y):
    return jets.sqrt(sum(c * c for c in y))


def _randers_gauge(b):
    b = tuple(float(v) for v in b)

    def gauge(y):
        return _euclid(y) + sum(bi * c for bi, c in zip(b, y) if bi != 0.0)

    return gauge


def _quartic_gauge(eps):
    def gauge(y):
        sq = [c * c for c in y]
        s2 = sum(sq)
        return jets.power(sum(q * q for q in sq) + eps * s2 * s2, 0.25)

    return gauge


def _linear_gauge(base, L):
    L = np.asarray(L, dtype=float)

    def gauge(y):
        z = [sum(L[i, j] * y[j] for j in range(L.shape[1]) if L[i, j] != 0.0) for i in range(L.shape[0])]
        return base.gauge(z)

    return gauge


def catalog(name: str, dimension: int, params: Mapping | None = None) -> MinkowskiNorm:
    """Built-in norms.

    ``randers`` takes ``b`` (drift, ``|b| < 1``); ``quartic-smoothed`` takes
    ``eps`` (default 0.1); ``linear-image`` takes ``matrix`` and ``base``
    (a norm or a catalog name, with optional ``base_params``).
    """
    params = dict(params or {})
    n = int(dimension)
    if n < 1:
        raise NormError("dimension must be positive")
    if name == "euclidean":
        return MinkowskiNorm(n, _euclid, "euclidean", {})
    if name == "randers":
        b = np.asarray(params.get("b", np.zeros(n)), dtype=float).ravel()
        if b.size != n:
            raise NormError(f"randers drift b must have length {n}")
        if np.linalg.norm(b) >= 1.0:
            raise NormError(f"randers drift must satisfy |b| < 1, got {np.linalg.norm(b):.6g}")
        return MinkowskiNorm(n, _randers_gauge(b), "randers", {"b": b.tolist()})
    if name == "quartic-smoothed":
        eps = float(params.get("eps", 0.1))
        if eps <= 0:
            raise NormError("quartic-smoothed needs eps > 0")
        return MinkowskiNorm(n, _quartic_gauge(eps), "quartic-smoothed", {"eps": eps})
    if name == "linear-image":
        if "matrix" not in params:
            raise NormError("linear-image needs a matrix")
        L = np.asarray(params["matrix"], dtype=float).reshape(n, n)
        sv = np.linalg.svd(L, compute_uv=False)
        if sv[-1] <= 1e-12 * max(sv[0], 1.0):
            raise NormError("linear-image matrix is singular")
        base = params.get("base", "euclidean")
        if not isinstance(base, MinkowskiNorm):
            base = catalog(str(base), n, params.get("base_params"))
        if base.dimension != n:
            raise NormError("base norm dimension mismatch")
        return MinkowskiNorm(
            n, _linear_gauge(base, L), f"linear-image({base.label})",
            {"matrix": L.tolist(), "base": base.label, "base_params": dict(base.params)},
        )
    raise NormError(f"unknown norm {name!r}; known: {', '.join(CATALOG)}")


def from_expr(text: str, dimension: int) -> MinkowskiNorm:
    """Norm from gauge text in the variables ``y1..yn``."""
    e = _expr.parse(text, dimension)
    if e.uses_x():
        raise NormError("a Minkowski norm may not depend on x variables")
    return MinkowskiNorm(dimension, lambda y: _expr.evaluate(e, _expr.bind(y=y)), text, {"expr": text})


# ---------------------------------------------------------------------------
# sample grids


def default_directions(n: int, count: int = 200, seed: int = 0) -> np.ndarray:
    """Reproducible unit directions: angular grid (n=2), Fibonacci sphere (n=3), seeded rejection (n>=4)."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = 2 * np.pi * (np.arange(count) + 0.5) / count
        return np.column_stack([np.cos(th), np.sin(th)])
    if n == 3:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        r = np.sqrt(1 - z * z)
        phi = np.pi * (1 + 5**0.5) * k
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        v = rng.uniform(-1, 1, size=n)
        r = np.linalg.norm(v)
        if 0.1 < r <= 1.0:
            out.append(v / r)
    return np.array(out)


# ---------------------------------------------------------------------------
# tensors


def _check_y(y):
    y = np.asarray(y, dtype=float)
    if np.any(np.linalg.norm(y, axis=-1) == 0):
        raise NormError("tensors are undefined at y = 0")
    return y


def _hessian_jets(j: Jet):
    """Second partials of a jet as a jet matrix (order drops by two)."""
    n = j.nvars
    first = [j.deriv(i) for i in range(n)]
    return jets.stack([jets.stack([first[i].deriv(k) for k in range(n)], axis=-1) for i in range(n)], axis=-2)


def norm_tensors(F: MinkowskiNorm, y) -> NormTensors:
    """All fiber tensors of ``F`` at ``y`` in one jet pass."""
    y = _check_y(y)
    jF = F.jet(y, order=3)
    jF2 = jF * jF
    Fv = jF.value
    n = F.dimension
    dF = jF.c[..., 1 : 1 + n].copy()
    g = 0.5 * jF2.hessian()
    h = np.asarray(Fv)[..., None, None] * jF.hessian()
    d3 = np.empty(np.shape(Fv) + (n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                e = [0] * n
                e[i] += 1
                e[j] += 1
                e[k] += 1
                d3[..., i, j, k] = jF2.partial(e)
    Fb = np.asarray(Fv)[..., None, None, None]
    A = 0.25 * Fb * d3
    ginv = np.linalg.inv(g)
    # volume route: derivative of log sqrt det g
    gj = 0.5 * _hessian_jets(jF2)  # order-1 jet matrix
    logvol = 0.5 * jets.log(jets.det(gj))
    eta = logvol.c[..., 1 : 1 + n].copy()
    eta_trace = np.einsum("...jk,...ijk->...i", ginv, A) / np.asarray(Fv)[..., None]
    return NormTensors(y, np.asarray(Fv), dF, g, ginv, A, eta, eta_trace, h)


def fundamental_tensor(F: MinkowskiNorm, y) -> np.ndarray:
    return norm_tensors(F, y).g


def cartan_tensor(F: MinkowskiNorm, y) -> np.ndarray:
    return norm_tensors(F, y).A


def cartan_form(F: MinkowskiNorm, y) -> np.ndarray:
    t = norm_tensors(F, y)
    if np.any(np.linalg.eigvalsh(t.g)[..., 0] <= 0):
        raise NormError("fundamental tensor is not positive definite at y")
    return t.eta


def angular_metric(F: MinkowskiNorm, y) -> np.ndarray:
    return norm_tensors(F, y).h


# ---------------------------------------------------------------------------
# validity


@dataclass(frozen=True)
class ValidityReport:
    homogeneity: float
    euler: float
    min_eigenvalue: float
    witness: np.ndarray
    tol: float
    valid: bool

    def as_dict(self):
        return {
            "homogeneity": self.homogeneity,
            "euler": self.euler,
            "min_eigenvalue": self.min_eigenvalue,
            "witness": np.asarray(self.witness).tolist(),
            "tol": self.tol,
            "valid": self.valid,
        }


def check_minkowski(F: MinkowskiNorm, samples=None, tol: float = 1e-10) -> ValidityReport:
    """Homogeneity, Euler identity and positive-definiteness of g over samples."""
    if samples is None:
        samples = default_directions(F.dimension)
    Y = np.atleast_2d(np.asarray(samples, dtype=float))
    jF = F.jet(Y, order=2)
    Fv = jF.value
    hom = np.abs(F(2 * Y) - 2 * Fv)
    euler = np.abs(np.einsum("bi,bi->b", jF.c[:, 1 : 1 + F.dimension], Y) - Fv)
    g = 0.5 * (jF * jF).hessian()
    eig = np.linalg.eigvalsh(g)[:, 0]
    w = int(np.argmin(eig))
    scale = np.maximum(1.0, np.abs(Fv))
    hom_v = float(np.max(hom / scale))
    eul_v = float(np.max(euler / scale))
    valid = bool(hom_v <= tol and eul_v <= tol and eig[w] > 0 and np.all(Fv > 0))
    return ValidityReport(hom_v, eul_v, float(eig[w]), Y[w].copy(), tol, valid)


def norm_from_radial(rho, n: int, samples=None, tol: float = 1e-9) -> MinkowskiNorm:
    """Norm whose indicatrix is the star-shaped surface ``{rho(u) u : |u| = 1}``.

    ``rho`` is a callable on direction components or a gauge text in
    ``y1..yn`` read as direction variables.  Strong convexity is verified,
    not assumed.
    """
    if isinstance(rho, str):
        e = _expr.parse(rho, n)
        label = f"radial({rho})"
        rho_fn = lambda u: _expr.evaluate(e, _expr.bind(y=u))  # noqa: E731
    else:
        label = f"radial({getattr(rho, '__name__', 'rho')})"
        rho_fn = rho

    def gauge(y):
        r = _euclid(y)
        u = [c / r for c in y]
        return r / rho_fn(u)

    F = MinkowskiNorm(n, gauge, label, {})
    if samples is None:
        samples = default_directions(n, 400 if n == 2 else 600)
    rep = check_minkowski(F, samples, tol)
    if not rep.valid:
        raise NormConstructionError(
            f"radial function does not bound a strongly convex body: min eigenvalue of g "
            f"{rep.min_eigenvalue:.6g} at direction {np.round(rep.witness, 6).tolist()}",
            rep.min_eigenvalue, rep.witness,
        )
    return F


__all__ = [
    "CATALOG", "MinkowskiNorm", "NormConstructionError", "NormError", "NormTensors",
    "ValidityReport", "angular_metric", "cartan_form", "cartan_tensor", "catalog",
    "check_minkowski", "default_directions", "from_expr", "fundamental_tensor",
    "norm_from_radial", "norm_tensors",
]
