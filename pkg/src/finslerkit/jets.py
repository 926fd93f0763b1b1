"""Truncated multivariate Taylor arithmetic ("jets").

A :class:`Jet` stores the Taylor coefficients of a scalar field around a
point, for every multi-index of total degree up to ``order``, in a dense
graded-lex table.  Coefficient ``c[alpha]`` equals ``d^alpha f / alpha!``.

Jets may carry leading batch axes: ``Jet.c`` has shape ``batch + (m,)`` where
``m`` is the number of monomials.  All arithmetic broadcasts over the batch,
which is how tensors of jets (metric matrices, Cartan tensors) are stored.

The finite-difference oracle :func:`fd_oracle` lives here as well; it shares
nothing with the jet path except the field callable.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np

from . import kernels

DEFAULT_ORDER = 6


class JetDomainError(ValueError):
    """A primitive was evaluated outside its smooth domain."""

    def __init__(self, primitive: str, detail: str = ""):
        self.primitive = primitive
        msg = f"{primitive}: argument outside smooth domain"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


# ---------------------------------------------------------------------------
# index bookkeeping


def _compositions(total, nvars):
    """Exponent tuples of the given total degree, lexicographically descending."""
    if nvars == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, nvars - 1):
            yield (first,) + rest


class JetSpace:
    """Monomial table and multiplication/derivative tables for (nvars, order).

    Obtain instances through :func:`space` so the tables are shared.
    """

    def __init__(self, nvars: int, order: int):
        if nvars < 1 or order < 0:
            raise ValueError("need nvars >= 1 and order >= 0")
        self.nvars = nvars
        self.order = order
        monos = [m for d in range(order + 1) for m in _compositions(d, nvars)]
        self.monomials = np.array(monos, dtype=np.intp).reshape(len(monos), nvars)
        self.size = len(monos)
        self.degrees = self.monomials.sum(axis=1)
        self.index = {m: i for i, m in enumerate(monos)}
        # prefix length for every lower order (graded ordering)
        self.prefix = [int(np.searchsorted(self.degrees, d, side="right")) for d in range(order + 1)]
        self.factorials = np.array(
            [math.prod(math.factorial(int(e)) for e in m) for m in monos], dtype=float
        )
        self._build_mul_table()

    def _build_mul_table(self):
        radix = self.order + 1
        weights = radix ** np.arange(self.nvars - 1, -1, -1)
        keys = self.monomials @ weights
        order_keys = np.argsort(keys)
        sorted_keys = keys[order_keys]
        ia, ib, ik = [], [], []
        for i in range(self.size):
            room = self.order - self.degrees[i]
            js = np.flatnonzero(self.degrees <= room)
            summed = (self.monomials[i] + self.monomials[js]) @ weights
            ks = order_keys[np.searchsorted(sorted_keys, summed)]
            ia.append(np.full(js.size, i, dtype=np.intp))
            ib.append(js)
            ik.append(ks)
        ia = np.concatenate(ia)
        ib = np.concatenate(ib)
        ik = np.concatenate(ik)
        perm = np.argsort(ik, kind="stable")
        self.ia = np.ascontiguousarray(ia[perm])
        self.ib = np.ascontiguousarray(ib[perm])
        self.ik = np.ascontiguousarray(ik[perm])

    @lru_cache(maxsize=None)
    def deriv_table(self, var: int):
        """Source indices and factors for d/d(var), landing in order-1 space."""
        lower = space(self.nvars, self.order - 1)
        shifted = lower.monomials.copy()
        shifted[:, var] += 1
        src = np.array([self.index[tuple(m)] for m in shifted], dtype=np.intp)
        fac = shifted[:, var].astype(float)
        return lower, src, fac

    def __repr__(self):
        return f"JetSpace(nvars={self.nvars}, order={self.order}, size={self.size})"


@lru_cache(maxsize=None)
def space(nvars: int, order: int) -> JetSpace:
    return JetSpace(nvars, order)


def multi_indices(nvars: int, max_degree: int, min_degree: int = 0):
    """Multi-indices in canonical graded-lex order."""
    return [m for d in range(min_degree, max_degree + 1) for m in _compositions(d, nvars)]


# ---------------------------------------------------------------------------
# the Jet value type


def _as2d(c, m):
    return np.ascontiguousarray(c.reshape(-1, m), dtype=float)


class Jet:
    """Truncated Taylor expansion of a scalar (or a batch of scalars)."""

    __slots__ = ("space", "c")
    __array_ufunc__ = None  # make numpy defer to our reflected operators

    def __init__(self, sp: JetSpace, c):
        c = np.asarray(c, dtype=float)
        if c.shape[-1:] != (sp.size,):
            raise ValueError(f"coefficient axis must have length {sp.size}")
        self.space = sp
        self.c = c

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, sp: JetSpace, value):
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (sp.size,))
        c[..., 0] = value
        return cls(sp, c)

    @classmethod
    def variable(cls, sp: JetSpace, var: int, value):
        j = cls.constant(sp, value)
        if sp.order >= 1:
            j.c[..., 1 + var] = 1.0
        return j

    # shape handling -----------------------------------------------------
    @property
    def shape(self):
        return self.c.shape[:-1]

    @property
    def order(self):
        return self.space.order

    @property
    def nvars(self):
        return self.space.nvars

    @property
    def value(self):
        v = self.c[..., 0]
        return float(v) if v.ndim == 0 else v.copy()

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            raise IndexError("ellipsis indexing is not supported on jets")
        return Jet(self.space, self.c[key])

    def __len__(self):
        if not self.shape:
            raise TypeError("scalar jet has no length")
        return self.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def reshape(self, *shape):
        return Jet(self.space, self.c.reshape(*shape, self.space.size))

    def sum(self, axis=None):
        nb = len(self.shape)
        if axis is None:
            axis = tuple(range(nb))
        elif isinstance(axis, int):
            axis = (axis % nb,)
        else:
            axis = tuple(a % nb for a in axis)
        return Jet(self.space, self.c.sum(axis=axis))

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise truncation order")
        sp = space(self.nvars, order)
        return Jet(sp, self.c[..., : sp.size])

    def transpose(self, *axes):
        nb = len(self.shape)
        return Jet(self.space, self.c.transpose(*axes, nb))

    def swapaxes(self, a, b):
        nb = len(self.shape)
        return Jet(self.space, np.swapaxes(self.c, a % nb, b % nb))

    # coefficient access -------------------------------------------------
    def coefficient(self, alpha: Sequence[int]):
        alpha = tuple(int(a) for a in alpha)
        idx = self.space.index.get(alpha)
        if idx is None:
            raise KeyError(f"multi-index {alpha} exceeds order {self.order}")
        return self.c[..., idx]

    def partial(self, alpha: Sequence[int]):
        """The partial derivative d^alpha f at the expansion point."""
        alpha = tuple(int(a) for a in alpha)
        return self.coefficient(alpha) * math.prod(math.factorial(a) for a in alpha)

    def gradient(self):
        """First partials, shape ``batch + (nvars,)``."""
        return self.c[..., 1 : 1 + self.nvars].copy()

    def hessian(self):
        n = self.nvars
        H = np.empty(self.shape + (n, n))
        for i in range(n):
            for j in range(n):
                e = [0] * n
                e[i] += 1
                e[j] += 1
                H[..., i, j] = self.partial(e)
        return H

    def deriv(self, var: int) -> "Jet":
        """Differentiate with respect to variable ``var``; the order drops by one."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        lower, src, fac = self.space.deriv_table(var)
        return Jet(lower, self.c[..., src] * fac)

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different variable counts")
            if other.order == self.order:
                return self, other
            o = min(self.order, other.order)
            return self.truncate(o), other.truncate(o)
        return self, None

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is None:
            other = np.asarray(other, dtype=float)
            shape = np.broadcast_shapes(a.shape, other.shape)
            c = np.broadcast_to(a.c, shape + (a.space.size,)).copy()
            c[..., 0] += other
            return Jet(a.space, c)
        return Jet(a.space, a.c + b.c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.c)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is None:
            other = np.asarray(other, dtype=float)
            return Jet(a.space, a.c * other[..., None])
        return _mul(a, b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        other = np.asarray(other, dtype=float)
        if np.any(other == 0):
            raise JetDomainError("div", "division by zero")
        return Jet(self.space, self.c / other[..., None])

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        return power(self, p)

    def __repr__(self):
        return f"Jet(nvars={self.nvars}, order={self.order}, shape={self.shape}, value={self.c[..., 0]!r})"


def _mul(a: Jet, b: Jet) -> Jet:
    sp = a.space
    shape = np.broadcast_shapes(a.shape, b.shape)
    ca = np.broadcast_to(a.c, shape + (sp.size,))
    cb = np.broadcast_to(b.c, shape + (sp.size,))
    out = kernels.mul(_as2d(ca, sp.size), _as2d(cb, sp.size), sp.ia, sp.ib, sp.ik, sp.size)
    return Jet(sp, out.reshape(shape + (sp.size,)))


def _compose(a: Jet, coef) -> Jet:
    """sum_k coef[..., k] * (a - a0)**k; coef has shape a.shape + (order+1,)."""
    sp = a.space
    d = a.c.copy()
    d[..., 0] = 0.0
    coef = np.broadcast_to(coef, a.shape + (sp.order + 1,))
    out = kernels.compose(
        _as2d(d, sp.size), _as2d(coef, sp.order + 1), sp.ia, sp.ib, sp.ik, sp.size
    )
    return Jet(sp, out.reshape(a.shape + (sp.size,)))


# ---------------------------------------------------------------------------
# elementary functions (work on floats, arrays and jets)


def _ks(order):
    return np.arange(order + 1, dtype=float)


def reciprocal(a):
    if not isinstance(a, Jet):
        a = np.asarray(a, dtype=float)
        if np.any(a == 0):
            raise JetDomainError("div", "division by zero")
        return 1.0 / a
    a0 = a.c[..., 0]
    if np.any(a0 == 0):
        raise JetDomainError("div", "division by a jet with zero value")
    k = _ks(a.order)
    coef = (-1.0) ** k / a0[..., None] ** (k + 1)
    return _compose(a, coef)


def sqrt(a):
    if not isinstance(a, Jet):
        a = np.asarray(a, dtype=float)
        if np.any(a < 0):
            raise JetDomainError("sqrt", "negative argument")
        r = np.sqrt(a)
        return float(r) if r.ndim == 0 else r
    return _fractional_power(a, 0.5, "sqrt")


def exp(a):
    if not isinstance(a, Jet):
        r = np.exp(np.asarray(a, dtype=float))
        return float(r) if r.ndim == 0 else r
    a0 = a.c[..., 0]
    k = _ks(a.order)
    fact = np.array([math.factorial(int(i)) for i in k])
    coef = np.exp(a0)[..., None] / fact
    return _compose(a, coef)


def log(a):
    if not isinstance(a, Jet):
        a = np.asarray(a, dtype=float)
        if np.any(a <= 0):
            raise JetDomainError("log", "non-positive argument")
        r = np.log(a)
        return float(r) if r.ndim == 0 else r
    a0 = a.c[..., 0]
    if np.any(a0 <= 0):
        raise JetDomainError("log", "non-positive value")
    k = _ks(a.order)
    coef = np.empty(a0.shape + (a.order + 1,))
    coef[..., 0] = np.log(a0)
    kk = k[1:]
    coef[..., 1:] = ((-1.0) ** (kk + 1) / kk) / a0[..., None] ** kk
    return _compose(a, coef)


def sin(a):
    if not isinstance(a, Jet):
        r = np.sin(np.asarray(a, dtype=float))
        return float(r) if r.ndim == 0 else r
    return _compose(a, _trig_coef(a, 0))


def cos(a):
    if not isinstance(a, Jet):
        r = np.cos(np.asarray(a, dtype=float))
        return float(r) if r.ndim == 0 else r
    return _compose(a, _trig_coef(a, 1))


def _trig_coef(a, shift):
    a0 = a.c[..., 0]
    cycle = [np.sin(a0), np.cos(a0), -np.sin(a0), -np.cos(a0)]
    return np.stack(
        [cycle[(k + shift) % 4] / math.factorial(k) for k in range(a.order + 1)], axis=-1
    )


def _fractional_power(a: Jet, p: float, name: str) -> Jet:
    a0 = a.c[..., 0]
    if np.any(a0 <= 0):
        raise JetDomainError(name, "non-positive value")
    coef = np.empty(a0.shape + (a.order + 1,))
    binom = 1.0
    for k in range(a.order + 1):
        coef[..., k] = binom * a0 ** (p - k)
        binom *= (p - k) / (k + 1)
    return _compose(a, coef)


def power(a, p):
    """``a ** p`` for a constant real exponent."""
    p = float(p)
    integral = p.is_integer()
    if not isinstance(a, Jet):
        a = np.asarray(a, dtype=float)
        if not integral and np.any(a < 0):
            raise JetDomainError("pow", "negative base with fractional exponent")
        if p < 0 and np.any(a == 0):
            raise JetDomainError("pow", "zero base with negative exponent")
        r = np.power(a, p)
        return float(r) if r.ndim == 0 else r
    if integral:
        k = int(abs(p))
        result = Jet.constant(a.space, np.ones(a.shape))
        base = a
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return reciprocal(result) if p < 0 else result
    return _fractional_power(a, p, "pow")


# ---------------------------------------------------------------------------
# jets of tensors


def stack(items, axis=0):
    """Stack jets (or plain numbers) into one batched jet."""
    sp = None
    for it in items:
        if isinstance(it, Jet):
            sp = it.space if sp is None or it.order < sp.order else sp
    if sp is None:
        raise ValueError("stack needs at least one jet")
    cs = []
    for it in items:
        if isinstance(it, Jet):
            cs.append(it.truncate(sp.order).c)
        else:
            cs.append(Jet.constant(sp, it).c)
    shape = np.broadcast_shapes(*(c.shape for c in cs))
    cs = [np.broadcast_to(c, shape) for c in cs]
    nb = len(shape) - 1
    return Jet(sp, np.stack(cs, axis=axis % (nb + 1)))


def matmul(A: Jet, B: Jet) -> Jet:
    """Matrix product over the last two batch axes of jet matrices."""
    return (A.reshape(*A.shape, 1) * B.reshape(*B.shape[:-2], 1, *B.shape[-2:])).sum(-2)


def const_matmul(C, A: Jet) -> Jet:
    """Numeric matrix (possibly batched) times a jet matrix; linear, no products."""
    return Jet(A.space, np.einsum("...ij,...jkm->...ikm", C, A.c))


def inv(A: Jet) -> Jet:
    """Inverse of a jet matrix via a Neumann series around its value."""
    A0 = A.c[..., 0]
    A0inv = np.linalg.inv(A0)
    X = const_matmul(-A0inv, Jet(A.space, A.c - _const_part(A.c)))
    n = A.shape[-1]
    eye = np.broadcast_to(np.eye(n), A.shape)
    S = Jet.constant(A.space, eye)
    for _ in range(A.order):
        S = matmul(X, S) + eye
    return matmul(S, Jet.constant(A.space, A0inv))


def _const_part(c):
    out = np.zeros_like(c)
    out[..., 0] = c[..., 0]
    return out


def det(A: Jet) -> Jet:
    """Determinant of (a batch of) jet matrices by Gaussian elimination.

    Pivot rows are chosen per batch element by the magnitude of the value
    coefficient.
    """
    n = A.shape[-1]
    if A.shape[-2:] != (n, n):
        raise ValueError("det expects square jet matrices")
    batch = A.shape[:-2]
    nb = int(np.prod(batch)) if batch else 1
    c = A.c.reshape(nb, n, n, A.space.size).copy()
    rows = np.arange(nb)
    sign = np.ones(nb)
    result = None
    for k in range(n):
        piv = k + np.argmax(np.abs(c[:, k:, k, 0]), axis=1)
        if np.any(c[rows, piv, k, 0] == 0):
            raise JetDomainError("det", "singular matrix")
        swap = piv != k
        if np.any(swap):
            top = c[rows, k].copy()
            c[rows, k] = c[rows, piv]
            c[rows, piv] = top
            sign[swap] *= -1.0
        p = Jet(A.space, c[:, k, k])
        result = p if result is None else result * p
        if k + 1 < n:
            factors = Jet(A.space, c[:, k + 1 :, k]) / p.reshape(nb, 1)
            update = factors.reshape(nb, n - k - 1, 1) * Jet(A.space, c[:, None, k, k + 1 :])
            c[:, k + 1 :, k + 1 :] -= update.c
    result = result * sign
    return result.reshape(*batch) if batch else result[0]


# ---------------------------------------------------------------------------
# evaluation entry points


def variables(point, order: int = DEFAULT_ORDER):
    """Jet variables seeded at ``point`` (shape ``(nvars,)`` or ``(batch, nvars)``)."""
    point = np.asarray(point, dtype=float)
    nvars = point.shape[-1]
    sp = space(nvars, order)
    return [Jet.variable(sp, i, point[..., i]) for i in range(nvars)]


def jet_eval(f: Callable, point, order: int = DEFAULT_ORDER) -> Jet:
    """Taylor jet of the scalar field ``f`` at ``point``.

    ``f`` receives a list of jet variables, one per coordinate, and must
    build its value from jet arithmetic.  Domain violations raise
    :class:`JetDomainError`.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    vs = variables(point, order)
    out = f(vs)
    if not isinstance(out, Jet):  # constant field
        out = Jet.constant(vs[0].space, np.broadcast_to(out, vs[0].shape))
    return out


# ---------------------------------------------------------------------------
# finite-difference oracle

_STENCILS = {
    0: {0: 1.0},
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
    4: {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0},
}

# per-degree base step; balances O(h^2) truncation against eps/h^k roundoff
_BASE_STEP = {1: 1e-5, 2: 1e-4, 3: 1e-3, 4: 2e-3}


@dataclass(frozen=True)
class FDEstimate:
    value: float
    step: float
    roundoff: float
    cancellation_warning: bool

    def __float__(self):
        return self.value


def fd_oracle(f: Callable, point, index: Sequence[int], step: float | None = None,
              richardson: bool = False) -> FDEstimate:
    """Central-difference estimate of ``d^index f(point)``.

    Error is O(step**2), or O(step**4) with ``richardson=True`` (one
    extrapolation against ``2*step``).  ``f`` takes a plain float vector.
    """
    point = np.asarray(point, dtype=float)
    index = tuple(int(i) for i in index)
    deg = sum(index)
    if len(index) != point.size:
        raise ValueError("index length must match the point dimension")
    if deg > 4 or min(index) < 0:
        raise ValueError("fd_oracle supports total degree <= 4")
    if deg == 0:
        v = float(f(point))
        return FDEstimate(v, 0.0, 0.0, False)
    if step is None:
        step = _BASE_STEP[deg] * max(1.0, float(np.linalg.norm(point)))
        if richardson:
            step *= 5.0
    if step <= 0:
        raise ValueError("step must be positive")

    def central(h):
        axes = [sorted(_STENCILS[k].items()) for k in index]
        total = 0.0
        fmax = 0.0
        for combo in product(*axes):
            w = math.prod(c for _, c in combo)
            shift = np.array([o for o, _ in combo], dtype=float) * h
            fv = float(f(point + shift))
            fmax = max(fmax, abs(fv))
            total += w * fv
        return total / h**deg, fmax

    value, fmax = central(step)
    roundoff = np.finfo(float).eps * fmax * 2**deg / step**deg
    if richardson:
        coarse, _ = central(2 * step)
        value = (4 * value - coarse) / 3
        roundoff *= 5 / 3
    warn = bool(roundoff > 1e-3 * max(abs(value), 1e-300))
    if warn:
        warnings.warn(f"fd_oracle: roundoff {roundoff:.2e} dominates estimate {value:.3e}",
                      RuntimeWarning, stacklevel=2)
    return FDEstimate(float(value), float(step), float(roundoff), warn)


__all__ = [
    "DEFAULT_ORDER", "FDEstimate", "Jet", "JetDomainError", "JetSpace", "cos", "det",
    "exp", "fd_oracle", "inv", "jet_eval", "log", "matmul", "multi_indices", "power",
    "reciprocal", "sin", "space", "sqrt", "stack", "variables",
]
