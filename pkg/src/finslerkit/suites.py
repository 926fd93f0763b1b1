"""Named invariant suites shared by the command line and the acceptance tests.

Every suite takes a :class:`SuiteContext` and returns a :class:`SuiteResult`
made of scalar checks (``value op tol``) plus free-form details.  Randomness
comes from a per-suite seed derived from the global one, see :func:`child_seed`.
"""
from __future__ import annotations

import warnings
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import finsler as fs
from . import indicatrix as ind
from . import minkowski as mk
from . import transport as tr
from .jets import fd_oracle

# "approximately zero" cut-offs for the co-occurrence scans
RATE_ZERO = 1e-7
CURV_ZERO = 1e-7
LINEAR_ZERO = 1e-6

BERWALD_CATALOG = ("euclidean", "riemannian-exp", "randers-polar", "minkowski")


def child_seed(seed: int, label: str) -> int:
    """Per-suite seed: SeedSequence([seed, crc32(label)]) -> first 32-bit word."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, zlib.crc32(label.encode())])
    return int(ss.generate_state(1)[0])


@dataclass
class Check:
    name: str
    value: float
    tol: float
    op: str = "<="
    witness: dict | None = None

    @property
    def passed(self) -> bool:
        v = self.value
        if not np.isfinite(v):
            return False
        return v <= self.tol if self.op == "<=" else v > self.tol

    def as_dict(self):
        d = {"name": self.name, "value": float(self.value), "tol": float(self.tol),
             "op": self.op, "passed": self.passed}
        if self.witness is not None:
            d["witness"] = self.witness
        return d


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    findings: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and not self.findings

    def add(self, name, value, tol, op="<=", witness=None):
        c = Check(name, float(value), float(tol), op, witness)
        self.checks.append(c)
        return c

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def as_dict(self):
        return {
            "name": self.name, "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "findings": self.findings, "details": self.details,
        }


@dataclass
class SuiteContext:
    seed: int = 0
    tol: float | None = None
    samples: int | None = None
    metrics: list | None = None
    norms: list | None = None
    dimension: int | None = None

    def rng(self, label):
        return np.random.default_rng(child_seed(self.seed, label))


# ---------------------------------------------------------------------------
# defaults


def default_norms(n: int = 3):
    L = np.eye(n) + np.diag(np.arange(n) * 0.5) + 0.3 * np.eye(n, k=1)
    return [
        mk.catalog("euclidean", n),
        mk.catalog("randers", n, {"b": [0.5] + [0.0] * (n - 1)}),
        mk.catalog("quartic-smoothed", n),
        mk.catalog("linear-image", n, {"matrix": L.tolist(), "base": "quartic-smoothed"}),
    ]


def default_metrics(names=fs.CATALOG, n: int = 2):
    return [fs.catalog(name, n) for name in names]


def _unit(rng, count, n):
    D = rng.normal(size=(count, n))
    return D / np.linalg.norm(D, axis=1, keepdims=True)


def _points(rng, M, count, margin=0.1):
    pad = margin * (M.upper - M.lower)
    lo, hi = M.lower + pad, M.upper - pad
    return lo + rng.random((count, M.dimension)) * (hi - lo)


def _segment_length(M, p, d, margin=0.1, cap=0.5):
    """Largest s <= cap with p + s d inside the margin box."""
    pad = margin * (M.upper - M.lower)
    lo, hi = M.lower + pad, M.upper - pad
    s = cap
    for i in range(M.dimension):
        if d[i] > 0:
            s = min(s, (hi[i] - p[i]) / d[i])
        elif d[i] < 0:
            s = min(s, (lo[i] - p[i]) / d[i])
    return s


def _scan_segments(rng, M, count, min_len=0.1):
    out = []
    while len(out) < count:
        p = _points(rng, M, 1)[0]
        d = _unit(rng, 1, M.dimension)[0]
        s = _segment_length(M, p, d)
        if s >= min_len:
            out.append((p, d, s))
    return out


def _maxabs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


# ---------------------------------------------------------------------------
# suites


def suite_minkowski_identities(ctx: SuiteContext) -> SuiteResult:
    """Homogeneity, Euler, y-contractions, positive definiteness, FD cross-checks."""
    res = SuiteResult("minkowski-identities")
    tol = ctx.tol or 1e-10
    fd_tol = 1e-5
    count = ctx.samples or 200
    norms = ctx.norms or default_norms(ctx.dimension or 3)
    rng = ctx.rng(res.name)
    res.details["samples"] = count
    for F in norms:
        n = F.dimension
        Y = mk.default_directions(n, count, seed=child_seed(ctx.seed, F.label))
        rep = mk.check_minkowski(F, Y, tol)
        w = {"y": rep.witness.tolist()}
        res.add(f"{F.label}: homogeneity", rep.homogeneity, tol)
        res.add(f"{F.label}: euler", rep.euler, tol)
        res.add(f"{F.label}: min eigenvalue of g", rep.min_eigenvalue, 0.0, ">", w)
        t = mk.norm_tensors(F, Y)
        res.add(f"{F.label}: y.A", _maxabs(np.einsum("bijk,bi->bjk", t.A, Y)), tol)
        res.add(f"{F.label}: y.eta", _maxabs(np.einsum("bi,bi->b", t.eta, Y)), tol)
        res.add(f"{F.label}: eta volume vs trace", _maxabs(t.eta - t.eta_trace), tol)
        hom = 0.0
        for lam in (0.5, 2.0, 10.0):
            s = mk.norm_tensors(F, lam * Y)
            Feta_s = s.F[:, None] * s.eta
            Feta_t = t.F[:, None] * t.eta
            for a, b in ((s.g, t.g), (s.A, t.A), (Feta_s, Feta_t)):
                hom = max(hom, _maxabs(a - b) / max(1.0, _maxabs(b)))
        res.add(f"{F.label}: 0-homogeneity of g, A, F*eta", hom, tol)
        # finite-difference oracle on a few directions
        err = 0.0
        for y in Y[rng.choice(len(Y), size=min(4, len(Y)), replace=False)]:
            tt = mk.norm_tensors(F, y)

            def half_sq(v):
                return 0.5 * F(v) ** 2

            for i in range(n):
                for j in range(i, n):
                    idx = [0] * n
                    idx[i] += 1
                    idx[j] += 1
                    with warnings.catch_warnings():
                        # zero entries trip the round-off warning; the absolute error is what counts
                        warnings.simplefilter("ignore", RuntimeWarning)
                        est = fd_oracle(half_sq, y, idx, richardson=True).value
                    err = max(err, abs(est - tt.g[i, j]) / max(1.0, abs(tt.g[i, j])))
        res.add(f"{F.label}: g vs finite differences", err, fd_tol)
    return res


def _synthetic_identity(res, rng, tol=1e-12):
    worst = 0.0
    for n in (4, 5):
        for q in (2.0, 0.5, -1.0):
            T = rng.normal(size=n - 1)
            C = ind.semi_c_cubic_form(T, q, n)
            hinv = np.eye(n - 1)
            lhs = ind.tensor_norm(C, hinv) ** 2
            rhs = ind.cubic_norm_ratio(n, q) * float(T @ T)
            worst = max(worst, abs(lhs - rhs) / max(1.0, rhs))
    res.add("cubic-form norm identity (n in {4,5}, q in {2,0.5,-1})", worst, tol)


def suite_centroaffine(ctx: SuiteContext) -> SuiteResult:
    """Induced metric routes, Tchebychev routes, Randers semi-C residual, norm identity."""
    res = SuiteResult("centroaffine")
    tol = ctx.tol or 1e-10
    count = ctx.samples or 50
    n = ctx.dimension or 3
    norms = ctx.norms or [mk.catalog("randers", n, {"b": [0.3, 0.2] + [0.0] * (n - 2)})]
    rng = ctx.rng(res.name)
    for F in norms:
        U = _unit(rng, count, F.dimension)
        h_err = t_err = m_err = 0.0
        for u in U:
            p = ind.indicatrix_point(F, u)
            d = ind.centroaffine_data(F, p)
            h_err = max(h_err, _maxabs(d.h - d.h_angular) / max(1.0, _maxabs(d.h)))
            tv = ind.tchebychev_volume(F, p)
            t_err = max(t_err, _maxabs(d.That - d.That_trace), _maxabs(d.That - tv), _maxabs(d.That_trace - tv))
            if F.label == "randers":
                m_err = max(m_err, ind.semi_c_residual(F, p, 2.0))
        res.add(f"{F.label}: induced metric vs angular metric", h_err, tol)
        res.add(f"{F.label}: Tchebychev three-route agreement", t_err, 1e-4)
        if F.label == "randers":
            res.add(f"{F.label}: semi-C residual at q = 2", m_err, 1e-8)
    _synthetic_identity(res, rng)
    return res


def suite_semi_c(ctx: SuiteContext) -> SuiteResult:
    """One q per norm (best fit at the first sample) must annihilate M^q everywhere."""
    res = SuiteResult("semi-c")
    tol = ctx.tol or 1e-8
    count = ctx.samples or 20
    n = ctx.dimension or 3
    norms = ctx.norms or [mk.catalog("randers", n, {"b": [0.3, 0.2] + [0.0] * (n - 2)})]
    rng = ctx.rng(res.name)
    fitted = {}
    for F in norms:
        U = _unit(rng, count, F.dimension)
        pts = [ind.indicatrix_point(F, u) for u in U]
        q, _ = ind.best_fit_q(F, pts[0])
        q = round(q, 6)
        resid = [ind.semi_c_residual(F, p, q) for p in pts]
        k = int(np.argmax(resid))
        fitted[F.label] = q
        res.add(f"{F.label}: semi-C residual at q = {q:g}", max(resid), tol, witness={"u": U[k].tolist()})
    res.details["best_fit_q"] = fitted
    _synthetic_identity(res, rng)
    return res


def _sample_bundles(M, rng, count):
    X = _points(rng, M, count)
    Y = _unit(rng, count, M.dimension)
    return X, Y, fs.curvature_bundle(M, X, Y)


def suite_bianchi_symmetry(ctx: SuiteContext) -> SuiteResult:
    """Index symmetries of Gamma, B, E, L and of the h-v curvature P."""
    res = SuiteResult("bianchi-symmetry")
    tol = ctx.tol or 1e-10
    count = ctx.samples or 50
    metrics = ctx.metrics or default_metrics(n=ctx.dimension or 2)
    rng = ctx.rng(res.name)
    for M in metrics:
        X, Y, b = _sample_bundles(M, rng, count)
        res.add(f"{M.label}: P symmetric in (j,k)", _maxabs(b.P - b.P.swapaxes(-3, -2)), tol)
        res.add(f"{M.label}: Gamma symmetric", _maxabs(b.Gamma - b.Gamma.swapaxes(-1, -2)), 1e-12)
        sym = 0.0
        for T in (b.B[..., 0, :, :, :], b.L):
            for ax in ((-1, -2), (-1, -3), (-2, -3)):
                sym = max(sym, _maxabs(T - T.swapaxes(*ax)))
        res.add(f"{M.label}: B and L totally symmetric", sym, tol)
        res.add(f"{M.label}: E symmetric", _maxabs(b.E - b.E.swapaxes(-1, -2)), tol)
    return res


def _euler_checks(res, M, X, Y, b, tol=1e-8):
    res.add(f"{M.label}: N.y = 2G", _maxabs(np.einsum("bij,bj->bi", b.N, Y) - 2 * b.G), tol)
    res.add(f"{M.label}: y.B = 0", _maxabs(np.einsum("bijkl,bl->bijk", b.B, Y)), tol)
    res.add(f"{M.label}: y.L = 0", _maxabs(np.einsum("bjkl,bj->bkl", b.L, Y)), tol)
    res.add(f"{M.label}: y.J = 0", _maxabs(np.einsum("bk,bk->b", b.J, Y)), tol)
    res.add(f"{M.label}: y.hdtau = S", _maxabs(np.einsum("bi,bi->b", b.hdtau, Y) - b.S), tol)


def suite_landsberg(ctx: SuiteContext) -> SuiteResult:
    """Landsberg verdict, Euler contractions and the ghat-rate / L co-occurrence."""
    res = SuiteResult("landsberg")
    count = ctx.samples or 10
    metrics = ctx.metrics or default_metrics(BERWALD_CATALOG, ctx.dimension or 2)
    rng = ctx.rng(res.name)
    calib = {}
    for M in metrics:
        rep = fs.classify(M, seed=child_seed(ctx.seed, M.label))
        tol = ctx.tol or rep.thresholds["L"]
        res.add(f"{M.label}: sup |L|", rep.norms["L"], tol, witness=rep.witnesses["L"])
        res.add(f"{M.label}: sup |J|", rep.norms["J"], ctx.tol or rep.thresholds["J"], witness=rep.witnesses["J"])
        X, Y, b = _sample_bundles(M, rng, count)
        _euler_checks(res, M, X, Y, b)
        D = _unit(rng, count, M.dimension)
        mismatch = []
        ratios = []
        for k in range(count):
            rate = tr.stability_rate(M, X[k], Y[k], D[k], "ghat")
            LF = np.einsum("ijk,k->ij", b.L[k], D[k]) / b.F[k] ** 2
            r0 = _maxabs(rate) < RATE_ZERO
            l0 = _maxabs(b.L[k]) < CURV_ZERO
            if r0 != l0:
                mismatch.append({"x": X[k].tolist(), "y": Y[k].tolist(), "d": D[k].tolist(),
                                 "rate": _maxabs(rate), "L": _maxabs(b.L[k])})
            if _maxabs(LF) > 1e-6:
                ratios.append(float(np.sum(rate * LF) / np.sum(LF * LF)))
        res.add(f"{M.label}: ghat-rate / L verdict mismatches", len(mismatch), 0,
                witness=mismatch[0] if mismatch else None)
        if ratios:
            calib[M.label] = {"rate_over_L_d_over_F2": float(np.mean(ratios)),
                              "spread": float(np.ptp(ratios))}
    res.details["calibration"] = calib
    return res


def _linearity(M, rng, p, d, s):
    Ys = _unit(rng, 2 * M.dimension, M.dimension)
    return tr.linearity_residual(M, tr.Segment(p, p + s * d), 1.0, Ys)


def suite_berwald(ctx: SuiteContext) -> SuiteResult:
    """Berwald verdict and the linearity / B co-occurrence along segments."""
    res = SuiteResult("berwald")
    count = ctx.samples or 5
    metrics = ctx.metrics or default_metrics(BERWALD_CATALOG, ctx.dimension or 2)
    rng = ctx.rng(res.name)
    for M in metrics:
        rep = fs.classify(M, seed=child_seed(ctx.seed, M.label))
        tol = ctx.tol or rep.thresholds["B"]
        res.add(f"{M.label}: sup |B|", rep.norms["B"], tol, witness=rep.witnesses["B"])
        res.add(f"{M.label}: sup |E|", rep.norms["E"], ctx.tol or rep.thresholds["E"], witness=rep.witnesses["E"])
        mismatch = []
        for p, d, s in _scan_segments(rng, M, count):
            lin = _linearity(M, rng, p, d, s)
            ts = np.linspace(0, 1, 5)
            bs = fs.curvature_bundle(M, p + s * ts[:, None] * d, np.tile(d, (5, 1)))
            if (max(lin.residual, lin.additivity) < LINEAR_ZERO) != (_maxabs(bs.B) < CURV_ZERO):
                mismatch.append({"p": p.tolist(), "d": d.tolist(), "length": s,
                                 "linearity": lin.residual, "B": _maxabs(bs.B)})
        res.add(f"{M.label}: linearity / B verdict mismatches", len(mismatch), 0,
                witness=mismatch[0] if mismatch else None)
    return res


def cooccurrence_scan(M, rng, count):
    """Per-sample verdicts for the horizontal-stability theorems; returns (rows, findings)."""
    segs = _scan_segments(rng, M, count)
    X = np.array([p for p, _, _ in segs])
    Y = _unit(rng, count, M.dimension)
    b = fs.curvature_bundle(M, X, Y)
    rows, findings = [], []
    for k in range(count):
        p, d, s = segs[k]
        rates = tr.stability_rates(M, p, Y[k], d, ("ghat", "eta"))
        lin = _linearity(M, rng, p, d, s)
        ts = np.linspace(0, 1, 5)
        bs = fs.curvature_bundle(M, p + s * ts[:, None] * d, np.tile(Y[k], (5, 1)))
        row = {
            "p": p.tolist(), "y": Y[k].tolist(), "d": d.tolist(), "length": float(s),
            "ghat_rate": _maxabs(rates["ghat"]), "eta_rate": _maxabs(rates["eta"]),
            "L": _maxabs(b.L[k]), "E": _maxabs(b.E[k]), "B": _maxabs(b.B[k]),
            "B_along": _maxabs(bs.B), "linearity": max(lin.residual, lin.additivity),
        }
        rows.append(row)
        if row["L"] < fs.UNICORN_L and row["E"] < fs.UNICORN_E and row["B"] > fs.UNICORN_B:
            findings.append({"kind": "unicorn-candidate", "metric": M.label, **row})
    return rows, findings


def suite_theorem11(ctx: SuiteContext) -> SuiteResult:
    """Co-occurrence of rate, curvature and linearity verdicts; unicorn candidates fail the suite."""
    res = SuiteResult("theorem11")
    count = ctx.samples or 100
    metrics = ctx.metrics or default_metrics(n=ctx.dimension or 2)
    rng = ctx.rng(res.name)
    summary = {}
    for M in metrics:
        rows, findings = cooccurrence_scan(M, rng, count)
        res.findings.extend(findings)
        landsberg = [r for r in rows if (r["ghat_rate"] < RATE_ZERO) != (r["L"] < CURV_ZERO)]
        berwald = [r for r in rows if (r["linearity"] < LINEAR_ZERO) != (r["B_along"] < CURV_ZERO)]
        joint = [r for r in rows if r["ghat_rate"] < RATE_ZERO and r["eta_rate"] < RATE_ZERO
                 and r["linearity"] >= LINEAR_ZERO]
        res.add(f"{M.label}: ghat-rate / L verdict mismatches", len(landsberg), 0,
                witness=landsberg[0] if landsberg else None)
        res.add(f"{M.label}: linearity / B verdict mismatches", len(berwald), 0,
                witness=berwald[0] if berwald else None)
        res.add(f"{M.label}: stable ghat and eta but nonlinear", len(joint), 0,
                witness=joint[0] if joint else None)
        rep = fs.classify(M, seed=child_seed(ctx.seed, M.label))
        res.findings.extend({"kind": "unicorn-candidate", "metric": M.label, **c}
                            for c in rep.unicorn_candidates)
        summary[M.label] = {
            "samples": count,
            "landsberg_samples": sum(r["L"] < CURV_ZERO for r in rows),
            "berwald_samples": sum(r["B_along"] < CURV_ZERO for r in rows),
            "max_ghat_rate": max(r["ghat_rate"] for r in rows),
            "max_linearity": max(r["linearity"] for r in rows),
            "classification": rep.verdicts,
            "consistent": rep.theorem11_consistent,
        }
    res.details["metrics"] = summary
    res.details["samples_per_metric"] = count
    res.details["unicorn_candidates"] = len(res.findings)
    return res


def _riemannian_oracle(M, seg, y0):
    """Linear transport dy/dt = -Gamma(sigma)(sigma', y) for y-independent Gamma."""
    e = np.eye(M.dimension)[0]

    def rhs(t, y):
        Gam = fs.chern_coefficients(M, seg.point(t), e)
        return -np.einsum("ijk,j,k->i", Gam, seg.velocity(t), y)

    return tr.dopri45(rhs, 0.0, 1.0, y0, 1e-12, 1e-12)[1][-1]


def suite_transport(ctx: SuiteContext) -> SuiteResult:
    """Norm preservation, homogeneity, reversibility, Riemannian oracle, tolerance halving."""
    res = SuiteResult("transport")
    count = ctx.samples or 50
    metrics = ctx.metrics or default_metrics(n=ctx.dimension or 2)
    rng = ctx.rng(res.name)
    per_curve = 5
    for M in metrics:
        drift = hom = rev = oracle = 0.0
        halving = []
        curves = _scan_segments(rng, M, max(1, count // per_curve), min_len=0.2)
        res.details["pairs_per_metric"] = len(curves) * per_curve
        for ci, (p, d, s) in enumerate(curves):
            seg = tr.Segment(p, p + s * d)
            Y0 = _unit(rng, per_curve, M.dimension) * rng.uniform(0.5, 2.0, (per_curve, 1))
            lams = (0.5, 2.0, 10.0)
            batch = np.vstack([Y0] + [lam * Y0 for lam in lams])
            out = tr.transport(M, seg, batch)
            drift = max(drift, float(np.max(out.drift / out.F0)))
            P = out.y[:per_curve]
            for k, lam in enumerate(lams):
                Pl = out.y[per_curve * (k + 1): per_curve * (k + 2)]
                hom = max(hom, _maxabs((Pl - lam * P) / (lam * np.linalg.norm(P, axis=1, keepdims=True))))
            back = tr.transport(M, seg.reversed(), P)
            rev = max(rev, _maxabs((back.y - Y0) / np.linalg.norm(Y0, axis=1, keepdims=True)))
            if M.label in ("euclidean", "riemannian-exp"):
                for k in range(2):
                    oracle = max(oracle, _maxabs(_riemannian_oracle(M, seg, Y0[k]) - P[k]))
            if ci == 0:
                coarse = tr.transport(M, seg, Y0[0])
                fine = tr.transport(M, seg, Y0[0], rtol=5e-11, atol=5e-11)
                halving.append((_maxabs(coarse.y - fine.y), coarse.stats.error_estimate))
        res.add(f"{M.label}: relative norm drift", drift, 1e-8)
        res.add(f"{M.label}: positive homogeneity", hom, 1e-9)
        res.add(f"{M.label}: reversibility", rev, 1e-8)
        if M.label in ("euclidean", "riemannian-exp"):
            res.add(f"{M.label}: linear transport oracle", oracle, 1e-8)
        for diff, est in halving:
            res.add(f"{M.label}: tolerance halving change vs error estimate", diff, max(est, 1e-15))
    return res


SUITES = {
    "minkowski-identities": suite_minkowski_identities,
    "centroaffine": suite_centroaffine,
    "bianchi-symmetry": suite_bianchi_symmetry,
    "landsberg": suite_landsberg,
    "berwald": suite_berwald,
    "semi-c": suite_semi_c,
    "theorem11": suite_theorem11,
    "transport": suite_transport,
}

# suites that act on Minkowski norms rather than Finsler metrics
NORM_SUITES = ("minkowski-identities", "centroaffine", "semi-c")


def run_suite(name: str, ctx: SuiteContext) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    return SUITES[name](ctx)


__all__ = [
    "BERWALD_CATALOG", "CURV_ZERO", "Check", "LINEAR_ZERO", "NORM_SUITES", "RATE_ZERO", "SUITES",
    "SuiteContext", "SuiteResult", "child_seed", "cooccurrence_scan", "default_metrics",
    "default_norms", "run_suite",
]
