"""Frenet frames and curvature functions of curves in E^n.

The frame is built by twice-modified Gram-Schmidt on ``alpha', ..., alpha^(n-1)``
with every component carried as a jet in the curve parameter.  ``V_n`` is the
generalized cross product of ``V_1..V_{n-1}`` so the frame is positively
oriented by construction.  Curvatures ``k_i = <V_i', V_{i+1}>`` are returned as
jets in arclength (``d/ds = |alpha'|^-1 d/dt`` applied repeatedly).

Sign convention: ``k_1..k_{n-2}`` are positive; ``k_{n-1}`` carries the sign
forced by ``det(V_1..V_n) = +1`` and may be negative.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import CurveError, DegenerateCurve, InsufficientJetDepth, NotRegular
from .expr import CurveSpec, eval_jets
from .jet import Jet, dot

__all__ = [
    "FrenetSample",
    "FrenetApparatus",
    "NondegeneracyReport",
    "frenet_at",
    "build_apparatus",
    "check_nondegenerate",
    "frame_from_derivatives",
    "SAMPLED_JET_ORDER",
]

PIVOT_TOL = 1e-10
SPEED_TOL = 1e-12
MIN_GRID = 16
SAMPLED_JET_ORDER = 5


@dataclass(frozen=True)
class FrenetSample:
    t: float
    s: float
    speed: Jet
    frame: np.ndarray  # rows V_1..V_n
    curvatures: tuple  # Jets in s, k_1..k_{n-1}

    @property
    def n(self):
        return self.frame.shape[0]

    @property
    def k(self):
        return np.array([kj.value for kj in self.curvatures], dtype=float)


@dataclass(frozen=True)
class FrenetApparatus:
    """Frenet data on a uniform parameter grid.

    Attributes
    ----------
    spec : CurveSpec
    t : ndarray, shape (N,)
        Parameter grid.
    s : ndarray, shape (N,)
        Arclength measured from ``t[0]``.
    speed : Jet
        ``|alpha'|`` as a batched jet in ``t``.
    frame : ndarray, shape (N, n, n)
        ``frame[p, i]`` is ``V_{i+1}`` at grid point ``p``.
    curvatures : tuple of Jet
        ``k_1..k_{n-1}`` as batched jets in ``s``.
    """

    spec: CurveSpec
    t: np.ndarray
    s: np.ndarray
    speed: Jet
    frame: np.ndarray
    curvatures: tuple
    jet_limit: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if np.any(np.diff(self.s) <= 0):
            raise CurveError("arclength is not strictly increasing along the grid")

    @property
    def n(self):
        return self.frame.shape[1]

    @property
    def N(self):
        return self.t.shape[0]

    @property
    def grid(self):
        return self.t

    @property
    def k(self):
        """Curvature values, shape (N, n-1)."""
        return np.stack([kj.value for kj in self.curvatures], axis=1)

    def sample(self, p):
        return FrenetSample(
            float(self.t[p]),
            float(self.s[p]),
            self.speed[p],
            self.frame[p],
            tuple(kj[p] for kj in self.curvatures),
        )

    @property
    def samples(self):
        return [self.sample(p) for p in range(self.N)]

    def integrate(self, f):
        """Cumulative ``int f ds`` from the first grid point (Simpson in ``t``)."""
        return cumulative_simpson(np.asarray(f) * self.speed.value, x=self.t, initial=0.0)

    def to_csv(self, fh=None):
        """Write ``t, s, k_1..k_{n-1}, V1_1..V1_n, ..., Vn_n`` at 17 significant digits."""
        out = fh or io.StringIO()
        n = self.n
        w = csv.writer(out, lineterminator="\n")
        w.writerow(frenet_csv_header(n))
        kv = self.k
        for p in range(self.N):
            row = [self.t[p], self.s[p], *kv[p], *self.frame[p].ravel()]
            w.writerow([format(float(x), ".17g") for x in row])
        return out.getvalue() if fh is None else None


def frenet_csv_header(n):
    cols = ["t", "s"] + [f"k_{i}" for i in range(1, n)]
    cols += [f"V{i}_{c}" for i in range(1, n + 1) for c in range(1, n + 1)]
    return cols


def _first_bad(mask):
    idx = np.flatnonzero(np.atleast_1d(mask))
    return int(idx[0]) if idx.size else None


def _completion(rows, n):
    """Generalized cross product of ``n-1`` jet vectors (cofactor expansion)."""
    R = n - 1
    memo = {}

    def det(cols):
        # determinant of rows[R-len(cols):] restricted to the sorted column tuple
        if cols in memo:
            return memo[cols]
        r = R - len(cols)
        if len(cols) == 1:
            val = rows[r][cols[0]]
        else:
            val = None
            for pos, c in enumerate(cols):
                term = rows[r][c] * det(cols[:pos] + cols[pos + 1 :])
                if val is None:
                    val = term
                elif pos % 2:
                    val = val - term
                else:
                    val = val + term
        memo[cols] = val
        return val

    out = []
    for k in range(n):
        minor = det(tuple(c for c in range(n) if c != k))
        out.append(minor if (R + k) % 2 == 0 else -minor)
    return out


def _to_arclength(f, speed):
    vals = [f.value]
    g = f
    while g.order > 0:
        g = g.derivative() / speed
        vals.append(g.value)
    return Jet(np.stack(vals))


def frame_from_derivatives(derivs, t, pivot_tol=PIVOT_TOL, speed_tol=SPEED_TOL):
    """Frame, speed and curvature jets from the derivative jets of a curve.

    Parameters
    ----------
    derivs : list
        ``derivs[i]`` is ``alpha^(i+1)`` as a list of ``n`` batched jets, for
        ``i = 0..n-1``.  Only the value of ``alpha^(n)`` is used (pivot check).
    t : ndarray
        Parameter values of the batch, for error locations.
    """
    n = len(derivs[0])
    t = np.atleast_1d(t)
    a1 = derivs[0]
    speed2 = dot(a1, a1)
    bad = _first_bad(np.sqrt(np.maximum(speed2.value, 0.0)) < speed_tol)
    if bad is not None:
        raise NotRegular(float(t[bad]), bad)
    from .jet import sqrt as jsqrt

    speed = jsqrt(speed2)
    V = [[c / speed for c in a1]]
    for step in range(2, n):
        a = derivs[step - 1]
        w = list(a)
        for _ in range(2):
            for v in V:
                c = dot(w, v)
                w = [wk - c * vk for wk, vk in zip(w, v)]
        w2 = dot(w, w)
        res = np.sqrt(np.maximum(w2.value, 0.0))
        ref = np.sqrt(np.sum([ak.value**2 for ak in a], axis=0))
        bad = _first_bad((res <= pivot_tol * ref) | (ref == 0))
        if bad is not None:
            raise DegenerateCurve(float(t[bad]), step, bad)
        nw = jsqrt(w2)
        V.append([wk / nw for wk in w])
    V.append(_completion(V, n))
    # last pivot: alpha^(n) must leave span(V_1..V_{n-1}), i.e. k_{n-1} != 0
    an = np.stack([ak.value for ak in derivs[n - 1]], axis=-1)
    vn = np.stack([c.value for c in V[-1]], axis=-1)
    res = np.abs(np.sum(an * vn, axis=-1))
    ref = np.linalg.norm(an, axis=-1)
    bad = _first_bad((res <= pivot_tol * ref) | (ref == 0))
    if bad is not None:
        raise DegenerateCurve(float(t[bad]), n, bad)

    curv = []
    for i in range(n - 1):
        if V[i][0].order < 1:
            raise InsufficientJetDepth(f"not enough derivatives to compute k_{i + 1}")
        dv = [c.derivative() for c in V[i]]
        kt = dot(dv, V[i + 1]) / speed
        curv.append(_to_arclength(kt, speed))
    frame = np.stack([np.stack([c.value for c in v], axis=-1) for v in V], axis=-2)
    return frame, speed, tuple(curv)


def _analytic_derivs(spec, t, order):
    coords = eval_jets(spec, t, order)
    derivs = []
    for i in range(1, spec.n + 1):
        derivs.append([Jet(c.coeffs[i:]) for c in coords])
    return derivs


def _quintic_fit(ts, xs, t, st):
    m = SAMPLED_JET_ORDER
    start = np.clip(np.searchsorted(ts, t) - 3 * st, 0, len(ts) - 1 - m * st)
    idx = start[:, None] + st * np.arange(m + 1)[None, :]
    tau = ts[idx] - t[:, None]
    scale = np.maximum(np.ptp(ts[idx], axis=1), 1e-300)[:, None]
    u = tau / scale
    A = u[:, :, None] ** np.arange(m + 1)[None, None, :]
    coef = np.linalg.solve(A, xs[idx])  # (N, m+1, n), monomial coefficients in u
    fact = np.array([math.factorial(j) for j in range(m + 1)], dtype=float)
    return coef * (fact[None, :, None] / scale[:, :, None] ** np.arange(m + 1)[None, :, None])


def sampled_stride(spec, probes: int = 9) -> int:
    """Index stride between the 6 fit points of a sampled curve.

    Adjacent samples of a dense curve make high derivatives roundoff-dominated,
    wide windows make them truncation-dominated.  Among strides 1, 2, 4, ...
    pick the one whose n-th derivative estimate changes least when the
    stride doubles, at a few interior probe points.
    """
    ts, xs = spec.samples_t, spec.samples_x
    m = SAMPLED_JET_ORDER
    top = (len(ts) - 1) // (2 * m)
    if top < 2:
        return 1
    cands = [1]
    while cands[-1] * 2 <= top:
        cands.append(cands[-1] * 2)
    t = np.linspace(ts[0], ts[-1], probes + 2)[1:-1]
    d = min(spec.n, m)
    est = [_quintic_fit(ts, xs, t, st)[:, d, :] for st in cands]
    scale = max(float(np.max(np.abs(e))) for e in est) or 1.0
    change = [float(np.max(np.abs(est[i + 1] - est[i]))) / scale for i in range(len(est) - 1)]
    return cands[int(np.argmin(change))]


def _sampled_derivs(spec, t, stride=None):
    """Derivatives from local quintic interpolants through 6 samples ``stride`` apart."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    st = sampled_stride(spec) if stride is None else int(stride)
    d = _quintic_fit(spec.samples_t, spec.samples_x, t, st)
    # d[p, j, c] = j-th derivative of coordinate c at t[p]
    derivs = []
    for i in range(1, spec.n + 1):
        derivs.append([Jet(d[:, i:, c].T) for c in range(spec.n)])
    return derivs


def _derivs(spec, t, jet_order):
    if spec.kind == "analytic":
        order = spec.jet_order_cap if jet_order is None else jet_order
        if order < spec.n:
            raise InsufficientJetDepth(f"jet order {order} is below the minimum {spec.n}")
        return _analytic_derivs(spec, t, order)
    if spec.kind == "sampled":
        if spec.n > SAMPLED_JET_ORDER:
            raise InsufficientJetDepth(
                f"sampled curves carry order-{SAMPLED_JET_ORDER} jets; n={spec.n} needs more"
            )
        return _sampled_derivs(spec, t)
    raise ValueError(f"cannot differentiate a {spec.kind!r} curve directly")


def _arclength_to(spec, t, jet_order, points=257):
    t0 = spec.interval[0]
    if t == t0:
        return 0.0
    grid = np.linspace(t0, t, points)
    sp = np.linalg.norm(np.stack([d.value for d in _derivs(spec, grid, jet_order)[0]], -1), axis=-1)
    return float(cumulative_simpson(sp, x=grid)[-1])


def frenet_at(spec: CurveSpec, t: float, jet_order: int | None = None, pivot_tol=PIVOT_TOL) -> FrenetSample:
    """Frenet frame and curvature jets at a single parameter value."""
    tt = np.array([float(t)])
    frame, speed, curv = frame_from_derivatives(_derivs(spec, tt, jet_order), tt, pivot_tol)
    s = _arclength_to(spec, float(t), jet_order)
    return FrenetSample(float(t), s, speed[0], frame[0], tuple(k[0] for k in curv))


def build_apparatus(spec: CurveSpec, N: int = 512, jet_order: int | None = None, pivot_tol=PIVOT_TOL) -> FrenetApparatus:
    """Frenet apparatus on ``N`` uniformly spaced parameter values.

    Sampled curves get order-5 jets from local quintic fits, which is enough for
    the harmonic systems up to about n=4 (deeper recursions raise
    :class:`InsufficientJetDepth`).  Synthetic curves are integrated first.
    """
    if N < MIN_GRID:
        raise ValueError(f"grid too small: N={N} < {MIN_GRID}")
    if spec.kind == "synthetic":
        from .synthesize import integrate_frenet

        return integrate_frenet(spec.prescription, samples=N).apparatus
    t = np.linspace(spec.interval[0], spec.interval[1], N)
    frame, speed, curv = frame_from_derivatives(_derivs(spec, t, jet_order), t, pivot_tol)
    s = cumulative_simpson(speed.value, x=t, initial=0.0)
    limit = SAMPLED_JET_ORDER if spec.kind == "sampled" else None
    return FrenetApparatus(spec, t, s, speed, frame, curv, jet_limit=limit)


@dataclass(frozen=True)
class NondegeneracyReport:
    min_abs: tuple  # min over grid of |k_i|, i = 1..n-1
    margin: tuple  # min_abs - tol
    passed: bool
    crossings: tuple  # (i, s) for curvatures that vanish or change sign
    tol: float


def check_nondegenerate(app: FrenetApparatus, tol: float = 1e-8) -> NondegeneracyReport:
    kv = app.k
    mins, crossings = [], []
    for i in range(kv.shape[1]):
        k = kv[:, i]
        mins.append(float(np.min(np.abs(k))))
        sign_change = np.flatnonzero(np.sign(k[:-1]) * np.sign(k[1:]) < 0)
        small = np.flatnonzero(np.abs(k) <= tol)
        if sign_change.size:
            p = int(sign_change[0])
            s0, s1, k0, k1 = app.s[p], app.s[p + 1], k[p], k[p + 1]
            crossings.append((i + 1, float(s0 - k0 * (s1 - s0) / (k1 - k0))))
        elif small.size:
            crossings.append((i + 1, float(app.s[small[0]])))
    margins = tuple(m - tol for m in mins)
    return NondegeneracyReport(tuple(mins), margins, all(m > 0 for m in margins), tuple(crossings), tol)
