"""Curves with prescribed curvatures, and fixture generators.

:func:`integrate_frenet` solves the Frenet system ``alpha' = V_1``,
``V' = K(s) V`` with classical fixed-step RK4, re-orthonormalizing the frame
by modified Gram-Schmidt after every step.

The fixture generators build curvature expressions for which a chosen helix
condition holds identically.  They all use the same device: pick every
curvature but one freely, evaluate the recursion symbolically up to the
second-to-last function, then choose the remaining curvature so the sum of
squares is a constant ``C``.  For the H system this gives

    H_{n-2} = sqrt(C - sum_{i<=n-3} H_i^2),   k_{n-1} = (H_{n-3}' + k_{n-2} H_{n-4}) / H_{n-2},

which satisfies ``H_{n-2}' = -k_{n-1} H_{n-3}`` with ``H_{n-2}`` bounded away
from zero.  The H* and G systems are handled the same way.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import FixtureRejected, PrescriptionError
from .expr import Call, CurveSpec, Expression, Num, Var, parse_expression
from .frenet import FrenetApparatus
from .jet import Jet

__all__ = [
    "CurvaturePrescription",
    "Synthesis",
    "integrate_frenet",
    "make_circular_helix",
    "make_inclined_fixture",
    "make_vn_fixture",
    "make_v2_fixture",
    "make_anti_fixture",
    "make_generic_fixture",
    "mgs_rows",
]

S = Var("s")
DRIFT_LIMIT = 1e-6
MAX_RETRIES = 50


@dataclass(frozen=True)
class CurvaturePrescription:
    """Curvatures ``k_1..k_{n-1}`` as expressions in arclength ``s``."""

    n: int
    k_exprs: tuple
    span: tuple
    h: float = 1e-3
    point: tuple | None = None
    frame: tuple | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("dimension must be at least 3")
        if len(self.k_exprs) != self.n - 1:
            raise ValueError(f"need {self.n - 1} curvatures, got {len(self.k_exprs)}")
        if not self.span[0] < self.span[1]:
            raise ValueError("empty span")
        if not self.h > 0:
            raise ValueError("step must be positive")

    @classmethod
    def from_strings(cls, n, k, span, h=1e-3, point=None, frame=None, meta=None):
        exprs = tuple(e if isinstance(e, Expression) else parse_expression(str(e), var="s") for e in k)
        return cls(n, exprs, tuple(map(float, span)), float(h),
                   None if point is None else tuple(map(float, point)),
                   None if frame is None else tuple(tuple(map(float, r)) for r in frame),
                   dict(meta or {}))

    @property
    def initial_point(self):
        return np.zeros(self.n) if self.point is None else np.asarray(self.point, dtype=float)

    @property
    def initial_frame(self):
        return np.eye(self.n) if self.frame is None else np.asarray(self.frame, dtype=float)

    def curvature_values(self, s):
        return np.stack([np.broadcast_to(e(s), np.shape(s)) for e in self.k_exprs], axis=-1)

    def curvature_jets(self, s, order):
        x = Jet.variable(s, order)
        return tuple(e.evaluate(x) for e in self.k_exprs)

    def validate(self, s=None):
        """Raise :class:`PrescriptionError` at the first sign violation on ``s``."""
        if s is None:
            s = np.linspace(self.span[0], self.span[1], 4001)
        kv = self.curvature_values(s)
        for i in range(self.n - 2):
            bad = np.flatnonzero(~(kv[:, i] > 0))
            if bad.size:
                at = float(s[bad[0]])
                raise PrescriptionError(f"curvature sign violation: k_{i + 1} <= 0 at s = {at:.6g}", at)
        last = kv[:, -1]
        bad = np.flatnonzero((last == 0) | (np.sign(last) != np.sign(last[0])) | ~np.isfinite(last))
        if bad.size:
            at = float(s[bad[0]])
            raise PrescriptionError(f"curvature sign violation: k_{self.n - 1} vanishes at s = {at:.6g}", at)

    def to_json(self):
        d = {
            "n": self.n,
            "k": [e.to_source() for e in self.k_exprs],
            "span": list(self.span),
            "h": self.h,
        }
        init = {}
        if self.point is not None:
            init["point"] = list(self.point)
        if self.frame is not None:
            init["frame"] = [list(r) for r in self.frame]
        if init:
            d["init"] = init
        if self.meta:
            d["meta"] = self.meta
        return json.dumps(d, indent=2)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        init = d.get("init", {})
        return cls.from_strings(d["n"], d["k"], d["span"], d.get("h", 1e-3),
                                init.get("point"), init.get("frame"), d.get("meta"))


class Synthesis(NamedTuple):
    curve: CurveSpec  # sampled, every RK step
    apparatus: FrenetApparatus  # integrated frames, prescribed curvatures
    drift: float  # largest pre-correction orthonormality error


def mgs_rows(V):
    """Modified Gram-Schmidt on the rows of ``V`` (keeps orientation)."""
    Q = np.array(V, dtype=float)
    for i in range(Q.shape[0]):
        Q[i] /= math.sqrt(Q[i] @ Q[i])
        # right-looking form: same arithmetic as the classic loop, fewer calls
        Q[i + 1 :] -= np.outer(Q[i + 1 :] @ Q[i], Q[i])
    return Q


def _frenet_matrices(k):
    """Skew-tridiagonal coefficient matrices ``K`` with ``V' = K V``, one per row of ``k``."""
    m, r = k.shape
    K = np.zeros((m, r + 1, r + 1))
    i = np.arange(r)
    K[:, i, i + 1] = k
    K[:, i + 1, i] = -k
    return K


def _frenet_rhs(V, k):
    return _frenet_matrices(np.atleast_2d(k))[0] @ V


def integrate_frenet(p: CurvaturePrescription, samples: int = 513, check: bool = True,
                     jet_order: int | None = None) -> Synthesis:
    """Integrate the Frenet system for ``p`` with RK4 at step ``p.h``.

    The step is shrunk slightly so it divides the span.  Frames are kept at
    ``samples`` (approximately) uniformly spaced steps for the apparatus, whose
    curvature jets are the prescribed expressions, not re-estimates.
    """
    n = p.n
    s0, s1 = p.span
    steps = max(1, math.ceil((s1 - s0) / p.h - 1e-9))
    h = (s1 - s0) / steps
    s_nodes = s0 + h * np.arange(steps + 1)
    s_mid = s_nodes[:-1] + 0.5 * h
    k_nodes = p.curvature_values(s_nodes)
    k_mid = p.curvature_values(s_mid)
    K_nodes = _frenet_matrices(k_nodes)
    K_mid = _frenet_matrices(k_mid)
    if check:
        both = np.concatenate([s_nodes, s_mid])
        order = np.argsort(both)
        p.validate(both[order])

    stride = max(1, steps // max(samples - 1, 1))
    keep = np.arange(0, steps + 1, stride)
    if keep.size < 16:
        raise PrescriptionError(f"only {keep.size} apparatus samples; lower h or widen the span")

    x = p.initial_point.copy()
    V = mgs_rows(p.initial_frame)
    if np.linalg.det(V) < 0:
        raise PrescriptionError("initial frame must be positively oriented")
    xs = np.empty((steps + 1, n))
    frames = np.empty((keep.size, n, n))
    xs[0] = x
    frames[0] = V
    slot = 1
    drift = 0.0
    eye = np.eye(n)
    for j in range(steps):
        Ka, Km, Kb = K_nodes[j], K_mid[j], K_nodes[j + 1]
        V1 = Ka @ V
        V2 = Km @ (V + 0.5 * h * V1)
        V3 = Km @ (V + 0.5 * h * V2)
        V4 = Kb @ (V + h * V3)
        x = x + h / 6.0 * (V[0] + 2.0 * (V[0] + 0.5 * h * V1[0]) + 2.0 * (V[0] + 0.5 * h * V2[0])
                           + (V[0] + h * V3[0]))
        V = V + h / 6.0 * (V1 + 2.0 * V2 + 2.0 * V3 + V4)
        err = float(np.max(np.abs(V @ V.T - eye)))
        drift = max(drift, err)
        if err > DRIFT_LIMIT:
            suggested = h * (0.1 * DRIFT_LIMIT / err) ** 0.2
            raise PrescriptionError(
                f"orthonormality drift {err:.3g} at s = {s_nodes[j + 1]:.6g}; try h <= {suggested:.3g}",
                float(s_nodes[j + 1]),
            )
        V = mgs_rows(V)
        xs[j + 1] = x
        if slot < keep.size and keep[slot] == j + 1:
            frames[slot] = V
            slot += 1

    curve = CurveSpec.sampled(s_nodes, xs)
    s = s_nodes[keep]
    order = jet_order if jet_order is not None else 2 * n + 4
    app = FrenetApparatus(
        CurveSpec(n, "synthetic", (s0, float(s[-1])), prescription=p),
        s,
        s - s0,
        Jet.constant(np.ones(s.shape), order),
        frames,
        p.curvature_jets(s, order),
        meta={"h": h, "steps": steps, "stride": stride},
    )
    return Synthesis(curve, app, drift)


def make_circular_helix(a: float, b: float, turns: float = 1.0) -> CurveSpec:
    """``(a cos t, a sin t, b t)``; ``k_1 = a/(a^2+b^2)``, ``k_2 = b/(a^2+b^2)``, axis ``e_3``."""
    if not a > 0:
        raise ValueError("radius a must be positive")
    if b == 0:
        raise ValueError("pitch b must be nonzero (b = 0 is a planar circle)")
    src = (f"dim 3 on [0, {2 * math.pi * turns!r}]: "
           f"x = {a!r}*cos(t); y = {a!r}*sin(t); z = {b!r}*t")
    from .expr import parse_curve

    return parse_curve(src)


# ---------------------------------------------------------------------------
# Fixture generators
# ---------------------------------------------------------------------------


def _num(x):
    return Num(float(x)) if x >= 0 else -Num(float(-x))


def _sin(e):
    return Call("sin", e)


def _cos(e):
    return Call("cos", e)


def _sqrt(e):
    return Call("sqrt", e)


def _positive(rng, lo=0.8, hi=1.4):
    """``a + b sin(w s + th)`` with ``|b| <= 0.3 a``."""
    a = rng.uniform(lo, hi)
    b = rng.uniform(0.1, 0.3) * a
    w = rng.uniform(0.3, 1.0)
    th = rng.uniform(0.0, 2 * math.pi)
    return _num(a) + _num(b) * _sin(_num(w) * S + _num(th))


def _increasing(rng):
    """Positive, strictly increasing ``c + d s + e sin(w s + th)``."""
    c = rng.uniform(0.5, 1.5)
    d = rng.uniform(0.05, 0.2)
    w = rng.uniform(0.3, 1.0)
    e = rng.uniform(0.0, 0.5) * d / w
    th = rng.uniform(0.0, 2 * math.pi)
    return _num(c) + _num(d) * S + _num(e) * _sin(_num(w) * S + _num(th))


def _span(rng):
    return (0.0, float(rng.uniform(6.0, 10.0)))


def _sample(span, m=2001):
    return np.linspace(span[0], span[1], m)


def _closing(P, Ssum, s, rng, sign_ok=None):
    """Pick ``C`` and return ``(C, root_expr)`` for ``root = sqrt(C - Ssum)``; None if ``P`` vanishes."""
    pv = np.asarray(np.broadcast_to(P(s), s.shape))
    if not np.all(np.isfinite(pv)):
        return None
    if np.min(np.abs(pv)) < 0.02 * np.max(np.abs(pv)) or np.any(np.sign(pv) != np.sign(pv[0])):
        return None
    if sign_ok is not None and not sign_ok(pv[0]):
        return None
    sv = np.asarray(np.broadcast_to(Ssum(s), s.shape))
    C = float(np.max(sv)) * rng.uniform(1.2, 1.6) + rng.uniform(0.2, 0.5)
    return C, _sqrt(_num(C) - Ssum), float(np.sign(pv[0]))


def _finish(n, ks, span, h, meta):
    p = CurvaturePrescription(n, tuple(ks), span, h, meta=meta)
    p.validate()
    return p


def make_inclined_fixture(n: int, seed: int, h: float = 2e-3) -> CurvaturePrescription:
    """Curvatures of an inclined curve (constant-angle tangent) in E^n."""
    if n < 3:
        raise ValueError("n must be at least 3")
    rng = np.random.default_rng([seed, n, 1])
    for _ in range(MAX_RETRIES):
        span = _span(rng)
        s = _sample(span)
        k1 = _positive(rng)
        if n == 3:
            c = rng.uniform(0.4, 2.5)
            return _finish(3, [k1, k1 * _num(c)], span, h,
                           {"kind": "inclined", "seed": seed, "H1": 1.0 / c})
        r = _increasing(rng)
        ks = [k1, k1 / r] + [_positive(rng) for _ in range(n - 4)]  # k_1..k_{n-2}
        H = [Num(0.0), r]
        for i in range(2, n - 2):
            H.append((H[i - 1].diff() + ks[i - 1] * H[i - 2]) / ks[i])
        if np.any(np.abs(H[n - 3](s)) < 1e-3):
            continue
        P = H[n - 3].diff() + ks[n - 3] * H[n - 4]
        Ssum = sum((H[i] ** 2 for i in range(2, n - 2)), H[1] ** 2)
        closed = _closing(P, Ssum, s, rng)
        if closed is None:
            continue
        C, root, _ = closed
        try:
            return _finish(n, ks + [P / root], span, h,
                           {"kind": "inclined", "seed": seed, "sumsq": C})
        except PrescriptionError:
            continue
    raise FixtureRejected(f"no admissible inclined fixture for n={n}, seed={seed}")


def make_vn_fixture(n: int, seed: int, h: float = 2e-3) -> CurvaturePrescription:
    """Curvatures of a V_n-slant helix: mirror of :func:`make_inclined_fixture`."""
    if n < 3:
        raise ValueError("n must be at least 3")
    rng = np.random.default_rng([seed, n, 2])
    for _ in range(MAX_RETRIES):
        span = _span(rng)
        s = _sample(span)
        top = _positive(rng)  # k_{n-1}
        if n == 3:
            c = rng.uniform(0.4, 2.5)
            return _finish(3, [top, top * _num(c)], span, h,
                           {"kind": "vn_slant", "seed": seed, "H1star": c})
        rho = _increasing(rng)
        # rev[j] is k_{n-1-j}: k_{n-1}, k_{n-2} = k_{n-1}/rho, then free k_{n-3}..k_2
        rev = [top, top / rho] + [_positive(rng) for _ in range(n - 4)]

        def kk(j):
            return rev[n - 1 - j]

        H = [Num(0.0), rho]
        for i in range(2, n - 2):
            H.append((kk(n - i) * H[i - 2] - H[i - 1].diff()) / kk(n - i - 1))
        if np.any(np.abs(H[n - 3](s)) < 1e-3):
            continue
        P = kk(2) * H[n - 4] - H[n - 3].diff()
        Ssum = sum((H[i] ** 2 for i in range(2, n - 2)), H[1] ** 2)
        closed = _closing(P, Ssum, s, rng)
        if closed is None:
            continue
        C, root, sign = closed
        k1 = P / root if sign > 0 else -P / root
        ks = [k1] + rev[::-1]
        try:
            return _finish(n, ks, span, h, {"kind": "vn_slant", "seed": seed, "sumsq": C})
        except PrescriptionError:
            continue
    raise FixtureRejected(f"no admissible V_n-slant fixture for n={n}, seed={seed}")


def make_v2_fixture(seed: int, n: int = 3, h: float = 2e-3) -> CurvaturePrescription:
    """Curvatures of a V_2-slant helix.

    ``k_1 = a + b cos(w s + th)`` has the closed-form antiderivative used for
    ``G_1``; the construction constant ``c0`` is stored in ``meta``.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    rng = np.random.default_rng([seed, n, 3])
    for _ in range(MAX_RETRIES):
        span = _span(rng)
        s = _sample(span)
        a = rng.uniform(0.8, 1.4)
        b = rng.uniform(0.1, 0.3) * a
        w = rng.uniform(0.3, 1.0)
        th = rng.uniform(0.0, 2 * math.pi)
        c0 = rng.uniform(0.5, 1.5)
        k1 = _num(a) + _num(b) * _cos(_num(w) * S + _num(th))
        G1 = _num(c0 - b / w * math.sin(th)) + _num(a) * S + _num(b / w) * _sin(_num(w) * S + _num(th))
        if n == 3:
            ks = [k1]
            Q = k1 * G1
            Ssum = G1 ** 2
        else:
            ks = [k1] + [_positive(rng) for _ in range(n - 3)]  # k_1..k_{n-2}
            G = [G1, Num(1.0), k1 * G1 / ks[1]]
            for i in range(4, n):
                G.append((ks[i - 3] * G[i - 3] + G[i - 2].diff()) / ks[i - 2])
            Q = ks[n - 3] * G[n - 3] + G[n - 2].diff()
            Ssum = sum((G[i] ** 2 for i in range(2, n - 1)), G1 ** 2)
        closed = _closing(Q, Ssum, s, rng)
        if closed is None:
            continue
        C, root, _ = closed
        try:
            return _finish(n, ks + [Q / root], span, h,
                           {"kind": "v2_slant", "seed": seed, "c0": c0, "sumsq": C + 1.0})
        except PrescriptionError:
            continue
    raise FixtureRejected(f"no admissible V_2-slant fixture for n={n}, seed={seed}")


def make_anti_fixture(n: int = 4, seed: int | None = None, kind: str = "inclined",
                      h: float = 2e-3) -> CurvaturePrescription:
    """Curves whose harmonic sum of squares is constant while the last function vanishes.

    n=4, inclined: ``k_1/k_2`` constant and ``k_3`` generic, so ``H_1`` is
    constant and ``H_2 = 0``.  n=5, inclined: ``(H_1, H_2)`` run along a
    circle, which forces ``H_3 = 0`` for any ``k_4``.  ``kind="vn_slant"``
    mirrors the curvature order.  ``seed=None`` gives the canonical
    ``k = (1, 2, 1 + 0.5 sin(0.7 s))`` member for n=4.
    """
    if n not in (4, 5):
        raise ValueError("anti-fixtures exist for n = 4 and 5")
    if seed is None:
        if n != 4:
            raise ValueError("the canonical anti-fixture is n=4")
        ks = [Num(1.0), Num(2.0), Num(1.0) + Num(0.5) * _sin(Num(0.7) * S)]
        span = (0.0, 10.0)
    else:
        rng = np.random.default_rng([seed, n, 4])
        span = _span(rng)
        if n == 4:
            k1 = _positive(rng)
            ks = [k1, k1 * _num(rng.uniform(0.5, 2.5)), _positive(rng)]
        else:
            # H_1 = R cos(psi), H_2 = R sin(psi), psi decreasing, k_3 = -psi'
            R = rng.uniform(0.5, 2.0)
            top = rng.uniform(0.3, 1.2)
            rate = rng.uniform(0.3, 1.1) * top / (span[1] - span[0])  # keeps psi in (-pi/2, pi/2)
            psi = _num(top) - _num(rate) * S
            k1 = _positive(rng)
            ks = [k1, k1 / (_num(R) * _cos(psi)), _num(rate), _positive(rng)]
    if kind == "vn_slant":
        ks = ks[::-1]
    elif kind != "inclined":
        raise ValueError("kind must be 'inclined' or 'vn_slant'")
    return _finish(n, ks, span, h, {"kind": f"anti_{kind}", "seed": seed})


def make_generic_fixture(n: int, seed: int, h: float = 2e-3) -> CurvaturePrescription:
    """Independent random positive curvatures: generically no helix of any kind."""
    rng = np.random.default_rng([seed, n, 5])
    span = _span(rng)
    ks = [_positive(rng, 0.6, 1.6) for _ in range(n - 1)]
    return _finish(n, ks, span, h, {"kind": "generic", "seed": seed})
