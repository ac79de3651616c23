"""Helix verdicts, axis reconstruction and the brute-force axis oracle.

Each helix kind has two decision procedures:

* algebraic: the harmonic sum of squares is constant *and* the last function
  of the system is nonzero;
* differential: the last function satisfies its closing ODE (for H:
  ``H_{n-2}' = -k_{n-1} H_{n-3}``) *and* is nonzero.

Dropping the nonzero condition gives a test that is necessary but not
sufficient; the anti-fixtures in :mod:`slanthelix.synthesize` are the
standard counterexamples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .frenet import FrenetApparatus
from .harmonic import HarmonicProfile, fit_G_constant, functions_G, normalized_spread

__all__ = [
    "Tolerances",
    "Verdict",
    "AxisCheck",
    "AxisEstimate",
    "classify_inclined",
    "classify_vn_slant",
    "classify_v2_slant",
    "reconstruct_axis",
    "verify_axis",
    "brute_force_axis",
    "frame_index",
    "canonical_sign",
    "sphere_grid",
]

HELIX_KINDS = ("inclined", "v2_slant", "vn_slant")
METHODS = ("algebraic", "differential")


@dataclass(frozen=True)
class Tolerances:
    const: float = 1e-6  # normalized spread / differential residual
    zero: float = 1e-8  # minimum |last function|
    angle: float = 1e-6  # minimum |cos phi|

    def __post_init__(self):
        if not (self.const > 0 and self.zero > 0 and self.angle > 0):
            raise ValueError("tolerances must be positive")

    def as_dict(self):
        return {"const": self.const, "zero": self.zero, "angle": self.angle}


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Verdict:
    helix_kind: str
    method: str
    is_helix: bool
    constancy_residual: float
    nonzero_margin: float
    details: dict = field(default_factory=dict, repr=False, compare=False)
    profile: HarmonicProfile | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class AxisCheck:
    j: int
    mean: float
    spread: float
    min: float
    max: float
    passed: bool


@dataclass(frozen=True)
class AxisEstimate:
    X: np.ndarray
    phi: float
    source: str
    helix_kind: str
    verify: AxisCheck
    max_deviation: float = 0.0  # max_p |X_p - X| over the grid (reconstructed only)
    max_dX_ds: float = 0.0
    norm_error: float = 0.0


def frame_index(kind, n):
    """1-based index ``j`` of the frame vector that makes a constant angle."""
    return {"inclined": 1, "v2_slant": 2, "vn_slant": n}[kind]


def _decide(kind, method, residual, last, tol, profile, details):
    margin = float(np.min(np.abs(last)))
    ok = bool(residual <= tol.const and margin >= tol.zero)
    return Verdict(kind, method, ok, float(residual), margin, details, profile)


def _differential_residual(dlast, closing):
    return float(np.max(np.abs(dlast - closing)) / max(1.0, float(np.max(np.abs(dlast)))))


def classify_inclined(profile: HarmonicProfile, method: str = "algebraic", tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Inclined-curve test on an ``H`` profile."""
    if profile.kind != "H":
        raise ValueError(f"kind mismatch: expected an H profile, got {profile.kind!r}")
    n = profile.n
    last = profile.value(n - 2)
    if method == "algebraic":
        res = normalized_spread(profile.sumsq)
        details = {"sumsq_mean": float(profile.sumsq.mean())}
    elif method == "differential":
        closing = -profile.k[:, n - 2] * profile.value(n - 3)
        res = _differential_residual(profile.dvalue(n - 2), closing)
        details = {}
    else:
        raise ValueError(f"unknown method {method!r}")
    return _decide("inclined", method, res, last, tol, profile, details)


def classify_vn_slant(profile: HarmonicProfile, method: str = "algebraic", tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """V_n-slant test on an ``Hstar`` profile."""
    if profile.kind != "Hstar":
        raise ValueError(f"kind mismatch: expected an Hstar profile, got {profile.kind!r}")
    n = profile.n
    last = profile.value(n - 2)
    if method == "algebraic":
        res = normalized_spread(profile.sumsq)
        details = {"sumsq_mean": float(profile.sumsq.mean())}
    elif method == "differential":
        closing = profile.k[:, 0] * profile.value(n - 3)
        res = _differential_residual(profile.dvalue(n - 2), closing)
        details = {}
    else:
        raise ValueError(f"unknown method {method!r}")
    return _decide("vn_slant", method, res, last, tol, profile, details)


def classify_v2_slant(app: FrenetApparatus, method: str = "algebraic", tol: Tolerances = DEFAULT_TOL,
                      c0: float | None = None) -> Verdict:
    """V_2-slant test; ``c0`` defaults to the best-fitting integration constant."""
    fit_res = None
    if c0 is None:
        c0, fit_res = fit_G_constant(app)
    profile = functions_G(app, c0)
    n = app.n
    last = profile.value(n)
    details = {"c0": float(c0), "fit_residual": fit_res}
    if method == "algebraic":
        res = normalized_spread(profile.sumsq)
        details["sumsq_mean"] = float(profile.sumsq.mean())
    elif method == "differential":
        closing = -profile.k[:, n - 2] * profile.value(n - 1)
        res = _differential_residual(profile.dvalue(n), closing)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _decide("v2_slant", method, res, last, tol, profile, details)


def canonical_sign(X):
    """Flip ``X`` so its largest-magnitude coordinate is positive (ties: lowest index)."""
    X = np.asarray(X, dtype=float)
    a = np.abs(X)
    i = int(np.flatnonzero(a == a.max())[0])
    return X if X[i] >= 0 else -X


def verify_axis(app: FrenetApparatus, X, j: int, tol: Tolerances = DEFAULT_TOL) -> AxisCheck:
    """Statistics of ``<V_j, X>`` along the grid (``j`` is 1-based)."""
    c = app.frame[:, j - 1, :] @ np.asarray(X, dtype=float)
    mean = float(c.mean())
    spread = float(c.max() - c.min())
    ok = bool(spread / max(1.0, abs(mean)) <= tol.const and abs(mean) >= tol.angle)
    return AxisCheck(j, mean, spread, float(c.min()), float(c.max()), ok)


def reconstruct_axis(kind: str, app: FrenetApparatus, profile: HarmonicProfile | None, verdict: Verdict,
                     tol: Tolerances = DEFAULT_TOL) -> AxisEstimate:
    """Assemble the axis from frame coefficients given by the harmonic system."""
    if not verdict.is_helix:
        raise ValueError(f"cannot reconstruct an axis for a non-helix verdict ({verdict.helix_kind})")
    if profile is None:
        profile = verdict.profile
    n = app.n
    F = app.frame
    sigma = float(profile.sumsq.mean())
    if kind == "inclined":
        cphi = 1.0 / math.sqrt(1.0 + sigma)
        coef = np.zeros((app.N, n))
        coef[:, 0] = 1.0
        for i in range(1, n - 1):
            coef[:, i + 1] = profile.value(i)
    elif kind == "vn_slant":
        cphi = 1.0 / math.sqrt(1.0 + sigma)
        coef = np.zeros((app.N, n))
        coef[:, n - 1] = 1.0
        for i in range(1, n - 1):
            coef[:, n - i - 2] = profile.value(i)
    elif kind == "v2_slant":
        cphi = 1.0 / math.sqrt(sigma)
        coef = np.stack([profile.value(i) for i in range(1, n + 1)], axis=1)
    else:
        raise ValueError(f"unknown helix kind {kind!r}")
    Xp = cphi * np.einsum("pi,pic->pc", coef, F)
    Xm = Xp.mean(axis=0)
    X = Xm / np.linalg.norm(Xm)
    flipped = canonical_sign(X)
    if flipped[np.argmax(np.abs(X))] != X[np.argmax(np.abs(X))]:
        Xp = -Xp
    X = flipped
    j = frame_index(kind, n)
    check = verify_axis(app, X, j, tol)
    phi = math.acos(max(-1.0, min(1.0, check.mean)))
    dev = float(np.max(np.linalg.norm(Xp - X, axis=1)))
    dXds = np.gradient(Xp, app.s, axis=0)
    return AxisEstimate(X, phi, "reconstructed", kind, check, dev,
                        float(np.max(np.linalg.norm(dXds, axis=1))), abs(float(np.linalg.norm(X)) - 1.0))


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

MAX_CANDIDATES = 4_000_000
SCAN_POINTS = 128


def sphere_grid(n: int, R: int) -> np.ndarray:
    """Quasi-uniform unit vectors on a hemisphere of S^{n-1}, about ``R^(n-1)`` of them.

    n=3 uses a Fibonacci lattice; higher n a product grid in hyperspherical
    angles (first angle restricted to ``[0, pi/2]``, since ``X`` and ``-X``
    are equivalent axes).
    """
    if n == 3:
        m = R * R
        i = np.arange(m) + 0.5
        z = 1.0 - i / m
        r = np.sqrt(1.0 - z * z)
        ang = math.pi * (3.0 - math.sqrt(5.0)) * i
        return np.stack([r * np.cos(ang), r * np.sin(ang), z], axis=1)
    axes = [(np.arange(R) + 0.5) * (0.5 * math.pi / R)]
    axes += [(np.arange(R) + 0.5) * (math.pi / R) for _ in range(n - 3)]
    axes += [(np.arange(R) + 0.5) * (2 * math.pi / R)]
    th = np.meshgrid(*axes, indexing="ij")
    th = [a.ravel() for a in th]
    X = np.empty((th[0].size, n))
    sprod = np.ones(th[0].size)
    for k in range(n - 1):
        X[:, k] = sprod * np.cos(th[k])
        sprod = sprod * np.sin(th[k])
    X[:, n - 1] = sprod
    return X


def _refine_axis(W, X, steps=8):
    """Polish a grid seed toward the direction of least variance of ``W @ X``.

    Shift-free inverse iteration on the (positive semidefinite) covariance of
    the frame field.  A tiny ridge keeps the solve finite when an exact axis
    makes the covariance singular.
    """
    Wc = W - W.mean(axis=0)
    C = Wc.T @ Wc / W.shape[0]
    ridge = 1e-15 * max(float(np.trace(C)), 1e-300)
    A = C + ridge * np.eye(C.shape[0])
    for _ in range(steps):
        Y = np.linalg.solve(A, X)
        Y /= np.linalg.norm(Y)
        done = abs(abs(float(Y @ X)) - 1.0) < 1e-15
        X = Y
        if done:
            break
    return X


def brute_force_axis(app: FrenetApparatus, j: int, resolution: int = 32, tol: Tolerances = DEFAULT_TOL,
                     kind: str | None = None, max_candidates: int = MAX_CANDIDATES):
    """Search unit vectors for one that makes a constant angle with ``V_j``.

    Independent of the harmonic systems: only the frame is used.  Returns an
    :class:`AxisEstimate` or ``None`` when the best candidate fails the
    constancy or ``phi != pi/2`` test.
    """
    n = app.n
    if n > 5:
        raise ValueError("brute-force axis search supports n <= 5")
    count = resolution ** (n - 1)
    if count > max_candidates:
        raise ValueError(
            f"dimension too large for requested resolution: {count} candidates > budget {max_candidates}"
        )
    W = app.frame[:, j - 1, :]
    pick = np.unique(np.linspace(0, app.N - 1, min(SCAN_POINTS, app.N)).round().astype(int))
    Ws = W[pick]
    cand = sphere_grid(n, resolution)
    best = None
    chunk = max(1, 2_000_000 // Ws.shape[0])
    for a in range(0, cand.shape[0], chunk):
        Cb = cand[a : a + chunk]
        P = Cb @ Ws.T
        spread = P.max(axis=1) - P.min(axis=1)
        i = int(np.argmin(spread))
        if best is None or spread[i] < best[0]:
            best = (float(spread[i]), Cb[i])
    X = _refine_axis(W, best[1].copy())
    X = canonical_sign(X / np.linalg.norm(X))
    check = verify_axis(app, X, j, tol)
    if not check.passed:
        return None
    phi = math.acos(max(-1.0, min(1.0, check.mean)))
    label = kind or {1: "inclined", 2: "v2_slant", n: "vn_slant"}.get(j, f"V{j}")
    return AxisEstimate(X, phi, "brute_force", label, check, 0.0, 0.0, abs(float(np.linalg.norm(X)) - 1.0))
