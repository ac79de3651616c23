"""Harmonic curvature systems along a Frenet apparatus.

Three recursions, each evaluated in jet arithmetic so every derivative that
appears is propagated exactly instead of differenced on the grid:

``H``      H_0 = 0, H_1 = k_1/k_2, H_i = (H_{i-1}' + k_i H_{i-2}) / k_{i+1}
``Hstar``  H*_0 = 0, H*_1 = k_{n-1}/k_{n-2}, H*_i = (k_{n-i} H*_{i-2} - H*_{i-1}') / k_{n-i-1}
``G``      G_1 = c0 + int k_1 ds, G_2 = 1, G_3 = (k_1/k_2) G_1,
           G_i = (k_{i-2} G_{i-2} + G_{i-1}') / k_{i-1}

The first two run over ``i = 0..n-2`` and sum squares over ``1..n-2``; the G
system runs over ``1..n`` and sums squares over all of them.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientJetDepth
from .frenet import FrenetApparatus
from .jet import Jet

__all__ = [
    "HarmonicProfile",
    "harmonic_H",
    "harmonic_Hstar",
    "functions_G",
    "fit_G_constant",
    "normalized_spread",
]

KINDS = ("H", "Hstar", "G")


@dataclass(frozen=True)
class HarmonicProfile:
    """Grid values of one harmonic system.

    ``values[:, j]`` and ``dvalues[:, j]`` hold the function with index
    ``indices[j]`` and its arclength derivative.
    """

    kind: str
    s: np.ndarray
    indices: tuple
    values: np.ndarray
    dvalues: np.ndarray
    sumsq: np.ndarray
    k: np.ndarray  # curvature values (N, n-1), for the differential tests
    c0: float | None = None
    jets: tuple = field(default=(), repr=False, compare=False)

    @property
    def n(self):
        return self.k.shape[1] + 1

    def column(self, index):
        return self.indices.index(index)

    def value(self, index):
        return self.values[:, self.column(index)]

    def dvalue(self, index):
        return self.dvalues[:, self.column(index)]

    def jet(self, index):
        return self.jets[self.column(index)]

    def to_csv(self, fh=None):
        """CSV with a ``#``-prefixed JSON header recording kind and c0."""
        out = fh or io.StringIO()
        header = {"kind": self.kind, "c0": self.c0, "indices": list(self.indices), "n": self.n}
        out.write("# " + json.dumps(header) + "\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(
            ["s"]
            + [f"value_{i}" for i in self.indices]
            + [f"dvalue_{i}" for i in self.indices]
            + ["sumsq"]
        )
        for p in range(self.s.shape[0]):
            row = [self.s[p], *self.values[p], *self.dvalues[p], self.sumsq[p]]
            w.writerow([format(float(x), ".17g") for x in row])
        return out.getvalue() if fh is None else None


def normalized_spread(x):
    """``(max - min) / max(1, |mean|)``: dimensionless and safe near zero means."""
    x = np.asarray(x, dtype=float)
    return float((x.max() - x.min()) / max(1.0, abs(x.mean())))


def _require_depth(jets, what):
    last = jets[-1]
    if last.order < 1:
        raise InsufficientJetDepth(
            f"{what}: curvature jets are too shallow to differentiate the last function; "
            "raise the jet order or use an analytic curve"
        )


def _zero_like(k):
    return Jet(np.zeros_like(k.coeffs))


def _profile(kind, app, jets, indices, sum_from, c0=None):
    values = np.stack([j.value for j in jets], axis=1)
    dvalues = np.stack(
        [j.coeffs[1] if j.order >= 1 else np.full(j.value.shape, np.nan) for j in jets], axis=1
    )
    first = indices.index(sum_from)
    sumsq = np.sum(values[:, first:] ** 2, axis=1)
    return HarmonicProfile(kind, app.s, tuple(indices), values, dvalues, sumsq, app.k, c0, tuple(jets))


def harmonic_H(app: FrenetApparatus) -> HarmonicProfile:
    n = app.n
    k = app.curvatures  # k[i-1] is k_i
    H = [_zero_like(k[0]), k[0] / k[1]]
    for i in range(2, n - 1):
        H.append((H[i - 1].derivative() + k[i - 1] * H[i - 2]) / k[i])
    _require_depth(H, "H")
    return _profile("H", app, H, list(range(n - 1)), 1)


def harmonic_Hstar(app: FrenetApparatus) -> HarmonicProfile:
    n = app.n
    k = app.curvatures

    def kk(j):
        return k[j - 1]

    H = [_zero_like(k[0]), kk(n - 1) / kk(n - 2)]
    for i in range(2, n - 1):
        H.append((kk(n - i) * H[i - 2] - H[i - 1].derivative()) / kk(n - i - 1))
    _require_depth(H, "Hstar")
    return _profile("Hstar", app, H, list(range(n - 1)), 1)


def _G_jets(app, c0):
    n = app.n
    k = app.curvatures
    k1 = k[0]
    G1 = Jet(np.concatenate([(c0 + app.integrate(k1.value))[None], k1.coeffs], axis=0))
    G = [G1, Jet.constant(np.ones(app.N), k1.order + 1), k1 * G1 / k[1]]
    for i in range(4, n + 1):
        # G[i-1] is G_i
        G.append((k[i - 3] * G[i - 3] + G[i - 2].derivative()) / k[i - 2])
    return G


def functions_G(app: FrenetApparatus, c0: float = 0.0) -> HarmonicProfile:
    """G system with ``G_1(s) = c0 + int_{s_0}^{s} k_1``."""
    G = _G_jets(app, float(c0))
    _require_depth(G, "G")
    return _profile("G", app, G, list(range(1, app.n + 1)), 1, c0=float(c0))


def _golden(f, a, b, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def fit_G_constant(app: FrenetApparatus, tol: float = 1e-10, scan: int = 401):
    """Integration constant ``c0`` making ``sum G_i^2`` as constant as possible.

    Every ``G_i`` is affine in ``c0``, so the two profiles at ``c0 = 0`` and
    ``c0 = 1`` determine the objective exactly.  The normalized variance is a
    quartic in ``c0`` and can have two local minima, so a coarse scan of the
    bracket picks the basin before golden-section refinement.

    Returns
    -------
    c0 : float
    residual : float
        Variance of ``sum G_i^2`` over the grid divided by ``max(1, mean)^2``.
    """
    if app.N < 16:
        raise ValueError("grid too small")
    G0 = np.stack([g.value for g in _G_jets(app, 0.0)], axis=1)
    G1 = np.stack([g.value for g in _G_jets(app, 1.0)], axis=1)
    B = G1 - G0

    def objective(c):
        ss = np.sum((G0 + c * B) ** 2, axis=1)
        return float(np.var(ss) / max(1.0, abs(ss.mean())) ** 2)

    half = float(np.max(np.abs(app.integrate(app.curvatures[0].value)))) + 10.0
    grid = np.linspace(-half, half, scan)
    vals = np.array([objective(c) for c in grid])
    j = int(np.argmin(vals))
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, scan - 1)]
    c0 = _golden(objective, lo, hi, tol)
    return c0, objective(c0)
