"""Fixture corpus shared by the classification and acceptance tests.

Built once per process and memoized: every positive family for n = 3, 4, 5,
the anti-fixtures and a handful of generic curves.
"""

import time
from dataclasses import dataclass
from functools import lru_cache

from slanthelix.frenet import FrenetApparatus
from slanthelix.synthesize import (
    CurvaturePrescription,
    integrate_frenet,
    make_anti_fixture,
    make_generic_fixture,
    make_inclined_fixture,
    make_v2_fixture,
    make_vn_fixture,
)

PER_KIND = 20
DIMS = (3, 4, 5)
KINDS = ("inclined", "v2_slant", "vn_slant")
MAKERS = {
    "inclined": make_inclined_fixture,
    "vn_slant": make_vn_fixture,
    "v2_slant": lambda n, seed: make_v2_fixture(seed, n=n),
}


@dataclass(frozen=True)
class Entry:
    name: str
    family: str  # inclined, v2_slant, vn_slant, anti_inclined, anti_vn_slant, generic
    n: int
    prescription: CurvaturePrescription
    app: FrenetApparatus
    build_seconds: float = 0.0

    @property
    def positive_kind(self):
        return self.family if self.family in KINDS else None


def _entry(name, family, make):
    t0 = time.perf_counter()
    p = make()
    app = integrate_frenet(p).apparatus
    return Entry(name, family, p.n, p, app, time.perf_counter() - t0)


@lru_cache(maxsize=None)
def positives(kind, n):
    return tuple(_entry(f"{kind}-n{n}-s{seed}", kind, lambda: MAKERS[kind](n, seed)) for seed in range(PER_KIND))


@lru_cache(maxsize=None)
def anti(kind, n):
    seeds = ([None] if n == 4 else []) + list(range(4))
    return tuple(
        _entry(f"anti-{kind}-n{n}-s{seed}", f"anti_{kind}", lambda: make_anti_fixture(n, seed, kind=kind)) for seed in seeds
    )


@lru_cache(maxsize=None)
def generic(n):
    return tuple(_entry(f"generic-n{n}-s{seed}", "generic", lambda: make_generic_fixture(n, seed)) for seed in range(4))


def full(max_n=5):
    out = []
    for n in DIMS:
        if n > max_n:
            continue
        for kind in KINDS:
            out.extend(positives(kind, n))
        if n >= 4:
            out.extend(anti("inclined", n))
            out.extend(anti("vn_slant", n))
        out.extend(generic(n))
    return out
