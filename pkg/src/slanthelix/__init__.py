"""Frenet apparatus, harmonic curvatures and helix classification in E^n."""

from .classify import (
    AxisEstimate,
    Tolerances,
    Verdict,
    brute_force_axis,
    classify_inclined,
    classify_v2_slant,
    classify_vn_slant,
    reconstruct_axis,
    verify_axis,
)
from .errors import (
    CurveError,
    DegenerateCurve,
    DomainError,
    FixtureRejected,
    InsufficientJetDepth,
    NotRegular,
    ParseError,
    PrescriptionError,
    SlantHelixError,
)
from .expr import CurveSpec, Expression, eval_jets, parse_curve, parse_expression
from .frenet import FrenetApparatus, FrenetSample, build_apparatus, check_nondegenerate, frenet_at
from .harmonic import HarmonicProfile, fit_G_constant, functions_G, harmonic_H, harmonic_Hstar
from .jet import Jet
from .synthesize import (
    CurvaturePrescription,
    integrate_frenet,
    make_anti_fixture,
    make_circular_helix,
    make_generic_fixture,
    make_inclined_fixture,
    make_v2_fixture,
    make_vn_fixture,
)

__version__ = "0.1.0"
