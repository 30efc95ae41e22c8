"""Gauge classification of first-order 2x2 Hermitian field symbols on tori.

The package represents first-order sesquilinear-form symbols through their
coefficient fields (E^a, F), extracts the geometry they encode (metric,
density, covector potential, charges), compares spin-level structure via
frame-transition monodromy, and decides GL/SL (4D) and U/SU (3D) gauge
equivalence of symbol pairs with an explicitly constructed gauge map.
"""

from .chart import Chart, Point, integrate_periodic, loop_samples, make_chart
from .equivalence import (
    EquivalenceReport,
    GaugeMap,
    Tolerances,
    apply_gauge,
    apply_gauge_symbolic,
    cohomology_compare,
    construct_phase,
    decide_equivalence,
    volume_form_reduction,
)
from .expr import MatrixField, eval_with_gradient, parse_expression
from .framing import (
    Frame,
    FrameTransition,
    frame_from_symbol,
    global_lift_torus,
    lift_pointwise,
    loop_monodromy,
    monodromy_signs,
    spin_hom,
    transition,
)
from .geometry import (
    Charges,
    CovectorPotential,
    MetricData,
    charges,
    covariant_subprincipal,
    metric_data,
    potentials,
)
from .catalog import builtin_symbol, kappa_family, twisted3_symbol
from .opcorr import (
    SectionField,
    apply_operator,
    form_value,
    inner_product,
    subprincipal_of_operator,
)
from .symbol import (
    FullSymbol,
    GridMatrixField,
    RawForm,
    ValidationReport,
    from_canonical,
    from_raw,
    principal_at,
    validate,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
