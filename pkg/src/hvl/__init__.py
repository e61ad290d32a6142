"""Numerical toolkit for Volterra-type operators on Hardy spaces of the disc."""

__version__ = "0.1.0"

from .disc import (  # noqa: E402
    AnalyticFn,
    CandidateSequence,
    DiscPoint,
    SymbolSpec,
    compose_with_mobius,
    disc_point,
    evaluate,
    geometric_path,
    make_mobius,
    make_symbol,
    make_test_function,
)
from .hump import (  # noqa: E402
    SelectionCertificate,
    embed_flat,
    embed_volterra,
    isomorphism_report,
    remeasure_flat,
    replay,
    select_flat,
    select_volterra,
)
from .norms import (  # noqa: E402
    Arc,
    arc_integral,
    bloch_seminorm,
    bmoa_seminorm,
    hardy_norm,
    harmonic_measure,
    lmoa_seminorm,
    vmoa_defect,
)
from .volterra import (  # noqa: E402
    aleman_cima_ratio,
    aleman_cima_sweep,
    apply_volterra_coeff,
    apply_volterra_quad,
    normlimit_profile,
    volterra_consistency,
)
