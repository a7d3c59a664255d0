"""Numerical tools for degree-2 von Neumann inequality violations on the polydisc.

The pieces are: polynomial and coefficient-matrix types (:mod:`.core`),
sup norms on the torus (:mod:`.torus`), Varopoulos operator tuples
(:mod:`.varopoulos`), Gram-form maxima (:mod:`.gram`) and the experiment
runners behind the command line (:mod:`.experiments`).
"""
__version__ = "0.1.0"

from .core import (
    VK_MATRIX,
    BudgetError,
    NonCommutingError,
    PolySpec,
    SymCoeffMatrix,
    TorusPoint,
    as_matrix,
    evaluate,
    homogenize,
    is_psd,
    poly_from_matrix,
    symmetrize,
    vk_polynomial,
)
from .gram import (
    GramConfig,
    GramWitness,
    beta_rank1,
    cplus_witness,
    fj_matrix,
    fj_ratio,
    gram_max,
    gram_value,
    inf_to_one_norm,
    script_a_ratio,
)
from .torus import (
    SupResult,
    TorusConfig,
    balpha_gram_max,
    balpha_matrix,
    balpha_ratio,
    balpha_ratio_scan,
    balpha_sup_norm,
    collinearity_certificate,
    psd_torus_equals_sign,
    sign_sup,
    torus_sup,
)
from .varopoulos import (
    CommutingTuple,
    RatioReport,
    VaropoulosPair,
    bracket,
    eval_poly_on_tuple,
    make_varopoulos,
    operator_norm,
    quad_norm_closed,
    realify,
    vn_ratio,
)

__all__ = [
    "__version__",
    "VK_MATRIX",
    "BudgetError",
    "NonCommutingError",
    "PolySpec",
    "SymCoeffMatrix",
    "TorusPoint",
    "as_matrix",
    "evaluate",
    "homogenize",
    "is_psd",
    "poly_from_matrix",
    "symmetrize",
    "vk_polynomial",
    "GramConfig",
    "GramWitness",
    "beta_rank1",
    "cplus_witness",
    "fj_matrix",
    "fj_ratio",
    "gram_max",
    "gram_value",
    "inf_to_one_norm",
    "script_a_ratio",
    "SupResult",
    "TorusConfig",
    "balpha_gram_max",
    "balpha_matrix",
    "balpha_ratio",
    "balpha_ratio_scan",
    "balpha_sup_norm",
    "collinearity_certificate",
    "psd_torus_equals_sign",
    "sign_sup",
    "torus_sup",
    "CommutingTuple",
    "RatioReport",
    "VaropoulosPair",
    "bracket",
    "eval_poly_on_tuple",
    "make_varopoulos",
    "operator_norm",
    "quad_norm_closed",
    "realify",
    "vn_ratio",
]
