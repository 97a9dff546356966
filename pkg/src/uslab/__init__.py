"""uslab: constructive universal-series laboratory.

Builds sparse coefficient sequences whose weighted partial sums hit
prescribed targets on prescribed compact sets at a finite horizon, with
verifiable certificates and quantitative diagnostics.
"""

__version__ = "0.1.0"

from .poly import (  # noqa: F401
    EXACT,
    FLOAT,
    CompactSetSpec,
    ModeError,
    Polynomial,
    eval_poly,
    hardy2_norm_sq,
    sup_norm,
)
from .bases import (  # noqa: F401
    BasisFamily,
    CoefficientSequence,
    HorizonError,
    IndexSequence,
    WeightTriangle,
    bernstein_to_monomial,
    derivative_family_sum,
    family_element,
    monomial_to_bernstein,
    partial_sum,
    partial_sum_values,
)
