"""Experiments over finite fields: point sets, character sums, theta sums, measures and equidistribution."""

from .charsums import axiom4_check, char_sum, density_probe, weil_scan
from .equidist import discrepancy, etk_bound, exponent_search, witness_search
from .geometry import AffineVariety, PointSet, containment_search, enumerate_points
from .measure import average_over, case_decompose, count_and_fit, fubini_check, integrate_predicate
from .theta import chi_sym, kappa_eval, theta_combine, theta_eval

__all__ = [
    "AffineVariety",
    "PointSet",
    "average_over",
    "axiom4_check",
    "case_decompose",
    "char_sum",
    "chi_sym",
    "containment_search",
    "count_and_fit",
    "density_probe",
    "discrepancy",
    "enumerate_points",
    "etk_bound",
    "exponent_search",
    "fubini_check",
    "integrate_predicate",
    "kappa_eval",
    "theta_combine",
    "theta_eval",
    "weil_scan",
    "witness_search",
]
