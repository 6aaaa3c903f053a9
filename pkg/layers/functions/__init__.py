from .association import AssocProbabilities, association_probabilities, class_models, serving_distance_pdf, tier_geometry
from .coverage import SinrCoverage, KTierCoverage, sinr_coverage, sinr_coverage_curve, ktier_sinr_coverage
from .rate import (LoadPmf, RateCoverage, RateModel, Percentile, load_pmf, mean_load, rate_coverage,
                   rate_coverage_mean_load, rate_coverage_backhaul, rate_percentile)


__all__ = ['AssocProbabilities', 'association_probabilities', 'class_models', 'serving_distance_pdf',
           'tier_geometry', 'SinrCoverage', 'KTierCoverage', 'sinr_coverage', 'sinr_coverage_curve',
           'ktier_sinr_coverage', 'LoadPmf', 'RateCoverage', 'RateModel', 'Percentile', 'load_pmf',
           'mean_load', 'rate_coverage', 'rate_coverage_mean_load', 'rate_coverage_backhaul',
           'rate_percentile']
