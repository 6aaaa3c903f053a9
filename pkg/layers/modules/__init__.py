from .coverage_model import CoverageModel, ClassGeometry, ExclusionTerm

__all__ = ['CoverageModel', 'ClassGeometry', 'ExclusionTerm']
