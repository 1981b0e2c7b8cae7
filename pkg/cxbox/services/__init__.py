"""
Service modules - numerical library layer
"""
from cxbox.services.directions import DirectionSet, validate
from cxbox.services.multivariate import boxspline_eval, boxspline_symbol

__all__ = [
    'DirectionSet',
    'validate',
    'boxspline_eval',
    'boxspline_symbol',
]
