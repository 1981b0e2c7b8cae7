"""
cxbox - complex B-splines and complex box splines
"""

__version__ = "1.0.0"
