"""Numerical laboratory for almost complex structures on compact Riemannian manifolds."""
from .geometry.charts import Chart, ManifoldSpec
from .geometry.zoo import zoo
from .specfile import SpecFileError, load, loads

__version__ = "0.1.0"

__all__ = ["Chart", "ManifoldSpec", "SpecFileError", "load", "loads", "zoo"]
