"""Charts, induced metrics, frames, quadrature and the built-in manifolds."""
from .charts import Chart, ManifoldSpec, ambient_name, induced_metric
from .context import ChartGeometry
from .frames import DegenerateMetricError, orthonormal_frame, random_rotation
from .octonion import cd_multiply, cross, cross_table
from .quadrature import AtlasError, NodeBlock, QuadratureGrid, build_grid, sample_points, sphere_volume
from .structures import (
    AmbientEndomorphism,
    ChartComponents,
    ConjugatedStructure,
    CrossProductStructure,
    structure_from_tag,
)
from .zoo import flat_torus, get, round_sphere, round_sphere_2, s6_octonionic, s6_perturbed, zoo

octonion_cross = cross
