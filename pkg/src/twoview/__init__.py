"""Two-view 3-D reconstruction with geometric uniqueness certificates."""

__version__ = "0.1.0"

from .geometry import (  # noqa: F401
    BackprojectionRay,
    Involution,
    PointCloud,
    Projected2D,
    ProjectionSpec,
    Sinogram,
    VoxelGrid,
    apply_involution,
    backproject,
    coordinate_spec,
    project_points,
    project_voxels,
)
from .moments import (  # noqa: F401
    MomentValue,
    SecondMoment3D,
    centroid2d,
    centroid3d,
    moment_map,
    second_moment,
)
from .recon import (  # noqa: F401
    ConstraintRow,
    DirectionSolution,
    NoiseReport,
    RadonSystem,
    build_radon_system,
    noise_study,
    reconstruct_cloud,
    solve_direction,
    solve_radon,
    triangulate,
)
from .certify import (  # noqa: F401
    Certificate,
    TrivializationCoords,
    certificate,
    check_transversality,
    trivialization,
)
