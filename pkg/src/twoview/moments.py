"""First and second moments of clouds and their projections.

The moment map of an object with respect to a projection frame is the
mass-weighted centroid of its planar image; because projection is linear
it equals the projection of the 3-D centroid, which is the linear
constraint the direction solver consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroMass
from .geometry import PointCloud, Projected2D, ProjectionSpec, project_points

_MASS_EPS = 0.0  # total mass must be strictly positive


@dataclass(frozen=True)
class MomentValue:
    """Centroid (plane coordinates) plus the total mass it was taken over."""

    centroid: np.ndarray
    total_mass: float

    def __post_init__(self):
        c = np.asarray(self.centroid, dtype=float).reshape(2)
        object.__setattr__(self, "centroid", c)
        object.__setattr__(self, "total_mass", float(self.total_mass))


@dataclass(frozen=True)
class SecondMoment3D:
    """Central second-moment tensor of a cloud (symmetric PSD 3x3)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(3, 3)
        object.__setattr__(self, "matrix", m)

    def eigen(self):
        """Eigenvalues ascending and the matching unit eigenvectors."""
        vals, vecs = np.linalg.eigh(self.matrix)
        return vals, vecs


def centroid2d(img: Projected2D) -> MomentValue:
    """Mass-weighted mean position of a planar image."""
    total = float(img.weights.sum())
    if total <= _MASS_EPS:
        raise ZeroMass(f"total weight {total} is not positive")
    c = img.weights @ img.positions / total
    return MomentValue(c, total)


def centroid3d(cloud: PointCloud) -> np.ndarray:
    total = cloud.total_mass
    if total <= _MASS_EPS:
        raise ZeroMass(f"total weight {total} is not positive")
    return cloud.weights @ cloud.positions / total


def moment_map(cloud: PointCloud, spec: ProjectionSpec) -> MomentValue:
    """Centroid of the projection of a cloud.

    Equals the projection of the 3-D centroid (projection is linear), so
    translating the cloud by t shifts the value by (t.u, t.w) exactly.
    """
    return centroid2d(project_points(cloud, spec))


def second_moment(cloud: PointCloud) -> SecondMoment3D:
    """Central second-moment tensor sum w (p-c)(p-c)^T / sum w."""
    c = centroid3d(cloud)
    d = cloud.positions - c
    m = (cloud.weights[:, None] * d).T @ d / cloud.total_mass
    m = 0.5 * (m + m.T)  # kill rounding asymmetry
    return SecondMoment3D(m)
