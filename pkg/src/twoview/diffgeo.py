"""Discrete differential geometry on regular grids.

Vector fields and Christoffel symbols are sampled per node; derivatives
use second-order central differences in the interior and one-sided
second-order stencils at the boundary, so report maxima are taken over
interior nodes only.  The integrability obstruction is exposed twice: as
the literal antisymmetrized covariant-derivative formula (the torsion of
the supplied connection contracted with the field pair) and as the
Frobenius residual, the component of the Lie bracket sticking out of the
spanned distribution.  The uniqueness certificate consumes both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDistribution,
    GridTooSmall,
    HeaderMismatch,
    PathOutsideGrid,
)


@dataclass(frozen=True)
class GridHeader:
    """Shared grid geometry: dims, node spacing, origin of node (0,0,0)."""

    dims: tuple
    spacing: float
    origin: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or any(d < 3 for d in dims):
            raise GridTooSmall(f"need >= 3 nodes per axis, got {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(
            self, "origin", np.asarray(self.origin, dtype=float).reshape(3))

    def matches(self, other: "GridHeader") -> bool:
        return (self.dims == other.dims
                and abs(self.spacing - other.spacing) <= 1e-12
                and np.max(np.abs(self.origin - other.origin)) <= 1e-12)

    def node_positions(self) -> np.ndarray:
        axes = [self.origin[a] + self.spacing * np.arange(self.dims[a])
                for a in range(3)]
        gx, gy, gz = np.meshgrid(*axes, indexing="ij")
        return np.stack([gx, gy, gz], axis=-1)

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing * np.arange(self.dims[axis])


def _require_same_header(*objs):
    h0 = objs[0].header
    for o in objs[1:]:
        if not h0.matches(o.header):
            raise HeaderMismatch(
                f"grid headers differ: {h0} vs {o.header}")
    return h0


def interior_mask(dims, depth: int = 1) -> np.ndarray:
    """Boolean mask of nodes at least `depth` nodes away from every face."""
    m = np.zeros(tuple(dims), dtype=bool)
    sl = tuple(slice(depth, d - depth) for d in dims)
    if any(s.start >= s.stop for s in sl):
        raise GridTooSmall(f"dims {tuple(dims)} too small for depth {depth}")
    m[sl] = True
    return m


@dataclass(frozen=True)
class VectorFieldGrid:
    """Per-node 3-vector samples of a vector field."""

    header: GridHeader
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).reshape(
            self.header.dims + (3,))
        if not np.all(np.isfinite(s)):
            raise HeaderMismatch("non-finite vector field samples")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, header: GridHeader, fn) -> "VectorFieldGrid":
        """Sample fn(x, y, z) -> 3-vector on every node (vectorized over
        coordinate arrays)."""
        pos = header.node_positions()
        vals = fn(pos[..., 0], pos[..., 1], pos[..., 2])
        vals = np.stack([np.broadcast_to(np.asarray(v, dtype=float),
                                         header.dims) for v in vals], axis=-1)
        return cls(header, vals)

    @classmethod
    def constant(cls, header: GridHeader, v) -> "VectorFieldGrid":
        vals = np.broadcast_to(np.asarray(v, dtype=float), header.dims + (3,))
        return cls(header, vals.copy())


@dataclass(frozen=True)
class ConnectionField:
    """Per-node Christoffel symbols gamma[..., k, i, j] for Gamma^k_ij."""

    header: GridHeader
    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float).reshape(
            self.header.dims + (3, 3, 3))
        if not np.all(np.isfinite(g)):
            raise HeaderMismatch("non-finite Christoffel samples")
        object.__setattr__(self, "gamma", g)

    @property
    def symmetric_flag(self) -> bool:
        """True when Gamma^k_ij = Gamma^k_ji at every node (torsion-free)."""
        return bool(np.max(np.abs(
            self.gamma - np.swapaxes(self.gamma, -1, -2))) <= 1e-12)

    @classmethod
    def flat(cls, header: GridHeader) -> "ConnectionField":
        return cls(header, np.zeros(header.dims + (3, 3, 3)))


@dataclass(frozen=True)
class Tensor2FieldGrid:
    """Per-node 3-vector values of an antisymmetric bilinear evaluation."""

    header: GridHeader
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(
            self.header.dims + (3,))
        object.__setattr__(self, "values", v)

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=-1)

    def max_interior_norm(self, depth: int = 1) -> float:
        return float(self.norms()[interior_mask(self.header.dims, depth)].max())


@dataclass(frozen=True)
class IntegrabilityReport:
    max_hantjies_norm: float
    max_frobenius_residual: float
    integrable: bool
    tolerance: float
    interior_node_count: int


# ---------------------------------------------------------------------------
# derivatives


def partials(field: VectorFieldGrid) -> np.ndarray:
    """All first partials d_i Y^k, shape dims + (3 axes, 3 components).

    Central differences in the interior, one-sided order-2 at boundaries.
    """
    h = field.header.spacing
    return np.stack(
        [np.gradient(field.samples, h, axis=i, edge_order=2)
         for i in range(3)], axis=-2)


def covariant_derivative(X: VectorFieldGrid, Y: VectorFieldGrid,
                         conn: ConnectionField) -> VectorFieldGrid:
    """(nabla_X Y)^k = X^i d_i Y^k + Gamma^k_ij X^i Y^j, node-wise."""
    header = _require_same_header(X, Y, conn)
    dY = partials(Y)  # (..., i, k)
    directional = np.einsum("...i,...ik->...k", X.samples, dY)
    christoffel = np.einsum("...kij,...i,...j->...k",
                            conn.gamma, X.samples, Y.samples)
    return VectorFieldGrid(header, directional + christoffel)


def lie_bracket(X: VectorFieldGrid, Y: VectorFieldGrid) -> VectorFieldGrid:
    """[X, Y]^k = X^i d_i Y^k - Y^i d_i X^k via the shared stencils."""
    header = _require_same_header(X, Y)
    dY = partials(Y)
    dX = partials(X)
    b = (np.einsum("...i,...ik->...k", X.samples, dY)
         - np.einsum("...i,...ik->...k", Y.samples, dX))
    return VectorFieldGrid(header, b)


def hantjies_tensor(X: VectorFieldGrid, Y: VectorFieldGrid,
                    conn: ConnectionField) -> Tensor2FieldGrid:
    """Antisymmetrized covariant derivative minus the bracket.

    Node-wise nabla_X Y - nabla_Y X - [X, Y]; the derivative stencils
    cancel exactly, leaving the torsion of the connection contracted with
    (X, Y), so a symmetric Gamma gives identically zero.
    """
    header = _require_same_header(X, Y, conn)
    a = covariant_derivative(X, Y, conn).samples
    b = covariant_derivative(Y, X, conn).samples
    c = lie_bracket(X, Y).samples
    return Tensor2FieldGrid(header, a - b - c)


def frobenius_residual(X: VectorFieldGrid, Y: VectorFieldGrid,
                       angle_tol: float = 1e-8):
    """Component of [X, Y] orthogonal to span{X, Y}, node by node.

    Returns (residual_field, max_over_interior).  The residual vanishes
    exactly where the plane field spanned by X and Y closes under the
    bracket.  Raises DegenerateDistribution when X and Y are nearly
    parallel at an interior node.
    """
    header = _require_same_header(X, Y)
    b = lie_bracket(X, Y).samples
    nx = np.linalg.norm(X.samples, axis=-1)
    ny = np.linalg.norm(Y.samples, axis=-1)
    cross = np.cross(X.samples, Y.samples)
    sin_angle = np.linalg.norm(cross, axis=-1) / np.maximum(nx * ny, 1e-300)
    inner = interior_mask(header.dims)
    if np.any(sin_angle[inner] <= angle_tol):
        raise DegenerateDistribution(
            "X and Y nearly parallel at an interior node")
    # in R^3 the complement of span{X, Y} is the line along X x Y
    chat = cross / np.maximum(
        np.linalg.norm(cross, axis=-1, keepdims=True), 1e-300)
    residual = np.abs(np.einsum("...k,...k->...", b, chat))
    return residual, float(residual[inner].max())


def curvature(conn: ConnectionField, X: VectorFieldGrid, Y: VectorFieldGrid,
              Z: VectorFieldGrid) -> VectorFieldGrid:
    """F(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z.

    Composes the discrete covariant derivative, so only nodes at depth 2
    from the boundary carry second-order-accurate values.
    """
    header = _require_same_header(X, Y, Z, conn)
    if any(d < 5 for d in header.dims):
        raise GridTooSmall(
            f"curvature needs >= 5 nodes per axis, got {header.dims}")
    nyz = covariant_derivative(Y, Z, conn)
    nxz = covariant_derivative(X, Z, conn)
    term1 = covariant_derivative(X, nyz, conn).samples
    term2 = covariant_derivative(Y, nxz, conn).samples
    term3 = covariant_derivative(lie_bracket(X, Y), Z, conn).samples
    return VectorFieldGrid(header, term1 - term2 - term3)


# ---------------------------------------------------------------------------
# involution-dual pair check


def _involution_index_map(header: GridHeader, other: GridHeader,
                          matrix: np.ndarray):
    """Per-node index arrays mapping node p of `header` to the node of
    `other` sitting at iota(p).  Raises HeaderMismatch when iota does not
    carry the node lattice onto the other lattice."""
    pos = header.node_positions()
    mapped = pos @ matrix.T
    f = (mapped - other.origin) / other.spacing
    idx = np.rint(f).astype(int)
    if np.max(np.abs(f - idx)) > 1e-6:
        raise HeaderMismatch("involution does not map nodes onto nodes")
    dims = np.asarray(other.dims)
    if np.any(idx < 0) or np.any(idx >= dims):
        raise HeaderMismatch("involution maps nodes outside the other grid")
    return idx[..., 0], idx[..., 1], idx[..., 2]


def duality_residual(conn1: ConnectionField, conn2: ConnectionField,
                     inv, probes) -> float:
    """Max deviation from the dual-pair curvature relation F1 = -iota* F2.

    `probes` is a triple (X, Y, Z) of fields on conn1's grid; they are
    pushed through the involution to evaluate F2, whose value is pulled
    back and added to F1.  Zero certifies the relation numerically.
    """
    X, Y, Z = probes
    h1 = _require_same_header(X, Y, Z, conn1)
    m = inv.matrix
    ix, iy, iz = _involution_index_map(h1, conn2.header, m)
    pushed = []
    for fld in (X, Y, Z):
        vals = np.zeros(conn2.header.dims + (3,))
        vals[ix, iy, iz] = fld.samples @ m.T
        pushed.append(VectorFieldGrid(conn2.header, vals))
    f1 = curvature(conn1, X, Y, Z).samples
    f2 = curvature(conn2, *pushed).samples
    pulled = f2[ix, iy, iz] @ m.T  # iota inverse = iota
    mism = np.linalg.norm(f1 + pulled, axis=-1)
    return float(mism[interior_mask(h1.dims, depth=2)].max())


# ---------------------------------------------------------------------------
# parallel transport


def _trilinear_gamma(conn: ConnectionField, p: np.ndarray) -> np.ndarray:
    """Trilinearly interpolated Christoffel array at world point p."""
    h = conn.header
    f = (p - h.origin) / h.spacing
    dims = np.asarray(h.dims)
    if np.any(f < -1e-9) or np.any(f > dims - 1 + 1e-9):
        raise PathOutsideGrid(f"point {p} outside grid")
    f = np.clip(f, 0.0, dims - 1)
    i0 = np.minimum(np.floor(f).astype(int), dims - 2)
    t = f - i0
    out = np.zeros((3, 3, 3))
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                wgt = ((t[0] if dx else 1 - t[0])
                       * (t[1] if dy else 1 - t[1])
                       * (t[2] if dz else 1 - t[2]))
                if wgt == 0.0:
                    continue
                out += wgt * conn.gamma[i0[0] + dx, i0[1] + dy, i0[2] + dz]
    return out


def parallel_transport(conn: ConnectionField, path, v0,
                       steps_per_spacing: int = 4) -> np.ndarray:
    """Transport v0 along a polyline with the classical 4th-order stepper.

    Integrates v' = -Gamma(gamma(t))(gamma'(t), v) with Gamma trilinearly
    interpolated; the step length never exceeds spacing / steps_per_spacing.
    """
    pts = np.asarray(path, dtype=float).reshape(-1, 3)
    if pts.shape[0] < 2:
        raise GridTooSmall("path needs at least 2 points")
    v = np.asarray(v0, dtype=float).reshape(3).copy()
    hmax = conn.header.spacing / steps_per_spacing

    def rhs(p, vel, vv):
        g = _trilinear_gamma(conn, p)
        return -np.einsum("kij,i,j->k", g, vel, vv)

    for a, b in zip(pts[:-1], pts[1:]):
        seg = b - a
        seg_len = float(np.linalg.norm(seg))
        if seg_len == 0.0:
            continue
        nsteps = max(1, int(np.ceil(seg_len / hmax)))
        dt = 1.0 / nsteps
        vel = seg  # gamma'(t) for t in [0, 1]
        for s in range(nsteps):
            t = s * dt
            p1 = a + t * seg
            p2 = a + (t + 0.5 * dt) * seg
            p3 = a + (t + dt) * seg
            k1 = rhs(p1, vel, v)
            k2 = rhs(p2, vel, v + 0.5 * dt * k1)
            k3 = rhs(p2, vel, v + 0.5 * dt * k2)
            k4 = rhs(p3, vel, v + dt * k3)
            v = v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


# ---------------------------------------------------------------------------
# aggregate verdict


def default_tolerance(spacing: float) -> float:
    """Verdict tolerance tied to the discretization error, >= 1e-6."""
    return max(1e-6, 10.0 * spacing * spacing)


def integrability_report(X: VectorFieldGrid, Y: VectorFieldGrid,
                         conn: ConnectionField,
                         tol: float | None = None) -> IntegrabilityReport:
    """Aggregate obstruction maxima over interior nodes into a verdict."""
    header = _require_same_header(X, Y, conn)
    if tol is None:
        tol = default_tolerance(header.spacing)
    hmax = hantjies_tensor(X, Y, conn).max_interior_norm()
    _, fmax = frobenius_residual(X, Y)
    inner = int(interior_mask(header.dims).sum())
    return IntegrabilityReport(
        max_hantjies_norm=hmax,
        max_frobenius_residual=fmax,
        integrable=bool(hmax <= tol and fmax <= tol),
        tolerance=float(tol),
        interior_node_count=inner)
