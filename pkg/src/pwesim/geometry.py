"""3-D primitives for indoor ray geometry.

Vectors are plain numpy arrays of shape (3,), lengths in meters. Walls are
bounded rectangles described by a point, a unit normal and two in-plane unit
axes with half-extents. All predicates here are pure functions.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Tolerances shared across the geometry predicates.
EXTENT_SLACK = 1e-9      # inclusive slack for wall-membership tests, meters
PARALLEL_EPS = 1e-12     # |doa . n| below this counts as parallel
ENDPOINT_EPS = 1e-9      # segment intersections this close to an endpoint are ignored, meters
UNIT_TOL = 1e-9


class RisMode(Enum):
    DIFFUSION = "diffusion"
    BEAM_STEERING = "beam_steering"
    ABSORPTION = "absorption"


def unit(v):
    """Normalize v to unit length."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def is_unit(v, tol=UNIT_TOL):
    return abs(np.linalg.norm(v) - 1.0) <= tol


@dataclass(frozen=True)
class WallPlane:
    """Bounded rectangular wall: point p0, unit normal n, in-plane axes."""

    id: int
    p0: np.ndarray
    n: np.ndarray
    u_axis: np.ndarray
    v_axis: np.ndarray
    u_extent: float
    v_extent: float

    def __post_init__(self):
        object.__setattr__(self, "p0", np.asarray(self.p0, dtype=float))
        object.__setattr__(self, "n", np.asarray(self.n, dtype=float))
        object.__setattr__(self, "u_axis", np.asarray(self.u_axis, dtype=float))
        object.__setattr__(self, "v_axis", np.asarray(self.v_axis, dtype=float))
        if self.u_extent <= 0 or self.v_extent <= 0:
            raise ValueError("wall extents must be positive")
        for a, b in ((self.n, self.u_axis), (self.n, self.v_axis), (self.u_axis, self.v_axis)):
            if abs(float(np.dot(a, b))) > 1e-9:
                raise ValueError("wall frame must be orthonormal")
        for a in (self.n, self.u_axis, self.v_axis):
            if not is_unit(a):
                raise ValueError("wall frame vectors must be unit length")

    def local_uv(self, p):
        """In-plane coordinates of p relative to the wall center."""
        d = np.asarray(p, dtype=float) - self.p0
        return float(np.dot(d, self.u_axis)), float(np.dot(d, self.v_axis))

    def contains(self, p, slack=EXTENT_SLACK):
        u, v = self.local_uv(p)
        return abs(u) <= self.u_extent + slack and abs(v) <= self.v_extent + slack


@dataclass(frozen=True)
class Aperture:
    """Axis-aligned rectangular opening (doorway) in a wall, in wall uv coords."""

    wall_id: int
    u_center: float
    v_center: float
    u_half: float
    v_half: float

    def contains_uv(self, u, v, slack=EXTENT_SLACK):
        return (abs(u - self.u_center) <= self.u_half + slack
                and abs(v - self.v_center) <= self.v_half + slack)

    def overlaps_uv_rect(self, u_lo, u_hi, v_lo, v_hi):
        """Open-interval overlap test against a uv-aligned rectangle."""
        return (u_lo < self.u_center + self.u_half and u_hi > self.u_center - self.u_half
                and v_lo < self.v_center + self.v_half and v_hi > self.v_center - self.v_half)


@dataclass
class RisUnit:
    """Square RIS tile of side `side` centered on a host wall."""

    id: int
    wall_id: int
    center: np.ndarray
    normal: np.ndarray
    side: float
    mode: RisMode = RisMode.ABSORPTION

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.normal = np.asarray(self.normal, dtype=float)
        if self.side <= 0:
            raise ValueError("RIS side must be positive")


@dataclass(frozen=True)
class AntennaArray:
    """Planar rows x cols receiver array; `antennas` ordered row-major."""

    antennas: tuple
    rows: int
    cols: int
    spacing: float
    boresight: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "antennas",
                           tuple(np.asarray(a, dtype=float) for a in self.antennas))
        object.__setattr__(self, "boresight", unit(self.boresight))
        if len(self.antennas) != self.rows * self.cols:
            raise ValueError("antenna count must equal rows*cols")

    @property
    def m(self):
        return self.rows * self.cols


def ray_wall_scale(ant, doa, wall):
    """Scaling factor d of the ray ant + d*doa at the wall plane.

    Returns None when the ray is parallel to the plane or the intersection
    lies behind the antenna (d <= 0).
    """
    denom = float(np.dot(doa, wall.n))
    if abs(denom) < PARALLEL_EPS:
        return None
    d = float(np.dot(wall.p0 - ant, wall.n)) / denom
    if d <= 0.0:
        return None
    return d


def ray_wall_point(ant, doa, walls, openings=()):
    """First wall (ascending id) containing the forward ray intersection.

    A hit inside a declared opening is not wall membership (a doorway is a
    hole, not wall), so the scan moves on and the ray effectively continues
    into the next room. Returns (point, wall_id) or None when no wall
    contains a hit.
    """
    for wall in sorted(walls, key=lambda w: w.id):
        d = ray_wall_scale(ant, doa, wall)
        if d is None:
            continue
        p = np.asarray(ant, dtype=float) + d * np.asarray(doa, dtype=float)
        if not wall.contains(p):
            continue
        u, v = wall.local_uv(p)
        if any(op.wall_id == wall.id and op.contains_uv(u, v) for op in openings):
            continue
        return p, wall.id
    return None


def segment_clear(a, b, walls, openings=()):
    """True iff the open segment (a, b) is not blocked by any wall rectangle.

    A crossing inside a declared opening on that wall does not block;
    crossings within ENDPOINT_EPS of either endpoint are ignored (an RIS
    sits on its own wall).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    length = float(np.linalg.norm(ab))
    if length == 0.0:
        raise ValueError("segment endpoints must differ")
    for wall in walls:
        denom = float(np.dot(ab, wall.n))
        if abs(denom) < PARALLEL_EPS:
            continue
        t = float(np.dot(wall.p0 - a, wall.n)) / denom
        if t * length < ENDPOINT_EPS or (1.0 - t) * length < ENDPOINT_EPS:
            continue
        p = a + t * ab
        if not wall.contains(p):
            continue
        u, v = wall.local_uv(p)
        if any(op.wall_id == wall.id and op.contains_uv(u, v) for op in openings):
            continue
        return False
    return True


def segments_clear_batch(a, bs, walls, openings=()):
    """Vectorized segment_clear for one origin against many endpoints.

    a: (3,) origin; bs: (N, 3) endpoints. Returns a bool array of length N.
    """
    a = np.asarray(a, dtype=float)
    bs = np.asarray(bs, dtype=float)
    if bs.size == 0:
        return np.zeros(0, dtype=bool)
    ab = bs - a                                  # (N, 3)
    lengths = np.linalg.norm(ab, axis=1)
    clear = np.ones(len(bs), dtype=bool)
    for wall in walls:
        denom = ab @ wall.n                      # (N,)
        crossing = np.abs(denom) >= PARALLEL_EPS
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(crossing, ((wall.p0 - a) @ wall.n) / np.where(crossing, denom, 1.0), 0.0)
        interior = crossing & (t * lengths >= ENDPOINT_EPS) & ((1.0 - t) * lengths >= ENDPOINT_EPS)
        if not interior.any():
            continue
        p = a + t[:, None] * ab                  # (N, 3)
        du = (p - wall.p0) @ wall.u_axis
        dv = (p - wall.p0) @ wall.v_axis
        on_wall = interior & (np.abs(du) <= wall.u_extent + EXTENT_SLACK) \
                           & (np.abs(dv) <= wall.v_extent + EXTENT_SLACK)
        for op in openings:
            if op.wall_id != wall.id:
                continue
            in_open = (np.abs(du - op.u_center) <= op.u_half + EXTENT_SLACK) \
                    & (np.abs(dv - op.v_center) <= op.v_half + EXTENT_SLACK)
            on_wall &= ~in_open
        clear &= ~on_wall
    return clear


def tile_wall(wall, d_r, margin=0.0, openings=(), id_start=0):
    """Maximal regular grid of d_r x d_r RIS units centered on the wall.

    Units keep >= margin to the wall edges and skip cells overlapping any
    opening declared on this wall. Ids ascend row-major (v outer, u inner).
    Returns [] when the wall cannot host a single unit.
    """
    if d_r <= 0:
        raise ValueError("d_r must be positive")
    if margin < 0:
        raise ValueError("margin must be non-negative")
    usable_u = 2.0 * wall.u_extent - 2.0 * margin
    usable_v = 2.0 * wall.v_extent - 2.0 * margin
    n_u = int(np.floor(usable_u / d_r + 1e-12))
    n_v = int(np.floor(usable_v / d_r + 1e-12))
    if n_u < 1 or n_v < 1:
        return []
    # center the grid inside the usable area
    grid_w = n_u * d_r
    grid_h = n_v * d_r
    u0 = -grid_w / 2.0
    v0 = -grid_h / 2.0
    wall_openings = [op for op in openings if op.wall_id == wall.id]
    units = []
    next_id = id_start
    for iv in range(n_v):
        for iu in range(n_u):
            u_lo = u0 + iu * d_r
            v_lo = v0 + iv * d_r
            if any(op.overlaps_uv_rect(u_lo, u_lo + d_r, v_lo, v_lo + d_r)
                   for op in wall_openings):
                continue
            uc = u_lo + d_r / 2.0
            vc = v_lo + d_r / 2.0
            center = wall.p0 + uc * wall.u_axis + vc * wall.v_axis
            units.append(RisUnit(id=next_id, wall_id=wall.id, center=center,
                                 normal=wall.n.copy(), side=d_r))
            next_id += 1
    return units
