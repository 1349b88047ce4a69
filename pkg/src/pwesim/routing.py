"""Per-antenna wavefront routing: wall-point tracing, nearest-RIS selection
with exclusivity, BFS route assembly and deviation angles.

Desired DoAs point from the antenna toward the incoming wave's source, so the
traced ray ant + d*doa runs outward along the reversed arrival direction. The
realized DoA is the unit vector from the antenna to the chosen RIS center,
which puts both vectors in the same convention and makes the collinear case
give exactly zero deviation.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import is_unit, ray_wall_point, unit
from .scene import bfs_shortest_path

NO_HIT = "no_hit"              # desired ray exits the wall model
NO_CANDIDATE = "no_candidate"  # no remaining RIS has LoS to the antenna
UNREACHABLE = "unreachable"    # BFS found no path from Tx to the chosen RIS


@dataclass(frozen=True)
class WavefrontSpec:
    """One desired unit DoA per receiver antenna, in antenna order."""

    doas: tuple

    def __post_init__(self):
        object.__setattr__(self, "doas",
                           tuple(np.asarray(d, dtype=float) for d in self.doas))
        for d in self.doas:
            if not is_unit(d, tol=1e-6):
                raise ValueError("desired DoAs must be unit vectors")


@dataclass(frozen=True)
class Route:
    antenna_index: int
    last_ris_id: int
    path: tuple           # vertex indices, Tx first, lastRIS last
    realized_doa: np.ndarray
    phi_deg: float


@dataclass(frozen=True)
class RouteSet:
    routes: tuple
    failures: tuple       # (antenna_index, reason) pairs


def deviation_angle(desired, realized):
    """Angle between two unit vectors, degrees in [0, 180]."""
    c = float(np.clip(np.dot(desired, realized), -1.0, 1.0))
    return float(np.degrees(np.arccos(c)))


def select_last_ris(point, candidates, antenna_index, graph):
    """Candidate RIS with LoS to the antenna that is nearest to `point`.

    Ties break toward the smallest RIS id. Returns None when no candidate
    has a graph edge to the antenna.
    """
    ant_v = graph.antenna_vertex(antenna_index)
    row = graph.row(ant_v)
    visible = [r for r in candidates if row[graph.ris_vertex(r.id)]]
    if not visible:
        return None
    return min(visible, key=lambda r: (float(np.linalg.norm(r.center - point)), r.id))


def get_routes(scene, graph, spec, path_cache=None):
    """Run the wavefront routing algorithm for every antenna in index order.

    Each antenna traces its desired ray to a wall point, claims the nearest
    LoS RIS (removed from the pool afterwards), and gets a minimum-hop
    Tx -> ... -> lastRIS path. Antenna vertices never appear as path hops.
    Per-antenna failures are recorded, never fatal.

    path_cache maps a lastRIS vertex to its path tuple; pass a dict shared
    across trials of one scene to avoid repeated BFS.
    """
    if len(spec.doas) != scene.rx.m:
        raise ValueError("spec length must match antenna count")
    units = sorted(scene.ris_units, key=lambda r: r.id)
    centers = np.array([r.center for r in units])
    used = np.zeros(len(units), dtype=bool)
    banned = set(graph.antenna_vertices)
    routes = []
    failures = []
    for i, ant in enumerate(scene.rx.antennas):
        doa = spec.doas[i]
        hit = ray_wall_point(ant, doa, scene.walls, scene.openings)
        if hit is None:
            failures.append((i, NO_HIT))
            continue
        point, _wall_id = hit
        # vectorized arg-min over the visible, still-unclaimed RIS; argmin's
        # first-hit rule is the smallest-id tie break since ids ascend
        visible = graph.row(graph.antenna_vertex(i))[1:1 + len(units)]
        d2 = np.einsum("ij,ij->i", centers - point, centers - point)
        d2 = np.where(visible & ~used, d2, np.inf)
        j = int(np.argmin(d2))
        if not np.isfinite(d2[j]):
            failures.append((i, NO_CANDIDATE))
            continue
        chosen = units[j]
        used[j] = True
        last_v = graph.ris_vertex(chosen.id)
        path = None if path_cache is None else path_cache.get(last_v)
        if path is None:
            found = bfs_shortest_path(graph, last_v, graph.tx_vertex, banned)
            if found is not None:
                found.reverse()        # store Tx first
                path = tuple(found)
                if path_cache is not None:
                    path_cache[last_v] = path
        if path is None:
            failures.append((i, UNREACHABLE))
            continue
        realized = unit(chosen.center - ant)
        routes.append(Route(antenna_index=i, last_ris_id=chosen.id, path=path,
                            realized_doa=realized,
                            phi_deg=deviation_angle(doa, realized)))
    return RouteSet(routes=tuple(routes), failures=tuple(failures))
