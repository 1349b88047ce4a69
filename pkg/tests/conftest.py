import numpy as np
import pytest

from pwesim.geometry import AntennaArray, RisUnit, WallPlane


def box_walls(size=(4.0, 4.0, 3.0), id_start=0):
    """Six walls of a closed axis-aligned box [0,sx]x[0,sy]x[0,sz]."""
    sx, sy, sz = size
    ex, ey, ez = np.eye(3)
    cx, cy, cz = sx / 2, sy / 2, sz / 2
    i = id_start
    return [
        WallPlane(id=i + 0, p0=(cx, cy, 0.0), n=ez, u_axis=ex, v_axis=ey,
                  u_extent=cx, v_extent=cy),
        WallPlane(id=i + 1, p0=(cx, cy, sz), n=ez, u_axis=ex, v_axis=ey,
                  u_extent=cx, v_extent=cy),
        WallPlane(id=i + 2, p0=(cx, 0.0, cz), n=ey, u_axis=ex, v_axis=ez,
                  u_extent=cx, v_extent=cz),
        WallPlane(id=i + 3, p0=(cx, sy, cz), n=ey, u_axis=ex, v_axis=ez,
                  u_extent=cx, v_extent=cz),
        WallPlane(id=i + 4, p0=(0.0, cy, cz), n=ex, u_axis=ey, v_axis=ez,
                  u_extent=cy, v_extent=cz),
        WallPlane(id=i + 5, p0=(sx, cy, cz), n=ex, u_axis=ey, v_axis=ez,
                  u_extent=cy, v_extent=cz),
    ]


def single_antenna_array(position, boresight=(0.0, 0.0, 1.0)):
    return AntennaArray(antennas=(np.asarray(position, dtype=float),),
                        rows=1, cols=1, spacing=0.1, boresight=boresight)


def ris_on_wall(rid, wall, u, v, side=0.2):
    center = wall.p0 + u * wall.u_axis + v * wall.v_axis
    return RisUnit(id=rid, wall_id=wall.id, center=center, normal=wall.n.copy(),
                   side=side)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
