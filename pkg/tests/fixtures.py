"""Hand-built plans and instances shared by several test modules."""
import os

from xmapf.world import GridWorld, Instance, parse_map, parse_scenario

DATA = os.path.join(os.path.dirname(__file__), os.pardir, "data")

# Three agents on an open 5x5 grid. Red crosses row 2, blue walks down
# column 2 after red has passed, green waits and then crosses blue's column
# after blue has finished. Minimal decomposition: [0,3) [3,6) [6,9).
THREE_SEGMENT_PLAN = [
    [(0, 2), (1, 2), (2, 2), (3, 2), (4, 2)],
    [(2, 0), (2, 1), (2, 1), (2, 2), (2, 3), (2, 4)],
    [(4, 4), (4, 4), (4, 4), (4, 4), (4, 4), (3, 4), (2, 4), (1, 4), (0, 4)],
]
THREE_SEGMENT_BREAKPOINTS = (0, 3, 6, 9)

# Blue crosses row 1; red comes up column 1 and reaches blue's time-1 cell
# at time 3, which forces a second segment.
TWO_SEGMENT_PLAN = [
    [(0, 1), (1, 1), (2, 1), (3, 1)],
    [(1, 3), (1, 3), (1, 2), (1, 1), (1, 0)],
]

# 3x3 open grid, two agents crossing diagonally. The optimal index is 2,
# and the shortest plan CBS returns has index 3.
DIAGONAL_PAIRS = [((2, 0), (0, 2)), ((0, 0), (2, 2))]


def diagonal_instance():
    return Instance.from_pairs(GridWorld(3, 3), DIAGONAL_PAIRS)


def road_crossing():
    with open(os.path.join(DATA, "road_crossing.map")) as fh:
        world = parse_map(fh.read())
    with open(os.path.join(DATA, "road_crossing.scen")) as fh:
        return parse_scenario(fh.read(), world, 4)
