import os
import random
import sys

import hypothesis
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from xmapf.core import first_collision  # noqa: E402
from xmapf.world import GridWorld  # noqa: E402

hypothesis.settings.register_profile("ci", deadline=None, max_examples=100)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

# acceptance verdicts, filled in by test_acceptance and printed at the end
VERDICTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[n])


def random_walk(world, rng, length, start=None):
    v = start if start is not None else rng.choice(world.cells)
    out = [v]
    for _ in range(length - 1):
        v = rng.choice(world.neighbors(v))
        out.append(v)
    return out


def random_plan(world, rng, n_agents, max_len, collision_free=True, tries=1000):
    """Independent random walks, resampled until collision-free if asked."""
    for _ in range(tries):
        starts = rng.sample(world.cells, n_agents)
        paths = [random_walk(world, rng, rng.randint(1, max_len), s) for s in starts]
        if not collision_free or first_collision(paths) is None:
            return paths
    raise RuntimeError("could not sample a collision-free plan")


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def grid5():
    return GridWorld(5, 5)
