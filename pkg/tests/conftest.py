import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from meanpath.points import PointSet, Provenance, Region


@pytest.fixture
def unit_square_corners() -> PointSet:
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    return PointSet(2, coords, Region.cube(1.0, 2), Provenance("file", 4, 0, 0))


def make_points(coords, side: float | None = None, dim: int | None = None) -> PointSet:
    coords = np.asarray(coords, dtype=float)
    dim = dim or coords.shape[1]
    side = side or max(1.0, float(coords.max()) if coords.size else 1.0)
    return PointSet(dim, coords, Region.cube(side, dim), Provenance("file", len(coords), 0, 0))


def random_instance(seed: int, d: int = 2, n_min: int = 2, n_max: int = 9, side: float = 3.0):
    """Deterministic small instance for oracle comparisons."""
    from meanpath.points import sample_uniform, stream

    rng = stream(seed, 0, lane=7)
    n = int(rng.integers(n_min, n_max + 1))
    return sample_uniform(n, Region.cube(side, d), seed=seed, replicate=17)
