import numpy as np
import pytest

from mapalign.raster import FREE, OCCUPIED, UNKNOWN, OccupancyGrid
from mapalign.synthetic import save_pgm


@pytest.fixture
def write_pgm(tmp_path):
    def _write(image: np.ndarray, name: str = "map.pgm"):
        path = tmp_path / name
        save_pgm(np.asarray(image, dtype=np.uint8), path)
        return path

    return _write


def grid_from_gray(gray: np.ndarray, threshold: int = 100) -> OccupancyGrid:
    gray = np.asarray(gray, dtype=np.uint8)
    cells = np.full(gray.shape, UNKNOWN, dtype=np.uint8)
    cells[gray < threshold] = OCCUPIED
    cells[gray > 255 - threshold] = FREE
    return OccupancyGrid(cells=cells)


def random_convex_polygon(rng: np.random.Generator, n: int = 8, radius: float = 10.0, center=(0.0, 0.0)):
    """Random convex polygon as the hull of n random points (CCW)."""
    from mapalign.geometry import convex_hull

    while True:
        pts = center + rng.uniform(-radius, radius, size=(n, 2))
        hull = convex_hull(pts)
        if len(hull) >= 3:
            return hull
