"""Coordinate charts: named coordinates, a sampling box and a domain test.

A chart is the ambient bookkeeping for every field and form in the package.
Charts never store transition maps; each verification runs inside a single
fixed chart and global statements are only ever probed through explicitly
constructed maps between charts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ChartMismatchError, DomainError


@dataclass(frozen=True)
class Chart:
    """An open box (with optional predicate) carrying named coordinates.

    ``box`` bounds are only a sampling region; ``predicate`` (batched:
    receives one array per coordinate, returns a boolean array) is the actual
    domain test.  A chart with no predicate accepts every point.
    """

    name: str
    coords: tuple[str, ...]
    box: tuple[tuple[float, float], ...] = field(default=())
    predicate: Callable | None = None

    def __post_init__(self):
        if not self.box:
            object.__setattr__(self, "box", tuple((-1.5, 1.5) for _ in self.coords))
        if len(self.box) != len(self.coords):
            raise ValueError("box must give one (lo, hi) pair per coordinate")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, name: str) -> int:
        try:
            return self.coords.index(name)
        except ValueError:
            raise KeyError(f"chart {self.name!r} has no coordinate {name!r}") from None

    def contains(self, point: Sequence[float]) -> bool:
        if self.predicate is None:
            return True
        cols = [np.asarray([float(c)]) for c in point]
        return bool(np.asarray(self.predicate(cols)).ravel()[0])

    def require(self, point: Sequence[float]) -> None:
        if not self.contains(point):
            raise DomainError(f"point {tuple(point)} is outside the domain of chart {self.name!r}")

    def sample(self, n: int, seed: int = 0, max_tries: int = 200) -> np.ndarray:
        """Deterministic rejection sampling of ``n`` points, shape (n, dim)."""
        rng = np.random.default_rng(seed)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        out = []
        have = 0
        for _ in range(max_tries):
            chunk = rng.uniform(lo, hi, size=(max(4 * n, 16), self.dim))
            if self.predicate is not None:
                mask = np.asarray(self.predicate([chunk[:, i] for i in range(self.dim)]))
                chunk = chunk[mask]
            out.append(chunk)
            have += len(chunk)
            if have >= n:
                break
        pts = np.concatenate(out, axis=0)
        if len(pts) < n:
            raise DomainError(
                f"could not draw {n} points inside chart {self.name!r}; "
                f"domain appears too thin inside the sampling box"
            )
        return pts[:n]

    def sample_vectors(self, n: int, seed: int = 0) -> np.ndarray:
        """Deterministic tangent vectors (standard normal), shape (n, dim)."""
        rng = np.random.default_rng(seed + 0x9E37)
        return rng.standard_normal((n, self.dim))


def same_chart(a: Chart, b: Chart) -> bool:
    return a is b or (a.name == b.name and a.coords == b.coords)


def check_same_chart(a: Chart, b: Chart, what: str = "operands") -> None:
    if not same_chart(a, b):
        raise ChartMismatchError(f"{what} live on different charts: {a.name!r} vs {b.name!r}")


def columns(points: np.ndarray) -> list[np.ndarray]:
    """Split an (n, dim) array of points into per-coordinate columns."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    return [pts[:, i] for i in range(pts.shape[1])]
