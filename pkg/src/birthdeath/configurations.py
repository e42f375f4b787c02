"""Finite point configurations and the bottleneck matching metric.

A configuration is a finite set of pairwise distinct points in R^d.
Points are plain tuples of floats, and a configuration keeps them in
lexicographic order, so two configurations holding the same point set
compare equal, hash equal, and serialize identically.  The distance
between two configurations of the same size is the bottleneck matching
cost: the smallest achievable worst-case displacement over all pairings
of the two point sets.  Configurations of different sizes are
infinitely far apart, and metric balls therefore never cross between
cardinality layers.
"""

from __future__ import annotations

import math
from bisect import insort
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

Point = tuple[float, ...]

__all__ = [
    "Point",
    "Configuration",
    "RhoBall",
    "as_point",
    "euclidean",
    "distance_rho",
    "in_ball",
    "sym_project",
    "symmetric_difference_size",
    "unit_ball_volume",
]


def as_point(coords: Iterable[float]) -> Point:
    """Coerce ``coords`` into a point, a tuple of finite floats."""
    point = tuple(float(c) for c in coords)
    if not point:
        raise ValueError("a point needs at least one coordinate")
    for c in point:
        if not math.isfinite(c):
            raise ValueError(f"point has a non-finite coordinate: {point!r}")
    return point


def euclidean(x: Sequence[float], y: Sequence[float]) -> float:
    """Euclidean distance between two points."""
    return math.dist(x, y)


class Configuration:
    """An unordered finite set of distinct points in R^d.

    Distinctness means exact coordinate equality, so ``(0.0, 1.0)`` and
    ``(0.0, 1.0 + 1e-16)`` count as different points.  All points of a
    nonempty configuration must share one dimension.  Instances are
    immutable; the mutating-sounding methods return new configurations.
    """

    __slots__ = ("_points", "_hash")

    def __init__(self, points: Iterable[Iterable[float]] = ()):
        pts = sorted(as_point(p) for p in points)
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise ValueError(f"configuration points must be distinct, got {a!r} twice")
            if len(a) != len(b):
                raise ValueError("all points of a configuration must share one dimension")
        self._points = tuple(pts)
        self._hash: int | None = None

    @classmethod
    def _wrap(cls, sorted_points: tuple[Point, ...]) -> "Configuration":
        # Trusted fast path for internal callers that already hold a
        # sorted tuple of valid distinct points.
        cfg = object.__new__(cls)
        cfg._points = sorted_points
        cfg._hash = None
        return cfg

    @classmethod
    def from_coord_lists(cls, coord_lists: Iterable[Iterable[float]]) -> "Configuration":
        """Build a configuration from a list of coordinate lists."""
        return cls(coord_lists)

    def to_coord_lists(self) -> list[list[float]]:
        """Serialize as a plain list of coordinate lists (canonical order)."""
        return [list(p) for p in self._points]

    @property
    def points(self) -> tuple[Point, ...]:
        return self._points

    @property
    def size(self) -> int:
        return len(self._points)

    @property
    def dimension(self) -> int | None:
        """Dimension of the ambient space, or None for the empty configuration."""
        return len(self._points[0]) if self._points else None

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self._points)

    def __contains__(self, point: object) -> bool:
        try:
            return tuple(point) in self._points  # type: ignore[arg-type]
        except TypeError:
            return False

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Configuration):
            return self._points == other._points
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._points)
        return self._hash

    def __repr__(self) -> str:
        return f"Configuration({list(self._points)!r})"

    def with_point(self, point: Iterable[float]) -> "Configuration":
        """Return a copy with ``point`` added.

        Raises ValueError if the point is already present or its
        dimension disagrees.
        """
        pt = as_point(point)
        if self._points:
            if len(pt) != len(self._points[0]):
                raise ValueError("added point has a different dimension")
            if pt in self._points:
                raise ValueError(f"point {pt!r} is already present")
        pts = list(self._points)
        insort(pts, pt)
        return Configuration._wrap(tuple(pts))

    def without_point(self, point: Iterable[float]) -> "Configuration":
        """Return a copy with ``point`` removed; the point must be present."""
        pt = tuple(float(c) for c in point)
        try:
            idx = self._points.index(pt)
        except ValueError:
            raise ValueError(f"point {pt!r} is not in the configuration") from None
        return self.without_index(idx)

    def without_index(self, index: int) -> "Configuration":
        """Return a copy with the point at ``index`` (canonical order) removed."""
        pts = self._points
        if not 0 <= index < len(pts):
            raise IndexError(index)
        return Configuration._wrap(pts[:index] + pts[index + 1:])


EMPTY = Configuration()


@dataclass(frozen=True)
class RhoBall:
    """Closed bottleneck-metric ball around a nonempty configuration.

    Membership is restricted to configurations of the same cardinality
    as the center; see :func:`in_ball`.
    """

    center: Configuration
    radius: float

    def __post_init__(self) -> None:
        if not isinstance(self.center, Configuration):
            raise TypeError("center must be a Configuration")
        if len(self.center) == 0:
            raise ValueError("ball center must be a nonempty configuration")
        radius = float(self.radius)
        if not (math.isfinite(radius) and radius > 0):
            raise ValueError("ball radius must be positive and finite")
        object.__setattr__(self, "radius", radius)

    @property
    def layer(self) -> int:
        return len(self.center)

    def contains(self, candidate: Configuration) -> bool:
        return in_ball(candidate, self)


def _perfect_matching_exists(dist: list[list[float]], threshold: float) -> bool:
    """Whether the bipartite graph of pairs with distance <= threshold
    admits a perfect matching (classic augmenting-path search)."""
    n = len(dist)
    adj: list[list[int]] = []
    for row in dist:
        nbrs = [j for j in range(n) if row[j] <= threshold]
        if not nbrs:
            return False
        adj.append(nbrs)
    match_of = [-1] * n

    def augment(i: int, seen: list[bool]) -> bool:
        for j in adj[i]:
            if not seen[j]:
                seen[j] = True
                if match_of[j] < 0 or augment(match_of[j], seen):
                    match_of[j] = i
                    return True
        return False

    for i in range(n):
        if not augment(i, [False] * n):
            return False
    return True


def _check_same_dimension(first: Configuration, second: Configuration) -> None:
    if first.dimension != second.dimension:
        raise ValueError(
            f"configurations live in different spaces "
            f"(dimensions {first.dimension} and {second.dimension})"
        )


def distance_rho(first: Configuration, second: Configuration) -> float:
    """Bottleneck matching distance between two configurations.

    The distance is the minimum over all pairings of the two point sets
    of the largest single-point displacement.  It is computed exactly:
    the optimum is one of the pairwise Euclidean distances, found by a
    threshold binary search with a perfect-matching feasibility test.

    Configurations of different sizes are at distance ``inf``; two empty
    configurations are at distance ``0.0``.
    """
    n = len(first)
    if n != len(second):
        return math.inf
    if n == 0:
        return 0.0
    _check_same_dimension(first, second)
    a = first.points
    b = second.points
    if n == 1:
        return euclidean(a[0], b[0])
    dist = [[euclidean(x, y) for y in b] for x in a]
    if n == 2:
        return min(max(dist[0][0], dist[1][1]), max(dist[0][1], dist[1][0]))
    candidates = sorted({v for row in dist for v in row})
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_exists(dist, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return candidates[lo]


def in_ball(candidate: Configuration, ball: RhoBall) -> bool:
    """Whether ``candidate`` lies in the closed bottleneck ball.

    Equivalent to ``distance_rho(candidate, ball.center) <= ball.radius``
    but decided with a single matching feasibility test at the radius.
    A candidate of a different cardinality is never a member.
    """
    center = ball.center
    n = len(center)
    if len(candidate) != n:
        return False
    _check_same_dimension(candidate, center)
    a = candidate.points
    b = center.points
    if n == 1:
        return euclidean(a[0], b[0]) <= ball.radius
    dist = [[euclidean(x, y) for y in b] for x in a]
    return _perfect_matching_exists(dist, ball.radius)


def sym_project(points: Sequence[Iterable[float]]) -> Configuration:
    """Order-forgetting projection of an ordered tuple of points.

    Maps an ordered tuple with pairwise distinct entries to the
    configuration holding the same points.  Tuples with repeated points
    are outside the domain and raise ValueError.
    """
    return Configuration(points)


def symmetric_difference_size(first: Configuration, second: Configuration) -> int:
    """Number of points in exactly one of the two configurations."""
    if len(first) and len(second):
        _check_same_dimension(first, second)
    return len(set(first.points) ^ set(second.points))


def unit_ball_volume(dimension: int) -> float:
    """Volume of the unit Euclidean ball in R^d.

    Examples: 2.0 in d=1, pi in d=2, 4*pi/3 in d=3.
    """
    d = int(dimension)
    if d < 1:
        raise ValueError("dimension must be a positive integer")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)
