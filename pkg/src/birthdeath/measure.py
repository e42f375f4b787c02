"""The layered reference measure on finite configurations.

The measure weighs the layer of n-point configurations by the n-fold
product Lebesgue measure of ordered tuples divided by n!, and gives the
single empty configuration unit mass.  Summed over all layers it is an
infinite measure, so nothing here tries to sample from it directly.
Bounded sets are evaluated exactly where the geometry allows
(:func:`lp_measure_exact`) and by Monte Carlo otherwise
(:func:`lp_measure_estimate`).  The Poisson point process restricted to
a bounded window acts as the normalized companion distribution and is
what :func:`sample_poisson_config` draws from.

Consistency with the ordered-tuple picture: for a purely symmetric set
``A`` on layer n, the ordered-tuple Lebesgue measure of its preimage
under the order-forgetting projection equals ``n!`` times the value
returned here.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .configurations import (
    EMPTY,
    Configuration,
    Point,
    RhoBall,
    as_point,
    euclidean,
    in_ball,
    unit_ball_volume,
)

__all__ = [
    "BoxRegion",
    "BallRegion",
    "EmptySingleton",
    "AllInRegion",
    "ProductOfDisjointBoxes",
    "BallSet",
    "LayerSet",
    "MeasureEstimate",
    "UnsupportedExactEvaluation",
    "lp_measure_exact",
    "lp_measure_estimate",
    "sample_poisson_config",
    "sample_in_ball",
]


@dataclass(frozen=True)
class BoxRegion:
    """Axis-aligned box with positive volume."""

    lower: Point
    upper: Point

    def __post_init__(self) -> None:
        lower = as_point(self.lower)
        upper = as_point(self.upper)
        if len(lower) != len(upper):
            raise ValueError("box corners must share one dimension")
        if not all(lo < up for lo, up in zip(lower, upper)):
            raise ValueError("box needs lower < upper on every axis")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return math.prod(up - lo for lo, up in zip(self.lower, self.upper))

    def contains(self, point: Sequence[float]) -> bool:
        return all(lo <= c <= up for lo, c, up in zip(self.lower, point, self.upper))

    def sample(self, rng: np.random.Generator) -> Point:
        return tuple(float(c) for c in rng.uniform(self.lower, self.upper))


@dataclass(frozen=True)
class BallRegion:
    """Closed Euclidean ball used as an integration or sampling region."""

    center: Point
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", as_point(self.center))
        radius = float(self.radius)
        if not (math.isfinite(radius) and radius > 0):
            raise ValueError("ball radius must be positive and finite")
        object.__setattr__(self, "radius", radius)

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.dimension) * self.radius ** self.dimension

    def contains(self, point: Sequence[float]) -> bool:
        return euclidean(self.center, point) <= self.radius

    def sample(self, rng: np.random.Generator) -> Point:
        return sample_in_ball(self.center, self.radius, rng)


def sample_in_ball(center: Sequence[float], radius: float, rng: np.random.Generator) -> Point:
    """Draw a uniform point in the closed Euclidean ball."""
    d = len(center)
    if d == 1:
        return (float(center[0] + radius * (2.0 * rng.random() - 1.0)),)
    while True:
        direction = rng.standard_normal(d)
        norm = math.sqrt(float(direction @ direction))
        if norm > 0.0:
            break
    scale = radius * rng.random() ** (1.0 / d) / norm
    return tuple(float(c + scale * v) for c, v in zip(center, direction))


# --- layer sets -------------------------------------------------------


@dataclass(frozen=True)
class EmptySingleton:
    """The one-member set holding only the empty configuration."""


@dataclass(frozen=True)
class AllInRegion:
    """All configurations of the layer's size with every point in ``region``."""

    region: BoxRegion


@dataclass(frozen=True)
class ProductOfDisjointBoxes:
    """Configurations with exactly one point in each of n disjoint boxes."""

    boxes: tuple[BoxRegion, ...]

    def __post_init__(self) -> None:
        boxes = tuple(self.boxes)
        if not boxes:
            raise ValueError("need at least one box")
        dim = boxes[0].dimension
        for box in boxes:
            if box.dimension != dim:
                raise ValueError("all boxes must share one dimension")
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                if _boxes_overlap(boxes[i], boxes[j]):
                    raise ValueError(f"boxes {i} and {j} overlap with positive volume")
        object.__setattr__(self, "boxes", boxes)


def _boxes_overlap(a: BoxRegion, b: BoxRegion) -> bool:
    return all(
        min(ua, ub) - max(la, lb) > 0
        for la, ua, lb, ub in zip(a.lower, a.upper, b.lower, b.upper)
    )


@dataclass(frozen=True)
class BallSet:
    """A bottleneck-metric ball viewed as a subset of its layer."""

    ball: RhoBall


Shape = EmptySingleton | AllInRegion | ProductOfDisjointBoxes | BallSet


@dataclass(frozen=True)
class LayerSet:
    """A measurable set of configurations confined to one cardinality layer."""

    layer: int
    shape: Shape

    def __post_init__(self) -> None:
        layer = int(self.layer)
        if layer < 0:
            raise ValueError("layer must be a nonnegative integer")
        object.__setattr__(self, "layer", layer)
        shape = self.shape
        if isinstance(shape, EmptySingleton):
            if layer != 0:
                raise ValueError("the empty-configuration singleton sits on layer 0")
        elif isinstance(shape, ProductOfDisjointBoxes):
            if len(shape.boxes) != layer:
                raise ValueError("product shape needs exactly one box per layer point")
        elif isinstance(shape, BallSet):
            if shape.ball.layer != layer:
                raise ValueError("ball center size must match the layer")
        elif not isinstance(shape, AllInRegion):
            raise TypeError(f"unsupported shape: {shape!r}")

    def contains(self, config: Configuration) -> bool:
        """Set membership for a concrete configuration."""
        if len(config) != self.layer:
            return False
        shape = self.shape
        if isinstance(shape, EmptySingleton):
            return True
        if isinstance(shape, AllInRegion):
            return all(shape.region.contains(p) for p in config)
        if isinstance(shape, ProductOfDisjointBoxes):
            hit = set()
            for p in config:
                for k, box in enumerate(shape.boxes):
                    if box.contains(p):
                        hit.add(k)
                        break
                else:
                    return False
            return len(hit) == self.layer
        return in_ball(config, shape.ball)


class UnsupportedExactEvaluation(Exception):
    """Raised when a layer set has no closed-form measure."""


def lp_measure_exact(layer_set: LayerSet) -> float:
    """Closed-form measure of a layer set.

    The empty singleton has measure 1.  A layer-n all-in-region set has
    measure ``vol(region)**n / n!``.  A product of n disjoint boxes has
    measure equal to the product of the box volumes.  Metric balls have
    no closed form here; use :func:`lp_measure_estimate` for those.
    """
    shape = layer_set.shape
    if isinstance(shape, EmptySingleton):
        return 1.0
    if isinstance(shape, AllInRegion):
        n = layer_set.layer
        return shape.region.volume ** n / math.factorial(n)
    if isinstance(shape, ProductOfDisjointBoxes):
        return math.prod(box.volume for box in shape.boxes)
    raise UnsupportedExactEvaluation(
        "metric balls have no closed-form measure; use lp_measure_estimate"
    )


@dataclass(frozen=True)
class MeasureEstimate:
    """Monte Carlo measure estimate with its standard error."""

    value: float
    std_error: float
    samples: int
    hits: int


def _estimate_block(
    layer: int,
    window: BoxRegion,
    predicate: Callable[[Configuration], bool],
    samples: int,
    seed_seq: np.random.SeedSequence,
) -> int:
    rng = np.random.default_rng(seed_seq)
    d = window.dimension
    hits = 0
    coords = rng.uniform(window.lower, window.upper, size=(samples, layer, d)).tolist()
    for rows in coords:
        pts = sorted(tuple(row) for row in rows)
        while any(a == b for a, b in zip(pts, pts[1:])):
            pts = sorted(
                tuple(map(float, row))
                for row in rng.uniform(window.lower, window.upper, size=(layer, d))
            )
        if predicate(Configuration._wrap(tuple(pts))):
            hits += 1
    return hits


def lp_measure_estimate(
    layer: int,
    window: BoxRegion,
    predicate: Callable[[Configuration], bool],
    samples: int,
    seed: int | np.random.SeedSequence | None = None,
    workers: int = 1,
) -> MeasureEstimate:
    """Monte Carlo estimate of the measure of a predicate-defined set.

    The target set is ``{config : |config| = layer, all points in
    window, predicate(config)}``.  The estimator draws ``samples``
    configurations of ``layer`` window-uniform points, scales the hit
    fraction by ``vol(window)**layer / layer!``, and reports the
    matching standard error.  Layer 0 is evaluated exactly.

    With ``workers > 1`` the draw is split into per-worker blocks with
    independently seeded streams; the result is deterministic for a
    fixed (seed, workers) pair.
    """
    layer = int(layer)
    if layer < 0:
        raise ValueError("layer must be nonnegative")
    if samples < 1:
        raise ValueError("need at least one sample")
    if layer == 0:
        hit = bool(predicate(EMPTY))
        return MeasureEstimate(1.0 if hit else 0.0, 0.0, samples, samples if hit else 0)
    scale = window.volume ** layer / math.factorial(layer)
    workers = max(1, int(workers))
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    if workers == 1:
        hits = _estimate_block(layer, window, predicate, samples, root)
    else:
        children = root.spawn(workers)
        base, extra = divmod(samples, workers)
        sizes = [base + (1 if k < extra else 0) for k in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_estimate_block, layer, window, predicate, size, child)
                for size, child in zip(sizes, children)
                if size > 0
            ]
            hits = sum(f.result() for f in futures)
    frac = hits / samples
    std_error = scale * math.sqrt(frac * (1.0 - frac) / samples)
    return MeasureEstimate(scale * frac, std_error, samples, hits)


def sample_poisson_config(
    intensity: float,
    window: BoxRegion,
    rng: np.random.Generator | np.random.SeedSequence | int | None = None,
) -> Configuration:
    """Draw one configuration from the Poisson point process on a window.

    The point count is Poisson with mean ``intensity * window.volume``
    and the points are independent uniforms in the window.  This is the
    normalized stand-in for the (infinite) reference measure when test
    states are needed.
    """
    if not intensity > 0:
        raise ValueError("intensity must be positive")
    rng = np.random.default_rng(rng)
    count = int(rng.poisson(intensity * window.volume))
    if count == 0:
        return EMPTY
    while True:
        rows = rng.uniform(window.lower, window.upper, size=(count, window.dimension))
        pts = [tuple(row) for row in rows.tolist()]
        if len(set(pts)) == count:
            return Configuration(pts)
