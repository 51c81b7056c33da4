"""Axis-aligned region geometry: overlap, area classification, centers.

Regions are (x, y, width, height) boxes with the origin at the top-left
corner, treated as closed real intervals on both axes. Two boxes that
merely touch along an edge have zero intersection area. All overlap
computations are exact area ratios, never pixel approximations.
"""

import math
from dataclasses import dataclass

from .errors import InvalidRegionError

__all__ = [
    "Region",
    "Point",
    "ClassificationScores",
    "validate_region",
    "overlap",
    "classify",
    "f_measure",
    "precision",
    "region_center",
    "region_size",
]


@dataclass(frozen=True)
class Point:
    """A 2-D point."""

    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))


@dataclass(frozen=True)
class Region:
    """Axis-aligned box: top-left corner plus non-negative extent.

    Construction only coerces to float; call validate_region to check
    finiteness and sign, so that data read from external trackers can be
    carried around and rejected with a frame index at the point of use.
    """

    x: float
    y: float
    width: float
    height: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "height", float(self.height))

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class ClassificationScores:
    """Per-frame area decomposition against the ground truth.

    tp is the area claimed by both prediction and ground truth, fp the
    predicted area outside the ground truth, fn the ground-truth area the
    prediction missed. All three are non-negative areas, not counts.
    """

    tp: float
    fp: float
    fn: float


def validate_region(r: Region, frame: int | None = None) -> None:
    """Raise InvalidRegionError if r is non-finite or has negative extent.

    Args:
        r: region to check.
        frame: optional 1-based frame number to include in the error.
    """
    for v in (r.x, r.y, r.width, r.height):
        if not math.isfinite(v):
            raise InvalidRegionError(f"non-finite region coordinate in {r}", frame)
    if r.width < 0 or r.height < 0:
        raise InvalidRegionError(f"negative region extent in {r}", frame)


def _intersection_area(a: Region, b: Region) -> float:
    iw = min(a.x + a.width, b.x + b.width) - max(a.x, b.x)
    if iw <= 0:
        return 0.0
    ih = min(a.y + a.height, b.y + b.height) - max(a.y, b.y)
    if ih <= 0:
        return 0.0
    return iw * ih


def overlap(gt: Region, pred: Region) -> float:
    """Intersection-over-union of two regions.

    Args:
        gt: ground-truth region.
        pred: predicted region.

    Returns:
        Area of intersection divided by area of union, in [0, 1]. When
        the union has zero area (both regions degenerate) the overlap is
        0 by convention.
    """
    validate_region(gt)
    validate_region(pred)
    if gt == pred:
        return 1.0 if gt.area > 0 else 0.0
    inter = _intersection_area(gt, pred)
    union = gt.area + pred.area - inter
    if union <= 0:
        return 0.0
    # (x+w)-x can exceed w by ulps, making inter overshoot the union for
    # nearly identical boxes; the clamp keeps the ratio in range.
    return min(1.0, inter / union)


def classify(gt: Region, pred: Region) -> ClassificationScores:
    """Decompose prediction vs ground truth into tp/fp/fn areas."""
    validate_region(gt)
    validate_region(pred)
    if gt == pred:
        # Same reason as overlap: (x+w)-x absorbs tiny extents, which
        # would misreport a perfect prediction as a miss.
        return ClassificationScores(tp=gt.area, fp=0.0, fn=0.0)
    inter = _intersection_area(gt, pred)
    return ClassificationScores(tp=inter, fp=pred.area - inter, fn=gt.area - inter)


def f_measure(s: ClassificationScores) -> float:
    """Balanced F-measure 2*tp / (2*tp + fn + fp); 0 when the denominator is 0."""
    denom = 2.0 * s.tp + s.fn + s.fp
    if denom <= 0:
        return 0.0
    return 2.0 * s.tp / denom


def precision(s: ClassificationScores) -> float:
    """Precision tp / (tp + fp); 0 when nothing was predicted."""
    denom = s.tp + s.fp
    if denom <= 0:
        return 0.0
    return s.tp / denom


def region_center(r: Region) -> Point:
    """Geometric center of a region."""
    return Point(r.x + r.width / 2.0, r.y + r.height / 2.0)


def region_size(r: Region) -> float:
    """Scalar region size: the side of the equal-area square, sqrt(w*h)."""
    return math.sqrt(r.width * r.height)
