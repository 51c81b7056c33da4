"""Per-sequence tracking performance measures.

The canonical vector holds 16 measures. Entries 1-9 score a trajectory
from a single initialization (center errors, threshold statistics,
average overlap, combined tracking performance); entries 10-16 score a
supervised run with reinitialization after each failure (the same
family plus the failure count). Lower-is-better entries are marked in
the registry so dataset-level analysis can align polarities.

Conventions, applied consistently:
  * thresholded correctness is strict: a frame counts only when
    overlap > tau;
  * in supervised series, Failure frames contribute overlap 0 and Init
    frames are excluded from every average;
  * center errors on supervised records use Tracked frames only
    (Failure frames carry no region, Init frames are excluded).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateAnnotationError,
    EmptySeriesError,
    FragmentationUndefinedError,
    LengthMismatchError,
    MeasureDomainError,
)
from .trajectory import (
    Failure,
    Init,
    SequenceAnnotation,
    SupervisedRunRecord,
    Tracked,
    Trajectory,
    center_error_series,
    overlap_series,
    validate_record,
)
from .geometry import overlap, region_center, region_size

__all__ = [
    "MeasureId",
    "MEASURES",
    "EXTRA_MEASURES",
    "measure_keys",
    "average_center_error",
    "rmse",
    "average_overlap",
    "correct_fraction",
    "tracking_length",
    "failure_rate",
    "fragmentation",
    "cotps_closed_form",
    "cotps_original",
    "auc",
    "threshold_curve",
    "motp_single",
    "mota_single",
    "average_f_measure",
    "average_precision",
    "reliability",
    "supervised_overlap_series",
    "supervised_center_error_series",
    "unsupervised_measures",
    "supervised_measures",
    "compute_all",
]


@dataclass(frozen=True)
class MeasureId:
    """Identity of a measure: list position (0 for extras), stable key,
    human label, polarity, and whether it needs a supervised record."""

    index: int
    key: str
    label: str
    higher_is_better: bool
    supervised: bool


MEASURES: tuple[MeasureId, ...] = (
    MeasureId(1, "avg_center_error", "average center error", False, False),
    MeasureId(2, "avg_norm_center_error", "average normalized center error", False, False),
    MeasureId(3, "rmse", "root-mean-square center error", False, False),
    MeasureId(4, "p_0.1", "fraction of frames with overlap > 0.1", True, False),
    MeasureId(5, "p_0.5", "fraction of frames with overlap > 0.5", True, False),
    MeasureId(6, "len_0.1", "tracking length at threshold 0.1", True, False),
    MeasureId(7, "len_0.5", "tracking length at threshold 0.5", True, False),
    MeasureId(8, "avg_overlap", "average overlap", True, False),
    MeasureId(9, "cotps", "combined tracking performance score", False, False),
    MeasureId(10, "sup_avg_center_error", "supervised average center error", False, True),
    MeasureId(11, "sup_avg_norm_center_error", "supervised average normalized center error", False, True),
    MeasureId(12, "sup_rmse", "supervised root-mean-square center error", False, True),
    MeasureId(13, "sup_p_0.1", "supervised fraction of frames with overlap > 0.1", True, True),
    MeasureId(14, "sup_p_0.5", "supervised fraction of frames with overlap > 0.5", True, True),
    MeasureId(15, "sup_avg_overlap", "supervised average overlap", True, True),
    MeasureId(16, "failures", "failure count", False, True),
)

EXTRA_MEASURES: dict[str, MeasureId] = {
    m.key: m
    for m in (
        MeasureId(0, "fragmentation", "failure fragmentation", False, True),
        MeasureId(0, "cotps_original", "combined score, threshold-sum form", False, False),
        MeasureId(0, "auc", "area under the threshold curve", True, False),
        MeasureId(0, "motp", "tracking precision, single-target reduction", True, False),
        MeasureId(0, "mota", "tracking accuracy, single-target reduction", True, False),
        MeasureId(0, "avg_f_measure", "average per-frame F-measure", True, False),
        MeasureId(0, "avg_precision", "average per-frame precision", True, False),
        MeasureId(0, "reliability", "reliability over a frame span", True, True),
    )
}


def measure_keys() -> list[str]:
    """Keys of the 16 canonical measures in list order."""
    return [m.key for m in MEASURES]


def _check_overlaps(phis) -> list[float]:
    phis = [float(p) for p in phis]
    if not phis:
        raise EmptySeriesError("empty overlap series")
    for i, p in enumerate(phis):
        if not (0.0 <= p <= 1.0):
            raise MeasureDomainError(f"overlap {p} at frame {i + 1} outside [0, 1]")
    return phis


def average_center_error(deltas) -> float:
    """Mean of a per-frame center-error series."""
    deltas = list(deltas)
    if not deltas:
        raise EmptySeriesError("empty center-error series")
    return math.fsum(deltas) / len(deltas)


def rmse(deltas) -> float:
    """Root of the mean squared center error."""
    deltas = list(deltas)
    if not deltas:
        raise EmptySeriesError("empty center-error series")
    return math.sqrt(math.fsum(d * d for d in deltas) / len(deltas))


def average_overlap(phis) -> float:
    """Mean per-frame overlap."""
    phis = _check_overlaps(phis)
    return math.fsum(phis) / len(phis)


def correct_fraction(phis, tau: float) -> float:
    """Fraction of frames with overlap strictly above tau."""
    phis = _check_overlaps(phis)
    hits = sum(1 for p in phis if p > tau)
    return hits / len(phis)


def tracking_length(phis, tau: float) -> int:
    """Number of leading frames with overlap strictly above tau."""
    phis = _check_overlaps(phis)
    n = 0
    for p in phis:
        if p > tau:
            n += 1
        else:
            break
    return n


def failure_rate(rec: SupervisedRunRecord) -> int:
    """Number of failures in a supervised run record."""
    validate_record(rec)
    return len(rec.failure_frames)


def fragmentation(failures, n: int) -> float:
    """Entropy-based spread of failures over the sequence.

    The sequence is treated circularly: with sorted failure frames
    f_1 < ... < f_F, the interval after f_i is f_{i+1} - f_i, and the
    interval after the last failure wraps to f_1 + n - f_F. The
    intervals sum to n; their normalized entropy (natural log, divided
    by log F) is 1 exactly when failures are equally spaced and falls
    toward 0 as they bunch up. Needs at least two failures.
    """
    failures = sorted(int(f) for f in failures)
    count = len(failures)
    if count < 2:
        raise FragmentationUndefinedError(
            f"fragmentation needs at least 2 failures, got {count}"
        )
    prev = 0
    for f in failures:
        if f < 1 or f > n:
            raise MeasureDomainError(f"failure frame {f} outside 1..{n}")
        if f == prev:
            raise MeasureDomainError(f"duplicate failure frame {f}")
        prev = f
    intervals = [failures[i + 1] - failures[i] for i in range(count - 1)]
    intervals.append(failures[0] + n - failures[-1])
    entropy = -math.fsum((d / n) * math.log(d / n) for d in intervals)
    return entropy / math.log(count)


def cotps_closed_form(phis) -> float:
    """Combined tracking performance score, closed form.

    1 - mean(phi) - (1 - lam0) * lam0 where lam0 is the fraction of
    frames with exactly zero overlap. 0 is ideal, 1 is the worst case.
    """
    phis = _check_overlaps(phis)
    n = len(phis)
    lam0 = sum(1 for p in phis if p == 0.0) / n
    return 1.0 - math.fsum(phis) / n - (1.0 - lam0) * lam0


def cotps_original(phis) -> float:
    """Combined tracking performance score, threshold-sum form.

    Weighs an accuracy term and the zero-overlap fraction:
    beta * Omega + (1 - beta) * lam0 with beta = 1 - lam0. Omega is the
    integral over tau in (0, 1] of the fraction of positive-overlap
    frames whose overlap is <= tau, evaluated exactly as a step-function
    integral over the sorted positive overlaps. Kept deliberately
    independent of cotps_closed_form; the two agree to rounding error.
    """
    phis = _check_overlaps(phis)
    n = len(phis)
    pos = np.sort(np.array([p for p in phis if p > 0.0], dtype=np.float64))
    m = pos.size
    lam0 = (n - m) / n
    if m == 0:
        return lam0
    # N(tau)/m is constant at k on [pos[k-1], pos[k]) and at m on [pos[-1], 1].
    uppers = np.append(pos[1:], 1.0)
    integral = float(np.dot(np.arange(1, m + 1, dtype=np.float64), uppers - pos))
    omega = integral / m
    beta = m / n
    return beta * omega + (1.0 - beta) * lam0


def auc(phis) -> float:
    """Area under the overlap-threshold curve.

    Integrates the fraction of frames with overlap at least tau over
    tau in [0, 1], evaluated exactly as a step-function integral over
    the sorted overlaps. Mathematically this equals the average
    overlap; the implementation keeps the integral construction so the
    identity stays an executable cross-check, not an assumption.
    """
    phis = _check_overlaps(phis)
    n = len(phis)
    s = np.sort(np.array(phis, dtype=np.float64))
    # On (s[i-1], s[i]) exactly n - i + 1 overlaps are >= tau.
    steps = np.diff(np.concatenate(([0.0], s)))
    weights = np.arange(n, 0, -1, dtype=np.float64)
    return float(np.dot(weights, steps)) / n


def threshold_curve(phis) -> list[tuple[float, float]]:
    """Exact step curve of the correct fraction as tau sweeps [0, 1].

    Returns polyline vertices (tau, fraction of frames with overlap
    strictly above tau), including the vertical drops, starting at
    tau=0 and ending at tau=1. The fraction is non-increasing in tau.
    """
    phis = _check_overlaps(phis)
    n = len(phis)
    points = [(0.0, sum(1 for p in phis if p > 0.0) / n)]
    for v in sorted(set(phis)):
        if v <= 0.0:
            continue
        level = sum(1 for p in phis if p > v) / n
        points.append((v, points[-1][1]))
        points.append((v, level))
    if points[-1][0] < 1.0:
        points.append((1.0, points[-1][1]))
    return points


def motp_single(phis) -> float:
    """Multiple-object tracking precision reduced to one target.

    Sum of per-frame overlaps divided by the number of frame-object
    matches, which for a single always-visible target is the frame
    count. Coincides exactly with average_overlap.
    """
    phis = _check_overlaps(phis)
    matches = sum(1 for _ in phis)
    return math.fsum(phis) / matches


def mota_single(phis, tau: float) -> float:
    """Multiple-object tracking accuracy reduced to one target.

    1 minus the miss ratio, where a frame is a miss when its overlap is
    at or below tau; there are no identity switches or extra false
    positives with a single target. Computed as (n - misses) / n so it
    coincides bit-exactly with correct_fraction at the same tau.
    """
    phis = _check_overlaps(phis)
    n = len(phis)
    misses = sum(1 for p in phis if p <= tau)
    return (n - misses) / n


def average_f_measure(a: SequenceAnnotation, t: Trajectory) -> float:
    """Mean per-frame F-measure of a trajectory against the annotation."""
    from .geometry import classify, f_measure
    from .trajectory import validate_pair

    validate_pair(a, t)
    return math.fsum(
        f_measure(classify(g, p)) for g, p in zip(a.regions, t.regions)
    ) / len(a)


def average_precision(a: SequenceAnnotation, t: Trajectory) -> float:
    """Mean per-frame precision of a trajectory against the annotation."""
    from .geometry import classify, precision
    from .trajectory import validate_pair

    validate_pair(a, t)
    return math.fsum(
        precision(classify(g, p)) for g, p in zip(a.regions, t.regions)
    ) / len(a)


def reliability(failure_count: float, n: int, span: float = 30.0) -> float:
    """Probability-style reliability exp(-span * failures / n).

    span is the frame horizon over which survival without intervention
    is scored; the ranking induced over trackers is the same for every
    positive span (it is monotone in failures / n alone).
    """
    if n < 1:
        raise MeasureDomainError(f"sequence length {n} must be at least 1")
    if failure_count < 0:
        raise MeasureDomainError(f"negative failure count {failure_count}")
    if span <= 0:
        raise MeasureDomainError(f"span {span} must be positive")
    return math.exp(-span * (failure_count / n))


def supervised_overlap_series(
    rec: SupervisedRunRecord, a: SequenceAnnotation
) -> list[float | None]:
    """Per-frame overlaps of a supervised run.

    Tracked frames score their region against the ground truth, Failure
    frames contribute 0.0, and Init frames are excluded (None) so that
    downstream averages skip them.
    """
    validate_record(rec)
    if len(rec) != len(a):
        raise LengthMismatchError(
            f"record has {len(rec)} frames, annotation {len(a)}"
        )
    out: list[float | None] = []
    for i, fr in enumerate(rec.frames):
        if isinstance(fr, Init):
            out.append(None)
        elif isinstance(fr, Failure):
            out.append(0.0)
        else:
            out.append(overlap(a.regions[i], fr.region))
    return out


def supervised_center_error_series(
    rec: SupervisedRunRecord, a: SequenceAnnotation, normalized: bool = False
) -> list[float | None]:
    """Per-frame center errors of a supervised run.

    Only Tracked frames carry a region to measure; Failure and Init
    frames are None. Normalization follows center_error_series.
    """
    validate_record(rec)
    if len(rec) != len(a):
        raise LengthMismatchError(
            f"record has {len(rec)} frames, annotation {len(a)}"
        )
    out: list[float | None] = []
    for i, fr in enumerate(rec.frames):
        if not isinstance(fr, Tracked):
            out.append(None)
            continue
        g = a.center(i)
        p = region_center(fr.region)
        d = ((g.x - p.x) ** 2 + (g.y - p.y) ** 2) ** 0.5
        if normalized:
            s = region_size(a.regions[i])
            if s <= 0:
                raise DegenerateAnnotationError(
                    "zero-size ground-truth region, normalized error undefined",
                    frame=i + 1,
                )
            d /= s
        out.append(d)
    return out


def _included(series) -> list[float]:
    return [v for v in series if v is not None]


def unsupervised_measures(a: SequenceAnnotation, t: Trajectory) -> list[float]:
    """Measures 1-9 from a single-initialization trajectory."""
    phis = overlap_series(a, t)
    deltas = center_error_series(a, t, normalized=False)
    norm_deltas = center_error_series(a, t, normalized=True)
    return [
        average_center_error(deltas),
        average_center_error(norm_deltas),
        rmse(deltas),
        correct_fraction(phis, 0.1),
        correct_fraction(phis, 0.5),
        float(tracking_length(phis, 0.1)),
        float(tracking_length(phis, 0.5)),
        average_overlap(phis),
        cotps_closed_form(phis),
    ]


def supervised_measures(rec: SupervisedRunRecord, a: SequenceAnnotation) -> list[float]:
    """Measures 10-16 from a supervised run record.

    Center-error entries are NaN when the run has no Tracked frames.
    """
    phis = _included(supervised_overlap_series(rec, a))
    deltas = _included(supervised_center_error_series(rec, a, normalized=False))
    norm_deltas = _included(supervised_center_error_series(rec, a, normalized=True))
    nan = float("nan")
    out = [
        average_center_error(deltas) if deltas else nan,
        average_center_error(norm_deltas) if norm_deltas else nan,
        rmse(deltas) if deltas else nan,
        correct_fraction(phis, 0.1) if phis else nan,
        correct_fraction(phis, 0.5) if phis else nan,
        average_overlap(phis) if phis else nan,
        float(failure_rate(rec)),
    ]
    return out


def compute_all(
    a: SequenceAnnotation,
    trajectory: Trajectory | None = None,
    record: SupervisedRunRecord | None = None,
) -> tuple[float, ...]:
    """Assemble the 16-entry measure vector.

    The trajectory fills entries 1-9, the record entries 10-16; a
    missing input leaves its half as NaN so partial experiments still
    produce rows.
    """
    nan = float("nan")
    values: list[float] = [nan] * 16
    if trajectory is not None:
        values[0:9] = unsupervised_measures(a, trajectory)
    if record is not None:
        values[9:16] = supervised_measures(record, a)
    return tuple(values)
