import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from trackbench.errors import (
    DegenerateAnnotationError,
    InvalidRegionError,
    LengthMismatchError,
    MalformedRecordError,
)
from trackbench.geometry import Point, Region
from trackbench.trajectory import (
    Failure,
    Init,
    MeasureRow,
    SequenceAnnotation,
    SupervisedRunRecord,
    Tracked,
    Trajectory,
    center_error_series,
    overlap_series,
    validate_pair,
    validate_record,
)

from conftest import make_annotation


def traj(regions):
    return Trajectory(regions=tuple(Region(*r) for r in regions))


class TestAnnotation:
    def test_empty_rejected(self):
        with pytest.raises(LengthMismatchError):
            SequenceAnnotation(name="e", regions=())

    def test_center_count_must_match(self):
        with pytest.raises(LengthMismatchError):
            SequenceAnnotation(
                name="c",
                regions=(Region(0, 0, 2, 2), Region(1, 1, 2, 2)),
                centers=(Point(1.0, 1.0),),
            )

    def test_derived_center(self):
        a = make_annotation([(10.0, 20.0, 4.0, 6.0)])
        assert a.center(0) == Point(12.0, 23.0)

    def test_explicit_center_wins(self):
        a = SequenceAnnotation(
            name="c",
            regions=(Region(10.0, 20.0, 4.0, 6.0),),
            centers=(Point(99.0, -1.0),),
        )
        assert a.center(0) == Point(99.0, -1.0)


class TestRecord:
    def test_from_frames_derives_failures(self):
        r = Region(0, 0, 2, 2)
        rec = SupervisedRunRecord.from_frames(
            [Init(r), Tracked(r), Failure(), Init(r), Tracked(r)], tau=0.0
        )
        assert rec.failure_frames == (3,)
        validate_record(rec)

    def test_empty_record(self):
        with pytest.raises(MalformedRecordError):
            validate_record(SupervisedRunRecord(frames=(), failure_frames=(), tau=0.0))

    def test_failure_frames_out_of_range(self):
        r = Region(0, 0, 2, 2)
        rec = SupervisedRunRecord(frames=(Init(r),), failure_frames=(2,), tau=0.0)
        with pytest.raises(MalformedRecordError):
            validate_record(rec)

    def test_failure_frames_must_increase(self):
        r = Region(0, 0, 2, 2)
        frames = (Init(r), Failure(), Init(r), Failure(), Init(r))
        rec = SupervisedRunRecord(frames=frames, failure_frames=(4, 2), tau=0.0)
        with pytest.raises(MalformedRecordError):
            validate_record(rec)

    def test_failure_frames_must_match_entries(self):
        r = Region(0, 0, 2, 2)
        rec = SupervisedRunRecord(
            frames=(Init(r), Failure(), Init(r)), failure_frames=(3,), tau=0.0
        )
        with pytest.raises(MalformedRecordError):
            validate_record(rec)

    def test_failure_needs_following_init(self):
        r = Region(0, 0, 2, 2)
        rec = SupervisedRunRecord(
            frames=(Init(r), Failure(), Tracked(r)), failure_frames=(2,), tau=0.0
        )
        with pytest.raises(MalformedRecordError):
            validate_record(rec)

    def test_final_frame_failure_allowed(self):
        r = Region(0, 0, 2, 2)
        rec = SupervisedRunRecord(
            frames=(Init(r), Tracked(r), Failure()), failure_frames=(3,), tau=0.0
        )
        validate_record(rec)


class TestMeasureRow:
    def test_needs_sixteen_values(self):
        with pytest.raises(LengthMismatchError):
            MeasureRow(tracker="t", sequence="s", run=1, frames=10, values=(1.0,) * 15)


class TestPairValidation:
    def test_length_mismatch(self):
        a = make_annotation([(0, 0, 2, 2)] * 3)
        with pytest.raises(LengthMismatchError):
            validate_pair(a, traj([(0, 0, 2, 2)] * 2))

    def test_invalid_annotation_region_carries_frame(self):
        rows = [(0.0, 0.0, 2.0, 2.0)] * 10
        rows[6] = (0.0, 0.0, -1.0, 2.0)
        a = SequenceAnnotation(name="bad", regions=tuple(Region(*r) for r in rows))
        with pytest.raises(InvalidRegionError) as e:
            validate_pair(a, traj([(0, 0, 2, 2)] * 10))
        assert e.value.frame == 7
        assert "frame 7" in str(e.value)

    def test_invalid_trajectory_region_carries_frame(self):
        rows = [(0.0, 0.0, 2.0, 2.0)] * 5
        rows[2] = (float("nan"), 0.0, 2.0, 2.0)
        a = make_annotation([(0, 0, 2, 2)] * 5)
        with pytest.raises(InvalidRegionError) as e:
            validate_pair(a, traj(rows))
        assert e.value.frame == 3


class TestSeries:
    def test_overlap_series_values(self):
        a = make_annotation([(0, 0, 2, 2), (0, 0, 2, 2)])
        t = traj([(0, 0, 2, 2), (1, 0, 2, 2)])
        s = overlap_series(a, t)
        assert s[0] == 1.0
        assert abs(s[1] - 1.0 / 3.0) < 1e-15

    def test_center_error_series_values(self):
        a = make_annotation([(0.0, 0.0, 2.0, 2.0)] * 2)
        t = traj([(0.0, 0.0, 2.0, 2.0), (3.0, 4.0, 2.0, 2.0)])
        s = center_error_series(a, t)
        assert s == [0.0, 5.0]

    def test_normalized_divides_by_size(self):
        # size of a 3x4 ground-truth box is sqrt(12)
        a = make_annotation([(0.0, 0.0, 3.0, 4.0)])
        t = traj([(6.0, 0.0, 3.0, 4.0)])
        s = center_error_series(a, t, normalized=True)
        assert abs(s[0] - 6.0 / math.sqrt(12.0)) < 1e-12

    def test_normalized_rejects_zero_size_gt(self):
        a = make_annotation([(0.0, 0.0, 2.0, 2.0), (5.0, 5.0, 0.0, 0.0)])
        t = traj([(0.0, 0.0, 2.0, 2.0)] * 2)
        with pytest.raises(DegenerateAnnotationError) as e:
            center_error_series(a, t, normalized=True)
        assert e.value.frame == 2

    def test_explicit_centers_feed_error_series(self):
        a = SequenceAnnotation(
            name="c",
            regions=(Region(0.0, 0.0, 2.0, 2.0),),
            centers=(Point(10.0, 1.0),),
        )
        t = traj([(0.0, 0.0, 2.0, 2.0)])
        assert center_error_series(a, t) == [9.0]


box = st.tuples(
    st.floats(-100, 100), st.floats(-100, 100), st.floats(1, 50), st.floats(1, 50)
)


@given(st.lists(st.tuples(box, box), min_size=2, max_size=12), st.randoms())
def test_series_are_frame_local(pairs, rng):
    """Permuting frames permutes the series the same way."""
    idx = list(range(len(pairs)))
    rng.shuffle(idx)
    a = make_annotation([p[0] for p in pairs])
    t = traj([p[1] for p in pairs])
    ap = make_annotation([pairs[i][0] for i in idx])
    tp = traj([pairs[i][1] for i in idx])
    for series in (overlap_series, center_error_series):
        base = series(a, t)
        assert series(ap, tp) == [base[i] for i in idx]
