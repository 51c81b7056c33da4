import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from trackbench.errors import InvalidRegionError
from trackbench.geometry import (
    ClassificationScores,
    Point,
    Region,
    classify,
    f_measure,
    overlap,
    precision,
    region_center,
    region_size,
    validate_region,
)


def grid_regions(limit=64):
    """Integer-coordinate regions fitting a limit x limit pixel grid."""
    return st.integers(0, limit - 1).flatmap(
        lambda x: st.integers(0, limit - 1).flatmap(
            lambda y: st.tuples(
                st.just(x),
                st.just(y),
                st.integers(0, limit - x),
                st.integers(0, limit - y),
            )
        )
    ).map(lambda t: Region(*map(float, t)))


def raster_overlap(a: Region, b: Region, limit=64) -> float:
    """Pixel-counting IoU for integer-coordinate regions."""
    ga = np.zeros((limit, limit), dtype=bool)
    gb = np.zeros((limit, limit), dtype=bool)
    ga[int(a.x):int(a.x + a.width), int(a.y):int(a.y + a.height)] = True
    gb[int(b.x):int(b.x + b.width), int(b.y):int(b.y + b.height)] = True
    union = int((ga | gb).sum())
    if union == 0:
        return 0.0
    return int((ga & gb).sum()) / union


finite_regions = st.builds(
    Region,
    st.floats(-1e3, 1e3),
    st.floats(-1e3, 1e3),
    st.floats(0, 1e3),
    st.floats(0, 1e3),
)


class TestOverlap:
    def test_half_shifted_boxes(self):
        assert overlap(Region(0, 0, 2, 2), Region(1, 0, 2, 2)) == pytest.approx(1 / 3)

    def test_identical_positive(self):
        assert overlap(Region(3.7, -2.1, 5.3, 4.9), Region(3.7, -2.1, 5.3, 4.9)) == 1.0

    def test_touching_boxes_zero(self):
        # Closed intervals: sharing an edge means zero intersection area.
        assert overlap(Region(0, 0, 2, 2), Region(2, 0, 2, 2)) == 0.0

    def test_disjoint(self):
        assert overlap(Region(0, 0, 1, 1), Region(5, 5, 1, 1)) == 0.0

    def test_contained(self):
        assert overlap(Region(0, 0, 4, 4), Region(1, 1, 2, 2)) == pytest.approx(0.25)

    def test_zero_union_convention(self):
        assert overlap(Region(1, 1, 0, 0), Region(1, 1, 0, 0)) == 0.0

    def test_zero_area_vs_positive(self):
        assert overlap(Region(5, 5, 10, 10), Region(7, 7, 0, 0)) == 0.0

    def test_invalid_inputs(self):
        with pytest.raises(InvalidRegionError):
            overlap(Region(0, 0, float("nan"), 1), Region(0, 0, 1, 1))
        with pytest.raises(InvalidRegionError):
            overlap(Region(0, 0, 1, 1), Region(0, 0, -1, 1))

    @given(finite_regions, finite_regions)
    def test_symmetry(self, a, b):
        assert overlap(a, b) == overlap(b, a)

    @given(finite_regions, finite_regions)
    def test_range(self, a, b):
        v = overlap(a, b)
        assert 0.0 <= v <= 1.0

    @given(finite_regions)
    def test_self_overlap(self, r):
        expected = 1.0 if r.area > 0 else 0.0
        assert overlap(r, r) == expected

    @given(finite_regions, finite_regions)
    def test_consistency_with_classification(self, a, b):
        s = classify(a, b)
        denom = s.tp + s.fp + s.fn
        if denom > 0 and a.area + b.area > 0:
            assert abs(overlap(a, b) - s.tp / denom) < 1e-12

    @given(grid_regions(), grid_regions())
    def test_rasterization_oracle(self, a, b):
        assert abs(overlap(a, b) - raster_overlap(a, b)) < 1e-12


class TestClassification:
    def test_half_shifted_decomposition(self):
        s = classify(Region(0, 0, 2, 2), Region(1, 0, 2, 2))
        assert (s.tp, s.fp, s.fn) == (2.0, 2.0, 2.0)
        assert f_measure(s) == pytest.approx(0.5)
        assert precision(s) == pytest.approx(0.5)

    def test_perfect_prediction(self):
        s = classify(Region(0, 0, 3, 3), Region(0, 0, 3, 3))
        assert (s.tp, s.fp, s.fn) == (9.0, 0.0, 0.0)
        assert f_measure(s) == 1.0
        assert precision(s) == 1.0

    def test_empty_prediction(self):
        s = classify(Region(0, 0, 3, 3), Region(10, 10, 0, 0))
        assert s.tp == 0.0 and s.fp == 0.0 and s.fn == 9.0
        assert f_measure(s) == 0.0

    def test_degenerate_scores(self):
        assert f_measure(ClassificationScores(0.0, 0.0, 0.0)) == 0.0
        assert precision(ClassificationScores(0.0, 0.0, 0.0)) == 0.0


class TestRegionHelpers:
    def test_center(self):
        assert region_center(Region(2, 4, 6, 8)) == Point(5.0, 8.0)

    def test_size_square(self):
        assert region_size(Region(0, 0, 10, 10)) == 10.0

    def test_size_geometric_mean(self):
        assert region_size(Region(0, 0, 4, 9)) == 6.0

    def test_size_degenerate(self):
        assert region_size(Region(0, 0, 0, 5)) == 0.0

    def test_validate_frame_number_in_error(self):
        with pytest.raises(InvalidRegionError) as exc:
            validate_region(Region(0, 0, 1, float("inf")), frame=7)
        assert "7" in str(exc.value)

    def test_region_coerces_to_float(self):
        r = Region(1, 2, 3, 4)
        assert isinstance(r.x, float) and isinstance(r.height, float)

    @given(finite_regions)
    def test_center_size_consistency(self, r):
        c = region_center(r)
        assert math.isclose(c.x, r.x + r.width / 2, rel_tol=0, abs_tol=1e-9)
        assert region_size(r) == pytest.approx(math.sqrt(r.width * r.height))
