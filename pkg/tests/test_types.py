import numpy as np
import pytest
from hypothesis import given, strategies as st

from hetseg.errors import EmptyInterval, LengthMismatch, NonFiniteValue, TooShort
from hetseg.types import ScaleEstimates, Segmentation, TimeSeries, VarianceIntervalMap, validate_inputs


def test_validate_minimal_ok():
    series, vmap = validate_inputs([1, 2, 3], [1, 1, 2], J=2)
    assert series.n == 3
    assert vmap.J == 2
    assert list(vmap.counts) == [2, 1]


def test_validate_length_mismatch():
    with pytest.raises(LengthMismatch):
        validate_inputs([1, 2], [1, 1, 1])


def test_validate_empty_interval():
    with pytest.raises(EmptyInterval):
        validate_inputs([1, 2, 3], [1, 1, 1], J=2)


def test_validate_prebuilt_mismatch():
    with pytest.raises(LengthMismatch):
        validate_inputs(TimeSeries([1.0, 2.0]), VarianceIntervalMap([1, 1, 1]))


def test_non_finite_rejected():
    with pytest.raises(NonFiniteValue):
        TimeSeries([1.0, np.nan, 2.0])


def test_too_short():
    with pytest.raises(TooShort):
        TimeSeries([1.0])


def test_dates_strictly_increasing():
    d = np.array(["2020-01-01", "2020-01-01"], dtype="datetime64[D]")
    with pytest.raises(ValueError):
        TimeSeries([1.0, 2.0], d)


def test_values_are_read_only():
    s = TimeSeries([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        s.values[0] = 5


def test_labels_may_be_non_contiguous():
    vmap = VarianceIntervalMap([1, 1, 2, 2, 1, 1])
    assert vmap.J == 2
    assert list(vmap.counts) == [4, 2]


def test_scales_positive():
    with pytest.raises(ValueError):
        ScaleEstimates([1.0, 0.0])


@pytest.mark.parametrize("bps", [(0,), (3, 3), (5,), (2, 1)])
def test_segmentation_rejects_bad_breakpoints(bps):
    with pytest.raises(ValueError):
        Segmentation(bps, [0.0] * (len(bps) + 1), 5)


@st.composite
def segmentations(draw):
    n = draw(st.integers(1, 60))
    bps = sorted(draw(st.sets(st.integers(1, n - 1), max_size=n - 1))) if n > 1 else []
    means = draw(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64),
                          min_size=len(bps) + 1, max_size=len(bps) + 1))
    return Segmentation(tuple(bps), tuple(means), n)


@given(segmentations())
def test_segmentation_round_trip(seg):
    assert Segmentation.from_json(seg.to_json()) == seg


@given(segmentations())
def test_segments_partition_range(seg):
    covered = [t for a, b in seg.segments() for t in range(a, b + 1)]
    assert covered == list(range(1, seg.n + 1))
    assert seg.K == len(seg.breakpoints) + 1
    assert seg.lengths().sum() == seg.n
