import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frl_autoscale.workload import (
    EndOfTrace,
    PatternSpec,
    TraceError,
    Workload,
    generate,
    load_trace,
)

DATA = Path(__file__).parent / "data"


def write(tmp_path, text, name="trace.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestSynthetic:
    def test_bursting_peak(self):
        spec = PatternSpec(kind="predictable_bursting", period=100)
        assert generate(spec, 25) == 100.0
        assert generate(spec, 75) == 10.0
        assert generate(spec, 0) == 55.0

    def test_on_off(self):
        spec = PatternSpec(kind="on_off", dwell=5)
        assert generate(spec, 7) == 10.0
        assert generate(spec, 4) == 100.0
        assert generate(spec, 10) == 100.0

    def test_constant(self):
        assert generate(PatternSpec(kind="constant", value=55), 123) == 55.0

    def test_constant_clamped(self):
        assert generate(PatternSpec(kind="constant", value=500), 0) == 100.0

    def test_variations_golden(self):
        golden = json.loads((DATA / "variations_seed7.json").read_text())
        spec = PatternSpec(**golden["pattern"])
        assert [generate(spec, t) for t in range(100)] == golden["values"]

    def test_variations_seeded(self):
        a = PatternSpec(kind="variations", seed=3)
        b = PatternSpec(kind="variations", seed=4)
        seq = lambda s: [generate(s, t) for t in range(200)]
        assert seq(a) == seq(PatternSpec(kind="variations", seed=3))
        assert seq(a) != seq(b)

    @settings(max_examples=200)
    @given(
        st.sampled_from(["predictable_bursting", "variations", "on_off"]),
        st.integers(0, 100_000),
        st.integers(2, 500),
        st.integers(0, 50),
    )
    def test_bounded(self, kind, t, period, seed):
        spec = PatternSpec(kind=kind, period=period, dwell=period, seed=seed, jitter=30.0)
        assert spec.u_min <= generate(spec, t) <= spec.u_max

    @given(st.integers(0, 10_000), st.integers(2, 300))
    def test_periodic(self, t, p):
        bursting = PatternSpec(kind="predictable_bursting", period=p)
        assert generate(bursting, t) == generate(bursting, t + p)
        on_off = PatternSpec(kind="on_off", dwell=p)
        assert generate(on_off, t) == generate(on_off, t + 2 * p)

    @pytest.mark.parametrize(
        "kwargs",
        [{"kind": "sawtooth"}, {"u_min": 100, "u_max": 10}, {"period": 1},
         {"kind": "on_off", "dwell": 1}, {"kind": "constant"}, {"kind": "trace"},
         {"period": 10.5}, {"scale": "log"}],
    )
    def test_invalid_spec(self, kwargs):
        with pytest.raises(ValueError):
            PatternSpec(**kwargs)

    def test_negative_t(self):
        with pytest.raises(ValueError):
            generate(PatternSpec(), -1)


class TestTrace:
    def test_linear_scaling(self, tmp_path):
        p = write(tmp_path, "0,0\n1,50\n2,100\n")
        assert load_trace(p, "linear", 10, 100) == [10.0, 55.0, 100.0]

    def test_header_allowed(self, tmp_path):
        p = write(tmp_path, "t,count\n0,0\n1,50\n2,100\n")
        assert load_trace(p) == [10.0, 55.0, 100.0]

    def test_none_mode_clamps(self, tmp_path):
        p = write(tmp_path, "0,5\n1,50\n2,300\n")
        assert load_trace(p, "none") == [10.0, 50.0, 100.0]

    def test_single_row_rejected(self, tmp_path):
        with pytest.raises(TraceError, match="degenerate"):
            load_trace(write(tmp_path, "0,42\n"))

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(TraceError, match="empty"):
            load_trace(write(tmp_path, ""))

    def test_non_numeric_row_named(self, tmp_path):
        with pytest.raises(TraceError, match="row 3"):
            load_trace(write(tmp_path, "0,1\n1,2\n2,lots\n3,4\n"))

    def test_wrong_column_count(self, tmp_path):
        with pytest.raises(TraceError, match="row 2"):
            load_trace(write(tmp_path, "0,1\n1,2,3\n"))

    def test_end_of_trace(self, tmp_path):
        p = write(tmp_path, "0,0\n1,50\n2,100\n")
        wl = Workload(PatternSpec(kind="trace", path=str(p)))
        assert len(wl) == 3
        assert wl(2) == 100.0
        with pytest.raises(EndOfTrace):
            wl(3)
