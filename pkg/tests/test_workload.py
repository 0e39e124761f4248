from pathlib import Path

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from wsnbattery.core import PROFILES
from wsnbattery.workload import (RDC_KINDS, ROLES, Phase, Scenario, TraceError, average_current,
                                 build_scenario, format_windows, generate_rdc, idle_time,
                                 named_scenario, parse_trace, radio_duty, validate_windows,
                                 window_charge)

FIXTURE = Path(__file__).parent / "fixtures" / "interleaved_trace.csv"
SKY = PROFILES["sky"]


def assert_valid(w, delta_ms=2000):
    assert w.dtype == np.int64 and w.shape[1] == 4
    assert (w >= 0).all()
    assert (w[:, 0] + w[:, 1] == delta_ms).all()
    assert (w[:, 2] + w[:, 3] <= delta_ms).all()


class TestParseTrace:
    def test_empty(self):
        assert parse_trace("").shape == (0, 4)

    def test_single_lpm(self):
        w = parse_trace("0,2000,LPM\n")
        assert w.tolist() == [[0, 2000, 0, 0]]
        assert window_charge(w[0], SKY) == pytest.approx(SKY.c_lpm * 2000)

    def test_binning_example(self):
        w = parse_trace("0,500,CPU\n500,2000,LPM\n100,150,TX\n")
        assert w.tolist() == [[500, 1500, 50, 0]]

    def test_pro_rata_split(self):
        w = parse_trace("0,1500,LPM\n1500,2500,CPU\n2500,4000,LPM\n1800,2200,RX\n")
        assert w.tolist() == [[500, 1500, 0, 200], [500, 1500, 0, 200]]

    def test_header_optional(self):
        body = "0,2000,LPM\n"
        assert parse_trace("start_ms,end_ms,state\n" + body).tolist() == parse_trace(body).tolist()

    def test_trailing_partial_dropped(self, caplog):
        w = parse_trace("0,2000,LPM\n2000,2500,LPM\n")
        assert len(w) == 1
        assert "partial" in caplog.text

    def test_fixture_hand_sums(self):
        w = parse_trace(FIXTURE.read_text())
        assert w.tolist() == [[120, 1880, 30, 210], [150, 1850, 25, 400]]
        # 120*1.8 + 1880*0.0545 + 30*17.4 + 210*18.8 and likewise for window 1
        assert window_charge(w, SKY).tolist() == pytest.approx([4788.46, 8325.825])
        assert window_charge(w, SKY).sum() == pytest.approx(13114.285)

    def test_window_format(self):
        text = "window,cpu_ms,lpm_ms,tx_ms,rx_ms\n0,100,1900,10,50\n1,0,2000,0,0\n"
        assert parse_trace(text).tolist() == [[100, 1900, 10, 50], [0, 2000, 0, 0]]

    def test_format_round_trip(self):
        w = generate_rdc("xmac", 2.0, duration=2, seed=3)
        assert parse_trace(format_windows(w)).tolist() == w.tolist()

    def test_malformed_line_number(self):
        lines = ["start_ms,end_ms,state"] + [f"{2000*i},{2000*(i+1)},LPM" for i in range(5)]
        lines.append("10000,abc,LPM")
        with pytest.raises(TraceError, match="line 7"):
            parse_trace("\n".join(lines) + "\n")

    def test_unknown_state(self):
        with pytest.raises(TraceError, match="line 1.*state"):
            parse_trace("0,2000,SLEEP\n")

    def test_wrong_width(self):
        with pytest.raises(TraceError, match="line 2"):
            parse_trace("0,2000,LPM\n2000,4000\n")

    def test_overlap(self):
        with pytest.raises(TraceError, match="overlap"):
            parse_trace("0,500,CPU\n0,2000,LPM\n")

    def test_gap(self):
        with pytest.raises(TraceError, match="gap"):
            parse_trace("0,1000,CPU\n1000,1900,LPM\n1900,2000,TX\n")

    def test_small_gap_tolerated(self):
        assert len(parse_trace("0,1000,CPU\n1010,2000,LPM\n")) == 1

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.integers(1, 900), st.booleans()), min_size=6, max_size=60),
           st.lists(st.tuples(st.floats(0, 1), st.integers(1, 80), st.booleans()), max_size=10))
    def test_charge_conservation(self, pieces, radio):
        """Binning conserves the interval-level charge up to boundary quantisation."""
        t, rows, events = 0, [], []
        for dur, busy in pieces:
            rows.append(f"{t},{t + dur},{'CPU' if busy else 'LPM'}")
            events.append((dur, SKY.c_cpu if busy else SKY.c_lpm))
            t += dur
        n = int(t // 2000)
        assume(n >= 1)
        end = n * 2000
        for frac, dur, is_tx in radio:
            start = int(frac * (end - dur))
            rows.append(f"{start},{start + dur},{'TX' if is_tx else 'RX'}")
        expected, t = 0.0, 0
        for dur, cur in events:
            expected += cur * max(0.0, min(t + dur, end) - t)
            t += dur
        for frac, dur, is_tx in radio:
            expected += (SKY.c_tx if is_tx else SKY.c_rx) * dur
        w = parse_trace("\n".join(rows) + "\n")
        assert window_charge(w, SKY).sum() == pytest.approx(expected, rel=5e-3)


class TestGenerators:
    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(RDC_KINDS), st.sampled_from(ROLES), st.floats(0, 30),
           st.integers(0, 2**32 - 1))
    def test_windows_valid(self, kind, role, rate, seed):
        w = generate_rdc(kind, rate, role, 3, seed)
        assert_valid(w)
        validate_windows(w)

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(RDC_KINDS), st.sampled_from(ROLES),
           st.lists(st.floats(0, 60), min_size=2, max_size=6), st.integers(0, 2**32 - 1),
           st.sampled_from(sorted(PROFILES)))
    def test_current_monotone_in_rate(self, kind, role, rates, seed, profile):
        rates = sorted(rates)
        traces = [generate_rdc(kind, r, role, 4, seed) for r in rates]
        if kind != "sicslowmac":
            top = traces[-1]
            assume(not ((top[:, 2] + top[:, 3] >= 2000) | (top[:, 0] >= 2000)).any())
        cur = [average_current(w, PROFILES[profile]) for w in traces]
        assert np.all(np.diff(cur) >= -1e-12)

    def test_deterministic(self):
        a = generate_rdc("contikimac", 3.0, "forwarder", 10, seed=8)
        b = generate_rdc("contikimac", 3.0, "forwarder", 10, seed=8)
        assert a.tobytes() == b.tobytes()
        assert a.tobytes() != generate_rdc("contikimac", 3.0, "forwarder", 10, seed=9).tobytes()

    def test_duration(self):
        assert len(generate_rdc("xmac", 1, duration=10)) == 300
        assert len(generate_rdc("xmac", 1, duration=0)) == 0

    def test_rejects(self):
        with pytest.raises(ValueError):
            generate_rdc("tdma", 1)
        with pytest.raises(ValueError):
            generate_rdc("xmac", -1)
        with pytest.raises(ValueError):
            generate_rdc("xmac", 1, role="router")

    def test_calibration(self):
        w = {k: generate_rdc(k, 1.0, "sender", 60, seed=0) for k in RDC_KINDS}
        cur = {k: average_current(v, SKY) for k, v in w.items()}
        assert radio_duty(w["contikimac"]) <= 0.01
        assert radio_duty(w["sicslowmac"]) == 1.0
        assert 18 <= cur["sicslowmac"] <= 22
        assert cur["contikimac"] < cur["xmac"] < cur["cxmac"] < cur["sicslowmac"]
        assert 1.05 <= cur["cxmac"] / cur["xmac"] <= 1.3


class TestScenarios:
    def test_single_phase_identity(self):
        s = Scenario((Phase(5, "xmac", 2.0, "sink"),), seed=4)
        assert build_scenario(s).tolist() == generate_rdc("xmac", 2.0, "sink", 5, 4).tolist()

    def test_boot_burst(self):
        w = build_scenario(named_scenario("boot"))
        q = window_charge(w, SKY)
        assert q[:30].mean() > 5 * q[150:].mean()

    def test_parent_loss_polling(self):
        s = Scenario((Phase(5, "contikimac", 1.0), Phase(5, "contikimac", 1.0, event="parent_loss")))
        w = build_scenario(s)
        steady, poll = w[:150], w[150:240]
        assert radio_duty(poll) >= 5 * radio_duty(steady)

    def test_phase_boundaries(self):
        w = build_scenario(named_scenario("join-leave"))
        assert len(w) == 50 * 30
        w = build_scenario(named_scenario("burst-idle"))
        assert len(w) == 90
        assert (w[30:] == [0, 2000, 0, 0]).all()

    @pytest.mark.parametrize("name", ["steady", "boot", "join-leave", "burst-idle"])
    def test_valid(self, name):
        assert_valid(build_scenario(named_scenario(name, seed=2)))

    def test_bad_phase(self):
        with pytest.raises(ValueError):
            Phase(0)
        with pytest.raises(ValueError):
            Phase(1, event="storm")
        with pytest.raises(ValueError):
            named_scenario("unknown")


def test_idle_time():
    assert idle_time((100, 1900, 10, 50)) == 1840
    assert idle_time((100, 100, 500, 500)) == 0
    assert idle_time(np.array([[0, 2000, 0, 0], [2000, 0, 0, 0]])).tolist() == [2000, 0]
