import numpy as np
import pytest

from wsnbattery.core import DEFAULT_CONFIG, PROFILES, parse_config
from wsnbattery.runs import REPORT_HEADER, drift_slope, read_report, run_tier, write_atomic
from wsnbattery.workload import generate_rdc

CFG = parse_config(DEFAULT_CONFIG)


@pytest.mark.parametrize("tier", ["float", "int", "linear", "oracle"])
def test_round_trip(tier):
    w = generate_rdc("contikimac", 1.0, duration=2, seed=1)
    r = run_tier(w, tier, PROFILES["sky"], CFG)
    text = r.to_csv()
    assert text.splitlines()[0] == REPORT_HEADER
    back = read_report(text)
    np.testing.assert_allclose(back.t_min, r.t_min, atol=1e-6)
    np.testing.assert_allclose(back.metric, r.metric, atol=1e-3)


def test_int_metric_is_integer():
    r = run_tier(generate_rdc("xmac", 1.0, duration=1), "int", PROFILES["sky"], CFG)
    assert all("." not in ln.split(",")[2] for ln in r.to_csv().splitlines()[1:])


def test_unknown_tier():
    with pytest.raises(ValueError, match="unknown estimator"):
        run_tier(np.zeros((0, 4)), "magic", PROFILES["sky"], CFG)


def test_read_rejects_foreign_csv():
    with pytest.raises(ValueError, match="not a run report"):
        read_report("a,b\n1,2\n")


def test_write_atomic(tmp_path):
    out = tmp_path / "sub" / "r.csv"
    write_atomic(out, "x\n")
    assert out.read_bytes() == b"x\n"
    assert [p.name for p in out.parent.iterdir()] == ["r.csv"]


def test_drift_slope():
    d = 3.0 + 0.5 * np.arange(1000)
    assert drift_slope(d) == pytest.approx(0.5)
    assert drift_slope(np.ones(50)) == 0.0
