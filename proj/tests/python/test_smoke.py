import math
import os
import pathlib

import numpy as np
import pytest

import foothold

SCENARIOS = pathlib.Path(
    os.environ.get("FOOTHOLD_SCENARIO_DIR", pathlib.Path(__file__).resolve().parents[2] / "scenarios")
)


def test_flat_walk_completes():
    c = foothold.load_scenario(str(SCENARIOS / "flat_walk.toml"))
    r = foothold.run_scenario(c)
    assert r.outcome == "completed"
    assert r.steps_completed == c.num_steps
    m = foothold.metrics(r)
    assert m["success"] is True
    assert m["icp_error_max"] < 0.02


def test_csv_is_deterministic():
    c = foothold.load_scenario(str(SCENARIOS / "point_alternating_noisy.toml"))
    a = foothold.run_scenario(c).csv()
    b = foothold.run_scenario(c).csv()
    assert a == b
    assert a.splitlines()[0] == "t,icp_x,icp_y,icp_ref_x,icp_ref_y,cop_x,cop_y,cmp_x,cmp_y,phase,weight"


def test_overrides_and_errors():
    c = foothold.parse_scenario('name = "x"', [("swing_time", 0.3)])
    assert c.swing_time == pytest.approx(0.3)
    with pytest.raises(foothold.FootholdError, match="dt"):
        foothold.parse_scenario("dt = 0.0")


def test_icp():
    w = math.sqrt(9.81 / 0.9)
    icp = foothold.compute_icp(np.array([0.1, 0.0]), np.array([0.2, -0.1]))
    np.testing.assert_allclose(icp, [0.1 + 0.2 / w, -0.1 / w], atol=1e-15)


def test_hull_and_qp():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]])
    assert len(foothold.convex_hull(pts)) == 4
    inf = np.inf
    x = foothold.solve_qp(np.eye(2), np.array([-2.0, -2.0]), np.zeros((0, 2)), np.zeros(0),
                          np.array([-inf, -inf]), np.array([1.0, inf]))
    np.testing.assert_allclose(x, [1.0, 2.0], atol=1e-12)
