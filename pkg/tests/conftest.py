import math
import os

import pytest

from encircle import ControllerParams, Constant, RobotState, Scenario, TargetSet, run

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "scenarios")

TABLE1 = dict(vc=0.5, k1=20.0, k2=0.45, k3=2.0, eps1=0.01, eps2=0.01)
TABLE2 = dict(vc=0.5, k1=1.0, k2=0.25, k3=2.0, eps1=0.01, eps2=0.01)

EIGHT_STARTS = (
    (7.0, 2.0, -3 * math.pi / 5),
    (2.0, 7.0, math.pi / 2),
    (-3.0, 2.0, math.pi),
    (2.0, -3.0, -math.pi / 2),
    (2.5, 2.0, 0.0),
    (2.0, 2.5, math.pi / 2),
    (1.5, 2.0, math.pi),
    (2.0, 1.5, -math.pi / 2),
)


def capture_scenario(x, y, theta, *, k2=0.45, t_end=100.0, dt=0.01, name=""):
    params = dict(TABLE1)
    params["k2"] = k2
    return Scenario(
        initial_state=RobotState(x, y, theta),
        targets=TargetSet(((2.0, 2.0),)),
        command=Constant(2.0),
        params=ControllerParams(**params),
        h=100.0,
        dt=dt,
        t_end=t_end,
        name=name,
    )


@pytest.fixture(scope="session")
def fig4_log():
    """The reference capture run: start (7, 2, -3pi/5), radius 2."""
    return run(capture_scenario(*EIGHT_STARTS[0], name="fig4"))


@pytest.fixture(scope="session")
def scenario_dir():
    return os.path.abspath(SCENARIO_DIR)
