import numpy as np
import pytest

from kinplex.mechanism import DHParams, JointSpec, Mechanism, serial_chain


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def fourbar():
    # planar four-bar loop: 3 moving links, 4 revolute joints
    return Mechanism(
        name="fourbar", planar=True, links=3,
        joints=(
            JointSpec(kind="R", parent=0, child=1, dh=DHParams(0.0, 0.0, 1.0, 0.0)),
            JointSpec(kind="R", parent=1, child=2, dh=DHParams(0.0, 0.0, 2.0, 0.0)),
            JointSpec(kind="R", parent=2, child=3, dh=DHParams(0.0, 0.0, 1.5, 0.0)),
            JointSpec(kind="R", parent=3, child=0, dh=DHParams(0.0, 0.0, 2.0, 0.0)),
        ))


@pytest.fixture
def stewart():
    # 6 UPS legs: 13 moving bodies (platform + 2 per leg), 18 joints
    joints = []
    body = 1
    for _ in range(6):
        lower, upper = body, body + 1
        ball = ((-1.2, 1.2), (-1.2, 1.2))
        joints.append(JointSpec(kind="S", parent=0, child=lower, limits=ball))
        joints.append(JointSpec(kind="P", parent=lower, child=upper,
                                limits=((0.5, 1.5),)))
        joints.append(JointSpec(kind="S", parent=upper, child=13, limits=ball))
        body += 2
    return Mechanism(name="stewart", planar=False, links=13, joints=tuple(joints))


@pytest.fixture
def rr_chain():
    return serial_chain("rr_arm", [(0.0, 0.0, 2.0, 0.0), (0.0, 0.0, 1.0, 0.0)],
                        planar=True)


@pytest.fixture
def four_r_chain():
    # spatial 4R wrist-like chain used by the coplanarity tests
    return serial_chain("four_r", [
        (0.0, 0.3, 0.8, np.pi / 2),
        (0.0, 0.0, 0.9, -np.pi / 2),
        (0.0, 0.2, 0.7, np.pi / 2),
        (0.0, 0.0, 0.5, 0.0),
    ])
