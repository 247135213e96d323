#!/usr/bin/env python3
"""Independent forward-kinematics reference for the Panda DH table.

Evaluates the modified-DH chain in data/panda_dh.txt with plain numpy and
prints frozen C++ constants for tests/test_kinematics.cpp. Kept separate
from the C++ library on purpose: it shares no code with it.

Usage: python3 tests/oracle/panda_fk_reference.py
"""

import numpy as np

# columns: a, d, alpha, theta_offset  (modified DH, Craig convention)
PANDA_DH = np.array(
    [
        [0.0, 0.333, 0.0, 0.0],
        [0.0, 0.0, -np.pi / 2, 0.0],
        [0.0, 0.316, np.pi / 2, 0.0],
        [0.0825, 0.0, np.pi / 2, 0.0],
        [-0.0825, 0.384, -np.pi / 2, 0.0],
        [0.0, 0.0, np.pi / 2, 0.0],
        [0.088, 0.107, np.pi / 2, 0.0],
    ]
)

TEST_CONFIGS = {
    "zero": np.zeros(7),
    "cfg_a": np.array([0.3, -0.9, 1.1, -1.9, 0.4, 1.2, 0.5]),
    "cfg_b": np.array([-2.1, 1.5, -0.7, -0.3, 2.4, 3.1, -1.6]),
    "cfg_c": np.array([1.9, -1.2, 2.2, -2.8, -2.0, 0.6, 2.7]),
}


def dh_transform(a, d, alpha, theta):
    ca, sa = np.cos(alpha), np.sin(alpha)
    ct, st = np.cos(theta), np.sin(theta)
    rot_x = np.array([[1, 0, 0, 0], [0, ca, -sa, 0], [0, sa, ca, 0], [0, 0, 0, 1]])
    trans_x = np.eye(4)
    trans_x[0, 3] = a
    rot_z = np.array([[ct, -st, 0, 0], [st, ct, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    trans_z = np.eye(4)
    trans_z[2, 3] = d
    return rot_x @ trans_x @ rot_z @ trans_z


def forward(q):
    T = np.eye(4)
    for (a, d, alpha, off), qi in zip(PANDA_DH, q):
        T = T @ dh_transform(a, d, alpha, qi + off)
    return T


def euler_zyx_wrapped(R):
    yaw = np.arctan2(R[1, 0], R[0, 0])
    pitch = np.arcsin(np.clip(-R[2, 0], -1.0, 1.0))
    roll = np.arctan2(R[2, 1], R[2, 2])
    return np.mod(np.array([yaw, pitch, roll]), 2.0 * np.pi)


def main():
    for name, q in TEST_CONFIGS.items():
        T = forward(q)
        p = T[:3, 3]
        o = euler_zyx_wrapped(T[:3, :3])
        qs = ", ".join(repr(float(v)) for v in q)
        ps = ", ".join(repr(float(v)) for v in p)
        os_ = ", ".join(repr(float(v)) for v in o)
        print(f"// {name}")
        print(f"const Eigen::VectorXd q_{name} = make_vec({{{qs}}});")
        print(f"const Eigen::Vector3d p_{name}({ps});")
        print(f"const Eigen::Vector3d o_{name}({os_});")
        print()


if __name__ == "__main__":
    main()
