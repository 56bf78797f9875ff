#!/usr/bin/env python3
"""Independent recomputation of the reference values frozen into the unit tests.

Plain Python floats and numpy only; nothing here shares code with the library.
Run it and compare against the constants in tests/test_*.cpp.
"""
import math

import numpy as np


def smoothstep(s):
    s = min(max(s, 0.0), 1.0)
    return 3 * s * s - 2 * s ** 3


def main():
    out = {}
    # reachability tube centre at t = 5 for start [0, 0.5] -> target [3, 4], t_c = 10
    w = smoothstep(0.5)
    out["tube_center_t5"] = (1 - w) * 0.25 + w * 3.5

    out["e1_gamma02_x15"] = (2 * 1.5 - 2 - 0) / (2 - 0)
    out["ek_04_08"] = 0.4 / 0.8
    out["ln3"] = math.log((1 + 0.5) / (1 - 0.5))
    out["xi_e0_w2"] = 4 / (2 * (1 - 0))
    out["xi_e05_w2"] = 4 / (2 * (1 - 0.25))
    out["stage_control_e05"] = -1.0 * out["xi_e05_w2"] * out["ln3"]
    # second stage of a two-stage chain: x2 - r2 = 0.4 inside a funnel of half-width 0.8
    out["chain_u_e05"] = -1.0 * 4 / (0.8 * (1 - 0.25)) * out["ln3"]
    out["funnel_2_01_1_1"] = (2 - 0.1) * math.exp(-1) + 0.1

    # 2R accelerations at rest, printed mass matrix
    M = np.array([[5 / 3 + 1, 1 / 3 + 0.5], [0.5, 1 / 3]])
    G = 9.81 * np.array([1.5 + 0.5, 0.5])
    acc = np.linalg.solve(M, -G)
    out["r2_acc_1"], out["r2_acc_2"] = acc

    # omni robot velocity for u = (1, 1, 1), theta = 0, R = 0.05, L = 0.2, B = I
    c, s, L, R = math.cos(math.pi / 6), math.sin(math.pi / 6), 0.2, 0.05
    geom = np.array([[0, -1, L], [c, s, L], [-c, -s, L]])
    v = np.linalg.solve(geom, R * np.ones(3))
    out["omni_v1"], out["omni_v2"], out["omni_v3"] = v
    # and at theta = pi / 3 with u = (1, -2, 0.5)
    th = math.pi / 3
    rot = np.array([[math.cos(th), -math.sin(th), 0], [math.sin(th), math.cos(th), 0], [0, 0, 1]])
    v = rot @ np.linalg.solve(geom, R * np.array([1, -2, 0.5]))
    out["omni_rot_v1"], out["omni_rot_v2"], out["omni_rot_v3"] = v

    # one RK4 step of x' = x from 1 with h = 0.1
    h = 0.1
    k1 = 1.0
    k2 = 1 + h / 2 * k1
    k3 = 1 + h / 2 * k2
    k4 = 1 + h * k3
    out["rk4_exp_step"] = 1 + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    out["exp_01"] = math.exp(0.1)

    for k, v in out.items():
        print(f"{k} = {v:.17g}")


if __name__ == "__main__":
    main()
