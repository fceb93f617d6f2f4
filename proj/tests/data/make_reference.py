#!/usr/bin/env python3
"""Regenerates reference_force.csv / reference_kin.csv.

Free fall at 0.85^2 g onto the load cell at t = 0.5 s with 860.634 mm/s,
lowest point 687.429 mm, rest 690.489 mm; force is a 20 ms half-sine
peaking at 3.78 V on a zero baseline.
"""
import math
from pathlib import Path

V = 860.634          # mm/s at contact
A = 0.85**2 * 9810.0  # mm/s^2 along the rail
T_C = 0.5
REST = 690.489
LOWEST = 687.429
PEAK_V = 3.78
T_END = 1.2

here = Path(__file__).resolve().parent

kin = ["t_s,z_mm"]
tau0 = V / A
for k in range(int(T_END * 200) + 1):
    t = k / 200
    if t <= T_C:
        tau = min(T_C - t, tau0)
        z = REST + V * tau - 0.5 * A * tau * tau
    elif k == 101:
        z = 688.5
    elif k == 102:
        z = LOWEST
    elif k == 103:
        z = 688.9
    else:
        z = REST
    kin.append(f"{t!r},{z!r}")
(here / "reference_kin.csv").write_text("\n".join(kin) + "\n")

force = ["t_s,voltage_v"]
for k in range(int(T_END * 2000) + 1):
    t = k / 2000
    if k == 1020:
        v = PEAK_V
    elif 1000 < k < 1040:
        v = PEAK_V * math.sin(math.pi * (k - 1000) / 40)
    else:
        v = 0.0
    force.append(f"{t!r},{v!r}")
(here / "reference_force.csv").write_text("\n".join(force) + "\n")
