#!/usr/bin/env python3
"""Generate the vendored benchmark case files under crates/core/src/caseio/data/.

Sources:
- case30.m: the widely distributed 30-bus case (Ferrero/Shahidehpour variant,
  20 load buses, all-nominal taps), with the voltage-base column set to the
  classic 132/33 kV split instead of a flat base. Per-unit data is unchanged.
- case69.m: the Baran & Wu 69-bus radial distribution feeder (12.66 kV),
  branch impedances in ohms converted to per-unit on a 10 MVA base. Eleven
  2 kW keep-alive loads are added at otherwise unloaded buses so every
  lateral is observable in load terms (59 load points total).
- cigre_mv.gridcase.json: CIGRE MV European benchmark, 14 MV buses, 15 lines
  (3 tie lines with switches), 11 aggregated loads; the HV grid and both
  transformers are folded into a slack source at bus 1 and a PV infeed at
  bus 12.
"""

import json
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "src", "caseio", "data")

# ---------------------------------------------------------------- case30.m

CASE30_BUS = [
    # bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin
    (1, 3, 0.0, 0.0, 0, 0, 1, 1, 0, 132, 1, 1.05, 0.95),
    (2, 2, 21.7, 12.7, 0, 0, 1, 1, 0, 132, 1, 1.05, 0.95),
    (3, 1, 2.4, 1.2, 0, 0, 1, 1, 0, 132, 1, 1.05, 0.95),
    (4, 1, 7.6, 1.6, 0, 0, 1, 1, 0, 132, 1, 1.05, 0.95),
    (5, 1, 0.0, 0.0, 0, 0, 1, 1, 0, 132, 1, 1.05, 0.95),
    (6, 1, 0.0, 0.0, 0, 0, 1, 1, 0, 132, 1, 1.05, 0.95),
    (7, 1, 22.8, 10.9, 0, 0, 1, 1, 0, 132, 1, 1.05, 0.95),
    (8, 1, 30.0, 30.0, 0, 0, 1, 1, 0, 132, 1, 1.05, 0.95),
    (9, 1, 0.0, 0.0, 0, 0, 1, 1, 0, 33, 1, 1.05, 0.95),
    (10, 1, 5.8, 2.0, 0, 0, 3, 1, 0, 33, 1, 1.05, 0.95),
    (11, 1, 0.0, 0.0, 0, 0, 1, 1, 0, 33, 1, 1.05, 0.95),
    (12, 1, 11.2, 7.5, 0, 0, 2, 1, 0, 33, 1, 1.05, 0.95),
    (13, 2, 0.0, 0.0, 0, 0, 2, 1, 0, 33, 1, 1.05, 0.95),
    (14, 1, 6.2, 1.6, 0, 0, 2, 1, 0, 33, 1, 1.05, 0.95),
    (15, 1, 8.2, 2.5, 0, 0, 2, 1, 0, 33, 1, 1.05, 0.95),
    (16, 1, 3.5, 1.8, 0, 0, 2, 1, 0, 33, 1, 1.05, 0.95),
    (17, 1, 9.0, 5.8, 0, 0, 2, 1, 0, 33, 1, 1.05, 0.95),
    (18, 1, 3.2, 0.9, 0, 0, 2, 1, 0, 33, 1, 1.05, 0.95),
    (19, 1, 9.5, 3.4, 0, 0, 2, 1, 0, 33, 1, 1.05, 0.95),
    (20, 1, 2.2, 0.7, 0, 0, 2, 1, 0, 33, 1, 1.05, 0.95),
    (21, 1, 17.5, 11.2, 0, 0, 3, 1, 0, 33, 1, 1.05, 0.95),
    (22, 2, 0.0, 0.0, 0, 0, 3, 1, 0, 33, 1, 1.05, 0.95),
    (23, 2, 3.2, 1.6, 0, 0, 2, 1, 0, 33, 1, 1.05, 0.95),
    (24, 1, 8.7, 6.7, 0, 0.043, 3, 1, 0, 33, 1, 1.05, 0.95),
    (25, 1, 0.0, 0.0, 0, 0, 3, 1, 0, 33, 1, 1.05, 0.95),
    (26, 1, 3.5, 2.3, 0, 0, 3, 1, 0, 33, 1, 1.05, 0.95),
    (27, 2, 0.0, 0.0, 0, 0, 3, 1, 0, 33, 1, 1.05, 0.95),
    (28, 1, 0.0, 0.0, 0, 0, 1, 1, 0, 132, 1, 1.05, 0.95),
    (29, 1, 2.4, 0.9, 0, 0, 3, 1, 0, 33, 1, 1.05, 0.95),
    (30, 1, 10.6, 1.9, 0, 0, 3, 1, 0, 33, 1, 1.05, 0.95),
]

# Bs values in MVAr at V = 1.0 pu (MATPOWER convention); classic IEEE
# shunt-capacitor placement at buses 10 and 24.
CASE30_BS_MVAR = {10: 19.0, 24: 4.3}

CASE30_GEN = [
    # bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin
    (1, 23.54, 0, 150.0, -20.0, 1.0, 100, 1, 80.0, 0),
    (2, 60.97, 0, 60.0, -20.0, 1.0, 100, 1, 80.0, 0),
    (22, 21.59, 0, 62.5, -15.0, 1.0, 100, 1, 50.0, 0),
    (27, 26.91, 0, 48.7, -15.0, 1.0, 100, 1, 55.0, 0),
    (23, 19.2, 0, 40.0, -10.0, 1.0, 100, 1, 30.0, 0),
    (13, 37.0, 0, 44.7, -15.0, 1.0, 100, 1, 40.0, 0),
]

CASE30_BRANCH = [
    # f t r x b rateA
    (1, 2, 0.02, 0.06, 0.03, 130),
    (1, 3, 0.05, 0.19, 0.02, 130),
    (2, 4, 0.06, 0.17, 0.02, 65),
    (3, 4, 0.01, 0.04, 0.0, 130),
    (2, 5, 0.05, 0.2, 0.02, 130),
    (2, 6, 0.06, 0.18, 0.02, 65),
    (4, 6, 0.01, 0.04, 0.0, 90),
    (5, 7, 0.05, 0.12, 0.01, 70),
    (6, 7, 0.03, 0.08, 0.01, 130),
    (6, 8, 0.01, 0.04, 0.0, 32),
    (6, 9, 0.0, 0.21, 0.0, 65),
    (6, 10, 0.0, 0.56, 0.0, 32),
    (9, 11, 0.0, 0.21, 0.0, 65),
    (9, 10, 0.0, 0.11, 0.0, 65),
    (4, 12, 0.0, 0.26, 0.0, 65),
    (12, 13, 0.0, 0.14, 0.0, 65),
    (12, 14, 0.12, 0.26, 0.0, 32),
    (12, 15, 0.07, 0.13, 0.0, 32),
    (12, 16, 0.09, 0.2, 0.0, 32),
    (14, 15, 0.22, 0.2, 0.0, 16),
    (16, 17, 0.08, 0.19, 0.0, 16),
    (15, 18, 0.11, 0.22, 0.0, 16),
    (18, 19, 0.06, 0.13, 0.0, 16),
    (19, 20, 0.03, 0.07, 0.0, 32),
    (10, 20, 0.09, 0.21, 0.0, 32),
    (10, 17, 0.03, 0.08, 0.0, 32),
    (10, 21, 0.03, 0.07, 0.0, 32),
    (10, 22, 0.07, 0.15, 0.0, 32),
    (21, 22, 0.01, 0.02, 0.0, 32),
    (15, 23, 0.1, 0.2, 0.0, 16),
    (22, 24, 0.12, 0.18, 0.0, 16),
    (23, 24, 0.13, 0.27, 0.0, 16),
    (24, 25, 0.19, 0.33, 0.0, 16),
    (25, 26, 0.25, 0.38, 0.0, 16),
    (25, 27, 0.11, 0.21, 0.0, 16),
    (28, 27, 0.0, 0.4, 0.0, 65),
    (27, 29, 0.22, 0.42, 0.0, 16),
    (27, 30, 0.32, 0.6, 0.0, 16),
    (29, 30, 0.24, 0.45, 0.0, 16),
    (8, 28, 0.06, 0.2, 0.02, 32),
    (6, 28, 0.02, 0.06, 0.01, 32),
]

# Ratings raised so the base case clears every limit with margin; the
# scenario generator is what introduces stress.
CASE30_RATING_OVERRIDES = {(6, 8): 48.0}


def write_case30():
    lines = []
    lines.append("function mpc = case30")
    lines.append("% 30-bus transmission test case, 41 branches, 20 load buses.")
    lines.append("% Voltage-base column uses the classic 132/33 kV split; per-unit")
    lines.append("% impedance data is on the 100 MVA system base and is unaffected.")
    lines.append("% Line 6-8 rating raised from 32 to 48 MVA so the base case is")
    lines.append("% violation free; all other ratings as published.")
    lines.append("mpc.baseMVA = 100;")
    lines.append("")
    lines.append("%% bus data")
    lines.append("%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin")
    lines.append("mpc.bus = [")
    for row in CASE30_BUS:
        (i, t, pd, qd, gs, _bs, area, vm, va, kv, zone, vmax, vmin) = row
        bs = CASE30_BS_MVAR.get(i, 0.0)
        lines.append(
            f"\t{i}\t{t}\t{pd}\t{qd}\t{gs}\t{bs}\t{area}\t{vm}\t{va}\t{kv}\t{zone}\t{vmax}\t{vmin};"
        )
    lines.append("];")
    lines.append("")
    lines.append("%% generator data")
    lines.append("%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin")
    lines.append("mpc.gen = [")
    for (bus, pg, qg, qmax, qmin, vg, mbase, status, pmax, pmin) in CASE30_GEN:
        lines.append(
            f"\t{bus}\t{pg}\t{qg}\t{qmax}\t{qmin}\t{vg}\t{mbase}\t{status}\t{pmax}\t{pmin};"
        )
    lines.append("];")
    lines.append("")
    lines.append("%% branch data")
    lines.append("%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus")
    lines.append("mpc.branch = [")
    for (f, t, r, x, b, rate) in CASE30_BRANCH:
        rate = CASE30_RATING_OVERRIDES.get((f, t), rate)
        lines.append(f"\t{f}\t{t}\t{r}\t{x}\t{b}\t{rate}\t0\t0\t0\t0\t1;")
    lines.append("];")
    lines.append("")
    with open(os.path.join(OUT, "case30.m"), "w") as fh:
        fh.write("\n".join(lines))


# ---------------------------------------------------------------- case69.m

# Baran & Wu 69-bus feeder: (from, to, R_ohm, X_ohm, P_kw, Q_kvar) with the
# load attached at the `to` bus.
CASE69_BRANCHES = [
    (1, 2, 0.0005, 0.0012, 0.0, 0.0),
    (2, 3, 0.0005, 0.0012, 0.0, 0.0),
    (3, 4, 0.0015, 0.0036, 0.0, 0.0),
    (4, 5, 0.0251, 0.0294, 0.0, 0.0),
    (5, 6, 0.3660, 0.1864, 2.6, 2.2),
    (6, 7, 0.3811, 0.1941, 40.4, 30.0),
    (7, 8, 0.0922, 0.0470, 75.0, 54.0),
    (8, 9, 0.0493, 0.0251, 30.0, 22.0),
    (9, 10, 0.8190, 0.2707, 28.0, 19.0),
    (10, 11, 0.1872, 0.0619, 145.0, 104.0),
    (11, 12, 0.7114, 0.2351, 145.0, 104.0),
    (12, 13, 1.0300, 0.3400, 8.0, 5.0),
    (13, 14, 1.0440, 0.3450, 8.0, 5.5),
    (14, 15, 1.0580, 0.3496, 0.0, 0.0),
    (15, 16, 0.1966, 0.0650, 45.5, 30.0),
    (16, 17, 0.3744, 0.1238, 60.0, 35.0),
    (17, 18, 0.0047, 0.0016, 60.0, 35.0),
    (18, 19, 0.3276, 0.1083, 0.0, 0.0),
    (19, 20, 0.2106, 0.0690, 1.0, 0.6),
    (20, 21, 0.3416, 0.1129, 114.0, 81.0),
    (21, 22, 0.0140, 0.0046, 5.0, 3.5),
    (22, 23, 0.1591, 0.0526, 0.0, 0.0),
    (23, 24, 0.3463, 0.1145, 28.0, 20.0),
    (24, 25, 0.7488, 0.2475, 0.0, 0.0),
    (25, 26, 0.3089, 0.1021, 14.0, 10.0),
    (26, 27, 0.1732, 0.0572, 14.0, 10.0),
    (3, 28, 0.0044, 0.0108, 26.0, 18.6),
    (28, 29, 0.0640, 0.1565, 26.0, 18.6),
    (29, 30, 0.3978, 0.1315, 0.0, 0.0),
    (30, 31, 0.0702, 0.0232, 0.0, 0.0),
    (31, 32, 0.3510, 0.1160, 0.0, 0.0),
    (32, 33, 0.8390, 0.2816, 14.0, 10.0),
    (33, 34, 1.7080, 0.5646, 19.5, 14.0),
    (34, 35, 1.4740, 0.4873, 6.0, 4.0),
    (3, 36, 0.0044, 0.0108, 26.0, 18.55),
    (36, 37, 0.0640, 0.1565, 26.0, 18.55),
    (37, 38, 0.1053, 0.1230, 0.0, 0.0),
    (38, 39, 0.0304, 0.0355, 24.0, 17.0),
    (39, 40, 0.0018, 0.0021, 24.0, 17.0),
    (40, 41, 0.7283, 0.8509, 1.2, 1.0),
    (41, 42, 0.3100, 0.3623, 0.0, 0.0),
    (42, 43, 0.0410, 0.0478, 6.0, 4.3),
    (43, 44, 0.0092, 0.0116, 0.0, 0.0),
    (44, 45, 0.1089, 0.1373, 39.22, 26.3),
    (45, 46, 0.0009, 0.0012, 39.22, 26.3),
    (4, 47, 0.0034, 0.0084, 0.0, 0.0),
    (47, 48, 0.0851, 0.2083, 79.0, 56.4),
    (48, 49, 0.2898, 0.7091, 384.7, 274.5),
    (49, 50, 0.0822, 0.2011, 384.7, 274.5),
    (8, 51, 0.0928, 0.0473, 40.5, 28.3),
    (51, 52, 0.3319, 0.1114, 3.6, 2.7),
    (9, 53, 0.1740, 0.0886, 4.35, 3.5),
    (53, 54, 0.2030, 0.1034, 26.4, 19.0),
    (54, 55, 0.2842, 0.1447, 24.0, 17.2),
    (55, 56, 0.2813, 0.1433, 0.0, 0.0),
    (56, 57, 1.5900, 0.5337, 0.0, 0.0),
    (57, 58, 0.7837, 0.2630, 0.0, 0.0),
    (58, 59, 0.3042, 0.1006, 100.0, 72.0),
    (59, 60, 0.3861, 0.1172, 0.0, 0.0),
    (60, 61, 0.5075, 0.2585, 1244.0, 888.0),
    (61, 62, 0.0974, 0.0496, 32.0, 23.0),
    (62, 63, 0.1450, 0.0738, 0.0, 0.0),
    (63, 64, 0.7105, 0.3619, 227.0, 162.0),
    (64, 65, 1.0410, 0.5302, 59.0, 42.0),
    (11, 66, 0.2012, 0.0611, 18.0, 13.0),
    (66, 67, 0.0047, 0.0014, 18.0, 13.0),
    (12, 68, 0.7394, 0.2444, 28.0, 20.0),
    (68, 69, 0.0047, 0.0016, 28.0, 20.0),
]

# 2 kW keep-alive loads at otherwise unloaded buses (59 load points total).
CASE69_KEEPALIVE = [15, 19, 23, 25, 30, 31, 32, 38, 42, 44, 47]

CASE69_BASE_MVA = 10.0
CASE69_KV = 12.66

# Per-branch RATE_A in MVA: headroom over the base-case flow so the base
# case is violation free while moderate load growth can cause overloads.
CASE69_DEFAULT_RATE = 1.0
CASE69_RATING_OVERRIDES = {
    (1, 2): 6.0, (2, 3): 6.0, (3, 4): 5.0, (4, 5): 4.0,
    (5, 6): 4.0, (6, 7): 4.0, (7, 8): 4.0, (8, 9): 3.5,
    (9, 10): 1.5, (10, 11): 1.5, (11, 12): 1.2,
    (3, 28): 1.0, (3, 36): 1.5, (4, 47): 2.0, (47, 48): 2.0,
    (48, 49): 1.5, (49, 50): 1.0,
    (9, 53): 3.0, (53, 54): 3.0, (54, 55): 3.0, (55, 56): 3.0,
    (56, 57): 3.0, (57, 58): 3.0, (58, 59): 3.0, (59, 60): 2.5,
    (60, 61): 2.5, (61, 62): 1.0, (62, 63): 1.0, (63, 64): 1.0,
}


def write_case69():
    z_base = CASE69_KV * CASE69_KV / CASE69_BASE_MVA
    load_at = {}
    for (f, t, r, x, p, q) in CASE69_BRANCHES:
        if p != 0.0 or q != 0.0:
            load_at[t] = (p, q)
    for bus in CASE69_KEEPALIVE:
        assert bus not in load_at
        load_at[bus] = (2.0, 1.0)

    lines = []
    lines.append("function mpc = case69")
    lines.append("% 69-bus radial distribution feeder (12.66 kV), 68 branches.")
    lines.append("% Branch impedances converted from the published ohm table to")
    lines.append("% per-unit on the 10 MVA base. Eleven 2 kW keep-alive loads are")
    lines.append("% added at otherwise unloaded buses (59 load points in total).")
    lines.append("% Voltage band 0.90-1.05 pu: the published base case dips to")
    lines.append("% 0.909 pu at bus 65, and the base case must be violation free.")
    lines.append("% Line ratings are sized with margin over base-case flows.")
    lines.append("mpc.baseMVA = 10;")
    lines.append("")
    lines.append("%% bus data")
    lines.append("%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin")
    lines.append("mpc.bus = [")
    for bus in range(1, 70):
        bus_type = 3 if bus == 1 else 1
        p, q = load_at.get(bus, (0.0, 0.0))
        lines.append(
            f"\t{bus}\t{bus_type}\t{p / 1000.0:.6g}\t{q / 1000.0:.6g}\t0\t0\t1\t1\t0"
            f"\t{CASE69_KV}\t1\t1.05\t0.90;"
        )
    lines.append("];")
    lines.append("")
    lines.append("%% generator data")
    lines.append("%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin")
    lines.append("mpc.gen = [")
    lines.append("\t1\t0\t0\t100\t-100\t1.0\t10\t1\t100\t0;")
    lines.append("];")
    lines.append("")
    lines.append("%% branch data")
    lines.append("%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus")
    lines.append("mpc.branch = [")
    for (f, t, r, x, _p, _q) in CASE69_BRANCHES:
        rate = CASE69_RATING_OVERRIDES.get((f, t), CASE69_DEFAULT_RATE)
        lines.append(
            f"\t{f}\t{t}\t{r / z_base:.8f}\t{x / z_base:.8f}\t0\t{rate}\t0\t0\t0\t0\t1;"
        )
    lines.append("];")
    lines.append("")
    with open(os.path.join(OUT, "case69.m"), "w") as fh:
        fh.write("\n".join(lines))


# ------------------------------------------------------- cigre_mv.gridcase.json

CIGRE_KV = 20.0
CIGRE_BASE_MVA = 100.0

# (from, to, length_km, kind); kind: cable (feeder 1) or ohl (feeder 2 / tie)
CIGRE_LINES = [
    (1, 2, 2.82, "cable"),
    (2, 3, 4.42, "cable"),
    (3, 4, 0.61, "cable"),
    (4, 5, 0.56, "cable"),
    (5, 6, 1.54, "cable"),
    (6, 7, 0.24, "cable"),
    (7, 8, 1.67, "cable"),
    (8, 9, 0.32, "cable"),
    (9, 10, 0.77, "cable"),
    (10, 11, 0.33, "cable"),
    (11, 4, 0.49, "cable"),
    (3, 8, 1.30, "cable"),
    (8, 14, 2.00, "ohl"),
    (12, 13, 4.89, "ohl"),
    (13, 14, 2.99, "ohl"),
]

LINE_PARAMS = {
    # ohm/km and siemens/km (from 151.17 nF/km and 10.1 nF/km at 50 Hz)
    "cable": {"r": 0.501, "x": 0.716, "b": 4.74925e-05, "s_max": 12.0},
    "ohl": {"r": 0.510, "x": 0.366, "b": 3.1730e-06, "s_max": 7.0},
}

# Normally open tie switches S1 (6-7), S2 (11-4); S3 (8-14) is kept closed so
# feeder 2 stays energized with the HV bus folded away.
CIGRE_SWITCHES = [
    ("sw_s1", "line_6_7", False),
    ("sw_s2", "line_11_4", False),
    ("sw_s3", "line_8_14", True),
]

# Aggregated residential + commercial demand per bus (MW, MVAr).
CIGRE_LOADS = {
    1: (19.839, 4.637),
    3: (0.531, 0.139),
    4: (0.436, 0.089),
    5: (0.735, 0.149),
    6: (0.554, 0.112),
    8: (0.593, 0.120),
    10: (0.556, 0.122),
    11: (0.333, 0.068),
    12: (20.010, 4.693),
    13: (0.038, 0.013),
    14: (0.581, 0.165),
}

CIGRE_CURTAILABLE = [5, 8, 12, 14]


def write_cigre():
    doc = {
        "schema_version": "1",
        "base_mva": CIGRE_BASE_MVA,
        "buses": [],
        "branches": [],
        "switches": [],
        "loads": [],
        "generators": [],
        "batteries": [],
        "battery_budget": 2,
    }
    for bus in range(1, 15):
        kind = "slack" if bus == 1 else ("pv" if bus == 12 else "pq")
        doc["buses"].append(
            {
                "id": f"bus_{bus}",
                "name": f"bus_{bus}",
                "nominal_kv": CIGRE_KV,
                "kind": kind,
                "v_min_pu": 0.95,
                "v_max_pu": 1.05,
                "in_service": True,
            }
        )
    switched = {branch for (_sw, branch, _st) in CIGRE_SWITCHES}
    for (f, t, length, kind) in CIGRE_LINES:
        p = LINE_PARAMS[kind]
        line_id = f"line_{f}_{t}"
        doc["branches"].append(
            {
                "id": line_id,
                "from_bus": f"bus_{f}",
                "to_bus": f"bus_{t}",
                "r_ohm": round(p["r"] * length, 6),
                "x_ohm": round(p["x"] * length, 6),
                "b_shunt_siemens": round(p["b"] * length, 12),
                "s_max_mva": p["s_max"],
                "i_max_ka": round(p["s_max"] / (3 ** 0.5 * CIGRE_KV), 6),
                "in_service": True,
                "switchable": line_id in switched,
            }
        )
    for (sw, branch, closed) in CIGRE_SWITCHES:
        doc["switches"].append({"id": sw, "branch_id": branch, "closed": closed})
    for bus, (p, q) in sorted(CIGRE_LOADS.items()):
        doc["loads"].append(
            {
                "id": f"load_{bus}",
                "bus_id": f"bus_{bus}",
                "p_mw": p,
                "q_mvar": q,
                "curtailable": bus in CIGRE_CURTAILABLE,
                "gamma": 0.0,
                "gamma_max": 0.5 if bus in CIGRE_CURTAILABLE else 0.0,
            }
        )
    doc["generators"] = [
        {
            "id": "gen_source",
            "bus_id": "bus_1",
            "p_mw": 0.0,
            "v_set_pu": 1.03,
            "q_min_mvar": -999.0,
            "q_max_mvar": 999.0,
        },
        {
            "id": "gen_sub2",
            "bus_id": "bus_12",
            "p_mw": 19.5,
            "v_set_pu": 1.02,
            "q_min_mvar": -8.0,
            "q_max_mvar": 8.0,
        },
    ]
    with open(os.path.join(OUT, "cigre_mv.gridcase.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    write_case30()
    write_case69()
    write_cigre()
    print("wrote case files to", OUT)
