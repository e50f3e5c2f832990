#!/usr/bin/env python3
"""Emit data/alarm.json: a 37-variable patient-monitoring network.

This is a hand-maintained rendition of the classic ALARM benchmark. The
numbers follow the published network closely but are not guaranteed to match
it digit for digit; what matters here is the shape: many conditional tables
contain rows that repeat or go constant once one parent takes a particular
value, which is exactly the regime the local-structure learners are built
for. Run from the repository root:

    python3 tools/make_alarm.py > data/alarm.json
"""

import itertools
import json
import sys

TF = ["TRUE", "FALSE"]
LNH = ["LOW", "NORMAL", "HIGH"]
ZLNH = ["ZERO", "LOW", "NORMAL", "HIGH"]
INTUB = ["NORMAL", "ESOPHAGEAL", "ONESIDED"]

VARIABLES = [
    ("HYPOVOLEMIA", TF),
    ("LVFAILURE", TF),
    ("HISTORY", TF),
    ("LVEDVOLUME", LNH),
    ("CVP", LNH),
    ("PCWP", LNH),
    ("STROKEVOLUME", LNH),
    ("ERRLOWOUTPUT", TF),
    ("ERRCAUTER", TF),
    ("INSUFFANESTH", TF),
    ("ANAPHYLAXIS", TF),
    ("TPR", LNH),
    ("KINKEDTUBE", TF),
    ("INTUBATION", INTUB),
    ("DISCONNECT", TF),
    ("MINVOLSET", LNH),
    ("VENTMACH", ZLNH),
    ("VENTTUBE", ZLNH),
    ("VENTLUNG", ZLNH),
    ("VENTALV", ZLNH),
    ("MINVOL", ZLNH),
    ("ARTCO2", LNH),
    ("EXPCO2", ZLNH),
    ("FIO2", ["LOW", "NORMAL"]),
    ("PVSAT", LNH),
    ("SHUNT", ["NORMAL", "HIGH"]),
    ("SAO2", LNH),
    ("PULMEMBOLUS", TF),
    ("PAP", LNH),
    ("PRESS", ZLNH),
    ("CATECHOL", ["NORMAL", "HIGH"]),
    ("HR", LNH),
    ("HRBP", LNH),
    ("HREKG", LNH),
    ("HRSAT", LNH),
    ("CO", LNH),
    ("BP", LNH),
]

CARD = {name: values for name, values in VARIABLES}


def identity4(value, hit=0.97):
    """Four-state distribution concentrated on `value`."""
    miss = round((1.0 - hit) / 3, 10)
    dist = [miss] * 4
    dist[ZLNH.index(value)] = hit
    return dist


def identity3(value, hit=0.98):
    miss = round((1.0 - hit) / 2, 10)
    dist = [miss] * 3
    dist[LNH.index(value)] = hit
    return dist


def hrbp(err, hr):
    if err == "TRUE":
        return {
            "LOW": [0.98, 0.01, 0.01],
            "NORMAL": [0.40, 0.59, 0.01],
            "HIGH": [0.30, 0.40, 0.30],
        }[hr]
    return identity3(hr)


def cauter_read(err, hr):
    if err == "TRUE":
        third = 1.0 / 3.0
        return [third, third, third]
    return identity3(hr)


def expco2(artco2, ventlung):
    if ventlung == "ZERO":
        return identity4("ZERO")
    return identity4({"LOW": "LOW", "NORMAL": "NORMAL", "HIGH": "HIGH"}[artco2])


def minvol(ventlung, intubation):
    if intubation == "ESOPHAGEAL":
        return identity4("ZERO")
    return identity4(ventlung)


def pvsat(fio2, ventalv):
    table = {
        ("LOW", "ZERO"): [1.00, 0.00, 0.00],
        ("LOW", "LOW"): [0.99, 0.01, 0.00],
        ("LOW", "NORMAL"): [0.95, 0.04, 0.01],
        ("LOW", "HIGH"): [0.95, 0.04, 0.01],
        ("NORMAL", "ZERO"): [1.00, 0.00, 0.00],
        ("NORMAL", "LOW"): [0.95, 0.04, 0.01],
        ("NORMAL", "NORMAL"): [0.01, 0.95, 0.04],
        ("NORMAL", "HIGH"): [0.01, 0.01, 0.98],
    }
    return table[(fio2, ventalv)]


def sao2(shunt, pvsat_val):
    if shunt == "NORMAL":
        return identity3(pvsat_val)
    return {
        "LOW": [0.98, 0.01, 0.01],
        "NORMAL": [0.98, 0.01, 0.01],
        "HIGH": [0.69, 0.30, 0.01],
    }[pvsat_val]


def shunt(pulmembolus, intubation):
    if pulmembolus == "TRUE":
        return [0.01, 0.99] if intubation == "ONESIDED" else [0.10, 0.90]
    return [0.05, 0.95] if intubation == "ONESIDED" else [0.95, 0.05]


def press(kinked, intubation, venttube):
    if venttube == "ZERO":
        return identity4("ZERO")
    if intubation == "ESOPHAGEAL":
        return identity4("LOW")
    if kinked == "FALSE":
        if intubation == "NORMAL":
            return identity4(venttube)
        # One-sided: the same flow reads one step higher.
        return identity4(
            {"LOW": "NORMAL", "NORMAL": "HIGH", "HIGH": "HIGH"}[venttube])
    if intubation == "NORMAL":
        return {
            "LOW": [0.01, 0.29, 0.30, 0.40],
            "NORMAL": [0.01, 0.01, 0.08, 0.90],
            "HIGH": [0.01, 0.01, 0.01, 0.97],
        }[venttube]
    return {  # kinked and one-sided
        "LOW": [0.01, 0.01, 0.08, 0.90],
        "NORMAL": [0.01, 0.01, 0.01, 0.97],
        "HIGH": [0.01, 0.01, 0.01, 0.97],
    }[venttube]


def venttube(ventmach, disconnect):
    if disconnect == "TRUE":
        return identity4("ZERO")
    return identity4(ventmach)


def ventlung(kinked, intubation, venttube_val):
    if intubation == "ESOPHAGEAL":
        return identity4("ZERO")
    if kinked == "FALSE":
        if intubation == "NORMAL":
            return identity4(venttube_val)
        return {  # one-sided
            "ZERO": [0.97, 0.01, 0.01, 0.01],
            "LOW": [0.95, 0.03, 0.01, 0.01],
            "NORMAL": [0.50, 0.48, 0.01, 0.01],
            "HIGH": [0.30, 0.68, 0.01, 0.01],
        }[venttube_val]
    if intubation == "NORMAL":
        return {
            "ZERO": [0.97, 0.01, 0.01, 0.01],
            "LOW": [0.95, 0.03, 0.01, 0.01],
            "NORMAL": [0.40, 0.58, 0.01, 0.01],
            "HIGH": [0.30, 0.68, 0.01, 0.01],
        }[venttube_val]
    return {  # kinked and one-sided
        "ZERO": [0.97, 0.01, 0.01, 0.01],
        "LOW": [0.97, 0.01, 0.01, 0.01],
        "NORMAL": [0.92, 0.06, 0.01, 0.01],
        "HIGH": [0.88, 0.10, 0.01, 0.01],
    }[venttube_val]


def ventalv(intubation, ventlung_val):
    if intubation == "ESOPHAGEAL":
        return identity4("ZERO")
    if intubation == "NORMAL":
        return identity4(ventlung_val)
    # One-sided: only one lung ventilated, alveolar level drops one step.
    return identity4(
        {"ZERO": "ZERO", "LOW": "ZERO", "NORMAL": "LOW", "HIGH": "NORMAL"}[
            ventlung_val])


def artco2(ventalv_val):
    return {
        "ZERO": [0.01, 0.01, 0.98],
        "LOW": [0.01, 0.01, 0.98],
        "NORMAL": [0.04, 0.92, 0.04],
        "HIGH": [0.90, 0.09, 0.01],
    }[ventalv_val]


def catechol(insuffanesth, sao2_val, tpr_val, artco2_val):
    risk = ((insuffanesth == "TRUE") + (sao2_val == "LOW")
            + (tpr_val == "LOW") + (artco2_val == "HIGH"))
    p_high = [0.05, 0.30, 0.70, 0.95, 0.99][risk]
    return [round(1.0 - p_high, 10), p_high]


def co(hr, strokevolume):
    return {
        ("LOW", "LOW"): [0.98, 0.01, 0.01],
        ("LOW", "NORMAL"): [0.95, 0.04, 0.01],
        ("LOW", "HIGH"): [0.30, 0.69, 0.01],
        ("NORMAL", "LOW"): [0.95, 0.04, 0.01],
        ("NORMAL", "NORMAL"): [0.04, 0.95, 0.01],
        ("NORMAL", "HIGH"): [0.01, 0.30, 0.69],
        ("HIGH", "LOW"): [0.80, 0.19, 0.01],
        ("HIGH", "NORMAL"): [0.01, 0.04, 0.95],
        ("HIGH", "HIGH"): [0.01, 0.01, 0.98],
    }[(hr, strokevolume)]


def bp(co_val, tpr_val):
    return {
        ("LOW", "LOW"): [0.98, 0.01, 0.01],
        ("LOW", "NORMAL"): [0.98, 0.01, 0.01],
        ("LOW", "HIGH"): [0.90, 0.09, 0.01],
        ("NORMAL", "LOW"): [0.98, 0.01, 0.01],
        ("NORMAL", "NORMAL"): [0.10, 0.85, 0.05],
        ("NORMAL", "HIGH"): [0.05, 0.20, 0.75],
        ("HIGH", "LOW"): [0.30, 0.60, 0.10],
        ("HIGH", "NORMAL"): [0.05, 0.40, 0.55],
        ("HIGH", "HIGH"): [0.01, 0.09, 0.90],
    }[(co_val, tpr_val)]


NODES = [
    ("HYPOVOLEMIA", [], lambda: [0.20, 0.80]),
    ("LVFAILURE", [], lambda: [0.05, 0.95]),
    ("HISTORY", ["LVFAILURE"],
     lambda lv: [0.90, 0.10] if lv == "TRUE" else [0.01, 0.99]),
    ("LVEDVOLUME", ["HYPOVOLEMIA", "LVFAILURE"],
     lambda hypo, lv: {
         ("TRUE", "TRUE"): [0.95, 0.04, 0.01],
         ("TRUE", "FALSE"): [0.98, 0.01, 0.01],
         ("FALSE", "TRUE"): [0.01, 0.09, 0.90],
         ("FALSE", "FALSE"): [0.05, 0.90, 0.05],
     }[(hypo, lv)]),
    ("CVP", ["LVEDVOLUME"],
     lambda lved: {
         "LOW": [0.95, 0.04, 0.01],
         "NORMAL": [0.04, 0.95, 0.01],
         "HIGH": [0.01, 0.29, 0.70],
     }[lved]),
    ("PCWP", ["LVEDVOLUME"],
     lambda lved: {
         "LOW": [0.95, 0.04, 0.01],
         "NORMAL": [0.04, 0.95, 0.01],
         "HIGH": [0.01, 0.04, 0.95],
     }[lved]),
    ("STROKEVOLUME", ["LVFAILURE", "HYPOVOLEMIA"],
     lambda lv, hypo: {
         ("TRUE", "TRUE"): [0.98, 0.01, 0.01],
         ("TRUE", "FALSE"): [0.95, 0.04, 0.01],
         ("FALSE", "TRUE"): [0.50, 0.49, 0.01],
         ("FALSE", "FALSE"): [0.05, 0.90, 0.05],
     }[(lv, hypo)]),
    ("ERRLOWOUTPUT", [], lambda: [0.05, 0.95]),
    ("ERRCAUTER", [], lambda: [0.10, 0.90]),
    ("INSUFFANESTH", [], lambda: [0.10, 0.90]),
    ("ANAPHYLAXIS", [], lambda: [0.01, 0.99]),
    ("TPR", ["ANAPHYLAXIS"],
     lambda ana: [0.98, 0.01, 0.01] if ana == "TRUE" else [0.30, 0.40, 0.30]),
    ("KINKEDTUBE", [], lambda: [0.04, 0.96]),
    ("INTUBATION", [], lambda: [0.92, 0.03, 0.05]),
    ("DISCONNECT", [], lambda: [0.05, 0.95]),
    ("MINVOLSET", [], lambda: [0.05, 0.90, 0.05]),
    ("VENTMACH", ["MINVOLSET"],
     lambda mvs: {
         "LOW": [0.05, 0.93, 0.01, 0.01],
         "NORMAL": [0.05, 0.01, 0.93, 0.01],
         "HIGH": [0.05, 0.01, 0.01, 0.93],
     }[mvs]),
    ("VENTTUBE", ["VENTMACH", "DISCONNECT"], venttube),
    ("VENTLUNG", ["KINKEDTUBE", "INTUBATION", "VENTTUBE"], ventlung),
    ("VENTALV", ["INTUBATION", "VENTLUNG"], ventalv),
    ("MINVOL", ["VENTLUNG", "INTUBATION"], minvol),
    ("ARTCO2", ["VENTALV"], artco2),
    ("EXPCO2", ["ARTCO2", "VENTLUNG"], expco2),
    ("FIO2", [], lambda: [0.05, 0.95]),
    ("PVSAT", ["FIO2", "VENTALV"], pvsat),
    ("SHUNT", ["PULMEMBOLUS", "INTUBATION"], shunt),
    ("SAO2", ["SHUNT", "PVSAT"], sao2),
    ("PULMEMBOLUS", [], lambda: [0.01, 0.99]),
    ("PAP", ["PULMEMBOLUS"],
     lambda pe: [0.01, 0.19, 0.80] if pe == "TRUE" else [0.05, 0.90, 0.05]),
    ("PRESS", ["KINKEDTUBE", "INTUBATION", "VENTTUBE"], press),
    ("CATECHOL", ["INSUFFANESTH", "SAO2", "TPR", "ARTCO2"], catechol),
    ("HR", ["CATECHOL"],
     lambda cat: [0.05, 0.90, 0.05] if cat == "NORMAL" else
     [0.01, 0.09, 0.90]),
    ("HRBP", ["ERRLOWOUTPUT", "HR"], hrbp),
    ("HREKG", ["ERRCAUTER", "HR"], cauter_read),
    ("HRSAT", ["ERRCAUTER", "HR"], cauter_read),
    ("CO", ["HR", "STROKEVOLUME"], co),
    ("BP", ["CO", "TPR"], bp),
]


def main():
    doc = {
        "variables": [
            {"name": name, "values": values} for name, values in VARIABLES
        ],
        "nodes": [],
    }
    for name, parents, dist_fn in NODES:
        rows = []
        domains = [CARD[p] for p in parents]
        for config in itertools.product(*domains):
            dist = dist_fn(*config)
            if abs(sum(dist) - 1.0) > 1e-9:
                raise SystemExit(f"{name} {config}: sums to {sum(dist)}")
            rows.append({"config": list(config), "dist": dist})
        doc["nodes"].append({
            "name": name,
            "parents": parents,
            "cpt": {"type": "table", "rows": rows},
        })
    json.dump(doc, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
