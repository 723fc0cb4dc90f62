#!/usr/bin/env python3
"""Writes the model and plan files under models/.

Every probability is an exact "p/q" string so the tool's rational mode kicks
in.  Data-space enumeration is row-major with the last coordinate fastest,
matching the library's index convention.
"""

import json
import os
from fractions import Fraction

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "models")


def frac(x):
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


def dump(name, doc):
    path = os.path.join(OUT, name)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print("wrote", path)


def quartet_panel():
    # Four coordinates; the realisation observes all but the second.
    coords = [
        {"name": "y1", "values": [10, 11]},
        {"name": "y2", "values": [3, 5]},
        {"name": "y3", "values": [4, 6]},
        {"name": "y4", "values": [2, 9]},
    ]
    uniform = [frac(Fraction(1, 16))] * 16
    # Tilt along y2 so the two conditional rows for the missing slot differ.
    tilted = [frac(Fraction(1, 32) if (i // 4) % 2 == 0 else Fraction(3, 32)) for i in range(16)]
    kernels = {
        "1111": [frac(Fraction(1, 2))] * 16,
        "1011": [frac(Fraction(1, 4))] * 16,
        "0000": [frac(Fraction(1, 4))] * 16,
    }
    doc = {
        "space": {"coordinates": coords},
        "data_model": {
            "theta_grid": [{"name": "t0", "values": []}, {"name": "t1", "values": []}],
            "tables": {"t0": uniform, "t1": tilted},
        },
        "missingness_model": {
            "phi_grid": [{"name": "p0", "values": []}],
            "kernels": {"p0": kernels},
        },
        "realisation": {"pattern": [1, 0, 1, 1], "y": ["10", "3", "4", "2"]},
    }
    dump("quartet_panel.json", doc)


def two_unit_mcar():
    thetas = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]
    phis = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]
    tables = {}
    grid = []
    for i, th in enumerate(thetas, 1):
        name = f"t{i}"
        grid.append({"name": name, "values": [frac(th)]})
        # (u1,u2) with u2 fastest: 00, 01, 10, 11
        tables[name] = [
            frac((1 - th) * (1 - th)),
            frac((1 - th) * th),
            frac(th * (1 - th)),
            frac(th * th),
        ]
    kernels = {}
    unit_kernels = {}
    pgrid = []
    for i, ph in enumerate(phis, 1):
        name = f"p{i}"
        pgrid.append({"name": name, "values": [frac(ph)]})
        kernels[name] = {
            "11": [frac(ph * ph)] * 4,
            "10": [frac(ph * (1 - ph))] * 4,
            "01": [frac((1 - ph) * ph)] * 4,
            "00": [frac((1 - ph) * (1 - ph))] * 4,
        }
        unit_kernels[name] = {"1": [frac(ph)] * 2, "0": [frac(1 - ph)] * 2}
    doc = {
        "space": {
            "coordinates": [
                {"name": "u1", "values": ["0", "1"]},
                {"name": "u2", "values": ["0", "1"]},
            ]
        },
        "data_model": {"theta_grid": grid, "tables": tables},
        "missingness_model": {
            "phi_grid": pgrid,
            "kernels": kernels,
            "iid": {
                "n_units": 2,
                "unit_space": {"coordinates": [{"name": "u", "values": ["0", "1"]}]},
                "unit_kernels": unit_kernels,
            },
        },
        "realisation": {"pattern": [1, 0], "y": ["1", "0"]},
    }
    dump("two_unit_mcar.json", doc)


def theorem3_contrast():
    doc = {
        "space": {"coordinates": [{"name": "y", "values": ["0", "1"]}]},
        "data_model": {
            "theta_grid": [{"name": "t0", "values": [frac(Fraction(1, 2))]}],
            "tables": {"t0": [frac(Fraction(1, 2)), frac(Fraction(1, 2))]},
        },
        "missingness_model": {
            "phi_grid": [{"name": "p0", "values": []}],
            "kernels": {
                "p0": {
                    "1": [frac(Fraction(1, 2)), frac(Fraction(4, 5))],
                    "0": [frac(Fraction(1, 2)), frac(Fraction(1, 5))],
                }
            },
        },
        "realisation": {"pattern": [1], "y": ["1"]},
    }
    dump("theorem3_contrast.json", doc)


def heitjan_diggle():
    # Pattern "01" drops x; its kernel value still depends on x.
    pi = {0: Fraction(3, 4), 1: Fraction(1, 4)}  # P(observe both | x)
    full_row = [frac(pi[x]) for x in (0, 0, 1, 1)]
    drop_row = [frac(1 - pi[x]) for x in (0, 0, 1, 1)]
    doc = {
        "space": {
            "coordinates": [
                {"name": "x", "values": ["0", "1"]},
                {"name": "y", "values": ["0", "1"]},
            ]
        },
        "data_model": {
            "theta_grid": [{"name": "t0", "values": []}, {"name": "t1", "values": []}],
            "tables": {
                "t0": [frac(Fraction(1, 4))] * 4,
                "t1": [frac(Fraction(1, 8)), frac(Fraction(1, 8)), frac(Fraction(3, 8)), frac(Fraction(3, 8))],
            },
        },
        "missingness_model": {
            "phi_grid": [{"name": "p0", "values": []}],
            "kernels": {"p0": {"11": full_row, "01": drop_row}},
        },
        "realisation": {"pattern": [1, 1], "y": ["1", "1"]},
    }
    dump("heitjan_diggle.json", doc)


def monotone_tables():
    # P(Y1=1)=theta, P(Y2=1|Y1=1)=(1+2 theta)/4, P(Y2=1|Y1=0)=(3-2 theta)/8.
    grid = []
    tables = {}
    for k in range(1, 200):
        th = Fraction(k, 200)
        name = f"t{k}"
        grid.append({"name": name, "values": [frac(th)]})
        p11 = th * (1 + 2 * th) / 4
        p10 = th * (3 - 2 * th) / 4
        p01 = (1 - th) * (3 - 2 * th) / 8
        p00 = (1 - th) * (5 + 2 * th) / 8
        assert p00 + p01 + p10 + p11 == 1
        tables[name] = [frac(p00), frac(p01), frac(p10), frac(p11)]
    return grid, tables


def plan_doc(kernels, seed):
    grid, tables = monotone_tables()
    return {
        "space": {
            "coordinates": [
                {"name": "y1", "values": ["0", "1"]},
                {"name": "y2", "values": ["0", "1"]},
            ]
        },
        "data_model": {"theta_grid": grid, "tables": tables},
        "missingness_model": {
            "phi_grid": [{"name": "p0", "values": []}],
            "kernels": {"p0": kernels},
        },
        "n_units": 200,
        "replications": 100000,
        "seed": seed,
        "true_theta": "t100",
        "true_phi": "p0",
        "estimand_component": 0,
        "rules": ["wald_observed", "wald_naive_expected", "likelihood"],
        "confidence": 0.95,
        "likelihood_cutoff": "1/15",
        "verify_profile_consistency": True,
    }


def monotone_mar_plan():
    # Observing Y2 depends on Y1, which every pattern retains.
    obs = {0: Fraction(3, 10), 1: Fraction(4, 5)}
    kernels = {
        "11": [frac(obs[y1]) for y1 in (0, 0, 1, 1)],
        "10": [frac(1 - obs[y1]) for y1 in (0, 0, 1, 1)],
    }
    dump("monotone_mar_plan.json", plan_doc(kernels, 20260822))


def mcar_control_plan():
    p = Fraction(11, 20)
    kernels = {"11": [frac(p)] * 4, "10": [frac(1 - p)] * 4}
    dump("mcar_control_plan.json", plan_doc(kernels, 20260823))


def main():
    os.makedirs(OUT, exist_ok=True)
    quartet_panel()
    two_unit_mcar()
    theorem3_contrast()
    heitjan_diggle()
    monotone_mar_plan()
    mcar_control_plan()


if __name__ == "__main__":
    main()
