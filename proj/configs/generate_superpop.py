#!/usr/bin/env python3
"""Writes the synthetic superpopulation specs shipped in configs/.

Weekly bracket frequencies come from a lognormal body plus a uniform
low-income component; every stratum shares them and is rescaled by its median.
"""
import json
import math
from pathlib import Path

BRACKET_WIDTH = 50.0
N_BRACKETS = 57
BODY_MEDIAN = 1050.0
BODY_SIGMA = 0.7
LOW_SHARE = 0.12
LOW_TOP = 350.0


def cdf(y):
    body = 0.5 * (1.0 + math.erf(math.log(y / BODY_MEDIAN) / (BODY_SIGMA * math.sqrt(2.0)))) if y > 0 else 0.0
    low = min(max(y / LOW_TOP, 0.0), 1.0)
    return (1.0 - LOW_SHARE) * body + LOW_SHARE * low


def frequencies():
    bounds = [BRACKET_WIDTH * (i + 1) for i in range(N_BRACKETS - 1)]
    cum = [cdf(b) for b in bounds]
    r = [round(100.0 * (c - p), 4) for c, p in zip(cum, [0.0] + cum[:-1])]
    r.append(round(100.0 - sum(r), 4))
    k = max(range(len(r)), key=lambda i: r[i])
    r[k] = round(r[k] + 100.0 - sum(r), 4)
    return bounds, r


def weekly_median(bounds, r):
    lo, acc = 0.0, 0.0
    for b, ri in zip(bounds, r):
        if acc + ri >= 50.0:
            return lo + (50.0 - acc) / ri * (b - lo)
        lo, acc = b, acc + ri
    raise ValueError("median above the last bound")


def spec(label, strata, bounds, r):
    eta = round(52.0 * weekly_median(bounds, r))
    return {
        "label": label,
        "population_median": eta,
        "strata": [
            {
                "proportion": p,
                "median": round(eta * m),
                "mean": round(eta * m * ratio),
                "brackets": bounds,
                "frequencies": r,
            }
            for p, m, ratio in strata
        ],
    }


def main():
    bounds, r = frequencies()
    out = Path(__file__).resolve().parent
    # (proportion, median relative to the population median, mean / median)
    twelve = [
        (0.078, 0.42, 1.30), (0.086, 0.95, 1.25), (0.092, 1.22, 1.27), (0.088, 1.30, 1.30),
        (0.081, 1.18, 1.32), (0.066, 0.74, 1.28), (0.079, 0.36, 1.26), (0.085, 0.80, 1.25),
        (0.091, 0.94, 1.26), (0.089, 0.96, 1.27), (0.083, 0.86, 1.28), (0.082, 0.52, 1.26),
    ]
    desk = [(0.30, 0.55, 1.26), (0.25, 0.95, 1.25), (0.25, 1.25, 1.28), (0.20, 0.80, 1.26)]
    files = {
        "superpop_synthetic12.json": spec("synthetic Australia-like income mixture, 12 strata (not ABS data)", twelve, bounds, r),
        "superpop_desk.json": spec("synthetic desk-scale income mixture, 4 strata (not ABS data)", desk, bounds, r),
    }
    for name, content in files.items():
        (out / name).write_text(json.dumps(content, indent=1) + "\n")


if __name__ == "__main__":
    main()
