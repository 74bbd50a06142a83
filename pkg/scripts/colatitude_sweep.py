#!/usr/bin/env python3
"""Sweep the zonal diagonal coefficient across colatitudes.

For each theta the script prints the measured cluster coefficient
e_0(x,x,lambda)/sqrt(lambda) at lambda = 1e6 next to 1/(2 pi^2 sin theta).
The blowup toward the pole is the crossover between the sqrt(lambda)
regime on principal orbits and the lambda regime at the fixed points.

Usage: python3 scripts/colatitude_sweep.py [lambda_top] > sweep.csv
"""
import math
import sys

import numpy as np

from equiweyl import lab, spectral
from equiweyl.util import csv_text


def main(argv):
    lam = float(argv[0]) if argv else 1e6
    thetas = np.linspace(0.05, math.pi / 2, 25)
    rows = []
    for th in thetas:
        diag = lambda l: spectral.sphere_diag_direct(0, th, l)
        measured = lab.window_averaged_diag(diag, lam) / math.sqrt(lam)
        predicted = 1.0 / (2.0 * math.pi ** 2 * math.sin(th))
        rows.append([th, measured, predicted, measured / predicted])
    sys.stdout.write(csv_text(
        ["theta", "measured_coefficient", "closed_form", "ratio"], rows))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
