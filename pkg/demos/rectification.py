"""Numerical rectification of a scaling action.

Flows each state along its group orbit back to a cross-section; the flow time
is the canonical coordinate and must equal log x1 for the feed-forward loop.
"""
import math

import numpy as np

from scaleinv import rectify_group_action
from scaleinv.examples import feedforward_bundle


def main():
    b = feedforward_bundle()
    for x in ([0.05, 0.3], [1.0, 0.5], [7.5, 2.0], [20.0, 1.1]):
        z, p_hat = rectify_group_action(b.family, b.cross_section, np.array(x))
        print(f"x = {x}:  z = {z[0]:.10f}  p_hat = {p_hat:.10f}  log x1 = {math.log(x[0]):.10f}")


if __name__ == "__main__":
    main()
