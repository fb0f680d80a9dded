"""Scale invariance of the incoherent feed-forward loop.

Doubling the input and the first state leaves the output trajectory unchanged,
and the normal-form estimator p_hat recovers log of the input level.
"""
import math

import numpy as np

from scaleinv import SCALING, invariance_io_test, signals, simulate_normal_form
from scaleinv.examples import feedforward_bundle


def main():
    b = feedforward_bundle()
    u = signals.piecewise([(0.0, signals.constant(0.5)), (5.0, signals.constant(1.0)),
                           (15.0, signals.constant(0.25))], SCALING.domain)
    res = invariance_io_test(b.original, SCALING, b.family, [2.0, 0.5], u, math.log(2), (0.0, 30.0))
    print(f"max |y(u) - y(2u)| over [0, 30]: {res.max_deviation:.2e}")

    tr = simulate_normal_form(b.nf, [0.5], 0.0, signals.constant(0.5, SCALING.domain), (0.0, 50.0))
    for t in (0.0, 5.0, 10.0, 50.0):
        print(f"t = {t:5.1f}  p_hat = {tr(t)[-1]: .8f}  (log 2 = {math.log(2):.8f})")
    print("equilibrium input a/b =", b.params.a / b.params.b, "; u_hat at t=50:",
          float(np.exp(-tr(50.0)[-1]) * 0.5))


if __name__ == "__main__":
    main()
