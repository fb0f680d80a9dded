"""Circadian clock under a doubled light input.

Runs the normal form with an input u and with 2u.  After the transient the
estimator difference settles at log 2 and the mRNA oscillation is the same.
"""
import math

import numpy as np

from scaleinv import SCALING, signals, simulate_normal_form
from scaleinv.examples import circadian_normal_form, circadian_transmissible_input, day_night_input


def compare(label, u, period, periods):
    nf = circadian_normal_form()
    z0 = circadian_transmissible_input().z0
    t_end = periods * period
    u2 = signals.transform_signal(SCALING, math.log(2), u)
    grid = np.linspace(0.0, t_end, 96 * periods + 1)
    a = simulate_normal_form(nf, z0, 0.0, u, (0.0, t_end)).resample(grid)
    b = simulate_normal_form(nf, z0, 0.0, u2, (0.0, t_end)).resample(grid)
    late = grid >= t_end - 3 * period
    dp = float(np.mean(b["p_hat"][late] - a["p_hat"][late]))
    dz = float(np.max(np.abs(b["zCm"][late] - a["zCm"][late])))
    print(f"{label}: late mean p_hat difference {dp:.6f} (log 2 = {math.log(2):.6f}), "
          f"max zCm difference {dz:.2e}")


def main():
    pti = circadian_transmissible_input()
    print(f"periodic transmissible input: period {pti.period:.3f} h")
    compare("transmissible input", pti.signal, pti.period, 25)
    compare("day/night input", day_night_input(), 24.0, 30)


if __name__ == "__main__":
    main()
