"""Two gauges of the bistable switch: one transmissible input versus three.

The first normal form has a single transmissible input carrying three
equilibria.  Regauging with tau(z) = log z1 splits it into three inputs,
two stable and one unstable.
"""
import numpy as np

from scaleinv import find_constant_transmissible, gauge_transform
from scaleinv._numerics import sample_box
from scaleinv.examples import bistable_bundle, bistable_gauge


def _report(label, tis):
    print(label)
    for ti in tis:
        print(f"  u_hat = {ti.u_value:.8f}  z* = {np.round(ti.z_star, 8)}  {ti.classification}"
              f"  ({len(ti.equilibria)} equilibria)")


def main():
    b = bistable_bundle()
    nf, nf2 = b.normal_forms["nf"], b.normal_forms["nf2"]
    _report("first gauge:", find_constant_transmissible(nf, b.transmissible_box["nf"]))
    _report("second gauge:", find_constant_transmissible(nf2, b.transmissible_box["nf2"]))

    gauged = gauge_transform(nf, *bistable_gauge())
    pts = sample_box(list(b.z_box) + [b.u_box], 100, np.random.default_rng(0))
    diff = max(np.max(np.abs(gauged.variable_part(s[:-1], s[-1]) - nf2.variable_part(s[:-1], s[-1])))
               for s in pts)
    print(f"max vector-field difference after regauging: {diff:.2e}")


if __name__ == "__main__":
    main()
