"""Admission control fighting resource allocation in one cell.

One loop sizes the resources x to keep the outage low, the other moves the
admission threshold beta to keep transfer times short. The determinant of
their joint Jacobian tells where the pair has a saddle, and the map is
printed as a coarse character plot ('#' unstable).
"""

import numpy as np

from soncoord import (DEFAULT_MODEL, OperatingPoint, mean_transfer_time, outage,
                      stability_region_scan)

p = OperatingPoint(x=0.8, beta=5.0)
print(f"at x={p.x}, beta={p.beta}: T = {mean_transfer_time(DEFAULT_MODEL, p):.3f} s, "
      f"outage = {outage(DEFAULT_MODEL, p, smoothed=False):.4f}")

xs = np.linspace(0.02, 1.0, 50)
betas = np.linspace(0.0, 20.0, 50)
scan = stability_region_scan(DEFAULT_MODEL, xs, betas)
print(f"{scan.unstable.sum()} of {scan.unstable.size} operating points are unstable\n")
print("beta ->")
for i in range(0, 50, 4):
    row = "".join("#" if u else "." for u in scan.unstable[i, ::2])
    print(f"x={xs[i]:4.2f} {row}")
