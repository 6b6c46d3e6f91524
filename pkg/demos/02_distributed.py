"""Diagonal (signalling-free) coordination of two and three loops.

A diagonal coordination matrix only rescales each loop's own step, so no
measurements need to be exchanged. For two loops a closed-form choice of
gains always works; for three loops a small-gain schedule is searched, and
some systems provably admit no diagonal fix at all.
"""

import numpy as np

from soncoord import NotCoordinatable, coordinate_2, coordinate_3, gradient_coordinator
from soncoord import is_hurwitz_eigen

A2 = np.array([[-1.0, 3.0], [3.0, -1.0]])
d2 = coordinate_2(A2)
print("two loops: gains", d2.c, "-> CA Hurwitz:", is_hurwitz_eigen(d2.C @ A2).is_hurwitz)

A3 = np.array([[-1.0, 2.0, 0.5], [2.5, -1.0, 1.0], [0.3, 1.5, -0.5]])
print("three loops, uncoordinated abscissa:", round(is_hurwitz_eigen(A3).spectral_abscissa, 3))
d3 = coordinate_3(A3)
print(f"three loops: eps = {d3.epsilon:g}, gains {np.round(d3.c, 4)}",
      "-> abscissa", round(is_hurwitz_eigen(d3.C @ A3).spectral_abscissa, 4))

cyclic = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
try:
    coordinate_3(cyclic)
except NotCoordinatable as exc:
    print("cyclic coupling:", exc)

# With neighbour signalling the gradient coordinator always works.
C = gradient_coordinator(cyclic)
print("gradient coordinator on the cyclic system, CA =\n", C @ cyclic)
