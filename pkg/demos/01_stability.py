"""Two loops that are stable alone but unstable together.

Each loop's own feedback is negative (-1 on the diagonal), yet the cross
coupling of 3 makes the joint system diverge. This script checks that with
three independent tools: the spectrum, the 2x2 Routh-Hurwitz test and a
Lyapunov certificate.
"""

import numpy as np

from soncoord import (LinearLoopSystem, integrate_linear, is_hurwitz_eigen,
                      lyapunov_certificate, routh_hurwitz_2)

A = np.array([[-1.0, 3.0], [3.0, -1.0]])
system = LinearLoopSystem(A, b=[1.0, 1.0], names=["loop_a", "loop_b"])

print("stand-alone gains:", np.diag(A), "(each loop is stable on its own)")
report = is_hurwitz_eigen(A)
print(f"eigenvalues: {np.sort(report.eigenvalues.real)}")
print(f"spectral abscissa {report.spectral_abscissa:+.2f} -> Hurwitz: {report.is_hurwitz}")
print("Routh-Hurwitz (det > 0 and tr < 0):", routh_hurwitz_2(A))
print("Lyapunov certificate exists:", lyapunov_certificate(A) is not None)

# The equilibrium exists but repels: start next to it and watch the distance grow.
start = system.theta_star + np.array([1e-3, 0.0])
traj = integrate_linear(system, start, t_end=3.0, dt=0.5)
for t, th in zip(traj.times, traj.states):
    print(f"t={t:3.1f}  |theta - theta*| = {np.linalg.norm(th - system.theta_star):.4f}")
