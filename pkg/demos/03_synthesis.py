"""Coordination matrices restricted to a communication graph.

Four loops sit on a line; each may only use measurements from its direct
neighbours. The solver looks for the allowed matrix closest to -A^-1 (the
ideal, fully connected choice) whose symmetric part of CA is negative
definite, which certifies stability.
"""

import numpy as np

from soncoord import (LinearLoopSystem, SparsityPattern, SynthesisProblem, is_hurwitz_eigen,
                      pattern_from_adjacency, synthesize)

rng = np.random.default_rng(0)
A = rng.uniform(-2, 2, (4, 4)) - np.eye(4)
system = LinearLoopSystem(A, rng.normal(size=4))
print("uncoordinated abscissa:", round(is_hurwitz_eigen(A).spectral_abscissa, 3))

full = synthesize(SynthesisProblem(system, SparsityPattern.full(4)))
print(f"full pattern:  status {full.status.value}, distance to -A^-1 {full.objective:.2e}, "
      f"cond(CA) {full.cond_CA:.3f}")

line = np.eye(4, dtype=bool) | np.eye(4, k=1, dtype=bool) | np.eye(4, k=-1, dtype=bool)
problem = SynthesisProblem(system, pattern_from_adjacency(line))
sol = synthesize(problem)
print(f"line pattern:  status {sol.status.value}, distance {sol.objective:.3f}, "
      f"lambda_max(CA + (CA)^T) {sol.lambda_max_sym:.3f} (margin {-problem.delta / 2:.3f})")
print("C =\n", np.round(sol.C, 3))
print("equilibrium kept:", np.allclose(sol.C @ (A @ system.theta_star + system.b), 0))

diag = synthesize(SynthesisProblem(system, SparsityPattern.diagonal(4)))
print(f"diagonal only: status {diag.status.value}", f"({diag.certificate})" if diag.certificate else "")
