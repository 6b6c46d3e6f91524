"""Learning the interaction matrix from measurements, one hour at a time.

Operators cannot read A off a datasheet. Here it is estimated twice from a
noisy simulator, once by central differences around the operating point and
once by regression on logged samples, and stored per hour of the day.
"""

import numpy as np

from soncoord import (ConditionDatabase, LinearEvaluator, LinearLoopSystem, SampleSet,
                      finite_difference_estimate, least_squares_estimate)

rng = np.random.default_rng(1)
db = ConditionDatabase()
for hour, scale in (("H03", 0.5), ("H14", 1.0), ("H20", 1.4)):
    truth = LinearLoopSystem(scale * np.array([[-1.0, 3.0], [3.0, -1.0]]), [1.0, -2.0])
    ev = LinearEvaluator(truth)
    A_fd, _ = finite_difference_estimate(ev, np.zeros(2), delta=0.2, repeats=50, rng=rng,
                                         noise_std=0.05)
    samples = SampleSet.collect(ev, rng.uniform(-1, 1, (400, 2)), rng, noise_std=0.05)
    A_ls, b_ls, rms = least_squares_estimate(samples)
    db.put(hour, A_ls, b_ls, len(samples), rms)
    print(f"{hour}: finite-difference error {np.linalg.norm(A_fd - truth.A):.3f}, "
          f"regression error {np.linalg.norm(A_ls - truth.A):.3f}, residual rms {rms:.3f}")

print("stored conditions:", db.keys())
print("busy-hour estimate:\n", np.round(db.get("H20").A, 3))
