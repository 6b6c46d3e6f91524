"""Three SON loops per cell in a 19-cell LTE layout.

Load balancing tunes pilots, admission control tunes thresholds and coverage
optimisation tunes data power in the seven central cells. The script
linearizes the 21 loops around the start state, synthesizes a coordination
matrix that only links neighbouring cells, and compares coordinated,
uncoordinated and coverage-prioritised runs (about ten seconds).
"""

from soncoord import Scenario, coordination_demo, evaluate_kpis

scenario = Scenario()
kpis = evaluate_kpis(scenario.network, scenario.initial)
print("initial loads of the seven central cells:", kpis.load[:7].round(3))

demo = coordination_demo(scenario)
lin = demo.linearization
for rate, a in demo.sweep_abscissa.items():
    print(f"hotspot {rate:4.0f} users/s: uncoordinated abscissa {a:+.3f}")
print("coordination status:", lin.solution.status.value,
      f"lambda_max(CA + (CA)^T) = {lin.lambda_max_sym:.3f}")

for name, run in (("coordinated", demo.coordinated), ("uncoordinated", demo.uncoordinated),
                  ("coverage x20", demo.weighted)):
    e = run.terminal_errors()
    print(f"{name:14s} load imbalance {e['load_imbalance']:.4f}  blocking {e['blocking']:.4f}  "
          f"outage {e['outage']:.4f}")
