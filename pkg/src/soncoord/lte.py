"""Three SON loops per base station in a 19-cell wrap-around LTE network.

Each active cell runs load balancing (pilot power in dB), blocking-rate
control (admission threshold) and coverage control (data power). KPIs are
evaluated on a pixel grid; the resulting vector field is linearized by finite
differences, coordinated by convex synthesis and simulated with the SA
recursion.

Loop order is cell-major, then LB/AC/OP: ``theta = (P_1, x_1, D_1, P_2, ...)``
over the active cells in index order. Cell index 0 is the central cell
("cell 1"), indices 1-6 form the first ring and 7-18 the second ring.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .estimation import finite_difference_estimate
from .queueing import blocking_probability
from .simulation import Constant, SaConfig, Trajectory, simulate_sa
from .stability import StabilityReport, is_hurwitz_eigen, lambda_max_sym
from .synthesis import SolverConfig, SynthesisProblem, SynthesisSolution, synthesize
from .system_model import FunctionEvaluator, LinearLoopSystem, SparsityPattern, WeightVector

__all__ = [
    "LOOPS",
    "HexNetwork",
    "SonState",
    "Kpis",
    "Scenario",
    "path_gain",
    "evaluate_kpis",
    "son_vector_field",
    "kpi_errors",
    "Linearization",
    "linearize_and_coordinate",
    "ExperimentResult",
    "run_experiment",
    "hotspot_sweep",
    "DemoResult",
    "coordination_demo",
]

LOOPS = ("LB", "AC", "OP")

# axial coordinates of the 6 translated copies of a 19-cell cluster
_WRAP_SHIFTS = ((3, 2), (-2, 5), (-5, 3), (-3, -2), (2, -5), (5, -3))


def path_gain(d_km):
    """Path loss in dB, ``128 + 36.4 log10(d)`` with ``d`` in km."""
    d = np.asarray(d_km, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    return 128.0 + 36.4 * np.log10(d)


def _hex_axial(rings: int):
    cells = [(q, r) for q in range(-rings, rings + 1) for r in range(-rings, rings + 1)
             if abs(q + r) <= rings]
    # ring, then angle, so that index 0 is the centre and ring 1 follows
    ring = lambda t: max(abs(t[0]), abs(t[1]), abs(t[0] + t[1]))
    angle = lambda t: np.arctan2(t[1] * np.sqrt(3) / 2, t[0] + t[1] / 2) % (2 * np.pi)
    return sorted(cells, key=lambda t: (ring(t), round(angle(t), 9)))


@dataclass(frozen=True)
class HexNetwork:
    """19-cell hexagonal layout with wrap-around, pixel grid and traffic map.

    Distances and rates are in m and Mbit/s; powers in dBm.
    """

    intersite_distance: float = 500.0
    bandwidth_mhz: float = 20.0
    noise_density_dbm: float = -174.0
    pixel_size: float = 20.0
    grid_offset: tuple = (5.0, 5.0)
    arrival_rate: float = 40.0
    hotspot_rate: float = 2.0
    hotspot_diameter: float = 330.0
    hotspot_cell: int = 0
    mean_size: float = 10.0
    max_spectral_efficiency: float = 6.0
    min_sinr_db: float = 0.0
    load_cap: float = 0.98

    sites: np.ndarray = field(init=False, repr=False, compare=False)
    pixels: np.ndarray = field(init=False, repr=False, compare=False)
    loss_db: np.ndarray = field(init=False, repr=False, compare=False)
    arrivals: np.ndarray = field(init=False, repr=False, compare=False)
    neighbors: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        isd = self.intersite_distance
        if not (isd > 0 and self.pixel_size > 0 and self.bandwidth_mhz > 0):
            raise ValueError("distances and bandwidth must be positive")
        if not 0 < self.load_cap < 1:
            raise ValueError("load_cap must lie in (0, 1)")

        def pos(q, r):
            return isd * np.array([q + r / 2.0, r * np.sqrt(3) / 2.0])

        axial = _hex_axial(2)
        sites = np.array([pos(*a) for a in axial])
        shifts = np.array([[0.0, 0.0]] + [pos(*s) for s in _WRAP_SHIFTS])
        copies = sites[None, :, :] + shifts[:, None, :]          # (7, 19, 2)

        ps = self.pixel_size
        half = 2.6 * isd
        g = np.arange(-half, half + ps, ps)
        X, Y = np.meshgrid(g + self.grid_offset[0], g + self.grid_offset[1])
        pix = np.column_stack([X.ravel(), Y.ravel()])
        d_all = np.linalg.norm(pix[:, None, None, :] - copies[None], axis=3)  # (P, 7, 19)
        nearest = d_all.reshape(pix.shape[0], -1).argmin(axis=1)
        keep = nearest < sites.shape[0]                           # nearest copy is original
        pix = pix[keep]
        d = d_all[keep].min(axis=1)                               # wrap-around minimal distance
        d = np.maximum(d, ps / 2.0)

        lam = np.full(pix.shape[0], self.arrival_rate / pix.shape[0])
        if self.hotspot_rate > 0:
            hot = np.linalg.norm(pix - sites[self.hotspot_cell], axis=1) <= self.hotspot_diameter / 2
            if not hot.any():
                raise ValueError("hotspot covers no pixel")
            lam[hot] += self.hotspot_rate / hot.sum()

        # wrap-around hex adjacency
        sd = np.linalg.norm(sites[:, None, None, :] - copies.transpose(1, 0, 2)[None], axis=3).min(axis=2)
        adj = np.abs(sd - isd) < 1e-6 * isd

        for name, val in (("sites", sites), ("pixels", pix), ("loss_db", path_gain(d / 1000.0)),
                          ("arrivals", lam), ("neighbors", adj)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n_cells(self) -> int:
        return self.sites.shape[0]

    @property
    def noise_mw(self) -> float:
        return 10 ** ((self.noise_density_dbm + 10 * np.log10(self.bandwidth_mhz * 1e6)) / 10)

    @property
    def r_min(self) -> float:
        """Rate at the minimum SINR, Mbit/s."""
        return self.bandwidth_mhz * np.log2(1 + 10 ** (self.min_sinr_db / 10))

    def config(self) -> dict:
        d = {k: v for k, v in asdict(self).items()
             if k not in ("sites", "pixels", "loss_db", "arrivals", "neighbors")}
        d["grid_offset"] = list(self.grid_offset)
        return d

    @classmethod
    def from_config(cls, d) -> "HexNetwork":
        d = dict(d)
        if "grid_offset" in d:
            d["grid_offset"] = tuple(d["grid_offset"])
        return cls(**d)


@dataclass(frozen=True)
class SonState:
    """Per-cell pilot power (dBm), admission threshold and data power (dBm)."""

    pilot_db: np.ndarray
    threshold: np.ndarray
    data_dbm: np.ndarray
    active: tuple = tuple(range(7))

    def __post_init__(self):
        arrs = [np.array(getattr(self, k), dtype=float) for k in ("pilot_db", "threshold", "data_dbm")]
        if len({a.shape for a in arrs}) != 1 or arrs[0].ndim != 1:
            raise ValueError("pilot, threshold and data arrays must share one 1-D shape")
        if np.any(arrs[1] < 0):
            raise ValueError("admission thresholds must be >= 0")
        for k, a in zip(("pilot_db", "threshold", "data_dbm"), arrs):
            a.setflags(write=False)
            object.__setattr__(self, k, a)
        object.__setattr__(self, "active", tuple(int(i) for i in self.active))

    def __eq__(self, other):
        if not isinstance(other, SonState):
            return NotImplemented
        return self.active == other.active and all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("pilot_db", "threshold", "data_dbm"))

    __hash__ = None

    @classmethod
    def uniform(cls, n_cells=19, pilot_db=30.0, threshold=10.0, data_dbm=40.0,
                active=tuple(range(7))) -> "SonState":
        return cls(np.full(n_cells, pilot_db), np.full(n_cells, threshold),
                   np.full(n_cells, data_dbm), active)

    @property
    def dim(self) -> int:
        return 3 * len(self.active)

    def to_vector(self) -> np.ndarray:
        a = list(self.active)
        return np.column_stack([self.pilot_db[a], self.threshold[a], self.data_dbm[a]]).ravel()

    def with_vector(self, theta) -> "SonState":
        theta = np.asarray(theta, dtype=float).reshape(-1, 3)
        a = list(self.active)
        P, x, D = self.pilot_db.copy(), self.threshold.copy(), self.data_dbm.copy()
        P[a], x[a], D[a] = theta[:, 0], np.maximum(theta[:, 1], 0.0), theta[:, 2]
        return SonState(P, x, D, self.active)

    def to_dict(self) -> dict:
        return {"pilot_db": self.pilot_db.tolist(), "threshold": self.threshold.tolist(),
                "data_dbm": self.data_dbm.tolist(), "active": list(self.active)}

    @classmethod
    def from_dict(cls, d) -> "SonState":
        return cls(d["pilot_db"], d["threshold"], d["data_dbm"], tuple(d.get("active", range(7))))


@dataclass(frozen=True)
class Kpis:
    """Per-cell load, blocking rate and coverage; NaN where a cell serves no pixel."""

    load: np.ndarray
    blocking: np.ndarray
    coverage: np.ndarray
    pixels: np.ndarray
    serving: np.ndarray
    sinr_db: np.ndarray


def evaluate_kpis(network: HexNetwork, state: SonState) -> Kpis:
    """Association, SINR, peak rates and the three per-cell KPIs.

    Every pixel is served by the strongest received pilot. Interference comes
    from the data power of all other cells at their wrap-around distance.
    """
    n = network.n_cells
    if state.pilot_db.shape[0] != n:
        raise ValueError(f"state has {state.pilot_db.shape[0]} cells, network has {n}")
    loss = network.loss_db
    serving = np.argmax(state.pilot_db[None, :] - loss, axis=1)
    rx = 10 ** ((state.data_dbm[None, :] - loss) / 10)
    idx = np.arange(loss.shape[0])
    signal = rx[idx, serving]
    sinr = signal / (rx.sum(axis=1) - signal + network.noise_mw)
    se = np.minimum(np.log2(1 + sinr), network.max_spectral_efficiency)
    rate = network.bandwidth_mhz * se

    count = np.bincount(serving, minlength=n).astype(float)
    offered = np.bincount(serving, network.arrivals * network.mean_size / rate, minlength=n)
    covered = np.bincount(serving, rate >= network.r_min * (1 - 1e-12), minlength=n)
    empty = count == 0
    load = np.where(empty, np.nan, np.minimum(offered, network.load_cap))
    coverage = np.where(empty, np.nan, covered / np.maximum(count, 1))
    blocking = np.full(n, np.nan)
    for s in np.flatnonzero(~empty):
        if load[s] > 0:
            blocking[s] = blocking_probability(load[s], state.threshold[s])
        else:
            blocking[s] = 0.0
    return Kpis(load, blocking, coverage, count.astype(int), serving, 10 * np.log10(sinr))


@dataclass(frozen=True)
class Scenario:
    """Targets, loop gains, boxes, weights and the initial state of an experiment.

    ``gains`` multiply the LB/AC/OP components of the vector field so that the
    three loops move on comparable time scales. ``boxes`` bound each loop's
    parameter relative to nothing (absolute values): pilot and data in dBm,
    threshold in users.
    """

    network: HexNetwork = field(default_factory=HexNetwork)
    initial: SonState = field(default_factory=SonState.uniform)
    blocking_target: float = 0.02
    coverage_target: float = 0.82
    gains: tuple = (20.0, 200.0, 20.0)
    pilot_box: tuple = (20.0, 40.0)
    threshold_box: tuple = (0.0, 60.0)
    data_box: tuple = (30.0, 46.0)
    weights: tuple = (1.0, 1.0, 1.0)
    fd_step: tuple = (1.0, 0.5, 1.0)
    delta: float | None = None
    sa_steps: int = 400
    sa_step: float = 0.05
    noise_std: float = 0.0
    seconds_per_iteration: float = 6.0

    def loop_weights(self) -> np.ndarray:
        return np.tile(np.asarray(self.weights, dtype=float), len(self.initial.active))

    def boxes(self) -> np.ndarray:
        one = np.array([self.pilot_box, self.threshold_box, self.data_box], dtype=float)
        return np.tile(one, (len(self.initial.active), 1))

    def with_weights(self, weights) -> "Scenario":
        return replace(self, weights=tuple(float(w) for w in weights))

    def to_dict(self) -> dict:
        return {
            "network": self.network.config(),
            "initial": self.initial.to_dict(),
            "blocking_target": self.blocking_target,
            "coverage_target": self.coverage_target,
            "gains": list(self.gains),
            "pilot_box": list(self.pilot_box),
            "threshold_box": list(self.threshold_box),
            "data_box": list(self.data_box),
            "weights": list(self.weights),
            "fd_step": list(self.fd_step),
            "delta": self.delta,
            "sa_steps": self.sa_steps,
            "sa_step": self.sa_step,
            "noise_std": self.noise_std,
            "seconds_per_iteration": self.seconds_per_iteration,
        }

    @classmethod
    def from_dict(cls, d) -> "Scenario":
        d = dict(d)
        kw = {}
        if "network" in d:
            kw["network"] = HexNetwork.from_config(d.pop("network"))
        if "initial" in d:
            kw["initial"] = SonState.from_dict(d.pop("initial"))
        for k in ("gains", "pilot_box", "threshold_box", "data_box", "weights", "fd_step"):
            if k in d:
                kw[k] = tuple(float(v) for v in d.pop(k))
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**kw, **d)


def son_vector_field(network: HexNetwork, state: SonState, scenario: Scenario | None = None,
                     kpis: Kpis | None = None) -> np.ndarray:
    """Stacked per-cell updates ``(rho_1 - rho_s, B_s - B_bar, -(K_s - K_bar))``.

    The load-balancing reference is cell index 0, whose own LB component is
    therefore identically zero. Components are multiplied by the scenario's
    loop gains.
    """
    sc = Scenario() if scenario is None else scenario
    k = evaluate_kpis(network, state) if kpis is None else kpis
    a = list(state.active)
    ref = k.load[0]
    F = np.column_stack([
        ref - k.load[a],
        k.blocking[a] - sc.blocking_target,
        -(k.coverage[a] - sc.coverage_target),
    ])
    F = np.nan_to_num(F, nan=0.0)
    return (F * np.asarray(sc.gains, dtype=float)[None, :]).ravel()


def kpi_errors(kpis: Kpis, state: SonState, scenario: Scenario) -> dict:
    """Unscaled distances of the active cells' KPIs from their goals."""
    a = list(state.active)
    load = kpis.load[a]
    return {
        "load_imbalance": float(np.nanmax(load) - np.nanmin(load)),
        "blocking": float(np.nanmax(np.abs(kpis.blocking[a] - scenario.blocking_target))),
        "outage": float(np.nanmax(np.abs(kpis.coverage[a] - scenario.coverage_target))),
        "max": float(max(np.nanmax(np.abs(load - kpis.load[0])),
                         np.nanmax(np.abs(kpis.blocking[a] - scenario.blocking_target)),
                         np.nanmax(np.abs(kpis.coverage[a] - scenario.coverage_target)))),
    }


def _evaluator(scenario: Scenario) -> FunctionEvaluator:
    net, base = scenario.network, scenario.initial
    return FunctionEvaluator(lambda th: son_vector_field(net, base.with_vector(th), scenario),
                             base.dim)


def _loop_pattern(network: HexNetwork, active) -> SparsityPattern:
    """Loops may exchange measurements within a cell and between hex-adjacent cells."""
    a = list(active)
    cell_adj = network.neighbors[np.ix_(a, a)] | np.eye(len(a), dtype=bool)
    return SparsityPattern(np.kron(cell_adj, np.ones((3, 3), dtype=bool)))


@dataclass
class Linearization:
    """Artifacts of :func:`linearize_and_coordinate`.

    ``A`` and ``b`` cover all ``3 * n_active`` loops. The reference cell's LB
    loop has an identically zero row, so synthesis runs on the remaining
    ``free`` loops; ``C`` embeds that solution with a unit entry for the
    frozen loop.
    """

    A: np.ndarray
    b: np.ndarray
    C: np.ndarray
    free: np.ndarray
    pattern: SparsityPattern
    solution: SynthesisSolution
    uncoordinated: StabilityReport
    coordinated: StabilityReport
    lambda_max_sym: float

    def reduced(self):
        f = self.free
        return self.A[np.ix_(f, f)], self.C[np.ix_(f, f)]

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(), "b": self.b.tolist(), "C": self.C.tolist(),
            "free": self.free.tolist(),
            "pattern": self.pattern.to_dict(),
            "solution": self.solution.to_dict(),
            "uncoordinated": self.uncoordinated.to_dict(),
            "coordinated": self.coordinated.to_dict(),
            "lambda_max_sym": self.lambda_max_sym,
        }


def linearize_and_coordinate(scenario: Scenario, state0: SonState | None = None,
                             solver: SolverConfig | None = None) -> Linearization:
    """Finite-difference ``A`` at ``state0``, then structured convex synthesis.

    The reference cell's LB component is zero by construction, which makes
    the full ``A`` singular. Its pilot is held fixed and coordination is
    synthesized for the other loops.
    """
    st = scenario.initial if state0 is None else state0
    sc = replace(scenario, initial=st)
    theta0 = st.to_vector()
    steps = np.tile(np.asarray(sc.fd_step, dtype=float), len(st.active))
    A, b = finite_difference_estimate(_evaluator(sc), theta0, steps)

    n = A.shape[0]
    free = np.array([i for i in range(n) if not (i == 0 and st.active[0] == 0)])
    if st.active[0] != 0:
        free = np.arange(n)
    Af = A[np.ix_(free, free)]
    pattern = _loop_pattern(sc.network, st.active)
    pf = SparsityPattern(pattern.allowed[np.ix_(free, free)])
    weights = WeightVector(sc.loop_weights()[free])
    problem = SynthesisProblem(LinearLoopSystem(Af, b[free]), pf, sc.delta, weights)
    sol = synthesize(problem, solver or SolverConfig())

    C = np.eye(n)
    C[np.ix_(free, free)] = sol.C
    unc = is_hurwitz_eigen(Af)
    coord = is_hurwitz_eigen(sol.C @ Af)
    return Linearization(A, b, C, free, pattern, sol, unc, coord,
                         float(lambda_max_sym(sol.C @ Af)))


@dataclass
class ExperimentResult:
    """KPI time series of one SA run (one row per iteration and active cell)."""

    iterations: np.ndarray
    times: np.ndarray
    cells: tuple
    load: np.ndarray
    blocking: np.ndarray
    coverage: np.ndarray
    errors: list
    trajectory: Trajectory

    def terminal_errors(self, fraction: float = 0.1) -> dict:
        """KPI errors averaged over the last ``fraction`` of the recorded iterates."""
        m = max(1, int(round(fraction * len(self.errors))))
        tail = self.errors[-m:]
        return {k: float(np.mean([e[k] for e in tail])) for k in tail[0]}

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "cell", "load", "blocking", "outage"])
        for k, it in enumerate(self.iterations):
            for j, c in enumerate(self.cells):
                w.writerow([int(it), c + 1, repr(float(self.load[k, j])),
                            repr(float(self.blocking[k, j])), repr(float(self.coverage[k, j]))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def run_experiment(scenario: Scenario, coordinated: bool = True,
                   linearization: Linearization | None = None, seed: int = 0,
                   steps: int | None = None, record_every: int = 1,
                   solver: SolverConfig | None = None) -> ExperimentResult:
    """Projected SA of the SON loops, with or without coordination.

    The coordinated run uses ``linearization.C`` (computed at the scenario's
    initial state when not given); the uncoordinated run uses the identity.
    Each iteration stands for ``scenario.seconds_per_iteration`` seconds.
    """
    st = scenario.initial
    if coordinated:
        lin = linearization or linearize_and_coordinate(scenario, solver=solver)
        C = lin.C
    else:
        C = np.eye(st.dim)
    cfg = SaConfig(steps=scenario.sa_steps if steps is None else steps,
                   step_schedule=Constant(scenario.sa_step), boxes=scenario.boxes(),
                   noise_std=scenario.noise_std, seed=seed, record_every=record_every,
                   time_per_iteration=scenario.seconds_per_iteration)
    traj = simulate_sa(_evaluator(scenario), C, cfg, st.to_vector())
    a = list(st.active)
    rows = []
    errs = []
    for th in traj.states:
        s = st.with_vector(th)
        k = evaluate_kpis(scenario.network, s)
        rows.append((k.load[a], k.blocking[a], k.coverage[a]))
        errs.append(kpi_errors(k, s, scenario))
    load, blk, cov = (np.array(x) for x in zip(*rows))
    iters = np.rint(traj.times / scenario.seconds_per_iteration).astype(int)
    return ExperimentResult(iters, traj.times, tuple(a), load, blk, cov, errs, traj)


def hotspot_sweep(scenario: Scenario, rates=(2.0, 4.0, 8.0, 16.0, 32.0),
                  solver: SolverConfig | None = None):
    """Raise the hotspot arrival rate until the uncoordinated linearization is unstable.

    Returns ``(scenario, linearization, found)`` for the first rate whose
    reduced ``A`` has spectral abscissa ``>= 0``; if none does, the last rate
    tried is returned with ``found = False``.
    """
    result = None
    for rate in rates:
        net = HexNetwork.from_config({**scenario.network.config(), "hotspot_rate": float(rate)})
        sc = replace(scenario, network=net)
        lin = linearize_and_coordinate(sc, solver=solver)
        result = (sc, lin, lin.uncoordinated.spectral_abscissa >= 0)
        if result[2]:
            break
    return result


@dataclass
class DemoResult:
    """Configuration used and the three runs of :func:`coordination_demo`."""

    scenario: Scenario
    linearization: Linearization
    unstable_found: bool
    sweep_abscissa: dict
    coordinated: ExperimentResult
    uncoordinated: ExperimentResult
    weighted: ExperimentResult
    priority_weights: tuple

    def summary(self) -> dict:
        lin = self.linearization
        return {
            "unstable_hotspot_found": bool(self.unstable_found),
            "hotspot_rate": self.scenario.network.hotspot_rate,
            "sweep_spectral_abscissa": {f"{k:g}": v for k, v in self.sweep_abscissa.items()},
            "uncoordinated_spectral_abscissa": lin.uncoordinated.spectral_abscissa,
            "coordinated_lambda_max_sym": lin.lambda_max_sym,
            "synthesis_status": lin.solution.status.value,
            "initial_errors": self.coordinated.errors[0],
            "terminal_coordinated": self.coordinated.terminal_errors(),
            "terminal_uncoordinated": self.uncoordinated.terminal_errors(),
            "terminal_weighted": self.weighted.terminal_errors(),
            "priority_weights": list(self.priority_weights),
        }


def coordination_demo(scenario: Scenario, rates=(2.0, 4.0, 8.0, 16.0, 32.0),
                      priority_weights=(1.0, 1.0, 20.0), seed: int = 0,
                      solver: SolverConfig | None = None) -> DemoResult:
    """Coordinated, uncoordinated and reweighted runs on one configuration.

    The hotspot rate is swept upward through ``rates`` looking for an
    unstable uncoordinated linearization. When none is unstable the runs use
    ``scenario`` unchanged rather than the last (most loaded) rate.
    """
    abscissa = {}
    sc, lin, found = scenario, None, False
    for rate in rates:
        net = HexNetwork.from_config({**scenario.network.config(), "hotspot_rate": float(rate)})
        cand = replace(scenario, network=net)
        cl = linearize_and_coordinate(cand, solver=solver)
        abscissa[float(rate)] = cl.uncoordinated.spectral_abscissa
        if cl.uncoordinated.spectral_abscissa >= 0:
            sc, lin, found = cand, cl, True
            break
    if lin is None:
        lin = linearize_and_coordinate(sc, solver=solver)
    weights = tuple(float(w) for w in priority_weights)
    return DemoResult(
        sc, lin, found, abscissa,
        run_experiment(sc, True, lin, seed=seed),
        run_experiment(sc, False, seed=seed),
        run_experiment(sc.with_weights(weights), True, seed=seed, solver=solver),
        weights)
