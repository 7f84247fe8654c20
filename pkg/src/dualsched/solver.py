"""Dual decomposition: price iteration, diagnostics, and optimality brackets.

The dual value at a price vector splits into a congestion-control term
(routing + source rates) and a scheduling term (max-weight matching). With a
greedy scheduler the price update follows an inexact subgradient whose slack
eps(p) = p . (c_opt - c_greedy) is nonnegative and computable exactly at desk
scale, which is what the Cesaro band diagnostics consume.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .distributed import run_distributed_greedy
from .errors import CapacityError, InputError, InternalInvariantError
from .model import ENUMERATION_GUARD, Network, enumerate_maximal_independent_sets
from .routing import FlowAllocation, least_priced_path, solve_d1
from .scheduling import ScheduleSet, as_price_vector, centralized_greedy, optimal_schedule

MODE_DISTRIBUTED = "dgrd"
MODE_GREEDY = "grd"
MODE_OPTIMAL = "opt"
MODES = (MODE_DISTRIBUTED, MODE_GREEDY, MODE_OPTIMAL)


@dataclass(frozen=True)
class SolverConfig:
    delta: float = 0.01          # constant step size
    iterations: int = 1000
    mode: str = MODE_DISTRIBUTED
    initial_prices: tuple | None = None   # default: all zeros
    compute_epsilon: bool | None = None   # None: automatic, on within the guard
    seed: int = 0                # recorded in manifests; the solver itself is deterministic

    def __post_init__(self):
        if not (self.delta > 0):
            raise InputError(f"step size must be positive, got {self.delta}")
        if self.iterations < 1:
            raise InputError(f"iterations must be >= 1, got {self.iterations}")
        if self.mode not in MODES:
            raise InputError(f"unknown mode {self.mode!r}; expected one of {MODES}")


@dataclass(frozen=True)
class DualEvaluation:
    """One dual evaluation at a fixed price vector."""

    d1: float
    d2: float
    d: float
    schedule: ScheduleSet
    allocation: FlowAllocation
    subgradient: np.ndarray      # h = c_scheduled - y
    epsilon: float | None        # p . (c_opt - c_scheduled); None when the oracle is off
    mode: str


def analytic_subgradient_bound(net: Network) -> float:
    """sqrt(|links|) * max(1, |flows|): every |h_l| <= max(1, |flows|)."""
    return math.sqrt(len(net.links)) * max(1, len(net.flows))


def evaluate_dual(net: Network, k: int, p, mode: str = MODE_DISTRIBUTED,
                  compute_epsilon: bool | None = None) -> DualEvaluation:
    prices = as_price_vector(net, p)
    allocation, d1 = solve_d1(net, prices)
    if mode == MODE_DISTRIBUTED:
        schedule, _ = run_distributed_greedy(net, k, prices)
    elif mode == MODE_GREEDY:
        schedule = centralized_greedy(net, k, prices)
    elif mode == MODE_OPTIMAL:
        schedule = optimal_schedule(net, k, prices)
    else:
        raise InputError(f"unknown mode {mode!r}; expected one of {MODES}")

    if compute_epsilon is None:
        compute_epsilon = len(net.links) <= ENUMERATION_GUARD
    epsilon = None
    if compute_epsilon:
        opt = schedule if mode == MODE_OPTIMAL else optimal_schedule(net, k, prices)
        # both weights come from the same summation, so the max is exact
        epsilon = opt.weight - schedule.weight
    h = schedule.indicator_array - allocation.link_totals
    return DualEvaluation(
        d1=d1, d2=schedule.weight, d=d1 + schedule.weight,
        schedule=schedule, allocation=allocation,
        subgradient=h, epsilon=epsilon, mode=mode,
    )


def price_update(p, y, c, delta: float) -> np.ndarray:
    """Projected step: p <- max(0, p + delta * (y - c)) entrywise."""
    if not (delta > 0):
        raise InputError(f"step size must be positive, got {delta}")
    p = np.asarray(p, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.asarray(c, dtype=float)
    if not (p.shape == y.shape == c.shape):
        raise InputError("price, traffic, and capacity vectors must share a shape")
    return np.maximum(0.0, p + delta * (y - c))


@dataclass
class SolverTrajectory:
    """Per-iteration records of a fixed-length price iteration (1-based iters)."""

    net: Network
    k: int
    config: SolverConfig
    prices: np.ndarray         # (iterations, links); row j is p at iteration j+1
    rates: np.ndarray          # (iterations, flows)
    d: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    epsilon: np.ndarray        # nan where the oracle was off
    h_norms: np.ndarray
    schedules: list            # per-iteration tuple of scheduled link ids
    cesaro: np.ndarray         # running mean of d

    @property
    def iterations(self) -> int:
        return len(self.d)

    @property
    def final_cesaro(self) -> float:
        return float(self.cesaro[-1])

    @property
    def h_max_norm(self) -> float:
        return float(self.h_norms.max())

    @property
    def epsilon_available(self) -> bool:
        return bool(np.all(np.isfinite(self.epsilon)))

    @property
    def exact_cesaro(self) -> float:
        """Running mean of the exact dual values d + epsilon (oracle required)."""
        if not self.epsilon_available:
            raise CapacityError("exact dual values need the enumeration oracle")
        return float(np.mean(self.d + self.epsilon))

    @property
    def epsilon_mean(self) -> float | None:
        """Run-mean scheduler slack; the budget the running-average band uses."""
        if not self.epsilon_available:
            return None
        return float(self.epsilon.mean())

    def trailing_epsilon_mean(self, fraction: float = 0.25) -> float | None:
        """Mean eps over the trailing window (last `fraction` of iterations)."""
        if not self.epsilon_available:
            return None
        n = max(1, math.ceil(fraction * self.iterations))
        return float(self.epsilon[-n:].mean())

    def write_csv(self, path):
        cols = ["iter", "D", "D1", "D2", "epsilon", "cesaro_avg", "h_norm"]
        cols += [f"price_{l.name}" for l in self.net.links]
        cols += [f"rate_f{f.id}" for f in self.net.flows]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for j in range(self.iterations):
                eps = "" if not np.isfinite(self.epsilon[j]) else repr(float(self.epsilon[j]))
                row = [
                    str(j + 1),
                    repr(float(self.d[j])),
                    repr(float(self.d1[j])),
                    repr(float(self.d2[j])),
                    eps,
                    repr(float(self.cesaro[j])),
                    repr(float(self.h_norms[j])),
                ]
                row += [repr(float(v)) for v in self.prices[j]]
                row += [repr(float(v)) for v in self.rates[j]]
                w.writerow(row)


def run_solver(net: Network, k: int, config: SolverConfig,
               step_schedule=None) -> SolverTrajectory:
    """Iterate price updates for a fixed number of steps (no stopping rule:
    with a constant step the iterates are expected to settle into a limit
    cycle rather than converge).

    step_schedule optionally maps the 1-based iteration to a step size,
    overriding the constant config.delta.
    """
    n_links, n_flows = len(net.links), len(net.flows)
    if config.initial_prices is None:
        p = np.zeros(n_links)
    else:
        p = as_price_vector(net, config.initial_prices)
    n = config.iterations
    prices = np.zeros((n, n_links))
    rates = np.zeros((n, n_flows))
    d = np.zeros(n)
    d1 = np.zeros(n)
    d2 = np.zeros(n)
    eps = np.full(n, np.nan)
    h_norms = np.zeros(n)
    schedules = []
    bound = analytic_subgradient_bound(net)

    for j in range(n):
        ev = evaluate_dual(net, k, p, config.mode, config.compute_epsilon)
        prices[j] = p
        for i, flow in enumerate(net.flows):
            rates[j, i] = ev.allocation.rates[flow.id]
        d[j], d1[j], d2[j] = ev.d, ev.d1, ev.d2
        if ev.epsilon is not None:
            eps[j] = ev.epsilon
        hn = float(np.linalg.norm(ev.subgradient))
        if hn > bound + 1e-9:
            raise InternalInvariantError(
                f"subgradient norm {hn} exceeds the analytic bound {bound}"
            )
        h_norms[j] = hn
        schedules.append(ev.schedule.links)
        delta = step_schedule(j + 1) if step_schedule is not None else config.delta
        p = price_update(p, ev.allocation.link_totals, ev.schedule.indicator_array, delta)

    cesaro = np.cumsum(d) / np.arange(1, n + 1)
    return SolverTrajectory(
        net=net, k=k, config=config,
        prices=prices, rates=rates, d=d, d1=d1, d2=d2,
        epsilon=eps, h_norms=h_norms, schedules=schedules, cesaro=cesaro,
    )


# ---- Cesaro band report ----

@dataclass(frozen=True)
class BandReport:
    cesaro_run: float            # mean of the recorded D values (run scheduler)
    cesaro_exact: float | None   # mean of exact dual values, when the oracle ran
    d_star_low: float
    d_star_high: float
    delta: float
    h_bound: float
    h_observed: float
    eps_bound: float
    band_low: float              # d_star_low
    band_high: float             # d_star_high + delta*H^2/2 + eps_bound
    inside: bool
    band_risk: bool              # supplied eps_bound below the observed trailing eps
    lower_tol: float
    upper_rel_tol: float

    @property
    def band_quantity(self) -> float:
        """The Cesaro average the band is checked against."""
        return self.cesaro_run if self.cesaro_exact is None else self.cesaro_exact

    def text(self) -> str:
        lines = [
            "cesaro band report",
            f"  cesaro average (run scheduler) : {self.cesaro_run!r}",
            f"  cesaro average (exact dual)    : {self.cesaro_exact!r}",
            f"  dual optimum bracket           : [{self.d_star_low!r}, {self.d_star_high!r}]",
            f"  step delta                     : {self.delta!r}",
            f"  subgradient bound H (analytic) : {self.h_bound!r}",
            f"  subgradient max ||h|| observed : {self.h_observed!r}",
            f"  eps budget                     : {self.eps_bound!r}",
            f"  band                           : [{self.band_low!r}, {self.band_high!r}]",
            f"  tolerances (lower abs / upper rel): {self.lower_tol!r} / {self.upper_rel_tol!r}",
            f"  inside band                    : {self.inside}",
        ]
        if self.band_risk:
            lines.append("  warning: supplied eps bound is below the observed trailing eps; "
                         "the band may be violated")
        return "\n".join(lines)


def cesaro_report(traj: SolverTrajectory, d_star: float, eps_bound: float,
                  d_star_upper: float | None = None, h_bound: float | None = None,
                  lower_tol: float = 1e-6, upper_rel_tol: float = 1e-2) -> BandReport:
    """Check the final Cesaro average against [d_star, d_star + delta*H^2/2 + eps].

    `d_star` may be a point estimate or, with `d_star_upper`, a bracket.
    The checked average uses exact dual values whenever the run recorded the
    oracle slack (the greedy D plus eps equals the exact D at the same prices).
    """
    if eps_bound < 0:
        raise InputError(f"eps_bound must be nonnegative, got {eps_bound}")
    hi = d_star if d_star_upper is None else d_star_upper
    if hi < d_star:
        raise InputError("d_star_upper must not be below d_star")
    h = analytic_subgradient_bound(traj.net) if h_bound is None else h_bound
    delta = traj.config.delta
    band_low = d_star
    band_high = hi + delta * h * h / 2.0 + eps_bound
    exact = traj.exact_cesaro if traj.epsilon_available else None
    quantity = traj.final_cesaro if exact is None else exact
    inside = (quantity >= band_low - lower_tol) and (
        quantity <= band_high + upper_rel_tol * abs(hi)
    )
    trailing = traj.trailing_epsilon_mean()
    band_risk = trailing is not None and eps_bound + 1e-12 < trailing
    return BandReport(
        cesaro_run=traj.final_cesaro, cesaro_exact=exact,
        d_star_low=d_star, d_star_high=hi,
        delta=delta, h_bound=h, h_observed=traj.h_max_norm,
        eps_bound=eps_bound, band_low=band_low, band_high=band_high,
        inside=inside, band_risk=band_risk,
        lower_tol=lower_tol, upper_rel_tol=upper_rel_tol,
    )


# ---- primal feasibility and the optimality bracket ----

@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: tuple[str, ...]
    utility: float | None        # aggregate utility, only when feasible


def primal_feasibility_check(net: Network, k: int, allocation: FlowAllocation,
                             schedule_shares, tol: float = 1e-9) -> FeasibilityReport:
    """Verify a primal candidate directly against the constraints:
    per-flow conservation, rate caps, per-link capacity under the time
    shares, and the shares forming a distribution over the enumerated
    maximal matchings."""
    collection = enumerate_maximal_independent_sets(net, k)
    shares = np.asarray(schedule_shares, dtype=float)
    violations: list[str] = []
    if shares.shape != (collection.count,):
        raise InputError(
            f"expected one share per enumerated set ({collection.count}), got shape {shares.shape}"
        )
    if np.any(shares < -tol):
        violations.append(f"negative schedule share (min {shares.min()!r})")
    if abs(shares.sum() - 1.0) > tol:
        violations.append(f"schedule shares sum to {shares.sum()!r}, not 1")

    for flow in net.flows:
        x = allocation.rates.get(flow.id)
        if x is None:
            violations.append(f"flow f{flow.id}: no rate in allocation")
            continue
        if x < -tol or x > 1.0 + tol:
            violations.append(f"flow f{flow.id}: rate {x!r} outside [0, 1]")
        y_f = allocation.flow_vector(net, flow.id)
        # node balance: out minus in must equal +x at the source, -x at the dest
        for node in net.nodes:
            out_sum = sum(y_f[l.id] for l in net.links if l.tail == node)
            in_sum = sum(y_f[l.id] for l in net.links if l.head == node)
            expect = x if node == flow.source else (-x if node == flow.dest else 0.0)
            if abs(out_sum - in_sum - expect) > tol:
                violations.append(
                    f"flow f{flow.id}: conservation fails at node {node!r} "
                    f"(net outflow {out_sum - in_sum!r}, expected {expect!r})"
                )

    capacity = np.zeros(len(net.links))
    for share, members in zip(shares, collection.sets):
        for l in members:
            capacity[l] += share * net.links[l].alpha
    total = np.zeros(len(net.links))
    for flow in net.flows:
        if flow.id in allocation.rates:
            total += allocation.flow_vector(net, flow.id)
    for link in net.links:
        if total[link.id] > capacity[link.id] + tol:
            violations.append(
                f"link {link.name}: traffic {total[link.id]!r} exceeds "
                f"time-shared capacity {capacity[link.id]!r}"
            )

    feasible = not violations
    utility = None
    if feasible:
        utility = float(sum(
            net.flows[i].utility.value(allocation.rates[net.flows[i].id])
            for i in range(len(net.flows))
        ))
    return FeasibilityReport(feasible, tuple(violations), utility)


@dataclass(frozen=True)
class DualBracket:
    lower: float                 # aggregate utility of a verified feasible point
    upper: float                 # best exact dual value seen
    allocation: FlowAllocation | None
    shares: tuple[float, ...]
    refine_iterations: int

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def text(self) -> str:
        rel = self.width / abs(self.upper) if self.upper else 0.0
        return "\n".join([
            "dual optimum bracket",
            f"  lower (feasible utility)  : {self.lower!r}",
            f"  upper (best dual value)   : {self.upper!r}",
            f"  width                     : {self.width!r}  ({rel:.3%} of |upper|)",
            f"  refinement iterations     : {self.refine_iterations}",
        ])


def _best_rates_and_shares(net: Network, collection, paths, x0, a0):
    """Maximize aggregate utility over rates and schedule shares with the
    paths held fixed; a plain concave program solved by SLSQP."""
    from scipy.optimize import minimize

    n_f = len(net.flows)
    n_j = collection.count
    # per-link capacity matrix R (links x sets) and path incidence P (links x flows)
    r_mat = np.zeros((len(net.links), n_j))
    for j, members in enumerate(collection.sets):
        for l in members:
            r_mat[l, j] = net.links[l].alpha
    p_mat = np.zeros((len(net.links), n_f))
    for i, flow in enumerate(net.flows):
        for l in paths[flow.id]:
            p_mat[l, i] = 1.0

    def objective(z):
        x = z[:n_f]
        return -sum(net.flows[i].utility.value(x[i]) for i in range(n_f))

    def objective_jac(z):
        g = np.zeros(n_f + n_j)
        for i in range(n_f):
            g[i] = -net.flows[i].utility.derivative(z[i])
        return g

    constraints = [
        {"type": "eq", "fun": lambda z: z[n_f:].sum() - 1.0,
         "jac": lambda z: np.concatenate([np.zeros(n_f), np.ones(n_j)])},
        {"type": "ineq", "fun": lambda z: r_mat @ z[n_f:] - p_mat @ z[:n_f],
         "jac": lambda z: np.hstack([-p_mat, r_mat])},
    ]
    bounds = [(0.0, 1.0)] * n_f + [(0.0, 1.0)] * n_j
    z0 = np.concatenate([x0, a0])
    res = minimize(objective, z0, jac=objective_jac, bounds=bounds,
                   constraints=constraints, method="SLSQP",
                   options={"maxiter": 400, "ftol": 1e-12})
    z = res.x
    x = np.clip(z[:n_f], 0.0, 1.0)
    a = np.clip(z[n_f:], 0.0, None)
    a = a / a.sum() if a.sum() > 0 else np.full(n_j, 1.0 / n_j)
    # rescale rates onto the capacity region so the witness verifies exactly
    usage = p_mat @ x
    cap = r_mat @ a
    scale = 1.0
    for l in range(len(net.links)):
        if usage[l] > 1e-15:
            scale = min(scale, (cap[l] / usage[l]) * (1.0 - 1e-12))
    x = np.maximum(0.0, x * scale)
    return x, a


def bracket_dual_optimum(net: Network, k: int, config: SolverConfig,
                         refine_iterations: int = 3000) -> DualBracket:
    """Bracket the dual optimum.

    Upper: smallest exact dual value along a diminishing-step run with the
    enumeration-backed scheduler. Lower: aggregate utility of an explicitly
    verified feasible point (fixed least-priced paths, rates and schedule
    time shares optimized jointly). With zero duality gap the true optimum
    sits between the two.
    """
    if len(net.links) > ENUMERATION_GUARD:
        raise CapacityError(
            f"bracketing needs exhaustive enumeration; {len(net.links)} links "
            f"exceeds the guard of {ENUMERATION_GUARD}"
        )
    collection = enumerate_maximal_independent_sets(net, k)
    base = config.delta
    p = np.zeros(len(net.links))
    best_d = math.inf
    best_p = p.copy()
    set_counts = np.zeros(collection.count)
    set_index = {s: i for i, s in enumerate(collection.sets)}
    for j in range(1, refine_iterations + 1):
        ev = evaluate_dual(net, k, p, MODE_OPTIMAL, compute_epsilon=False)
        if ev.d < best_d:
            best_d = ev.d
            best_p = p.copy()
        set_counts[set_index[ev.schedule.links]] += 1
        step = base / math.sqrt(j)
        p = price_update(p, ev.allocation.link_totals, ev.schedule.indicator_array, step)
    upper = float(best_d)

    if not net.flows:
        shares = np.full(collection.count, 1.0 / collection.count)
        empty = FlowAllocation({}, {}, {}, np.zeros(len(net.links)))
        report = primal_feasibility_check(net, k, empty, shares)
        assert report.feasible
        return DualBracket(0.0, upper, empty, tuple(shares), refine_iterations)

    paths = {}
    for flow in net.flows:
        path, _cost = least_priced_path(net, flow, best_p)
        paths[flow.id] = path
    x0 = np.array([evaluate_dual(net, k, best_p, MODE_OPTIMAL, compute_epsilon=False)
                   .allocation.rates[f.id] for f in net.flows])
    a0 = set_counts / set_counts.sum()
    x, shares = _best_rates_and_shares(net, collection, paths, x0, a0)

    rates = {f.id: float(x[i]) for i, f in enumerate(net.flows)}
    y = np.zeros(len(net.links))
    for i, f in enumerate(net.flows):
        for l in paths[f.id]:
            y[l] += x[i]
    allocation = FlowAllocation(rates, paths, {f.id: math.nan for f in net.flows}, y)
    report = primal_feasibility_check(net, k, allocation, shares)
    if not report.feasible:  # pragma: no cover - rescaling above prevents this
        zero = FlowAllocation({f.id: 0.0 for f in net.flows},
                              paths, {f.id: math.nan for f in net.flows},
                              np.zeros(len(net.links)))
        report = primal_feasibility_check(net, k, zero, shares)
        allocation = zero
    lower = float(report.utility)
    if lower > upper + 1e-9:
        raise InternalInvariantError(
            f"bracket inverted: feasible utility {lower} above best dual {upper}"
        )
    return DualBracket(lower, upper, allocation, tuple(float(s) for s in shares),
                       refine_iterations)
