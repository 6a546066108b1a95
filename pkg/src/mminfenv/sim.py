"""Discrete-event simulation of the modulated infinite-server queue.

This is the brute-force oracle for the analytic moments.  The queue is
simulated through its cumulative-work coordinate: W(t) is the integral
of the momentary server speed, so it is piecewise linear and never
decreases.  A customer arriving at time u with an exponential service
requirement sigma leaves exactly when W reaches W(u) + sigma, so the
customers in system at a sample time t are those whose departure
threshold still exceeds W(t).  A min-heap keyed by threshold makes the
count cheap, and pops happen in threshold order because W is monotone.

The environment path starts in steady state: the initial state follows
the time-stationary occupancy law and the first sojourn is drawn from
the equilibrium (integrated-tail) law.  The queue itself starts empty,
so a warmup window is still discarded as defense in depth.  Sampling a
one-sided forward window of this construction is taken as equivalent in
law to sampling a two-sided stationary process at a fixed time.

Replications are independent: replication r uses a generator seeded by
(master seed, spawn key r), and estimates are reduced in replication
order, so results are byte-identical no matter how replications are
scheduled.
"""

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .environment import ChainStatics, EnvironmentModel, chain_statics, mean_cycle_length, require_valid
from .errors import EstimationError

__all__ = [
    "SimulationConfig",
    "SimulationEstimate",
    "EnvironmentPath",
    "default_warmup",
    "simulate_environment",
    "simulate_queue",
    "estimate_factorial_moments",
    "stationarity_check",
]

MAX_ESTIMATED_ORDER = 6


@dataclass(frozen=True)
class SimulationConfig:
    """Replication layout for a moment-estimation run.

    ``sampling_interval = None`` resolves to the model's mean environment
    cycle length, which keeps consecutive samples weakly correlated.
    """

    warmup: float
    horizon: float
    replications: int
    master_seed: int
    sampling_interval: float = None
    n_est: int = 3

    def __post_init__(self):
        if not (math.isfinite(self.warmup) and self.warmup >= 0.0):
            raise EstimationError(f"warmup must be finite and nonnegative, got {self.warmup}")
        if not (math.isfinite(self.horizon) and self.horizon > self.warmup):
            raise EstimationError(
                f"horizon ({self.horizon}) must be finite and exceed warmup ({self.warmup})"
            )
        if self.sampling_interval is not None and not (
            math.isfinite(self.sampling_interval) and self.sampling_interval > 0.0
        ):
            raise EstimationError(
                f"sampling interval must be positive, got {self.sampling_interval}"
            )
        if self.replications < 2:
            raise EstimationError(
                f"at least 2 replications are required for a standard error, got {self.replications}"
            )
        if not 1 <= self.n_est <= MAX_ESTIMATED_ORDER:
            raise EstimationError(
                f"n_est must be in 1..{MAX_ESTIMATED_ORDER}, got {self.n_est}"
            )
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise EstimationError(f"master seed must fit in 64 bits, got {self.master_seed}")

    def resolved_interval(self, model: EnvironmentModel, statics: ChainStatics) -> float:
        if self.sampling_interval is not None:
            return float(self.sampling_interval)
        return mean_cycle_length(model, statics)


@dataclass(frozen=True)
class EnvironmentPath:
    """Piecewise-constant state trajectory: segment k spans ``durations[k]``."""

    states: np.ndarray
    durations: np.ndarray

    @property
    def total_duration(self) -> float:
        return float(self.durations.sum())

    def occupancy(self, num_states: int, start: float = 0.0, stop: float = None) -> np.ndarray:
        """Fraction of [start, stop] spent in each state."""
        if stop is None:
            stop = self.total_duration
        ends = np.cumsum(self.durations)
        begins = ends - self.durations
        overlap = np.minimum(ends, stop) - np.maximum(begins, start)
        overlap = np.maximum(overlap, 0.0)
        weights = np.zeros(num_states)
        np.add.at(weights, self.states, overlap)
        total = weights.sum()
        if total <= 0.0:
            raise EstimationError("empty occupancy window")
        return weights / total


@dataclass(frozen=True)
class SimulationEstimate:
    """Falling-factorial moment estimates with across-replication errors.

    ``estimates[n]`` approximates E[N(N-1)...(N-n+1)] for n = 0..n_est
    (order 0 is identically 1).  Standard errors are computed across
    replications only, never pooled within one, which sidesteps the
    autocorrelation of consecutive samples.
    """

    orders: np.ndarray
    estimates: np.ndarray
    standard_errors: np.ndarray
    samples_per_replication: int
    replications: int
    master_seed: int
    occupancy: np.ndarray
    config: SimulationConfig = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "orders": self.orders.tolist(),
            "estimates": self.estimates.tolist(),
            "standard_errors": self.standard_errors.tolist(),
            "samples_per_replication": self.samples_per_replication,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "occupancy": self.occupancy.tolist(),
            "config": {
                "warmup": self.config.warmup,
                "horizon": self.config.horizon,
                "sampling_interval": self.config.sampling_interval,
                "replications": self.config.replications,
                "master_seed": self.config.master_seed,
                "n_est": self.config.n_est,
            }
            if self.config is not None
            else None,
        }


def default_warmup(model: EnvironmentModel) -> float:
    """Recommended warmup: 20 mean service times at the slowest positive speed."""
    positive = model.speeds[model.speeds > 0.0]
    return 20.0 / (model.mu * float(positive.min()))


def replication_rng(master_seed: int, replication: int) -> np.random.Generator:
    """Isolated stream for one replication; independent of scheduling order."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(replication),))
    )


def simulate_environment(
    model: EnvironmentModel,
    horizon: float,
    rng: np.random.Generator,
    statics: ChainStatics = None,
) -> EnvironmentPath:
    """Generate a stationary environment trajectory covering [0, horizon].

    The initial state is drawn from the occupancy law and its sojourn
    from the equilibrium residual law; every later segment draws the
    next state from the routing row and a full sojourn from the state's
    law.
    """
    require_valid(model)
    if statics is None:
        statics = chain_statics(model)
    routing_cdf = np.cumsum(model.routing, axis=1)
    occupancy_cdf = np.cumsum(statics.occupancy)

    states = []
    durations = []
    state = int(np.searchsorted(occupancy_cdf, rng.random(), side="right"))
    state = min(state, model.num_states - 1)
    duration = model.sojourns[state].sample_residual(rng)
    elapsed = 0.0
    while True:
        states.append(state)
        durations.append(duration)
        elapsed += duration
        if elapsed >= horizon:
            break
        state = int(np.searchsorted(routing_cdf[state], rng.random(), side="right"))
        state = min(state, model.num_states - 1)
        duration = model.sojourns[state].sample(rng)
    return EnvironmentPath(
        states=np.array(states, dtype=np.int64), durations=np.array(durations)
    )


def simulate_queue(
    model: EnvironmentModel,
    path: EnvironmentPath,
    grid: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Customer counts at the grid times, for one environment trajectory.

    Arrivals are generated per segment as an exact Poisson count with
    uniformly placed times; each gets a departure threshold
    W(arrival) + Exp(mu).  At each grid time the heap is popped while the
    smallest threshold is below the current work level, and the heap size
    is the count.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size and grid[-1] > path.total_duration:
        raise ValueError(
            f"sampling grid ends at {grid[-1]} beyond the path duration {path.total_duration}"
        )
    counts = np.zeros(grid.size, dtype=np.int64)
    heap = []
    mean_service = 1.0 / model.mu
    grid_pos = 0
    segment_start = 0.0
    work_start = 0.0

    for state, duration in zip(path.states, path.durations):
        rate = model.arrival_rates[state]
        speed = model.speeds[state]
        segment_end = segment_start + duration

        arrivals = None
        thresholds = None
        if rate > 0.0:
            count = rng.poisson(rate * duration)
            if count:
                arrivals = np.sort(rng.uniform(segment_start, segment_end, count))
                offsets = speed * (arrivals - segment_start)
                thresholds = work_start + offsets + rng.exponential(mean_service, count)
        n_arrivals = 0 if arrivals is None else arrivals.size

        grid_end = int(np.searchsorted(grid, segment_end, side="left"))
        arrival_pos = 0
        while grid_pos < grid_end:
            sample_time = grid[grid_pos]
            while arrival_pos < n_arrivals and arrivals[arrival_pos] <= sample_time:
                heapq.heappush(heap, thresholds[arrival_pos])
                arrival_pos += 1
            work_now = work_start + speed * (sample_time - segment_start)
            while heap and heap[0] <= work_now:
                heapq.heappop(heap)
            counts[grid_pos] = len(heap)
            grid_pos += 1
        while arrival_pos < n_arrivals:
            heapq.heappush(heap, thresholds[arrival_pos])
            arrival_pos += 1

        work_start += speed * duration
        segment_start = segment_end
    return counts


def _falling_factorial_means(counts: np.ndarray, n_est: int) -> np.ndarray:
    values = counts.astype(float)
    out = np.empty(n_est + 1)
    out[0] = 1.0
    running = np.ones_like(values)
    for n in range(1, n_est + 1):
        running = running * (values - (n - 1))
        out[n] = float(running.mean())
    return out


def _replication_estimate(
    model: EnvironmentModel,
    config: SimulationConfig,
    statics: ChainStatics,
    grid: np.ndarray,
    replication: int,
):
    """One replication: (falling-factorial means, post-warmup occupancy)."""
    rng = replication_rng(config.master_seed, replication)
    path = simulate_environment(model, config.horizon, rng, statics)
    counts = simulate_queue(model, path, grid, rng)
    moments = _falling_factorial_means(counts, config.n_est)
    occupancy = path.occupancy(model.num_states, start=config.warmup, stop=config.horizon)
    return moments, occupancy


def _sampling_grid(config: SimulationConfig, interval: float) -> np.ndarray:
    grid = np.arange(config.warmup + interval, config.horizon, interval)
    if grid.size < 2:
        raise EstimationError(
            "fewer than 2 samples fit between warmup and horizon; "
            "lengthen the horizon or shrink the sampling interval"
        )
    return grid


def estimate_factorial_moments(
    model: EnvironmentModel, config: SimulationConfig
) -> SimulationEstimate:
    """Estimate the factorial moments of the customer count by replication.

    Runs ``config.replications`` independent replications, averages the
    falling factorials of the sampled counts per replication, and
    reports the across-replication mean and standard error per order.
    """
    require_valid(model)
    statics = chain_statics(model)
    interval = config.resolved_interval(model, statics)
    grid = _sampling_grid(config, interval)

    per_rep = np.empty((config.replications, config.n_est + 1))
    occupancies = np.empty((config.replications, model.num_states))
    for replication in range(config.replications):
        moments, occupancy = _replication_estimate(model, config, statics, grid, replication)
        per_rep[replication] = moments
        occupancies[replication] = occupancy

    estimates = per_rep.mean(axis=0)
    spread = per_rep.std(axis=0, ddof=1)
    standard_errors = spread / math.sqrt(config.replications)
    if not (np.all(np.isfinite(estimates)) and np.all(np.isfinite(standard_errors))):
        raise EstimationError("estimates or standard errors are not finite")
    return SimulationEstimate(
        orders=np.arange(config.n_est + 1),
        estimates=estimates,
        standard_errors=standard_errors,
        samples_per_replication=int(grid.size),
        replications=config.replications,
        master_seed=int(config.master_seed),
        occupancy=occupancies.mean(axis=0),
        config=config,
    )


def stationarity_check(model: EnvironmentModel, config: SimulationConfig) -> dict:
    """Split the post-warmup window in halves and compare first moments.

    Returns the two mean estimates, their combined standard error, and
    whether they agree within 4 combined standard errors; disagreement
    signals insufficient warmup.
    """
    require_valid(model)
    statics = chain_statics(model)
    interval = config.resolved_interval(model, statics)
    grid = _sampling_grid(config, interval)
    half = grid.size // 2
    if half < 1:
        raise EstimationError("window too short to split into halves")

    first = np.empty(config.replications)
    second = np.empty(config.replications)
    for replication in range(config.replications):
        rng = replication_rng(config.master_seed, replication)
        path = simulate_environment(model, config.horizon, rng, statics)
        counts = simulate_queue(model, path, grid, rng)
        first[replication] = counts[:half].mean()
        second[replication] = counts[half:].mean()

    se_first = first.std(ddof=1) / math.sqrt(config.replications)
    se_second = second.std(ddof=1) / math.sqrt(config.replications)
    combined = math.hypot(se_first, se_second)
    gap = abs(first.mean() - second.mean())
    return {
        "first_half": float(first.mean()),
        "second_half": float(second.mean()),
        "combined_se": float(combined),
        "gap": float(gap),
        "consistent": bool(gap < 4.0 * combined) if combined > 0.0 else gap == 0.0,
    }
