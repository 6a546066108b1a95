"""Semi-Markov environment model and its embedded-chain statics.

The environment is a finite-state semi-Markov process: it sits in state
k for a random sojourn drawn from that state's law, then jumps according
to a row-stochastic routing matrix with zero diagonal.  While in state k
the queue sees Poisson arrivals at rate ``arrival_rates[k]`` and all
servers run at speed ``speeds[k]`` relative to the base service rate
``mu``.
"""

from dataclasses import dataclass

import numpy as np

from .distributions import SojournDistribution
from .errors import ModelError, NumericError

__all__ = [
    "EnvironmentModel",
    "ChainStatics",
    "validate_model",
    "require_valid",
    "chain_statics",
    "mean_cycle_length",
]

STRUCTURAL_TOL = 1e-12
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class EnvironmentModel:
    """Full specification of the modulated infinite-server queue.

    Parameters
    ----------
    arrival_rates : array_like, shape (K,)
        Poisson arrival rate per state, customers per unit time.
    speeds : array_like, shape (K,)
        Server speed per state, in [0, 1]; the effective service rate in
        state k is ``speeds[k] * mu``.
    sojourns : sequence of SojournDistribution, length K
        Sojourn-time law per state.
    mu : float
        Base service rate of the exponential service requirement.
    routing : array_like, shape (K, K)
        Row-stochastic jump matrix with zero diagonal.
    """

    arrival_rates: np.ndarray
    speeds: np.ndarray
    sojourns: tuple
    mu: float
    routing: np.ndarray

    def __post_init__(self):
        lam = np.array(self.arrival_rates, dtype=float)
        beta = np.array(self.speeds, dtype=float)
        routing = np.array(self.routing, dtype=float)
        sojourns = tuple(self.sojourns)
        if lam.ndim != 1 or beta.shape != lam.shape:
            raise ModelError("arrival_rates and speeds must be 1-d arrays of equal length")
        if len(sojourns) != lam.size:
            raise ModelError("one sojourn law per state is required")
        if any(not isinstance(d, SojournDistribution) for d in sojourns):
            raise ModelError("sojourns must be SojournDistribution instances")
        if routing.shape != (lam.size, lam.size):
            raise ModelError(
                f"routing must be {lam.size}x{lam.size}, got shape {routing.shape}"
            )
        for arr in (lam, beta, routing):
            arr.flags.writeable = False
        object.__setattr__(self, "arrival_rates", lam)
        object.__setattr__(self, "speeds", beta)
        object.__setattr__(self, "sojourns", sojourns)
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "routing", routing)

    @property
    def num_states(self) -> int:
        return self.arrival_rates.size

    @property
    def service_rates(self) -> np.ndarray:
        """Per-state service rate: speed times the base rate."""
        return self.speeds * self.mu


@dataclass(frozen=True)
class ChainStatics:
    """Quantities derived from the routing matrix and the sojourn means.

    ``pi`` is the stationary law of the embedded jump chain,
    ``reversed_routing`` the time-reversed jump matrix
    diag(pi)^-1 P^T diag(pi), and ``occupancy`` the time-stationary state
    law, proportional to pi weighted by mean sojourns.
    """

    pi: np.ndarray
    reversed_routing: np.ndarray
    occupancy: np.ndarray

    def __post_init__(self):
        for arr in (self.pi, self.reversed_routing, self.occupancy):
            arr.flags.writeable = False


def _reachable(adjacency: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(adjacency.shape[0], dtype=bool)
    stack = [start]
    seen[start] = True
    while stack:
        node = stack.pop()
        for nxt in np.flatnonzero(adjacency[node]):
            if not seen[nxt]:
                seen[nxt] = True
                stack.append(int(nxt))
    return seen


def _is_irreducible(routing: np.ndarray) -> bool:
    positive = routing > 0.0
    return bool(_reachable(positive, 0).all() and _reachable(positive.T, 0).all())


def validate_model(model: EnvironmentModel) -> list:
    """Check every structural requirement; return the list of violations.

    An empty list means the model is valid.  Violations are reported as
    human-readable strings; nothing is raised.
    """
    report = []
    lam, beta, routing = model.arrival_rates, model.speeds, model.routing
    k_count = model.num_states

    if k_count < 2:
        report.append(f"at least 2 environment states are required, got {k_count}")
    if not np.isfinite(model.mu) or model.mu <= 0.0:
        report.append(f"base service rate mu must be positive, got {model.mu}")
    if not np.all(np.isfinite(lam)) or np.any(lam < 0.0):
        report.append("arrival rates must be finite and nonnegative")
    if not np.all(np.isfinite(beta)) or np.any(beta < 0.0) or np.any(beta > 1.0):
        report.append("speeds must lie in [0, 1]")
    if np.all(lam <= 0.0):
        report.append("at least one state must have a positive arrival rate")
    if np.all(beta <= 0.0):
        report.append("at least one state must have a positive speed")
    bad = np.flatnonzero((lam > 0.0) & (beta == 0.0))
    for k in bad:
        report.append(
            f"state {k} has positive arrivals but zero speed (offered load diverges)"
        )

    if not np.all(np.isfinite(routing)):
        report.append("routing entries must be finite")
        return report
    if np.any(routing < 0.0) or np.any(routing > 1.0):
        report.append("routing entries must lie in [0, 1]")
    diag = np.diag(routing)
    for k in np.flatnonzero(diag != 0.0):
        report.append(f"routing diagonal entry p[{k},{k}] = {diag[k]} must be 0")
    row_sums = routing.sum(axis=1)
    for k in np.flatnonzero(np.abs(row_sums - 1.0) > STRUCTURAL_TOL):
        report.append(f"routing row {k} sums to {row_sums[k]!r}, must be 1 within 1e-12")
    if k_count >= 2 and not _is_irreducible(routing):
        report.append("routing matrix is not irreducible")
    return report


def require_valid(model: EnvironmentModel) -> None:
    """Raise ModelError listing every violated invariant, if any."""
    report = validate_model(model)
    if report:
        raise ModelError("invalid model: " + "; ".join(report))


def chain_statics(model: EnvironmentModel) -> ChainStatics:
    """Solve for the embedded stationary vector and derive reversed routing and occupancy.

    The balance system pi (P - I) = 0 is solved densely with the last
    balance equation replaced by the normalization row.  A condition
    estimate above 1e12 raises NumericError.
    """
    require_valid(model)
    routing = model.routing
    k_count = model.num_states

    system = routing.T - np.eye(k_count)
    system[-1, :] = 1.0
    rhs = np.zeros(k_count)
    rhs[-1] = 1.0
    try:
        condition = np.linalg.cond(system, 1)
    except np.linalg.LinAlgError:
        condition = np.inf
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise NumericError(
            f"embedded balance system is near-singular (condition {condition:.3e} > 1e12)"
        )
    pi = np.linalg.solve(system, rhs)

    balance = np.max(np.abs(pi @ routing - pi))
    if balance > 100 * STRUCTURAL_TOL:
        raise NumericError(f"stationary solve residual {balance:.3e} exceeds tolerance")

    reversed_routing = (routing.T * pi[np.newaxis, :]) / pi[:, np.newaxis]
    means = np.array([d.mean() for d in model.sojourns])
    occupancy = pi * means
    occupancy = occupancy / occupancy.sum()
    return ChainStatics(pi=pi, reversed_routing=reversed_routing, occupancy=occupancy)


def mean_cycle_length(model: EnvironmentModel, statics: ChainStatics = None) -> float:
    """Expected time for one sweep of the environment: K mean segments.

    The mean segment duration is the pi-weighted mean sojourn; one
    "cycle" is K consecutive segments, which for cyclic routing is the
    exact period of one tour through the states.
    """
    if statics is None:
        statics = chain_statics(model)
    means = np.array([d.mean() for d in model.sojourns])
    return float(model.num_states * (statics.pi @ means))
