"""Shared model builders for the test suite."""

from pathlib import Path

import numpy as np
import pytest

from mminfenv import (
    Deterministic,
    EnvironmentModel,
    Exponential,
    Gamma,
    HyperExponential,
    TwoStateModel,
    load_model,
)

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"


def random_routing(k_count: int, rng: np.random.Generator) -> np.ndarray:
    """Random irreducible row-stochastic matrix with zero diagonal."""
    if k_count == 2:
        return np.array([[0.0, 1.0], [1.0, 0.0]])
    routing = rng.uniform(0.1, 1.0, (k_count, k_count))
    np.fill_diagonal(routing, 0.0)
    return routing / routing.sum(axis=1, keepdims=True)


def random_sojourn(rng: np.random.Generator):
    family = rng.integers(0, 4)
    if family == 0:
        return Exponential(rate=float(rng.uniform(0.5, 2.0)))
    if family == 1:
        return Gamma(shape=float(rng.uniform(0.5, 3.0)), rate=float(rng.uniform(0.5, 2.0)))
    if family == 2:
        return Deterministic(value=float(rng.uniform(0.3, 2.0)))
    probs = rng.uniform(0.2, 1.0, 2)
    probs = probs / probs.sum()
    return HyperExponential(
        probs=tuple(probs), rates=tuple(rng.uniform(0.5, 3.0, 2))
    )


def random_exponential_model(k_count: int, rng: np.random.Generator) -> EnvironmentModel:
    return EnvironmentModel(
        arrival_rates=rng.uniform(0.2, 3.0, k_count),
        speeds=rng.uniform(0.3, 1.0, k_count),
        sojourns=tuple(Exponential(rate=float(r)) for r in rng.uniform(0.5, 2.0, k_count)),
        mu=float(rng.uniform(0.8, 1.5)),
        routing=random_routing(k_count, rng),
    )


def random_mixed_model(k_count: int, rng: np.random.Generator) -> EnvironmentModel:
    return EnvironmentModel(
        arrival_rates=rng.uniform(0.2, 3.0, k_count),
        speeds=rng.uniform(0.3, 1.0, k_count),
        sojourns=tuple(random_sojourn(rng) for _ in range(k_count)),
        mu=float(rng.uniform(0.8, 1.5)),
        routing=random_routing(k_count, rng),
    )


def random_two_state_model(rng: np.random.Generator, family: str) -> TwoStateModel:
    """Random in-scope two-state model with the given state-1 family."""
    if family == "gamma":
        sojourn_1 = Gamma(shape=float(rng.uniform(0.5, 3.0)), rate=float(rng.uniform(0.5, 2.0)))
    elif family == "deterministic":
        sojourn_1 = Deterministic(value=float(rng.uniform(0.3, 2.0)))
    elif family == "hyperexponential":
        probs = rng.uniform(0.2, 1.0, 2)
        probs = probs / probs.sum()
        sojourn_1 = HyperExponential(probs=tuple(probs), rates=tuple(rng.uniform(0.5, 3.0, 2)))
    elif family == "exponential":
        sojourn_1 = Exponential(rate=float(rng.uniform(0.5, 2.0)))
    else:
        raise ValueError(family)
    return TwoStateModel(
        arrival_rate_1=float(rng.uniform(0.0, 3.0)),
        arrival_rate_2=float(rng.uniform(0.0, 3.0)),
        service_rate_1=float(rng.uniform(0.3, 1.0)),
        service_rate_2=float(rng.uniform(0.3, 1.0)),
        sojourn_1=sojourn_1,
        sojourn_2=Exponential(rate=float(rng.uniform(0.5, 2.0))),
    )


def identical_state_model(rho: float = 2.0) -> EnvironmentModel:
    """Mixed sojourns and asymmetric routing, but identical rates and speeds."""
    beta, mu = 0.8, 1.25
    lam = rho * beta * mu
    return EnvironmentModel(
        arrival_rates=[lam, lam, lam],
        speeds=[beta, beta, beta],
        sojourns=(
            Gamma(shape=2.0, rate=2.0),
            Deterministic(value=1.5),
            HyperExponential(probs=(0.4, 0.6), rates=(0.5, 2.0)),
        ),
        mu=mu,
        routing=[[0.0, 0.7, 0.3], [0.4, 0.0, 0.6], [0.5, 0.5, 0.0]],
    )


@pytest.fixture(scope="session")
def k3_mixed_model() -> EnvironmentModel:
    return load_model(MODELS_DIR / "k3_mixed.yaml")


@pytest.fixture(scope="session")
def k3_exponential_model() -> EnvironmentModel:
    return load_model(MODELS_DIR / "k3_exponential.yaml")


@pytest.fixture(scope="session")
def k2_gamma_exp_model() -> EnvironmentModel:
    return load_model(MODELS_DIR / "k2_gamma_exp.yaml")
