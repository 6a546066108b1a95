"""Sojourn-time distributions of the random environment.

Every family exposes its Laplace transform at nonnegative real arguments
together with its mean; these two quantities are all the analytic
machinery ever needs.  For simulation each parametric family can also
draw a full sojourn and an equilibrium (integrated-tail) residual
sojourn, the latter being what a stationary observer sees of the
in-progress sojourn.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammainc, gammaincc

from .errors import ModelError, NumericError

__all__ = [
    "SojournDistribution",
    "Exponential",
    "Gamma",
    "Deterministic",
    "HyperExponential",
    "TabulatedLaplace",
]


def _check_transform_arg(s) -> float:
    s = float(s)
    if not math.isfinite(s) or s < 0.0:
        raise ValueError(f"Laplace transform argument must be a finite nonnegative real, got {s}")
    return s


class SojournDistribution:
    """Common interface of all sojourn-time laws."""

    def laplace(self, s: float) -> float:
        """E[exp(-s T)] for s >= 0, exact at s = 0."""
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> float:
        """Draw one full sojourn."""
        raise NotImplementedError

    def sample_residual(self, rng: np.random.Generator) -> float:
        """Draw from the equilibrium (integrated-tail) law of the sojourn."""
        raise NotImplementedError

    def residual_laplace(self, s: float) -> float:
        """Transform of the equilibrium residual law: (1 - laplace(s)) / (s mean).

        Continuous at s = 0 where it equals 1.
        """
        s = _check_transform_arg(s)
        if s == 0.0:
            return 1.0
        return (1.0 - self.laplace(s)) / (s * self.mean())


@dataclass(frozen=True)
class Exponential(SojournDistribution):
    """Exponential sojourn with rate `rate` (mean 1/rate)."""

    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ModelError(f"Exponential rate must be positive and finite, got {self.rate}")

    def laplace(self, s: float) -> float:
        s = _check_transform_arg(s)
        return self.rate / (self.rate + s)

    def residual_laplace(self, s: float) -> float:
        # memoryless: the residual law is the sojourn law itself; returning
        # laplace() keeps the identity exact in floating point
        return self.laplace(s)

    def mean(self) -> float:
        return 1.0 / self.rate

    def sample(self, rng) -> float:
        return rng.exponential(1.0 / self.rate)

    def sample_residual(self, rng) -> float:
        return rng.exponential(1.0 / self.rate)


@dataclass(frozen=True)
class Gamma(SojournDistribution):
    """Gamma sojourn with shape `shape` and rate `rate` (mean shape/rate)."""

    shape: float
    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.shape) and self.shape > 0.0):
            raise ModelError(f"Gamma shape must be positive and finite, got {self.shape}")
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ModelError(f"Gamma rate must be positive and finite, got {self.rate}")

    def laplace(self, s: float) -> float:
        s = _check_transform_arg(s)
        return (1.0 + s / self.rate) ** (-self.shape)

    def mean(self) -> float:
        return self.shape / self.rate

    def sample(self, rng) -> float:
        return rng.gamma(self.shape, 1.0 / self.rate)

    def _equilibrium_cdf(self, t: float) -> float:
        # integral of the survival function up to t, divided by the mean:
        # (r t / shape) * S(t) + F_{shape+1}(t)
        if t <= 0.0:
            return 0.0
        x = self.rate * t
        return (x / self.shape) * gammaincc(self.shape, x) + gammainc(self.shape + 1.0, x)

    def sample_residual(self, rng) -> float:
        return _invert_cdf(self._equilibrium_cdf, rng.random(), self.mean())


@dataclass(frozen=True)
class Deterministic(SojournDistribution):
    """Point mass at `value`."""

    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value > 0.0):
            raise ModelError(f"Deterministic value must be positive and finite, got {self.value}")

    def laplace(self, s: float) -> float:
        s = _check_transform_arg(s)
        return math.exp(-s * self.value)

    def mean(self) -> float:
        return self.value

    def sample(self, rng) -> float:
        return self.value

    def sample_residual(self, rng) -> float:
        # integrated tail of a point mass is uniform on [0, value]
        return self.value * rng.random()


@dataclass(frozen=True)
class HyperExponential(SojournDistribution):
    """Mixture of exponentials: branch i has probability probs[i] and rate rates[i]."""

    probs: tuple
    rates: tuple

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        rates = tuple(float(r) for r in self.rates)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "rates", rates)
        if len(probs) != len(rates) or len(probs) == 0:
            raise ModelError("HyperExponential needs matching, nonempty probs and rates")
        if any(p < 0.0 or not math.isfinite(p) for p in probs):
            raise ModelError(f"HyperExponential branch probabilities must be nonnegative, got {probs}")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ModelError(f"HyperExponential branch probabilities must sum to 1, got {sum(probs)}")
        if any(r <= 0.0 or not math.isfinite(r) for r in rates):
            raise ModelError(f"HyperExponential branch rates must be positive, got {rates}")

    def laplace(self, s: float) -> float:
        s = _check_transform_arg(s)
        return sum(p * r / (r + s) for p, r in zip(self.probs, self.rates))

    def mean(self) -> float:
        return sum(p / r for p, r in zip(self.probs, self.rates))

    def sample(self, rng) -> float:
        u = rng.random()
        acc = 0.0
        branch = len(self.probs) - 1
        for i, p in enumerate(self.probs):
            acc += p
            if u < acc:
                branch = i
                break
        return rng.exponential(1.0 / self.rates[branch])

    def _equilibrium_cdf(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        m = self.mean()
        return sum(
            (p / r) / m * (1.0 - math.exp(-r * t)) for p, r in zip(self.probs, self.rates)
        )

    def sample_residual(self, rng) -> float:
        return _invert_cdf(self._equilibrium_cdf, rng.random(), self.mean())


@dataclass(frozen=True)
class TabulatedLaplace(SojournDistribution):
    """User-supplied transform given on a grid, with monotonicity validation.

    `points` is an increasing grid of transform arguments starting at 0;
    `values` are the transform values there, starting at 1 and strictly
    decreasing.  Evaluation interpolates log-linearly; arguments beyond
    the grid are a domain error.  The law cannot be sampled, so models
    using it are analytic-only.
    """

    points: np.ndarray
    values: np.ndarray
    mean_value: float

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        values = np.array(self.values, dtype=float)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)
        if points.ndim != 1 or points.shape != values.shape or points.size < 2:
            raise ModelError("TabulatedLaplace needs matching 1-d grids with at least 2 points")
        if points[0] != 0.0 or np.any(np.diff(points) <= 0.0):
            raise ModelError("TabulatedLaplace grid must start at 0 and increase strictly")
        if values[0] != 1.0:
            raise ModelError("TabulatedLaplace must take the value 1 at argument 0")
        if np.any(values <= 0.0) or np.any(values > 1.0):
            raise ModelError("TabulatedLaplace values must lie in (0, 1]")
        if np.any(np.diff(values) >= 0.0):
            raise ModelError("TabulatedLaplace values must be strictly decreasing")
        if not (math.isfinite(self.mean_value) and self.mean_value > 0.0):
            raise ModelError(f"TabulatedLaplace mean must be positive, got {self.mean_value}")
        points.flags.writeable = False
        values.flags.writeable = False

    def laplace(self, s: float) -> float:
        s = _check_transform_arg(s)
        if s > self.points[-1]:
            raise ValueError(
                f"argument {s} is outside the tabulated range [0, {self.points[-1]}]"
            )
        return float(np.exp(np.interp(s, self.points, np.log(self.values))))

    def mean(self) -> float:
        return self.mean_value

    def sample(self, rng) -> float:
        raise ModelError("a tabulated sojourn law cannot be sampled; simulation needs a parametric family")

    def sample_residual(self, rng) -> float:
        raise ModelError("a tabulated sojourn law cannot be sampled; simulation needs a parametric family")


def _invert_cdf(cdf, u: float, scale: float) -> float:
    """Solve cdf(t) = u for t >= 0 by bracketing and Brent's method."""
    if u <= 0.0:
        return 0.0
    hi = max(scale, 1e-12)
    for _ in range(200):
        if cdf(hi) >= u:
            break
        hi *= 2.0
    else:
        raise NumericError(f"could not bracket equilibrium quantile at u={u} (searched up to {hi})")
    return brentq(lambda t: cdf(t) - u, 0.0, hi, xtol=1e-12, rtol=1e-10)
