"""
Random-variate generators for the simulation parameters.

All continuous families use inverse-transform sampling, so a given uniform u
maps to one checkable value. Parameters are validated when a spec is built,
never when it is sampled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Tuple, Union

import numpy as np
from scipy import optimize, special, stats  # type: ignore[import]

from .errors import ParameterError
from .rng import RandomStream


@dataclass(frozen=True)
class Exponential:
    mean: float

    def __post_init__(self) -> None:
        if not (self.mean > 0 and math.isfinite(self.mean)):
            raise ParameterError(f"Exponential mean must be > 0, got {self.mean}")

    def from_uniform(self, u: float) -> float:
        return -self.mean * math.log1p(-u)

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        return -self.mean * np.log1p(-u)

    def expected(self) -> float:
        return self.mean

    def describe(self) -> str:
        return f"Exponential({self.mean:g})"


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.low) and math.isfinite(self.high)) or self.low > self.high:
            raise ParameterError(f"Uniform needs low <= high, got ({self.low}, {self.high})")

    def from_uniform(self, u: float) -> float:
        return self.low + (self.high - self.low) * u

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        return self.low + (self.high - self.low) * u

    def expected(self) -> float:
        return (self.low + self.high) / 2.0

    def describe(self) -> str:
        return f"Uniform({self.low:g},{self.high:g})"


@dataclass(frozen=True)
class Triangular:
    low: float
    mode: float
    high: float

    def __post_init__(self) -> None:
        if not (self.low <= self.mode <= self.high):
            raise ParameterError(
                f"Triangular needs low <= mode <= high, got ({self.low}, {self.mode}, {self.high})"
            )

    def from_uniform(self, u: float) -> float:
        a, c, b = self.low, self.mode, self.high
        if b == a:
            return a
        fc = (c - a) / (b - a)
        if u < fc:
            return a + math.sqrt(u * (b - a) * (c - a))
        return b - math.sqrt((1.0 - u) * (b - a) * (b - c))

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        a, c, b = self.low, self.mode, self.high
        if b == a:
            return np.full_like(u, a, dtype=float)
        fc = (c - a) / (b - a)
        left = a + np.sqrt(u * (b - a) * (c - a))
        right = b - np.sqrt((1.0 - u) * (b - a) * (b - c))
        return np.where(u < fc, left, right)

    def expected(self) -> float:
        return (self.low + self.mode + self.high) / 3.0

    def describe(self) -> str:
        return f"Triangular({self.low:g},{self.mode:g},{self.high:g})"


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p <= 1.0):
            raise ParameterError(f"Bernoulli p must lie in [0, 1], got {self.p}")

    def from_uniform(self, u: float) -> bool:
        return u < self.p

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        return u < self.p

    def expected(self) -> float:
        return self.p

    def describe(self) -> str:
        return f"Bernoulli({self.p:g})"


@dataclass(frozen=True)
class Categorical:
    """Labels with nonnegative weights; weights are normalised to sum to 1."""

    labels: Tuple[Any, ...]
    weights: Tuple[float, ...]
    _cumulative: Tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        weights = tuple(float(w) for w in self.weights)
        if not labels or len(labels) != len(weights):
            raise ParameterError("Categorical needs one weight per label and at least one label")
        if any(w < 0 or not math.isfinite(w) for w in weights):
            raise ParameterError(f"Categorical weights must be nonnegative, got {weights}")
        total = sum(weights)
        if total <= 0:
            raise ParameterError("Categorical weights must not all be zero")
        normalised = tuple(w / total for w in weights)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", normalised)
        object.__setattr__(self, "_cumulative", tuple(np.cumsum(normalised).tolist()))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "Categorical":
        return cls(labels=tuple(mapping.keys()), weights=tuple(mapping.values()))

    def _index(self, u: float) -> int:
        idx = int(np.searchsorted(self._cumulative, u, side="right"))
        return min(idx, len(self.labels) - 1)

    def from_uniform(self, u: float) -> Any:
        return self.labels[self._index(u)]

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(np.asarray(self._cumulative), u, side="right")
        idx = np.minimum(idx, len(self.labels) - 1)
        out = np.empty(len(u), dtype=object)
        for i, j in enumerate(idx):
            out[i] = self.labels[j]
        return out

    def expected(self) -> float:
        return float(np.dot(np.asarray(self.labels, dtype=float), self.weights))

    def describe(self) -> str:
        pairs = ", ".join(f"{lab}:{w:.3f}" for lab, w in zip(self.labels, self.weights))
        return f"Categorical({pairs})"


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal(loc, scale) restricted to [low, high], sampled by inverse CDF."""

    loc: float
    scale: float
    low: float
    high: float

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ParameterError(f"TruncatedNormal scale must be > 0, got {self.scale}")
        if not self.low < self.high:
            raise ParameterError(f"TruncatedNormal needs low < high, got ({self.low}, {self.high})")

    @property
    def _cdf_bounds(self) -> Tuple[float, float]:
        a = special.ndtr((self.low - self.loc) / self.scale)
        b = special.ndtr((self.high - self.loc) / self.scale)
        return float(a), float(b)

    def from_uniform(self, u: float) -> float:
        return float(self.from_uniforms(np.asarray([u]))[0])

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        a, b = self._cdf_bounds
        x = self.loc + self.scale * special.ndtri(a + u * (b - a))
        return np.clip(x, self.low, self.high)

    def _frozen(self):
        alpha = (self.low - self.loc) / self.scale
        beta = (self.high - self.loc) / self.scale
        return stats.truncnorm(alpha, beta, loc=self.loc, scale=self.scale)

    def expected(self) -> float:
        return float(self._frozen().mean())

    def std(self) -> float:
        return float(self._frozen().std())

    def describe(self) -> str:
        return f"TruncatedNormal({self.loc:g},{self.scale:g},[{self.low:g},{self.high:g}])"

    @classmethod
    def moment_matched(cls, mean: float, sd: float, low: float, high: float) -> "TruncatedNormal":
        """Choose loc/scale so the *truncated* distribution has the given mean and SD."""
        if not (low < mean < high) or sd <= 0:
            raise ParameterError(f"cannot match mean={mean}, sd={sd} on [{low}, {high}]")

        def residual(theta: np.ndarray) -> np.ndarray:
            loc, log_scale = theta
            dist = cls(loc=float(loc), scale=float(math.exp(log_scale)), low=low, high=high)
            return np.asarray([dist.expected() - mean, dist.std() - sd])

        fit = optimize.least_squares(residual, x0=np.asarray([mean, math.log(sd)]), xtol=1e-12, ftol=1e-12)
        loc, log_scale = fit.x
        return cls(loc=float(loc), scale=float(math.exp(log_scale)), low=low, high=high)


DistributionSpec = Union[Exponential, Uniform, Triangular, Bernoulli, Categorical, TruncatedNormal]


def uniform01(stream: RandomStream) -> float:
    return stream.uniform01()


def sample(spec: DistributionSpec, stream: RandomStream) -> Any:
    """One variate; consumes exactly one uniform from `stream`."""
    return spec.from_uniform(stream.uniform01())


def sample_many(spec: DistributionSpec, stream: RandomStream, n: int) -> np.ndarray:
    """n variates; element i equals the i-th successive `sample` call."""
    return spec.from_uniforms(stream.uniforms(n))

