"""Bayesian estimation of the mean action and of the visibility rate.

The mean action over other agents' one-hot actions is tracked with a
Dirichlet belief updated from observed action counts; point estimates are
Monte Carlo means of posterior draws. The distance/visibility rate is
tracked with a Gamma belief whose shape grows by exactly 0.5 per sighting
and whose rate uses the current point estimate as a plug-in. A frequentist
mean-action baseline and a Hoeffding deviation bound live here too.
"""

import math
from dataclasses import dataclass

import numpy as np

CONCENTRATION_FLOOR = 1e-6
RATE_FLOOR = 1e-6


@dataclass
class MeanActionBelief:
    """Dirichlet belief over the categorical mean-action parameter.

    concentration holds one positive pseudo-count per action; updates add
    observed counts on top of the (optionally decayed) old values.
    """

    concentration: np.ndarray
    sample_count_total: int = 0

    def __post_init__(self):
        self.concentration = np.asarray(self.concentration, dtype=float)
        if self.concentration.ndim != 1 or self.concentration.size < 2:
            raise ValueError("concentration must be a vector of length >= 2")
        if not np.all(self.concentration > 0):
            raise ValueError("concentration components must be positive")

    @classmethod
    def uniform_prior(cls, n_actions: int) -> "MeanActionBelief":
        return cls(np.ones(n_actions))

    @property
    def n_actions(self) -> int:
        return self.concentration.size

    def mean(self) -> np.ndarray:
        return self.concentration / self.concentration.sum()

    def updated(self, counts, decay: float = 1.0) -> "MeanActionBelief":
        """Posterior after observing action counts.

        Each component becomes decay * old + count, floored so the Dirichlet
        stays well defined. decay=1 is the exact conjugate update.
        """
        counts = np.asarray(counts, dtype=float)
        if counts.shape != self.concentration.shape:
            raise ValueError(
                f"counts length {counts.size} != action space {self.n_actions}"
            )
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        if not 0.0 < decay <= 1.0:
            raise ValueError("decay must be in (0, 1]")
        conc = np.maximum(decay * self.concentration + counts, CONCENTRATION_FLOOR)
        return MeanActionBelief(conc, self.sample_count_total + int(counts.sum()))

    def sample_mean(self, n_samples: int, rng: np.random.Generator) -> np.ndarray:
        """Arithmetic mean of n_samples Dirichlet draws (a simplex vector)."""
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        draws = _dirichlet_draws(self.concentration, n_samples, rng)
        return draws.mean(axis=0)


def _dirichlet_draws(concentration: np.ndarray, n_samples: int,
                     rng: np.random.Generator) -> np.ndarray:
    # normalized independent Gamma(eta_i, 1) draws
    g = rng.standard_gamma(concentration, size=(n_samples, concentration.size))
    totals = g.sum(axis=1, keepdims=True)
    dead = totals[:, 0] == 0.0  # all components underflowed (tiny concentrations)
    if dead.any():
        g[dead] = 1.0
        totals = g.sum(axis=1, keepdims=True)
    return g / totals


def sample_mean_actions(concentrations: np.ndarray, n_samples: int,
                        rng: np.random.Generator) -> np.ndarray:
    """Batched Monte Carlo means for many Dirichlet beliefs at once.

    concentrations is (n_agents, n_actions); the result has the same shape.
    Equivalent to calling sample_mean per belief but with a single draw.
    """
    concentrations = np.asarray(concentrations, dtype=float)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    n, length = concentrations.shape
    g = rng.standard_gamma(concentrations, size=(n_samples, n, length))
    totals = g.sum(axis=2, keepdims=True)
    dead = totals == 0.0
    if dead.any():
        g = np.where(dead, 1.0, g)
        totals = g.sum(axis=2, keepdims=True)
    return (g / totals).mean(axis=0)


def frequentist_mean_action(observed_actions) -> np.ndarray | None:
    """Arithmetic mean of observed one-hot actions.

    Returns None for an empty observation set so the caller can keep its
    previous estimate.
    """
    if len(observed_actions) == 0:
        return None
    arr = np.asarray(observed_actions, dtype=float)
    if arr.ndim != 2:
        raise ValueError("observed actions must be a list of vectors")
    if not np.all((arr == 0.0) | (arr == 1.0)) or not np.all(arr.sum(axis=1) == 1.0):
        raise ValueError("observed actions must be one-hot")
    return arr.mean(axis=0)


@dataclass
class VisibilityBelief:
    """Gamma belief over the exponential rate of inter-agent distances.

    Sightings at distance d move shape up by 0.5 and the rate by
    d - d / point_estimate, where point_estimate is the current plug-in
    value for the rate appearing inside its own update. lambda_bar caches
    the latest sampled estimate fed to the Q-function.
    """

    shape: float = 1.0
    rate: float = 1.0
    point_estimate: float | None = None  # defaults to shape / rate
    lambda_bar: float | None = None

    def __post_init__(self):
        if self.shape <= 0 or self.rate <= 0:
            raise ValueError("shape and rate must be positive")
        if self.point_estimate is None:
            self.point_estimate = self.shape / self.rate
        if self.lambda_bar is None:
            self.lambda_bar = self.shape / self.rate
        if self.point_estimate <= 0:
            raise ValueError("point_estimate must be positive")

    def updated(self, distance: float) -> "VisibilityBelief":
        """Projected single-Gamma posterior after one sighting."""
        if distance < 0:
            raise ValueError("distance must be nonnegative")
        shape = self.shape + 0.5
        raw_rate = self.rate + distance - distance / self.point_estimate
        rate = max(raw_rate, RATE_FLOOR)
        return VisibilityBelief(shape, rate, shape / rate, self.lambda_bar)

    def sample_rate(self, n_samples: int, rng: np.random.Generator) -> float:
        """Mean of n_samples Gamma draws; strictly positive."""
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        draws = rng.standard_gamma(self.shape, size=n_samples) / self.rate
        value = float(draws.mean())
        return value if value > 0.0 else np.finfo(float).tiny


def sample_rates(shapes: np.ndarray, rates: np.ndarray, n_samples: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Batched Gamma-mean sampling for many visibility beliefs."""
    shapes = np.asarray(shapes, dtype=float)
    rates = np.asarray(rates, dtype=float)
    draws = rng.standard_gamma(shapes, size=(n_samples,) + shapes.shape) / rates
    out = draws.mean(axis=0)
    return np.maximum(out, np.finfo(float).tiny)


def visibility_prob(distance: float, lam: float = 1.0) -> float:
    """Probability that an agent at the given distance is seen."""
    if distance < 0:
        raise ValueError("distance must be nonnegative")
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must be in (0, 1]")
    return lam * math.exp(-distance * lam)


def hoeffding_bound(n: int, delta: float) -> float:
    """Deviation bound sqrt(ln(2/delta) / (2n)) for a mean of n samples in [0,1]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))
