"""Two-component generative model for 0-10 likelihood ratings.

A rating is drawn from a mixture of an inherent-preference component
(exponential decay with rate ``alpha``) and an explanation-effect component
(normal with center ``mu`` and spread ``sigma``), weighted by the rigidness
``a``:

    h(x) = a * alpha * exp(-alpha * x) + (1 - a) * N(x; mu, sigma)

The continuous density is discretized to an 11-point pmf by integrating over
unit bins [k - 0.5, k + 0.5], truncating to the rating window and
renormalizing.  Bin integrals use the closed-form exponential/normal CDFs, so
per-bin mass is exact to machine precision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateModelError, InfeasibleConstraintError, ParameterError

N_RATING_VALUES = 11
RATING_VALUES = np.arange(N_RATING_VALUES)

# Bin k covers [k - 0.5, k + 0.5]; the window is [-0.5, 10.5].  The
# exponential component lives on x >= 0, so its edges are clipped there.
_BIN_EDGES = np.arange(N_RATING_VALUES + 1) - 0.5
_EXP_EDGES = np.clip(_BIN_EDGES, 0.0, None)


class RatingPhase(enum.Enum):
    LIKELIHOOD = "likelihood"
    CONSUMPTION = "consumption"


class StrategyKind(enum.Enum):
    """The five social-explanation strategies."""

    OVERALL_POP = "overall_pop"
    FRIEND_POP = "friend_pop"
    RAND_FRIEND = "rand_friend"
    GOOD_FRIEND = "good_friend"
    GOOD_FR_COUNT = "good_fr_count"

    @property
    def token(self) -> str:
        return self.value

    @classmethod
    def from_token(cls, token: str) -> "StrategyKind":
        try:
            return cls(token)
        except ValueError:
            raise ParameterError(f"unknown strategy token {token!r}") from None


STRATEGY_ORDER = tuple(StrategyKind)


class PmfMode(enum.Enum):
    """Two equivalent discretizations, kept distinct as an equivalence check.

    TRUNCATED_RENORMALIZED clips the support to the rating window and
    renormalizes the bin masses to sum to one.  CONTINUOUS_BINNED divides the
    raw bin integrals by the total continuous mass inside the window.  The
    two produce identical pmfs.
    """

    TRUNCATED_RENORMALIZED = "truncated_renormalized"
    CONTINUOUS_BINNED = "continuous_binned"


@dataclass(frozen=True, slots=True)
class Rating:
    """A single 0-10 Likert response tagged with its collection phase."""

    value: int
    phase: RatingPhase = RatingPhase.LIKELIHOOD

    def __post_init__(self):
        if not isinstance(self.value, (int, np.integer)) or isinstance(self.value, bool):
            raise ParameterError(f"rating value must be an integer, got {self.value!r}")
        if not 0 <= self.value <= 10:
            raise ParameterError(f"rating value must be in [0, 10], got {self.value}")
        object.__setattr__(self, "value", int(self.value))


@dataclass(frozen=True, slots=True)
class MixtureParams:
    """Behavior parameters (mu, sigma, a) plus the rate alpha and mean target c.

    ``constrained`` records whether alpha was derived from the mean identity
    mean = a/alpha + (1-a)*mu = c.  In free mode alpha is supplied directly
    and c is the implied mean.  At the boundaries a=0 and a=1 the unused
    component's parameters are ignored and not validated.
    """

    mu: float
    sigma: float
    a: float
    alpha: float
    c: float
    constrained: bool = False

    def __post_init__(self):
        for name in ("mu", "sigma", "a", "alpha", "c"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, float(v))
        if not 0.0 <= self.a <= 1.0:
            raise ParameterError(f"a must be in [0, 1], got {self.a}")
        if self.a < 1.0 and self.sigma <= 0.0:
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        if self.a > 0.0 and self.alpha <= 0.0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")

    @classmethod
    def free(cls, mu: float, sigma: float, a: float, alpha: float = 1.0) -> "MixtureParams":
        """Build params with alpha given directly; c is the implied mean."""
        p = cls(mu=mu, sigma=sigma, a=a, alpha=alpha, c=0.0, constrained=False)
        object.__setattr__(p, "c", mixture_mean(p))
        return p

    @classmethod
    def from_mean(cls, mu: float, sigma: float, a: float, c: float) -> "MixtureParams":
        """Build params with alpha derived from the target mean c."""
        alpha = alpha_from_constraint(a, c, mu)
        return cls(mu=mu, sigma=sigma, a=a, alpha=alpha, c=c, constrained=True)

    @property
    def mode(self) -> str:
        return "constrained" if self.constrained else "free"

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "sigma": self.sigma,
            "a": self.a,
            "alpha": self.alpha,
            "c": self.c,
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MixtureParams":
        mode = d.get("mode", "free")
        if mode not in ("free", "constrained"):
            raise ParameterError(f"unknown params mode {mode!r}")
        return cls(
            mu=d["mu"],
            sigma=d["sigma"],
            a=d["a"],
            alpha=d["alpha"],
            c=d["c"],
            constrained=(mode == "constrained"),
        )


@dataclass(frozen=True, slots=True)
class RatingPmf:
    """Probabilities over rating values 0..10 plus the discretization mode."""

    probs: np.ndarray
    mode: PmfMode

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (N_RATING_VALUES,):
            raise ParameterError(f"pmf must have {N_RATING_VALUES} entries")
        if np.any(probs < 0.0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ParameterError("pmf entries must be non-negative and sum to 1")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)


def base_density(x, alpha: float):
    """Inherent-preference density alpha * exp(-alpha * x) on x >= 0."""
    if alpha <= 0.0 or not math.isfinite(alpha):
        raise ParameterError(f"alpha must be > 0, got {alpha}")
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0.0):
        raise ParameterError("base density is only defined for x >= 0")
    out = alpha * np.exp(-alpha * xs)
    return float(out) if np.isscalar(x) else out


def explanation_density(x, mu: float, sigma: float):
    """Explanation-effect density: normal pdf with center mu and spread sigma."""
    if sigma <= 0.0 or not math.isfinite(sigma):
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    xs = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * ((xs - mu) / sigma) ** 2) / (math.sqrt(2.0 * math.pi) * sigma)
    return float(out) if np.isscalar(x) else out


def alpha_from_constraint(a: float, c: float, mu: float) -> float:
    """Solve the mean identity a/alpha + (1-a)*mu = c for alpha.

    Raises DegenerateModelError at a=0 (the pure-Gaussian model has no alpha)
    and InfeasibleConstraintError when c - (1-a)*mu <= 0.
    """
    if not 0.0 <= a <= 1.0:
        raise ParameterError(f"a must be in [0, 1], got {a}")
    if a == 0.0:
        raise DegenerateModelError("a=0: pure-Gaussian model has no alpha")
    denom = c - (1.0 - a) * mu
    if denom <= 0.0:
        raise InfeasibleConstraintError(
            f"mean constraint infeasible: c - (1-a)*mu = {denom:.6g} <= 0"
        )
    return a / denom


def mixture_density(x, params: MixtureParams):
    """h(x) = a * f(x) + (1-a) * g(x); boundary values of a skip the unused part."""
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0.0):
        raise ParameterError("mixture density is only defined for x >= 0")
    out = np.zeros_like(xs, dtype=float)
    if params.a > 0.0:
        out += params.a * base_density(xs, params.alpha)
    if params.a < 1.0:
        out += (1.0 - params.a) * explanation_density(xs, params.mu, params.sigma)
    return float(out) if np.isscalar(x) else out


def mixture_mean(params: MixtureParams) -> float:
    """Mean of the continuous mixture: a/alpha + (1-a)*mu."""
    mean = 0.0
    if params.a > 0.0:
        mean += params.a / params.alpha
    if params.a < 1.0:
        mean += (1.0 - params.a) * params.mu
    return mean


def _bin_masses(params: MixtureParams) -> np.ndarray:
    """Unnormalized per-bin mass of h over [k-0.5, k+0.5] inside the window."""
    masses = np.zeros(N_RATING_VALUES)
    if params.a > 0.0:
        tails = np.exp(-params.alpha * _EXP_EDGES)
        masses += params.a * (tails[:-1] - tails[1:])
    if params.a < 1.0:
        cdf = ndtr((_BIN_EDGES - params.mu) / params.sigma)
        masses += (1.0 - params.a) * np.diff(cdf)
    return masses


def discretize_pmf(
    params: MixtureParams, mode: PmfMode = PmfMode.TRUNCATED_RENORMALIZED
) -> RatingPmf:
    """Discretize the mixture to an 11-point rating pmf.

    Both modes integrate h over unit bins inside [-0.5, 10.5] (exponential
    support clipped at 0) and divide by the same total window mass, so they
    agree exactly; see PmfMode.
    """
    if not isinstance(mode, PmfMode):
        raise ParameterError(f"unknown pmf mode {mode!r}")
    masses = _bin_masses(params)
    total = masses.sum()
    if not total > 0.0:
        raise ParameterError("no probability mass inside the rating window")
    return RatingPmf(probs=masses / total, mode=mode)


def sample_values(
    params: MixtureParams,
    n: int,
    rng: np.random.Generator,
    mode: PmfMode = PmfMode.TRUNCATED_RENORMALIZED,
) -> np.ndarray:
    """Draw n rating values by inverse-CDF sampling from the discretized pmf."""
    pmf = discretize_pmf(params, mode)
    return sample_from_pmf(pmf.probs, n, rng)


def sample_from_pmf(probs: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draw of n integer values from an 11-point pmf."""
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(n), side="right").astype(np.int64)


def sample_rating(
    params: MixtureParams,
    rng: np.random.Generator,
    mode: PmfMode = PmfMode.TRUNCATED_RENORMALIZED,
    phase: RatingPhase = RatingPhase.LIKELIHOOD,
) -> Rating:
    """Draw one Rating; identical seed and params give identical sequences."""
    return Rating(int(sample_values(params, 1, rng, mode)[0]), phase)


def fraction_above(
    params: MixtureParams,
    threshold: float,
    mode: PmfMode = PmfMode.TRUNCATED_RENORMALIZED,
) -> float:
    """Probability that a discretized rating strictly exceeds the threshold."""
    if not 0.0 <= threshold <= 10.0:
        raise ParameterError(f"threshold must be in [0, 10], got {threshold}")
    pmf = discretize_pmf(params, mode)
    return float(pmf.probs[RATING_VALUES > threshold].sum())
