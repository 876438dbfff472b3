"""Least-squares fitting of the rating mixture to an observed histogram.

The loss is the residual sum of squares between observed relative bin
frequencies and the model's discretized frequencies.  Optimization is a
seeded Latin-hypercube multi-start followed by bounded Nelder-Mead
refinement of each start, with a final polish of the best candidate.  Fit
quality is reported as residual standard error, RSE = sqrt(RSS / (bins - p)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import (
    DegreesOfFreedomError,
    EmptyInputError,
    InfeasibleError,
    ParameterError,
    ValidationError,
)
from .model import (
    N_RATING_VALUES,
    RATING_VALUES,
    MixtureParams,
    PmfMode,
    Rating,
    StrategyKind,
    discretize_pmf,
)

MU_BOUNDS = (0.0, 10.0)
SIGMA_BOUNDS = (0.1, 100.0)
A_BOUNDS = (0.0, 1.0)
ALPHA_BOUNDS = (1e-6, 10.0)

_FIT_SALT = 0x5EED
_INFEASIBLE_LOSS = 1e6
MIN_RATINGS_PER_STRATEGY = 50


@dataclass(frozen=True, slots=True)
class Histogram:
    """Counts of ratings 0..10; freqs are counts normalized by the total."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != N_RATING_VALUES:
            raise ValidationError(f"histogram needs {N_RATING_VALUES} bins")
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValidationError("histogram counts must be non-negative")
        if sum(counts) < 1:
            raise EmptyInputError("histogram is empty")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def freqs(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.total

    @property
    def mean(self) -> float:
        return float(RATING_VALUES @ self.freqs)


def build_histogram(ratings: Sequence) -> Histogram:
    """Count ratings per value; accepts Rating objects or bare integers."""
    values = [r.value if isinstance(r, Rating) else int(r) for r in ratings]
    if not values:
        raise EmptyInputError("no ratings to histogram")
    counts = [0] * N_RATING_VALUES
    for v in values:
        if not 0 <= v <= 10:
            raise ValidationError(f"rating value out of range: {v}")
        counts[v] += 1
    return Histogram(counts=tuple(counts))


@dataclass(frozen=True, slots=True)
class FitOptions:
    constrain_mean: bool = False
    exclude_bin5: bool = False
    n_starts: int = 24
    max_iters: int = 2000
    tol: float = 1e-12

    def __post_init__(self):
        if self.n_starts < 1:
            raise ParameterError("n_starts must be >= 1")
        if not self.tol > 0:
            raise ParameterError("tol must be > 0")

    @property
    def n_free_params(self) -> int:
        return 3 if self.constrain_mean else 4

    def included_bins(self) -> np.ndarray:
        mask = np.ones(N_RATING_VALUES, dtype=bool)
        if self.exclude_bin5:
            mask[5] = False
        return mask

    def to_dict(self) -> dict:
        return {
            "constrain_mean": self.constrain_mean,
            "exclude_bin5": self.exclude_bin5,
            "n_starts": self.n_starts,
            "max_iters": self.max_iters,
            "tol": self.tol,
        }


@dataclass(frozen=True, slots=True)
class FitResult:
    params: MixtureParams
    rse: float
    loss: float
    boundary_hit: bool
    n_evals: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "rse": self.rse,
            "loss": self.loss,
            "boundary_hit": self.boundary_hit,
            "n_evals": self.n_evals,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        return cls(
            params=MixtureParams.from_dict(d["params"]),
            rse=float(d["rse"]),
            loss=float(d["loss"]),
            boundary_hit=bool(d["boundary_hit"]),
            n_evals=int(d["n_evals"]),
            converged=bool(d["converged"]),
        )


def model_frequencies(
    params: MixtureParams, mode: PmfMode = PmfMode.TRUNCATED_RENORMALIZED
) -> np.ndarray:
    """Predicted relative frequency per rating bin; the fit target."""
    return discretize_pmf(params, mode).probs


def rse_from_freqs(freqs: np.ndarray, params: MixtureParams, options: FitOptions) -> float:
    freqs = np.asarray(freqs, dtype=float)
    mask = options.included_bins()
    n_used = int(mask.sum())
    p = options.n_free_params
    if n_used <= p:
        raise DegreesOfFreedomError(f"{n_used} bins <= {p} free parameters")
    resid = freqs[mask] - model_frequencies(params)[mask]
    return math.sqrt(float(resid @ resid) / (n_used - p))


def residual_standard_error(
    hist: Histogram, params: MixtureParams, options: FitOptions = FitOptions()
) -> float:
    """RSE of the model against an observed histogram."""
    return rse_from_freqs(hist.freqs, params, options)


def _latin_hypercube(n: int, dims: int, rng: np.random.Generator) -> np.ndarray:
    """n stratified points in the unit cube: one point per stratum per axis."""
    strata = np.tile(np.arange(n, dtype=float), (dims, 1))
    perms = rng.permuted(strata, axis=1).T
    return (perms + rng.random((n, dims))) / n


def _free_params(vec: np.ndarray) -> MixtureParams:
    mu, sigma, a, alpha = vec
    return MixtureParams.free(mu=mu, sigma=sigma, a=float(np.clip(a, 0.0, 1.0)), alpha=alpha)


def _constrained_params(vec: np.ndarray, c: float) -> MixtureParams | None:
    mu, sigma, a = vec
    a = float(np.clip(a, 0.0, 1.0))
    denom = c - (1.0 - a) * mu
    if a <= 0.0 or denom <= 1e-12:
        return None
    return MixtureParams(mu=mu, sigma=sigma, a=a, alpha=a / denom, c=c, constrained=True)


def fit_frequencies(
    freqs: np.ndarray, options: FitOptions = FitOptions(), seed: int = 0
) -> FitResult:
    """Fit mixture parameters to an 11-bin relative frequency vector.

    Deterministic given (freqs, options, seed).  Ties in final loss within
    1e-12 break toward the lexicographically smallest (mu, sigma, a).
    In constrained mode c is the mean of the supplied frequencies.
    """
    freqs = np.asarray(freqs, dtype=float)
    if freqs.shape != (N_RATING_VALUES,):
        raise ValidationError(f"expected {N_RATING_VALUES} frequencies")
    mask = options.included_bins()
    if int(mask.sum()) <= options.n_free_params:
        raise DegreesOfFreedomError("too few bins for the free parameter count")
    target = freqs[mask]
    c = float(RATING_VALUES @ freqs)

    constrained = options.constrain_mean
    if constrained:
        bounds = [MU_BOUNDS, SIGMA_BOUNDS, (1e-6, 1.0)]
        make = lambda vec: _constrained_params(vec, c)
    else:
        bounds = [MU_BOUNDS, SIGMA_BOUNDS, A_BOUNDS, ALPHA_BOUNDS]
        make = _free_params
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    evals = 0

    def objective(vec: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        params = make(vec)
        if params is None:
            # steer back toward the feasible region of the mean constraint
            a = float(np.clip(vec[2], 0.0, 1.0))
            overshoot = (1.0 - a) * vec[0] - c
            return _INFEASIBLE_LOSS + max(overshoot, 0.0)
        resid = model_frequencies(params)[mask] - target
        return float(resid @ resid)

    rng = np.random.default_rng(np.random.SeedSequence([int(seed), _FIT_SALT]))
    starts = lo + _latin_hypercube(options.n_starts, len(bounds), rng) * (hi - lo)
    if constrained:
        # project starts into the feasible half-space (1-a)*mu < c
        for s in starts:
            a = s[2]
            if a < 1.0 and (1.0 - a) * s[0] >= c:
                s[0] = max(0.95 * c / (1.0 - a), 0.0)

    nm_opts = {
        "maxiter": options.max_iters,
        "fatol": options.tol,
        "xatol": 1e-10,
        "maxfev": 10 * options.max_iters,
    }
    candidates = []
    for s in starts:
        res = minimize(objective, s, method="Nelder-Mead", bounds=bounds, options=nm_opts)
        candidates.append((float(res.fun), res.x, bool(res.success)))

    best_loss = min(c0 for c0, _, _ in candidates)
    tied = [c0 for c0 in candidates if c0[0] <= best_loss + 1e-12]
    tied.sort(key=lambda c0: tuple(c0[1][:3]))
    loss, x, success = tied[0]

    # polish with a fresh simplex; keep only if it improves
    res = minimize(objective, x, method="Nelder-Mead", bounds=bounds, options=nm_opts)
    if float(res.fun) < loss:
        loss, x, success = float(res.fun), res.x, bool(res.success)

    params = make(x)
    if params is None or loss >= _INFEASIBLE_LOSS:
        raise InfeasibleError("no feasible parameters found from any start")

    margin = max(options.tol, 1e-9)
    boundary = bool(np.any(x - lo <= margin) or np.any(hi - x <= margin))
    rse = rse_from_freqs(freqs, params, options)
    return FitResult(
        params=params,
        rse=rse,
        loss=loss,
        boundary_hit=boundary,
        n_evals=evals,
        converged=success,
    )


def fit_mixture(hist: Histogram, options: FitOptions = FitOptions(), seed: int = 0) -> FitResult:
    """Fit mixture parameters to a rating histogram."""
    return fit_frequencies(hist.freqs, options, seed)


@dataclass(frozen=True, slots=True)
class StrategyFitReport:
    per_strategy: Mapping[StrategyKind, FitResult]
    combined: FitResult
    skipped: tuple[tuple[StrategyKind, str], ...] = field(default_factory=tuple)


def fit_all_strategies(
    ratings: Iterable[tuple[StrategyKind, Rating]],
    options: FitOptions = FitOptions(),
    seed: int = 0,
) -> StrategyFitReport:
    """Fit each explanation strategy separately plus the pooled histogram.

    Strategies with fewer than MIN_RATINGS_PER_STRATEGY ratings are skipped
    with a warning record.  All fits share the same seed, so a single-group
    input yields a combined fit identical to the group's fit.
    """
    groups: dict[StrategyKind, list[Rating]] = {}
    pooled: list[Rating] = []
    for kind, rating in ratings:
        groups.setdefault(kind, []).append(rating)
        pooled.append(rating)
    if not pooled:
        raise EmptyInputError("no ratings to fit")

    per_strategy = {}
    skipped = []
    for kind in StrategyKind:
        if kind not in groups:
            continue
        rs = groups[kind]
        if len(rs) < MIN_RATINGS_PER_STRATEGY:
            skipped.append((kind, f"only {len(rs)} ratings (< {MIN_RATINGS_PER_STRATEGY})"))
            continue
        per_strategy[kind] = fit_mixture(build_histogram(rs), options, seed)
    combined = fit_mixture(build_histogram(pooled), options, seed)
    return StrategyFitReport(
        per_strategy=per_strategy, combined=combined, skipped=tuple(skipped)
    )
