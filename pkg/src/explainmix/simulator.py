"""Synthetic cohorts, two-phase rating simulation, and the slate policy.

A cohort is a small social world: users with friendships and interaction
logs, items with latent appeal, per-(user, item) latent affinities, and Like
sets that drive the explanation strategies.  Phase 1 draws likelihood
ratings from each user's behavior model for the strategy shown (with the
explanation-effect center shifted by the item affinity); Phase 2 draws
consumption ratings from a flat base distribution shifted by the same
affinity, which is what couples the two phases.

Everything is a pure function of (inputs, seed).  Per-user randomness comes
from sub-seeds derived as (seed, salt, user_id), so per-user work can be
parallelized without changing any output; record lists are returned in
canonical (user, item) order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.special import ndtr

from .defaults import STRATEGY_BEHAVIOR
from .errors import (
    CalibrationError,
    ConfigError,
    InsufficientDataError,
    ParameterError,
    UnknownIdError,
    ValidationError,
)
from .model import (
    N_RATING_VALUES,
    RATING_VALUES,
    MixtureParams,
    Rating,
    RatingPhase,
    StrategyKind,
    sample_from_pmf,
)

TIE_STRENGTH_WINDOW = 500

# Consumption ratings: flat over 0..8 with 9 and 10 at half weight.
CONSUMPTION_BASE_PMF = np.array([1.0] * 9 + [0.5, 0.5]) / 10.0

_SALT_GRAPH = 1
_SALT_PHASE1 = 2
_SALT_PHASE2 = 3
_SALT_RAND_FRIEND = 4


def _rng_for(*entropy: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(e) for e in entropy]))


@dataclass(frozen=True, slots=True)
class CohortConfig:
    """World-generation knobs plus the behavior parameters of its users.

    ``strategy_params`` gives every user the same per-strategy behavior;
    ``archetypes`` (optional) instead assigns each user one parameter set
    used for all strategies, split by ``archetype_weights``.
    ``affinity_coupling`` shifts the explanation-effect center by
    lambda * (z - 0.5) for item affinity z; ``consumption_coupling`` shifts
    consumption draws by kappa * (z - 0.5) and is what calibration tunes.
    """

    n_users: int
    n_items: int
    mean_degree: float = 12.0
    min_degree: int = 0
    interactions_per_user: int = 300
    like_prob: float = 0.15
    min_candidates: int = 30
    strategies: tuple[StrategyKind, ...] = tuple(StrategyKind)
    strategy_params: Mapping[StrategyKind, MixtureParams] = field(
        default_factory=lambda: dict(STRATEGY_BEHAVIOR)
    )
    archetypes: tuple[MixtureParams, ...] | None = None
    archetype_weights: tuple[float, ...] | None = None
    affinity_coupling: float = 12.0
    consumption_coupling: float = 0.0

    def __post_init__(self):
        if self.n_users < 1 or self.n_items < 1:
            raise ConfigError("need at least one user and one item")
        if self.mean_degree < 0 or self.mean_degree > self.n_users - 1:
            raise ConfigError(
                f"mean_degree {self.mean_degree} impossible with {self.n_users} users"
            )
        if self.min_degree > self.n_users - 1:
            raise ConfigError("min_degree exceeds the number of other users")
        if self.n_items < self.min_candidates:
            raise ConfigError(
                f"{self.n_items} items cannot give {self.min_candidates} candidates per user"
            )
        if not 0.0 <= self.like_prob <= 1.0:
            raise ConfigError("like_prob must be in [0, 1]")
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        if self.archetypes is not None and len(self.archetypes) == 0:
            raise ConfigError("archetypes, when given, must be non-empty")
        if self.archetype_weights is not None:
            if self.archetypes is None or len(self.archetype_weights) != len(self.archetypes):
                raise ConfigError("archetype_weights must match archetypes")
            if any(w <= 0 for w in self.archetype_weights):
                raise ConfigError("archetype weights must be positive")
        if self.archetypes is None:
            missing = [k for k in self.strategies if k not in self.strategy_params]
            if missing:
                raise ConfigError(f"missing strategy params for {missing}")

    def to_dict(self) -> dict:
        d = {
            "n_users": self.n_users,
            "n_items": self.n_items,
            "mean_degree": self.mean_degree,
            "min_degree": self.min_degree,
            "interactions_per_user": self.interactions_per_user,
            "like_prob": self.like_prob,
            "min_candidates": self.min_candidates,
            "strategies": [k.token for k in self.strategies],
            "strategy_params": {
                k.token: p.to_dict() for k, p in sorted(
                    self.strategy_params.items(), key=lambda kv: kv[0].token
                )
            },
            "affinity_coupling": self.affinity_coupling,
            "consumption_coupling": self.consumption_coupling,
        }
        if self.archetypes is not None:
            d["archetypes"] = [p.to_dict() for p in self.archetypes]
            if self.archetype_weights is not None:
                d["archetype_weights"] = list(self.archetype_weights)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CohortConfig":
        try:
            kwargs = {
                "n_users": int(d["n_users"]),
                "n_items": int(d["n_items"]),
            }
        except KeyError as exc:
            raise ValidationError(f"cohort config missing field {exc}") from None
        for key in (
            "mean_degree",
            "min_degree",
            "interactions_per_user",
            "like_prob",
            "min_candidates",
            "affinity_coupling",
            "consumption_coupling",
        ):
            if key in d:
                kwargs[key] = d[key]
        if "strategies" in d:
            kwargs["strategies"] = tuple(StrategyKind.from_token(t) for t in d["strategies"])
        if "strategy_params" in d:
            kwargs["strategy_params"] = {
                StrategyKind.from_token(t): MixtureParams.from_dict(p)
                for t, p in d["strategy_params"].items()
            }
        if "archetypes" in d:
            kwargs["archetypes"] = tuple(MixtureParams.from_dict(p) for p in d["archetypes"])
            if "archetype_weights" in d:
                kwargs["archetype_weights"] = tuple(float(w) for w in d["archetype_weights"])
        return cls(**kwargs)


@dataclass(frozen=True, slots=True)
class SyntheticCohort:
    """Generated world state; treat every field as read-only."""

    config: CohortConfig
    seed: int
    friends: tuple[frozenset, ...]
    interactions: tuple[tuple[int, ...], ...]
    likes_by_item: tuple[frozenset, ...]
    liked_by_user: tuple[frozenset, ...]
    item_appeal: np.ndarray
    affinities: np.ndarray
    archetype_of: tuple

    @property
    def n_users(self) -> int:
        return self.config.n_users

    @property
    def n_items(self) -> int:
        return self.config.n_items

    def check_user(self, user: int) -> int:
        if not 0 <= user < self.n_users:
            raise UnknownIdError(f"unknown user id {user}")
        return int(user)

    def check_item(self, item: int) -> int:
        if not 0 <= item < self.n_items:
            raise UnknownIdError(f"unknown item id {item}")
        return int(item)

    def params_for(self, user: int, kind: StrategyKind) -> MixtureParams:
        """The behavior model the user draws from under this strategy."""
        arch = self.archetype_of[self.check_user(user)]
        if arch is not None:
            return self.config.archetypes[arch]
        return self.config.strategy_params[kind]

    def candidates(self, user: int) -> tuple[int, ...]:
        """Items the user does not Like, in ascending item order."""
        liked = self.liked_by_user[self.check_user(user)]
        return tuple(i for i in range(self.n_items) if i not in liked)

    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (u, v) for u in range(self.n_users) for v in sorted(self.friends[u]) if u < v
        )

    def to_dict(self) -> dict:
        """Canonical serializable form (used by determinism checks)."""
        return {
            "config": self.config.to_dict(),
            "seed": self.seed,
            "edges": [list(e) for e in self.edges()],
            "interactions": [list(log) for log in self.interactions],
            "likes": {str(i): sorted(s) for i, s in enumerate(self.likes_by_item)},
            "item_appeal": [float(f"{x:.12g}") for x in self.item_appeal],
            "affinities": [
                [float(f"{x:.12g}") for x in row] for row in self.affinities
            ],
            "archetype_of": list(self.archetype_of),
        }


def _archetype_assignment(config: CohortConfig) -> tuple:
    if config.archetypes is None:
        return tuple([None] * config.n_users)
    k = len(config.archetypes)
    weights = config.archetype_weights or tuple([1.0] * k)
    total = sum(weights)
    quotas = [config.n_users * w / total for w in weights]
    counts = [int(q) for q in quotas]
    remainders = sorted(range(k), key=lambda j: (quotas[j] - counts[j], -j), reverse=True)
    for j in remainders[: config.n_users - sum(counts)]:
        counts[j] += 1
    out = []
    for j, n in enumerate(counts):
        out.extend([j] * n)
    return tuple(out)


def generate_cohort(config: CohortConfig, seed: int = 0) -> SyntheticCohort:
    """Build a deterministic synthetic world from the config and seed.

    Friendships are an Erdos-Renyi graph at the configured mean degree,
    patched up to min_degree; each user's own Likes are capped so at least
    min_candidates items remain unliked.
    """
    n, m = config.n_users, config.n_items
    rng = _rng_for(seed, _SALT_GRAPH)

    friends = [set() for _ in range(n)]
    if n > 1 and config.mean_degree > 0:
        p = config.mean_degree / (n - 1)
        iu, iv = np.triu_indices(n, k=1)
        hit = rng.random(len(iu)) < p
        for u, v in zip(iu[hit], iv[hit]):
            friends[u].add(int(v))
            friends[v].add(int(u))
    for u in range(n):
        if len(friends[u]) < config.min_degree:
            others = [v for v in range(n) if v != u and v not in friends[u]]
            extra = rng.choice(len(others), size=config.min_degree - len(friends[u]),
                               replace=False)
            for j in extra:
                v = others[int(j)]
                friends[u].add(v)
                friends[v].add(u)

    interactions = []
    for u in range(n):
        circle = sorted(friends[u])
        if circle and config.interactions_per_user > 0:
            log = rng.choice(circle, size=config.interactions_per_user, replace=True)
            interactions.append(tuple(int(v) for v in log))
        else:
            interactions.append(())

    item_appeal = rng.random(m)
    like_p = np.clip(2.0 * config.like_prob * item_appeal, 0.0, 1.0)
    like_matrix = rng.random((n, m)) < like_p[None, :]
    max_own_likes = m - config.min_candidates
    liked_by_user = []
    for u in range(n):
        liked = np.flatnonzero(like_matrix[u])
        if len(liked) > max_own_likes:
            keep = rng.choice(len(liked), size=max_own_likes, replace=False)
            dropped = np.setdiff1d(np.arange(len(liked)), keep)
            like_matrix[u, liked[dropped]] = False
            liked = np.flatnonzero(like_matrix[u])
        liked_by_user.append(frozenset(int(i) for i in liked))
    likes_by_item = tuple(
        frozenset(int(u) for u in np.flatnonzero(like_matrix[:, i])) for i in range(m)
    )

    affinities = rng.random((n, m))

    return SyntheticCohort(
        config=config,
        seed=int(seed),
        friends=tuple(frozenset(s) for s in friends),
        interactions=tuple(interactions),
        likes_by_item=likes_by_item,
        liked_by_user=tuple(liked_by_user),
        item_appeal=item_appeal,
        affinities=affinities,
        archetype_of=_archetype_assignment(config),
    )


def tie_strength(user: int, friend: int, cohort: SyntheticCohort) -> int:
    """Interactions with the friend among the user's last 500 events.

    Logs shorter than the window are used whole.
    """
    user = cohort.check_user(user)
    friend = cohort.check_user(friend)
    log = cohort.interactions[user]
    window = log[-TIE_STRENGTH_WINDOW:]
    return sum(1 for v in window if v == friend)


def _tie_counts(cohort: SyntheticCohort, user: int) -> dict:
    window = cohort.interactions[user][-TIE_STRENGTH_WINDOW:]
    counts: dict = {}
    for v in window:
        counts[v] = counts.get(v, 0) + 1
    return counts


@dataclass(frozen=True, slots=True)
class Explanation:
    """Social information attached to one recommendation.

    Field presence matches the strategy exactly: counts for popularity
    strategies, a friend name for friend strategies, both for GOOD_FR_COUNT.
    """

    kind: StrategyKind
    friend_name: int | None = None
    friend_count: int | None = None
    overall_count: int | None = None

    _EXPECTED = {
        StrategyKind.OVERALL_POP: ("overall_count",),
        StrategyKind.FRIEND_POP: ("friend_count",),
        StrategyKind.RAND_FRIEND: ("friend_name",),
        StrategyKind.GOOD_FRIEND: ("friend_name",),
        StrategyKind.GOOD_FR_COUNT: ("friend_name", "friend_count"),
    }

    def __post_init__(self):
        expected = self._EXPECTED[self.kind]
        for name in ("friend_name", "friend_count", "overall_count"):
            present = getattr(self, name) is not None
            if present != (name in expected):
                raise ParameterError(
                    f"{self.kind.token} explanation must have exactly {expected}, "
                    f"got unexpected state for {name!r}"
                )


def select_explanation(
    user: int, item: int, kind: StrategyKind, cohort: SyntheticCohort
) -> Explanation | None:
    """Build the explanation a user would see, or None when the item is skipped.

    Good-friend strategies require a liking friend with positive tie
    strength; RAND_FRIEND requires any liking friend.  The random-friend
    draw is seeded per (cohort, user, item) so it is stable regardless of
    call order.
    """
    user = cohort.check_user(user)
    item = cohort.check_item(item)
    likers = cohort.likes_by_item[item]

    if kind is StrategyKind.OVERALL_POP:
        return Explanation(kind=kind, overall_count=len(likers))

    liking_friends = sorted(cohort.friends[user] & likers)
    if kind is StrategyKind.FRIEND_POP:
        return Explanation(kind=kind, friend_count=len(liking_friends))

    if kind is StrategyKind.RAND_FRIEND:
        if not liking_friends:
            return None
        draw = np.random.SeedSequence(
            [cohort.seed, _SALT_RAND_FRIEND, user, item]
        ).generate_state(1)[0]
        return Explanation(kind=kind, friend_name=liking_friends[draw % len(liking_friends)])

    ties = _tie_counts(cohort, user)
    scored = [(ties.get(f, 0), f) for f in liking_friends]
    scored = [(t, f) for t, f in scored if t > 0]
    if not scored:
        return None
    best = max(scored, key=lambda tf: (tf[0], -tf[1]))
    if kind is StrategyKind.GOOD_FRIEND:
        return Explanation(kind=kind, friend_name=best[1])
    return Explanation(kind=kind, friend_name=best[1], friend_count=len(liking_friends))


class Phase1Record(NamedTuple):
    user_id: int
    item_id: int
    strategy: StrategyKind
    rating: Rating


class Phase2Record(NamedTuple):
    user_id: int
    item_id: int
    rating: Rating


_BIN_EDGES = np.arange(N_RATING_VALUES + 1) - 0.5
_EXP_EDGES = np.clip(_BIN_EDGES, 0.0, None)


def _shifted_pmfs(params: MixtureParams, mu_eff: np.ndarray) -> np.ndarray:
    """Rating pmfs for one parameter set with per-row explanation centers."""
    n = len(mu_eff)
    masses = np.zeros((n, N_RATING_VALUES))
    if params.a > 0.0:
        tails = np.exp(-params.alpha * _EXP_EDGES)
        masses += params.a * (tails[:-1] - tails[1:])[None, :]
    if params.a < 1.0:
        cdf = ndtr((_BIN_EDGES[None, :] - mu_eff[:, None]) / params.sigma)
        masses += (1.0 - params.a) * np.diff(cdf, axis=1)
    return masses / masses.sum(axis=1, keepdims=True)


def simulate_phase1(cohort: SyntheticCohort, seed: int = 0) -> list[Phase1Record]:
    """Run the likelihood phase for every user over their candidate items.

    Each candidate gets a uniformly drawn strategy; skipped items are
    dropped; ratings are drawn in a randomized presentation order from the
    user's behavior model with the explanation-effect center shifted by
    affinity_coupling * (z - 0.5).  Output is sorted by (user, item).
    """
    lam = cohort.config.affinity_coupling
    strategies = cohort.config.strategies
    records = []
    for u in range(cohort.n_users):
        rng = _rng_for(seed, _SALT_PHASE1, u)
        cand = cohort.candidates(u)
        if not cand:
            continue
        kind_idx = rng.integers(0, len(strategies), size=len(cand))
        order = rng.permutation(len(cand))

        shown = []
        for pos in order:
            item = cand[pos]
            kind = strategies[int(kind_idx[pos])]
            if select_explanation(u, item, kind, cohort) is None:
                continue
            shown.append((item, kind))
        if not shown:
            continue

        draws = rng.random(len(shown))
        by_kind: dict[StrategyKind, list[int]] = {}
        for idx, (item, kind) in enumerate(shown):
            by_kind.setdefault(kind, []).append(idx)
        values = np.empty(len(shown), dtype=np.int64)
        for kind, idxs in by_kind.items():
            params = cohort.params_for(u, kind)
            items = np.array([shown[i][0] for i in idxs])
            z = cohort.affinities[u, items]
            mu_eff = np.clip(params.mu + lam * (z - 0.5), 0.0, 10.0)
            pmfs = _shifted_pmfs(params, mu_eff)
            cdf = np.cumsum(pmfs, axis=1)
            cdf[:, -1] = 1.0
            u_sub = draws[idxs]
            values[idxs] = (cdf < u_sub[:, None]).sum(axis=1)

        for (item, kind), v in zip(shown, values):
            records.append(
                Phase1Record(u, item, kind, Rating(int(v), RatingPhase.LIKELIHOOD))
            )
    records.sort(key=lambda r: (r.user_id, r.item_id))
    return records


def simulate_phase2(
    cohort: SyntheticCohort,
    phase1: Sequence[Phase1Record],
    per_strategy_pick: int = 2,
    seed: int = 0,
    kappa: float | None = None,
) -> list[Phase2Record]:
    """Pick items per strategy from Phase 1 and draw consumption ratings.

    Ratings come from the flat base pmf shifted by kappa * (z - 0.5),
    rounded and clamped to 0..10.  kappa defaults to the config's
    consumption_coupling.  Output is sorted by (user, item).
    """
    if per_strategy_pick < 0:
        raise ParameterError("per_strategy_pick must be >= 0")
    if kappa is None:
        kappa = cohort.config.consumption_coupling
    if per_strategy_pick == 0 or not phase1:
        return []

    by_user: dict[int, dict[StrategyKind, list[int]]] = {}
    for rec in phase1:
        by_user.setdefault(rec.user_id, {}).setdefault(rec.strategy, []).append(rec.item_id)

    records = []
    for u in sorted(by_user):
        rng = _rng_for(seed, _SALT_PHASE2, u)
        chosen: list[int] = []
        for kind in StrategyKind:
            items = sorted(by_user[u].get(kind, ()))
            if not items:
                continue
            take = min(per_strategy_pick, len(items))
            picks = rng.choice(len(items), size=take, replace=False)
            chosen.extend(items[int(i)] for i in sorted(picks))
        if not chosen:
            continue
        base = sample_from_pmf(CONSUMPTION_BASE_PMF, len(chosen), rng)
        z = cohort.affinities[u, np.array(chosen)]
        shifted = np.clip(np.rint(base + kappa * (z - 0.5)), 0, 10).astype(int)
        for item, v in zip(chosen, shifted):
            records.append(Phase2Record(u, item, Rating(int(v), RatingPhase.CONSUMPTION)))
    records.sort(key=lambda r: (r.user_id, r.item_id))
    return records


def pair_phases(
    phase1: Sequence[Phase1Record], phase2: Sequence[Phase2Record]
) -> list[tuple]:
    """Join the two phases on (user, item) into (user, likelihood, consumption)."""
    p1 = {(r.user_id, r.item_id): r.rating.value for r in phase1}
    pairs = []
    for rec in phase2:
        key = (rec.user_id, rec.item_id)
        if key in p1:
            pairs.append((rec.user_id, p1[key], rec.rating.value))
    return pairs


def _rating_value(x) -> float:
    return float(x.value) if isinstance(x, Rating) else float(x)


def zscore_correlation(pairs: Iterable[tuple]) -> float:
    """Pearson correlation of per-user z-scored (likelihood, consumption) pairs.

    Users contribute only if they have at least two pairs with nonzero
    variance in both coordinates.
    """
    by_user: dict = {}
    for user, l, r in pairs:
        by_user.setdefault(user, []).append((_rating_value(l), _rating_value(r)))
    zl_all, zr_all = [], []
    for user, vals in by_user.items():
        if len(vals) < 2:
            continue
        arr = np.asarray(vals)
        std = arr.std(axis=0)
        if std[0] == 0 or std[1] == 0:
            continue
        z = (arr - arr.mean(axis=0)) / std
        zl_all.append(z[:, 0])
        zr_all.append(z[:, 1])
    if not zl_all or sum(len(a) for a in zl_all) < 3:
        raise InsufficientDataError("fewer than 3 pairs remain after exclusions")
    zl = np.concatenate(zl_all)
    zr = np.concatenate(zr_all)
    return float(np.corrcoef(zl, zr)[0, 1])


def calibrate_correlation(
    config: CohortConfig,
    target_r: float,
    tol: float = 0.03,
    seed: int = 0,
    kappa_max: float = 32.0,
    per_strategy_pick: int = 2,
    min_pairs: int = 10_000,
) -> float:
    """Bisect the consumption coupling until the z-scored correlation hits target_r.

    Every evaluation re-simulates Phase 2 on a fixed seeded world with at
    least min_pairs rating pairs.  Raises CalibrationError with the
    achievable range when the target is out of reach.
    """
    if not 0.0 <= target_r < 0.9:
        raise ParameterError("target_r must be in [0, 0.9)")
    if tol <= 0:
        raise ParameterError("tol must be > 0")
    if target_r == 0.0:
        return 0.0

    cohort = generate_cohort(config, seed)
    phase1 = simulate_phase1(cohort, seed)

    def r_of(kappa: float) -> float:
        phase2 = simulate_phase2(cohort, phase1, per_strategy_pick, seed, kappa=kappa)
        pairs = pair_phases(phase1, phase2)
        if len(pairs) < min_pairs:
            raise InsufficientDataError(
                f"config yields {len(pairs)} rating pairs; need {min_pairs}"
            )
        return zscore_correlation(pairs)

    r_lo, r_hi = r_of(0.0), r_of(kappa_max)
    if abs(r_hi - target_r) <= tol:
        return kappa_max
    if r_hi < target_r:
        raise CalibrationError(
            f"target r={target_r} unreachable; achievable range is "
            f"[{r_lo:.3f}, {r_hi:.3f}] for kappa in [0, {kappa_max}]",
            achievable=(r_lo, r_hi),
        )
    lo, hi = 0.0, kappa_max
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        r_mid = r_of(mid)
        if abs(r_mid - target_r) <= tol:
            return mid
        if r_mid < target_r:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(
        f"bisection did not settle within tol={tol}; achievable range is "
        f"[{r_lo:.3f}, {r_hi:.3f}]",
        achievable=(r_lo, r_hi),
    )


@dataclass(frozen=True, slots=True)
class TwoPhaseConfig:
    """Slate policy: maximize consumption subject to likelihood > epsilon."""

    epsilon: float
    delta: float
    k: int
    epsilon_floor: float = 0.0

    def __post_init__(self):
        if self.delta <= 0:
            raise ParameterError("delta must be > 0")
        if self.k < 1:
            raise ParameterError("k must be >= 1")
        if self.epsilon < self.epsilon_floor:
            raise ParameterError("epsilon must be >= epsilon_floor")


def two_phase_recommend(candidates: Sequence[tuple], config: TwoPhaseConfig) -> list[tuple]:
    """Pick the k highest-consumption items whose likelihood clears the threshold.

    When fewer than k items qualify, the threshold is decremented by delta
    and the selection retried; once the next step would cross epsilon_floor,
    all qualifying items are returned (a short slate is a valid result).
    The slate is sorted by consumption score descending, ties broken by
    higher likelihood and then smaller item id.
    """
    if not candidates:
        raise ParameterError("candidates must be non-empty")
    for item, l, r in candidates:
        if not (math.isfinite(l) and math.isfinite(r)):
            raise ParameterError(f"non-finite score for item {item!r}")

    def ranked(pool):
        return sorted(pool, key=lambda c: (-c[2], -c[1], c[0]))

    eps = config.epsilon
    while True:
        qualifying = [c for c in candidates if c[1] > eps]
        if len(qualifying) >= config.k:
            return ranked(qualifying)[: config.k]
        nxt = eps - config.delta
        if nxt < config.epsilon_floor:
            return ranked(qualifying)
        eps = nxt


@dataclass(frozen=True, slots=True)
class StrategyStats:
    """Per-strategy summary of both phases; std is the population convention."""

    strategy: StrategyKind
    likelihood_n: int
    likelihood_mean: float | None
    likelihood_std: float | None
    fraction_above_5: float | None
    consumption_n: int
    consumption_mean: float | None
    consumption_std: float | None


def strategy_report(
    phase1: Sequence[Phase1Record], phase2: Sequence[Phase2Record] = ()
) -> list[StrategyStats]:
    """Summarize likelihood and consumption ratings per strategy.

    Consumption records inherit the strategy of their Phase 1 record for the
    same (user, item).
    """
    strategy_of = {(r.user_id, r.item_id): r.strategy for r in phase1}
    l_vals: dict[StrategyKind, list[int]] = {}
    for rec in phase1:
        l_vals.setdefault(rec.strategy, []).append(rec.rating.value)
    c_vals: dict[StrategyKind, list[int]] = {}
    for rec in phase2:
        kind = strategy_of.get((rec.user_id, rec.item_id))
        if kind is not None:
            c_vals.setdefault(kind, []).append(rec.rating.value)

    rows = []
    for kind in StrategyKind:
        if kind not in l_vals and kind not in c_vals:
            continue
        ls = np.asarray(l_vals.get(kind, ()), dtype=float)
        cs = np.asarray(c_vals.get(kind, ()), dtype=float)
        rows.append(
            StrategyStats(
                strategy=kind,
                likelihood_n=ls.size,
                likelihood_mean=float(ls.mean()) if ls.size else None,
                likelihood_std=float(ls.std()) if ls.size else None,
                fraction_above_5=float((ls > 5).mean()) if ls.size else None,
                consumption_n=cs.size,
                consumption_mean=float(cs.mean()) if cs.size else None,
                consumption_std=float(cs.std()) if cs.size else None,
            )
        )
    return rows
