"""User clustering and staged personalization.

Users are summarized by the mean and population variance of their ratings,
clustered with seeded k-means++ / Lloyd iterations, and each cluster's pooled
ratings are fitted to its own mixture model.  Personalization starts every
user at population parameters, adopts the nearest cluster's parameters once
enough history accumulates, and optionally fits individual parameters later.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyInputError, ExplainMixError, InfeasibleError, ParameterError
from .estimation import FitOptions, FitResult, build_histogram, fit_mixture
from .model import MixtureParams, Rating

KMEANS_MAX_ITER = 500
KMEANS_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class UserSummary:
    user_id: object
    mean: float
    variance: float
    n_ratings: int


def summarize_user(ratings: Sequence, user_id: object = None) -> UserSummary:
    """Mean and population variance (divide by n) of a user's rating values."""
    values = np.array(
        [r.value if isinstance(r, Rating) else int(r) for r in ratings], dtype=float
    )
    if values.size == 0:
        raise EmptyInputError("cannot summarize a user with no ratings")
    return UserSummary(
        user_id=user_id,
        mean=float(values.mean()),
        variance=float(values.var()),
        n_ratings=values.size,
    )


@dataclass(frozen=True, slots=True)
class KMeansResult:
    assignments: tuple[int, ...]
    centroids: np.ndarray
    inertia: float
    n_iter: int


def _nearest(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def _inertia(points, centroids, assign) -> float:
    return float(((points - centroids[assign]) ** 2).sum())


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.choice(np.flatnonzero(d2 == 0))
        centroids[j] = points[idx]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def kmeans(points: Sequence, k: int, seed: int = 0, n_init: int = 1) -> KMeansResult:
    """Seeded k-means++ with Lloyd iterations.

    Iterates until the assignment is a fixed point of the final centroids (or
    KMEANS_MAX_ITER), re-seeding any empty cluster to the point farthest from
    its assigned centroid.  With n_init > 1 the best of n_init independent
    seeded runs (lowest inertia, earliest run on ties) is returned.
    Deterministic given the seed.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ParameterError("points must be a non-empty 2-d array")
    if k < 1:
        raise ParameterError("k must be >= 1")
    if len(np.unique(pts, axis=0)) < k:
        raise InfeasibleError(f"fewer than k={k} distinct points")

    best = None
    for run in range(max(int(n_init), 1)):
        result = _kmeans_once(pts, k, seed, run)
        if best is None or result.inertia < best.inertia - 1e-12:
            best = result
    return best


def _kmeans_once(pts: np.ndarray, k: int, seed: int, run: int) -> KMeansResult:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x6B6D, run]))
    centroids = _kmeanspp_init(pts, k, rng)

    def assign_and_fix(centroids):
        assign = _nearest(pts, centroids)
        for _ in range(k):
            sizes = np.bincount(assign, minlength=k)
            empty = np.flatnonzero(sizes == 0)
            if empty.size == 0:
                break
            d2 = ((pts - centroids[assign]) ** 2).sum(axis=1)
            centroids[empty[0]] = pts[d2.argmax()]
            assign = _nearest(pts, centroids)
        return assign

    assign = assign_and_fix(centroids)
    prev_inertia = np.inf
    n_iter = 0
    for n_iter in range(1, KMEANS_MAX_ITER + 1):
        centroids = np.vstack([pts[assign == j].mean(axis=0) for j in range(k)])
        inertia = _inertia(pts, centroids, assign)
        assert inertia <= prev_inertia + 1e-9 * max(prev_inertia, 1.0)
        prev_inertia = inertia
        new_assign = assign_and_fix(centroids)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign

    return KMeansResult(
        assignments=tuple(int(j) for j in assign),
        centroids=centroids,
        inertia=_inertia(pts, centroids, assign),
        n_iter=n_iter,
    )


@dataclass(frozen=True, slots=True)
class ClusterModel:
    cluster_id: int
    centroid: tuple[float, float]
    members: tuple
    fit: FitResult

    def to_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "centroid": {"mean": self.centroid[0], "variance": self.centroid[1]},
            "members": list(self.members),
            "fit": self.fit.to_dict(),
        }


def cluster_and_fit(
    users: Mapping,
    k: int = 3,
    options: FitOptions = FitOptions(),
    seed: int = 0,
    scale: bool = False,
    n_init: int = 10,
) -> list[ClusterModel]:
    """Summarize, cluster, and fit each cluster's pooled ratings.

    Clusters are reported in increasing order of centroid mean with 0-based
    ids.  ``scale`` z-scales the (mean, variance) features before clustering;
    off by default.
    """
    user_ids = sorted(users.keys(), key=str)
    summaries = [summarize_user(users[u], u) for u in user_ids]
    pts = np.array([[s.mean, s.variance] for s in summaries])
    feats = pts
    if scale:
        std = pts.std(axis=0)
        std[std == 0] = 1.0
        feats = (pts - pts.mean(axis=0)) / std
    result = kmeans(feats, k, seed, n_init=n_init)
    assign = np.asarray(result.assignments)

    order = np.argsort([pts[assign == j, 0].mean() for j in range(k)], kind="stable")
    models = []
    for new_id, j in enumerate(order):
        member_idx = np.flatnonzero(assign == j)
        members = tuple(user_ids[i] for i in member_idx)
        pooled = [r for u in members for r in users[u]]
        fit = fit_mixture(build_histogram(pooled), options, seed)
        centroid = pts[member_idx].mean(axis=0)
        models.append(
            ClusterModel(
                cluster_id=new_id,
                centroid=(float(centroid[0]), float(centroid[1])),
                members=members,
                fit=fit,
            )
        )
    return models


class PersonalizationStage(enum.Enum):
    POPULATION_PRIOR = "population_prior"
    CLUSTER_ASSIGNED = "cluster_assigned"
    INDIVIDUAL = "individual"


@dataclass(frozen=True, slots=True)
class PersonalizationState:
    """Per-user staging state; one instance per user, never shared.

    ``m_individual`` is None unless individual fitting is opted into; when
    set it must be >= m_cluster.
    """

    stage: PersonalizationStage
    effective_params: MixtureParams
    history: tuple[int, ...]
    m_cluster: int
    m_individual: int | None = None
    fallback: bool = False
    boundary_hit: bool = False

    def __post_init__(self):
        if self.m_cluster < 1:
            raise ParameterError("m_cluster must be >= 1")
        if self.m_individual is not None and self.m_individual < self.m_cluster:
            raise ParameterError("m_individual must be >= m_cluster")

    @property
    def history_len(self) -> int:
        return len(self.history)


def initial_state(
    population: MixtureParams, m_cluster: int = 10, m_individual: int | None = None
) -> PersonalizationState:
    return PersonalizationState(
        stage=PersonalizationStage.POPULATION_PRIOR,
        effective_params=population,
        history=(),
        m_cluster=m_cluster,
        m_individual=m_individual,
    )


def nearest_cluster(summary: UserSummary, clusters: Sequence[ClusterModel]) -> ClusterModel:
    """Cluster with the closest centroid in (mean, variance) space.

    Ties break toward the lowest cluster_id.
    """
    point = np.array([summary.mean, summary.variance])
    best = min(
        clusters,
        key=lambda cl: (float(((point - np.array(cl.centroid)) ** 2).sum()), cl.cluster_id),
    )
    return best


def personalize(
    state: PersonalizationState,
    new_rating: Rating,
    clusters: Sequence[ClusterModel],
    population: MixtureParams,
    options: FitOptions = FitOptions(),
) -> PersonalizationState:
    """Record one rating and advance the staging policy.

    At exactly m_cluster ratings the nearest cluster's fitted parameters are
    adopted; at m_individual a free-mode fit of the user's own history takes
    over.  Failures fall back to the previous stage's parameters and set the
    fallback flag.  The returned state always carries valid parameters.
    """
    value = new_rating.value if isinstance(new_rating, Rating) else Rating(new_rating).value
    history = state.history + (value,)
    state = replace(state, history=history)
    n = len(history)

    if n < state.m_cluster:
        state = replace(state, effective_params=population)
    elif n == state.m_cluster:
        if clusters:
            chosen = nearest_cluster(summarize_user(history), clusters)
            state = replace(
                state,
                stage=PersonalizationStage.CLUSTER_ASSIGNED,
                effective_params=chosen.fit.params,
                fallback=False,
            )
        else:
            state = replace(
                state, stage=PersonalizationStage.CLUSTER_ASSIGNED, fallback=True
            )

    if state.m_individual is not None and n == state.m_individual:
        free_options = replace(options, constrain_mean=False)
        try:
            fit = fit_mixture(build_histogram(history), free_options, seed=0)
            state = replace(
                state,
                stage=PersonalizationStage.INDIVIDUAL,
                effective_params=fit.params,
                boundary_hit=fit.boundary_hit,
                fallback=False,
            )
        except ExplainMixError:
            state = replace(state, stage=PersonalizationStage.INDIVIDUAL, fallback=True)
    return state
