"""Default behavior-parameter tables.

Per-strategy likelihood behavior of an average user, a pooled variant, and
three user archetypes ranging from explanation-insensitive (high rigidness,
near-flat explanation effect) to explanation-driven (low rigidness).  These
are the defaults the synthetic cohort generator uses; any of them can be
overridden through the cohort config.
"""

from .model import MixtureParams, StrategyKind

STRATEGY_BEHAVIOR = {
    StrategyKind.FRIEND_POP: MixtureParams.free(mu=6.85, sigma=3.61, a=0.74, alpha=0.44),
    StrategyKind.RAND_FRIEND: MixtureParams.free(mu=7.10, sigma=3.57, a=0.71, alpha=0.49),
    StrategyKind.OVERALL_POP: MixtureParams.free(mu=6.89, sigma=3.10, a=0.66, alpha=0.49),
    StrategyKind.GOOD_FRIEND: MixtureParams.free(mu=6.46, sigma=2.51, a=0.66, alpha=0.46),
    StrategyKind.GOOD_FR_COUNT: MixtureParams.free(mu=6.84, sigma=2.26, a=0.61, alpha=0.50),
}

POOLED_BEHAVIOR = MixtureParams.free(mu=6.88, sigma=3.05, a=0.69, alpha=0.47)

# Archetype rating means grow while rigidness falls: users who ignore
# explanations, use them as one signal, or lean on them heavily.  alpha is
# set so each archetype's discretized rating mean lands on the intended
# cluster mean (0.67, 2.44, 4.89); truncation to the 0-10 window would pull
# constraint-derived alphas well off those targets.
ARCHETYPE_MEANS = (0.67, 2.44, 4.89)
USER_ARCHETYPES = (
    MixtureParams.free(mu=0.05, sigma=78.82, a=0.62, alpha=1.7000637297615901),
    MixtureParams.free(mu=1.43, sigma=1.98, a=0.50, alpha=0.3090178390123366),
    MixtureParams.free(mu=4.99, sigma=3.22, a=0.08, alpha=0.18647025056703817),
)
