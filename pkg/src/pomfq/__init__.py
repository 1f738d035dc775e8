"""Mean-field Q-learning under partial observability.

Library layout:

- belief: Dirichlet mean-action and Gamma visibility-rate estimation
- approx: small feed-forward approximator with hand-rolled gradients
- learner: Boltzmann policies, replay, Q-backends, the episode loop
- arena: grid-battle environments (multibattle, gathering, predator/prey)
- ising: lattice stage game with an exact equilibrium reference
- stats: Fisher exact and Welch t tests
- config / checkpoint / runner / cli: the experiment harness
"""

from .belief import (MeanActionBelief, VisibilityBelief, frequentist_mean_action,
                     hoeffding_bound, visibility_prob)
from .config import ConfigError, RunConfig
from .learner import (Experience, GroupLearner, LearnerConfig, ReplayBuffer,
                      TabularQ, TemperatureSchedule, boltzmann_probs,
                      pomf_value, run_episode)
from .stats import fisher_exact, welch_t_test

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Experience",
    "GroupLearner",
    "LearnerConfig",
    "MeanActionBelief",
    "ReplayBuffer",
    "RunConfig",
    "TabularQ",
    "TemperatureSchedule",
    "VisibilityBelief",
    "boltzmann_probs",
    "fisher_exact",
    "frequentist_mean_action",
    "hoeffding_bound",
    "pomf_value",
    "run_episode",
    "visibility_prob",
    "welch_t_test",
    "__version__",
]
