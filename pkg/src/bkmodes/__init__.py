"""K-Modes clustering of categorical data with bisecting (BK-Modes) initialisation."""

from .dataset import CategoricalDataset, ContractError, row, row_subset, validate
from .engine import ClusterModel, EngineConfig, assign_step, kmodes_fit, update_step
from .init import (InitError, InitMethod, NotBisectableError, bkmodes_init, cao_density,
                   cao_init, farthest_point_init, initial_centers, random_init,
                   two_modes_bisect)
from .metric import (FrequencyTable, freq_build, freq_update, hamming, mode_of, sd_total,
                     sum_of_distances)

__version__ = "0.1.0"

__all__ = [
    "CategoricalDataset", "ClusterModel", "ContractError", "EngineConfig", "FrequencyTable",
    "InitError", "InitMethod", "NotBisectableError", "assign_step", "bkmodes_init",
    "cao_density", "cao_init", "farthest_point_init", "freq_build", "freq_update", "hamming",
    "initial_centers", "kmodes_fit", "mode_of", "random_init", "row", "row_subset", "sd_total",
    "sum_of_distances", "two_modes_bisect", "update_step", "validate",
]
