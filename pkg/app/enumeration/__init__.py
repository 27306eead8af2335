# Model class enumeration and admissible sets

from app.enumeration.admissible import (
    AdmissibleSet,
    Constraint,
    admissible,
    fingerprint_partition,
    naive_admissible,
    observed_laws,
    quantize_laws,
    refine,
    world_after,
)
from app.enumeration.batch import BatchEvaluator, map_blocks, split_blocks
from app.enumeration.grid import ModelClass, ParameterGrid, SizeOverflow, enumerate_models

__all__ = [
    "AdmissibleSet",
    "BatchEvaluator",
    "Constraint",
    "ModelClass",
    "ParameterGrid",
    "SizeOverflow",
    "admissible",
    "enumerate_models",
    "fingerprint_partition",
    "map_blocks",
    "naive_admissible",
    "observed_laws",
    "quantize_laws",
    "refine",
    "split_blocks",
    "world_after",
]
