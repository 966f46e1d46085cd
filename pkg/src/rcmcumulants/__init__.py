"""Exact moments and cumulants of subgraph counts in the random-connection model."""
from .algebra import AlgebraicScalar, LambdaPoly
from .diagram import GraphSpec, assemble_gram_matrix, build_rho_graph, validate_graph_spec
from .engine import (CumulantResult, cumulant, cumulants_to_moments, joint_cumulant, joint_moment, moment,
                     moments_to_cumulants, normalized_cumulant, partition_term)
from .errors import DivergenceError, DomainError, RCMError, ResourceLimitError
from .model import ModelConfig
from .partitions import GroundSet, SetPartition, enumerate_partitions, partition_census
from .simulator import SimConfig, count_embeddings, estimate, sample_rcm

__version__ = "0.1.0"

__all__ = [
    "AlgebraicScalar", "LambdaPoly", "GraphSpec", "assemble_gram_matrix", "build_rho_graph",
    "validate_graph_spec", "CumulantResult", "cumulant", "cumulants_to_moments", "joint_cumulant",
    "joint_moment", "moment", "moments_to_cumulants", "normalized_cumulant", "partition_term",
    "DivergenceError", "DomainError", "RCMError", "ResourceLimitError", "ModelConfig", "GroundSet",
    "SetPartition", "enumerate_partitions", "partition_census", "SimConfig", "count_embeddings",
    "estimate", "sample_rcm",
]
