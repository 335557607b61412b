#!/usr/bin/env python3
from ..model.distributions import RoleDistribution
from ..util.errors import DataError, DimensionError, UsageError


def fuse_hybrid(p_head: RoleDistribution, p_knn: RoleDistribution, alpha: float) -> RoleDistribution:
    """alpha * p_head + (1 - alpha) * p_knn."""
    if p_head.role != p_knn.role:
        raise DataError("Cannot fuse a {} head distribution with a {} neighbor distribution.".format(
            p_head.role.value, p_knn.role.value))
    if p_head.size != p_knn.size:
        raise DimensionError("Head distribution has {} classes, neighbor distribution {}.".format(
            p_head.size, p_knn.size))
    if not 0.0 <= alpha <= 1.0:
        raise UsageError("alpha must lie in [0, 1], got {}.".format(alpha))
    return RoleDistribution(p_head.role, alpha * p_head.probs + (1.0 - alpha) * p_knn.probs)
