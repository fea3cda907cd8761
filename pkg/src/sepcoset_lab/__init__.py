"""Separating cosets, the Y-graph and finite-window boundary experiments for
groups with hyperbolically embedded subgroups (free group with <ab>, and
free products of finite cyclic groups)."""
from .group_model import GroupElement, GroupModel, builtin, load_model
from .relative_graph import ExplorationBudget, all_geodesics, rel_distance, stable_distance
from .separating_cosets import sep_cosets
from .y_graph import y_distance

__all__ = ["GroupElement", "GroupModel", "builtin", "load_model", "ExplorationBudget", "all_geodesics",
           "rel_distance", "stable_distance", "sep_cosets", "y_distance"]
__version__ = "0.1.0"
