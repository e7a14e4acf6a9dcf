"""Node features: centralities, clique statistics, behavioural counts, rankings."""

from .behaviour import neighborhood_variability, overtime_count, weekend_count
from .centrality import (
    ConvergenceWarning,
    betweenness,
    closeness,
    clustering,
    eigenvector,
    hits,
    indegree,
    outdegree,
    pagerank,
)
from .cliques import CliqueBudgetExceeded, clique_stats
from .ranking import (
    FeatureRanking,
    chi2_scores,
    n_selected,
    rank_features_chi2,
    rank_features_gini,
    select_top_features,
    write_ranking,
)
from .table import FEATURES, FeatureConfig, FeatureTable, assemble, read_table, write_table

__all__ = [
    "neighborhood_variability", "overtime_count", "weekend_count",
    "ConvergenceWarning", "betweenness", "closeness", "clustering", "eigenvector",
    "hits", "indegree", "outdegree", "pagerank",
    "CliqueBudgetExceeded", "clique_stats",
    "FeatureRanking", "chi2_scores", "n_selected", "rank_features_chi2",
    "rank_features_gini", "select_top_features", "write_ranking",
    "FEATURES", "FeatureConfig", "FeatureTable", "assemble", "read_table", "write_table",
]
