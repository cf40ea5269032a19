"""Monte Carlo tree search with PUCT or UCB1 selection."""
from .mcts import (SQRT2, SearchConfig, SearchNode, SearchResult, Tree, playout, puct_select, q_estimates,
                   rebase_tree, run_search, subtree, ucb1_select, visit_distribution)

__all__ = ["SQRT2", "SearchConfig", "SearchNode", "SearchResult", "Tree", "playout", "puct_select",
           "q_estimates", "rebase_tree", "run_search", "subtree", "ucb1_select", "visit_distribution"]
