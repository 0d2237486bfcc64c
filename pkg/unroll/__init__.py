"""Tree unrolling, finite-L marginals and the convergence checks built on them."""

from .construct import VERTEX_CAP, depth_counts, unroll, unroll_step1, unroll_step2
from .finite_l import (
    explicit_tree_marginal,
    finite_l_forward,
    finite_l_gradient,
    finite_l_log_odds,
    finite_l_loglik,
)
from .verify import VERIFY_COLUMNS, VerifyConfig, verify_all

__all__ = [
    'unroll_step1', 'unroll_step2', 'unroll', 'depth_counts', 'VERTEX_CAP',
    'explicit_tree_marginal', 'finite_l_forward', 'finite_l_log_odds',
    'finite_l_loglik', 'finite_l_gradient',
    'VerifyConfig', 'verify_all', 'VERIFY_COLUMNS',
]
