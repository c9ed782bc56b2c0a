"""Design-based monotone domain-mean estimation with the CIC_s selection criterion."""

from .estimators import DomainEstimate, hajek_domain_means, ht_domain_means, pooled_block_mean
from .isotonic import PoolingPartition, gcm_classify, max_min_solution, projection_matrix, weighted_pava
from .selection import (
    CicReport,
    TestResult,
    adaptive_estimate,
    analyze_sample,
    chi_sq_sf,
    cic,
    conditional_test,
    sse,
    wald_test,
)
from .survey import DesignSample, Population, WeightMatrixSpec, domain_counts, independent_sample, validate_design

__version__ = "0.1.0"
