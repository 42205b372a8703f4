"""depbounds: verified tail bounds for sums of weakly dependent [0,1]-valued
random variables, with exact small-n oracles, Monte Carlo estimators and a
command-line front end.
"""

from .bounds import (
    DependencyGraphParams,
    MeanOnly,
    ProductBound,
    SplitBound,
    SymmetricMoments,
    TailBound,
    UStatParams,
    bincoupling_bound,
    depgraph_bound,
    eps_to_t,
    expfunct_bound,
    hoeffding_bound,
    ik_bound,
    kwise_bernoulli_bound,
    kwise_bound,
    linial_lower_bound,
    linial_luria_bound,
    mcdiarmid_bound,
    mcdiarmid_refined_bound,
    optimal_h_cross_check,
    sss_bound,
    t_to_eps,
    ustat_bound,
    ustat_refined_bound,
)
from .graphcomb import (
    Graph,
    clique4_union_triangles,
    gnm_isolated_bound,
    gnm_isolated_exact_tail,
    gnm_triangles_bound,
    gnp_constants,
    gnp_count,
    independence_number,
    triangle_union_edges,
)
from .numkernel import (
    BinomialSpec,
    PoissonBinomialSpec,
    binom_tail_log,
    binomial_median_lb_check,
    kl_divergence,
    poisson_binom_dist,
)
from .oracle import (
    BinomCoeffFamily,
    ExponentialFamily,
    HingeFamily,
    JointDist,
    ZDist,
    dephoeff_bound,
    exact_tail,
    random_joint_dist,
    symmetric_moment,
    z_distribution,
    zeta_decomposition,
)
from .simulate import SimResult, empirical_tail, exact_binomial_ci
from .verify import run_suite

__version__ = "0.1.0"
