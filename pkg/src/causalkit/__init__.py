"""causalkit: causal discovery, graph evaluation, and do-calculus inference.

Learn graph structure from observational data with constraint-based
(stable PC) or score-based (greedy equivalence search) algorithms, compare
learned graphs against ground truth, and estimate interventional
quantities on discrete data via graph surgery and the adjustment formula.
"""

from .citests import (
    CiResult,
    OracleCiTest,
    fisher_z_test,
    g_square_test,
    oracle_ci_test,
    partial_corr,
    pearson_corr,
)
from .dataset import (
    CONTINUOUS,
    DISCRETE,
    ColumnStats,
    Dataset,
    load_csv,
    save_csv,
    save_kinds,
    summary_stats,
)
from .errors import CausalKitError, DataError, GraphError, KnowledgeError
from .fges import (
    DiscreteBicScore,
    FgesResult,
    GaussianBicScore,
    ScoredGraph,
    discrete_bic_local,
    fges,
    gaussian_bic_local,
    run_fges,
)
from .graphs import (
    ARROW,
    CIRCLE,
    TAIL,
    Cpdag,
    Dag,
    MixedGraph,
    as_dag,
    backdoor_satisfied,
    classify_triple,
    d_separated,
    find_backdoor_set,
    from_dot,
    graph_from_dict,
    graph_from_json,
    graph_to_dict,
    graph_to_json,
    intervene,
    is_acyclic,
    markov_equivalent,
    relatives,
    to_dot,
)
from .inference import (
    EstimateReport,
    adjustment_estimate,
    ate_randomized,
    att,
    paired_ite,
    simpson_check,
)
from .knowledge import (
    Knowledge,
    knowledge_from_dict,
    knowledge_to_dict,
    load_knowledge,
)
from .metrics import GraphComparison, aoc, compare_graphs
from .orient import apply_meek_rules, cpdag_of, pdag_to_dag
from .pc import PcResult, SepsetMap, pc, run_pc
from .rng import SplitMix64
from .simulate import (
    LinearSem,
    beam_dataset,
    moment_capacity_knm,
    sample_sem,
    sem_from_dict,
    spalling_dataset,
    table3_dataset,
)

__version__ = "0.1.0"
SPEC_VERSION = "1"
