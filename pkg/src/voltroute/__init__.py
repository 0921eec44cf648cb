"""Oblivious electric routing on weighted undirected graphs."""

__version__ = "0.1.0"

from .graph import (  # noqa: E402
    GraphError,
    WeightedGraph,
    build_graph,
    diameter,
    divergence_apply,
    fiedler_eigenvalue,
    gradient_apply,
    laplacian_apply,
    laplacian_dense,
    spectral_summary,
    vertex_expansion_exact,
)
from .generators import generate, glued_paths, random_regular_graph  # noqa: E402
from .formats import parse_demands, parse_edge_list, read_graph, serialize, write_graph  # noqa: E402
from .solver import (  # noqa: E402
    SeriesPlan,
    lplus_one_one_norm,
    normalized_series_apply,
    pinv_apply,
    pinv_dense,
    series_apply,
    series_degree_for,
    series_tables,
)
from .routing import (  # noqa: E402
    PotentialTable,
    competitive_bound,
    congestion,
    electric_flow,
    eta_expansion_bound,
    exact_table,
    forward_coefficient,
    pi_matrix,
    point_demand,
    route_set,
    worst_case_demands,
)
from .walk import enumerate_paths, sample_walk, total_variation, walk_model  # noqa: E402
from .cutting import cut_sequence, removal_experiment, robust1_check, verify_cut_bounds  # noqa: E402
from .distributed import accounting, simulate_tables, simulate_tables_symmetrized  # noqa: E402
