"""QUBO/Ising encodings of clique and partitioning problems, classical annealing solvers,
and a simulated chimera embedding layer."""

from .graph import (Graph, complement, complete_graph, contract_edge, cycle_graph, empty_graph,
                    is_bipartite, max_degree, path_graph, random_graph)
from .model import IsingModel, QuboModel, ising_energy, ising_to_qubo, qubo_energy, qubo_to_ising
from .solvers import (AnnealSchedule, Sample, SampleSet, anneal_flip, anneal_swap_ising, brute_force,
                      local_search, tabu_decompose)
from .builders import (Partition, build_bisection_ising, build_ch_qubo, build_clique_kfixed_qubo,
                       build_kway_qubo, build_mis_qubo, decode_ch, decode_kway, decode_mis)
from .maxclique import CliqueResult, exact_clique, greedy_clique, sa_clique, size_limit_for_qubits, split_solve
from .partition import ch_cost, edge_cut, multilevel_partition, refine_ch_sa
from .chimera import (ChimeraSpec, Embedding, chimera_graph, clique_embedding, contract_random_edges,
                      degrade, embed_model, unembed, verify_embedding)

__version__ = "0.1.0"
