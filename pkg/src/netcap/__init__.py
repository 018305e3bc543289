"""Exact tools for single-edge capacity perturbation in acyclic networks:
GF(2) linear codes, kernel restriction, cut-set regions, entropy tables,
MAC and deterministic broadcast regions, and a brute-force code oracle."""

from .gf2 import Gf2Matrix, kernel_basis, rank, solve
from .network import DemandSpec, Edge, Network, max_flow, enumerate_cuts, reduce_edge, topological_order, validate_network
from .linear_code import LinearNetworkCode, check_decodable, compute_transfer_matrices, simulate_code
from .perturbation import kernel_restrict, build_restricted_code, verify_rate_loss
from .cutset import cutset_region, check_delta_robustness
from .info import DistributionTable, entropy, mutual_information, induced_distribution
from .regions import RateRegion, DeterministicBC, dbc_region, mac_region_from_code, region_membership
from .theorem import TheoremInstance, corollary_outer_bound, verify_theorem
from .oracle import achievable_set, delta_gap_report, find_code

__version__ = "0.1.0"
