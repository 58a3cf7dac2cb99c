"""Greedy-based online weighted matching under sample-based adversaries:
algorithms, analytical oracles, tight instance generators, and exact or
Monte Carlo competitive-ratio measurement."""

from .graph import (Instance, EdgeOrder, Matching, InstanceParseError,
                    edge_order, parse_instance, serialize_instance,
                    mask_of, mask_members, full_mask)
from .solvers import (CapacityError, greedy_matching, greedy_on_vertex_subset,
                      max_weight_matching, optimum_weight)
from .linegraph import (LineGraph, ColoringTrace, EventProbabilities,
                        build_line_graph, replay_coloring,
                        exact_event_probabilities, stealing_assignment)
from .online import (compute_candidates_vertex, run_vertex_arrival,
                     price_thresholds, run_vertex_arrival_thresholded,
                     compute_candidates_edge, run_edge_arrival,
                     run_vertex_arrival_optbased)
from .models import (SampleDraw, AospDraw, BatchedEnvironment, TwoFacedInstance,
                     ContractViolation, rng_stream, draw_sample,
                     worst_order_vertex, order_edge, worst_edge_outcome,
                     aosp_prepare, aosp_keep_probability, matching_environment,
                     run_two_faced_reduction, iid_pair_wrapper)
from .generators import (gen_tight_vertex, gen_tight_aosp,
                         gen_greedy_tight_vertex, gen_trap_edge,
                         gen_optbased_counterexample, gen_random,
                         parse_generator_spec)
from .experiments import (ExperimentConfig, RatioEstimate, theoretical_curve,
                          exact_report, monte_carlo, expected_sample_greedy,
                          sample_greedy_estimate, exact_two_faced,
                          two_faced_instance)

__all__ = [name for name in dir() if not name.startswith("_")]
