"""hopnav: hop-biased random-walk models of human navigation on networks."""

__version__ = "0.1.0"

from .clickstream import (ALL, ClassificationRules, NavigationType,
                          RequestRecord, Session, TransitionSet, classify,
                          classify_sessions, extract_transitions, parse_log,
                          sessionize)
from .graph import (ComponentMap, Graph, GraphError, connected_components,
                    exact_diameter, largest_connected_component,
                    load_edge_list, write_edge_list)
from .khop import (ProfileCache, SourceProfile, bfs_profile, mk_row_mass,
                   profile_sources)
from .models import (FittedModel, HopPortationVector, ModelId, dense_row,
                     fit_alpha, fit_hopportation, fit_model, grav_prob,
                     hoprank_prob, loglik, mc_fit, nparams, pa_prob, rw_prob)
from .selection import (Evaluation, Ranking, bic, evaluate_all, rank_models,
                        winner_matrix)
from .simulate import (SynthSpec, balanced_binary_tree, er_connected,
                       random_tree, simulate_baseline, simulate_hoprank,
                       synth_graph)
