"""CIM/E parsing, property-graph modelling and parallel network topology processing."""
from .cime_io import ClassTable, ParseDiagnostic, RawDocument, get_table, parse_cime, serialize_cime
from .graph import PropertyGraph, build_mixed_graph, build_vertex_graph, set_switch_status, stats
from .model import AttributeMapping, GridModel, bind_model, collect_connectivity_nodes, to_document, validate
from .ntp import BusBranchModel, compute_islands, network_tp, oracle_partition, run_ntp, substation_tp
from .synth import (
    BusBranchCase,
    SubstationTemplate,
    builtin_case,
    load_case,
    perturb_switches,
    synthesize_node_breaker,
)

__version__ = "0.1.0"
