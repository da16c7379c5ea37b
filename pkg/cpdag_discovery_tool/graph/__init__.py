from cpdag_discovery_tool.graph.basic import skeleton, v_structures
from cpdag_discovery_tool.graph.cpdag import (
    consistent_extension,
    dag_to_cpdag,
    is_proper_cpdag,
    markov_equivalent,
    strip_to_pattern,
)
from cpdag_discovery_tool.graph.meek import apply_meek_rules
from cpdag_discovery_tool.graph.separation import d_separated

__all__ = [
    "apply_meek_rules",
    "consistent_extension",
    "d_separated",
    "dag_to_cpdag",
    "is_proper_cpdag",
    "markov_equivalent",
    "skeleton",
    "strip_to_pattern",
    "v_structures",
]
