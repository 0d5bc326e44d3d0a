"""Equality-saturation based power optimization for word-level netlists."""

from .ir import (
    ARITY,
    BitVec,
    Design,
    DesignBuilder,
    NetlistError,
    Node,
    ParseError,
    WidthError,
    infer_width,
    parse_design,
    print_design,
)
from .egraph import EGraph, EGraphError, ENode, node_key
from .rewrite import (
    Rewrite,
    RunReport,
    apply_rules,
    ematch,
    rule_library,
    rules_by_name,
)
from .stimulus import (
    PortSpec,
    StimulusConfig,
    StimulusError,
    Waveform,
    convergence_tolerance,
    generate_stimuli,
)
from .simulate import (
    ActivityStats,
    activity,
    activity_csv,
    choose_representatives,
    class_consistency_mismatches,
    graph_activity,
    simulate,
)
from .power import AreaModel, PowerError, area, class_scores, design_power, node_power
from .extract import (
    ExtractionSolution,
    SelectionProblem,
    build_problem,
    lp_text,
    reconstruct,
    seed_from_design,
    selection_cost,
    solve,
)
from .equiv import (
    EquivError,
    FuzzResult,
    Mismatch,
    cosimulate,
    exhaustive_check,
    fuzz_rule,
    simulate_design,
)

__version__ = "0.1.0"

__all__ = [
    "ARITY",
    "ActivityStats",
    "AreaModel",
    "BitVec",
    "Design",
    "DesignBuilder",
    "EGraph",
    "EGraphError",
    "ENode",
    "EquivError",
    "ExtractionSolution",
    "FuzzResult",
    "Mismatch",
    "NetlistError",
    "Node",
    "ParseError",
    "PortSpec",
    "Rewrite",
    "RunReport",
    "SelectionProblem",
    "StimulusConfig",
    "StimulusError",
    "Waveform",
    "WidthError",
    "activity",
    "activity_csv",
    "apply_rules",
    "area",
    "build_problem",
    "choose_representatives",
    "class_consistency_mismatches",
    "class_scores",
    "convergence_tolerance",
    "cosimulate",
    "design_power",
    "ematch",
    "exhaustive_check",
    "fuzz_rule",
    "generate_stimuli",
    "graph_activity",
    "infer_width",
    "lp_text",
    "node_key",
    "node_power",
    "parse_design",
    "print_design",
    "reconstruct",
    "rule_library",
    "rules_by_name",
    "seed_from_design",
    "selection_cost",
    "simulate",
    "simulate_design",
    "solve",
    "__version__",
]
