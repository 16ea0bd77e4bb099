"""Dependence graphs: CFG, control/data dependence, IPDG, slicing."""

from .cfg import (
    ENTRY, EXIT, Cfg, Definition, build_cfg, control_dependence,
    immediate_postdominators, postdominators, reaches, reaching_definitions,
)
from .pdg import (
    AlreadyAttachedError, EdgeKind, NodeKind, NoMetaNodeError, Pdg, PdgEdge,
    PdgNode, attach_meta_node, build_ipdg, build_pdg, export_json,
    strip_meta_node, to_dot,
)
from .slicing import (
    SliceCriterion, backward_slice, rebuild_from_statements,
    slice_statement_ids,
)
from .vocab import ID_BUCKETS, TOKEN_INDEX, VOCAB, IdentBuckets

__all__ = [
    "ENTRY", "EXIT", "Cfg", "Definition", "build_cfg", "control_dependence",
    "immediate_postdominators", "postdominators", "reaches",
    "reaching_definitions",
    "AlreadyAttachedError", "EdgeKind", "NodeKind", "NoMetaNodeError", "Pdg",
    "PdgEdge", "PdgNode", "attach_meta_node", "build_ipdg", "build_pdg",
    "export_json", "strip_meta_node", "to_dot",
    "SliceCriterion", "backward_slice", "rebuild_from_statements",
    "slice_statement_ids",
    "ID_BUCKETS", "TOKEN_INDEX", "VOCAB", "IdentBuckets",
]
