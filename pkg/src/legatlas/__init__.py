"""Grid diagrams of Legendrian and transverse knots, and an atlas builder on top of them."""

from .atlas import AtlasConfig, AtlasRecord, run_atlas
from .fingerprint import Fingerprint, KnotTable, fingerprint
from .grid import GridDiagram, GridError, ParseError, decode, encode
from .invariants import classical_invariants, tb_r
from .moves import MoveDescriptor, StabType, apply_move, apply_path, stabilize
from .search import Budget, MoveGraphView, connected, is_destabilizable, reduce

__all__ = [
    "AtlasConfig",
    "AtlasRecord",
    "Budget",
    "Fingerprint",
    "GridDiagram",
    "GridError",
    "KnotTable",
    "MoveDescriptor",
    "MoveGraphView",
    "ParseError",
    "StabType",
    "apply_move",
    "apply_path",
    "classical_invariants",
    "connected",
    "decode",
    "encode",
    "fingerprint",
    "is_destabilizable",
    "reduce",
    "run_atlas",
    "stabilize",
    "tb_r",
]

__version__ = "0.1.0"
