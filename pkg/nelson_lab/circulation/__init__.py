"""Loop integrals, phase winding numbers and node detection."""

from circulation.loops import DEFAULT_CIRCLE_VERTICES, LoopPath, circle_loop, rectangle_loop
from circulation.integrals import (
    CirculationResult,
    circulate,
    circulation_table,
    node_detect,
    vector_potential_circulation,
    winding_number,
)

__all__ = [
    "DEFAULT_CIRCLE_VERTICES",
    "LoopPath",
    "circle_loop",
    "rectangle_loop",
    "CirculationResult",
    "circulate",
    "circulation_table",
    "node_detect",
    "vector_potential_circulation",
    "winding_number",
]
