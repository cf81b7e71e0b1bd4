"""Word-level diff engine with a compiled kernel and pure-Python fallback."""

from chatwright.diffing.engine import (
    EMPTY_DELTA,
    DiffSpan,
    ElementChange,
    RenderStyle,
    RepresentationDelta,
    SpanKind,
    delta_to_json,
    diff_representation,
    diff_text,
    edit_distance,
    new_side,
    old_side,
    render_delta,
    tokenize,
)
from chatwright.diffing.kernel import KERNEL_BACKEND

__all__ = [
    "EMPTY_DELTA",
    "DiffSpan",
    "ElementChange",
    "KERNEL_BACKEND",
    "RenderStyle",
    "RepresentationDelta",
    "SpanKind",
    "delta_to_json",
    "diff_representation",
    "diff_text",
    "edit_distance",
    "new_side",
    "old_side",
    "render_delta",
    "tokenize",
]
