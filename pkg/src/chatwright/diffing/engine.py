"""Word-level diffs and representation deltas.

Texts are tokenized on whitespace with punctuation left attached, matching
how changes read in the builder UI.  ``diff_text`` produces an LCS-minimal
edit script (common prefix/suffix aligned first, ties broken leftmost, see
``kernel``); ``diff_representation`` lifts it to whole representations by
pairing elements, and ``render_delta`` prints the result in PLAIN, ANSI or
HTML style.

PLAIN output wraps additions in ``{+...+}`` and removals in ``[-...-]``.
That marker syntax is a stable contract consumed by the CLI and tests;
markers are not escaped, so tokens that themselves contain marker
sequences will confuse downstream parsers.
"""

from __future__ import annotations

import html
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from chatwright.diffing.kernel import diff_ops
from chatwright.representation import ComponentId, Representation, serialize_component


class SpanKind(Enum):
    ADDED = "ADDED"
    REMOVED = "REMOVED"
    UNCHANGED = "UNCHANGED"


class RenderStyle(Enum):
    ANSI = "ANSI"
    HTML = "HTML"
    PLAIN = "PLAIN"


@dataclass(frozen=True)
class DiffSpan:
    kind: SpanKind
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class ElementChange:
    """One changed element: a KB section, logic rule, or variable.

    ``old_ref``/``new_ref`` are the KB key / variable name / logic ordinal
    on each side; an insertion has no ``old_ref``, a deletion no ``new_ref``.
    """

    component: ComponentId
    old_ref: str | int | None
    new_ref: str | int | None
    spans: tuple[DiffSpan, ...]

    @property
    def is_insertion(self) -> bool:
        return self.old_ref is None

    @property
    def is_deletion(self) -> bool:
        return self.new_ref is None


@dataclass(frozen=True)
class RepresentationDelta:
    changes: tuple[ElementChange, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.changes


EMPTY_DELTA = RepresentationDelta()


def tokenize(text: str) -> list[str]:
    return text.split()


def diff_text(old: str, new: str) -> list[DiffSpan]:
    """Token-level diff spans between two texts.

    Interleaving UNCHANGED+REMOVED spans reproduces the old token stream,
    UNCHANGED+ADDED the new one.
    """
    old_tokens = tokenize(old)
    new_tokens = tokenize(new)
    ids: dict[str, int] = {}
    a = [ids.setdefault(t, len(ids)) for t in old_tokens]
    b = [ids.setdefault(t, len(ids)) for t in new_tokens]
    ops = diff_ops(a, b)

    spans: list[DiffSpan] = []
    i = j = pos = 0
    n = len(ops)
    while pos < n:
        op = ops[pos]
        end = pos
        while end < n and ops[end] == op:
            end += 1
        count = end - pos
        if op == 0x3D:
            spans.append(DiffSpan(SpanKind.UNCHANGED, tuple(old_tokens[i:i + count])))
            i += count
            j += count
        elif op == 0x2D:
            spans.append(DiffSpan(SpanKind.REMOVED, tuple(old_tokens[i:i + count])))
            i += count
        else:
            spans.append(DiffSpan(SpanKind.ADDED, tuple(new_tokens[j:j + count])))
            j += count
        pos = end
    return spans


def edit_distance(spans: Iterable[DiffSpan]) -> int:
    return sum(len(s.tokens) for s in spans if s.kind is not SpanKind.UNCHANGED)


def old_side(spans: Iterable[DiffSpan]) -> str:
    """The old text's token stream (UNCHANGED + REMOVED), space-joined."""
    return " ".join(
        t for s in spans if s.kind is not SpanKind.ADDED for t in s.tokens)


def new_side(spans: Iterable[DiffSpan]) -> str:
    """The new text's token stream (UNCHANGED + ADDED), space-joined."""
    return " ".join(
        t for s in spans if s.kind is not SpanKind.REMOVED for t in s.tokens)


def _overlap_ratio(a: Sequence[int], b: Sequence[int]) -> float:
    ops = diff_ops(a, b)
    matched = ops.count(0x3D)
    longest = max(len(a), len(b))
    return matched / longest if longest else 1.0


def _all_of(kind: SpanKind, text: str) -> tuple[DiffSpan, ...]:
    tokens = tuple(tokenize(text))
    return (DiffSpan(kind, tokens),) if tokens else ()


def _variable_def(v) -> str:
    """A variable's definition without the leading name (the ref names it)."""
    return f"{v.initial_value} {{Initial value: {v.init_rule}, Update rule: {v.update_rule}}}"


# Logic rules below this token-overlap ratio are treated as unrelated
# (delete + insert) rather than as an edited pair.
PAIRING_THRESHOLD = 0.5


def _pair_logic(old_rules, new_rules) -> list[tuple[int | None, int | None]]:
    """Greedy best-overlap pairing of logic rules; returns (old_idx, new_idx)."""
    ids: dict[str, int] = {}

    def encode(text: str) -> list[int]:
        return [ids.setdefault(t, len(ids)) for t in tokenize(text)]

    old_enc = [encode(r.text) for r in old_rules]
    new_enc = [encode(r.text) for r in new_rules]
    candidates = []
    for i, a in enumerate(old_enc):
        for j, b in enumerate(new_enc):
            ratio = _overlap_ratio(a, b)
            if ratio >= PAIRING_THRESHOLD:
                candidates.append((-ratio, i, j))
    candidates.sort()

    used_old: set[int] = set()
    used_new: set[int] = set()
    pairs: list[tuple[int | None, int | None]] = []
    for _, i, j in candidates:
        if i in used_old or j in used_new:
            continue
        used_old.add(i)
        used_new.add(j)
        pairs.append((i, j))
    pairs += [(i, None) for i in range(len(old_rules)) if i not in used_old]
    pairs += [(None, j) for j in range(len(new_rules)) if j not in used_new]
    return pairs


def diff_representation(old: Representation, new: Representation) -> RepresentationDelta:
    """Element-level delta between two representations.

    KB sections and variables are paired by key/name; logic rules by best
    token overlap.  Only elements that actually changed appear; a logic rule
    whose text survived a renumbering is not a change.
    """
    changes: list[ElementChange] = []

    old_kb = {s.key: s for s in old.kb}
    new_kb = {s.key: s for s in new.kb}
    for key, section in old_kb.items():
        # Whole-element inserts/deletes carry the full canonical text; a
        # paired change diffs the value only (the change's ref names the key).
        if key not in new_kb:
            changes.append(ElementChange(
                ComponentId.KB, key, None,
                _all_of(SpanKind.REMOVED, f"{key}: {section.value}")))
        elif new_kb[key].value != section.value:
            spans = diff_text(section.value, new_kb[key].value)
            changes.append(ElementChange(ComponentId.KB, key, key, tuple(spans)))
    for key, section in new_kb.items():
        if key not in old_kb:
            changes.append(ElementChange(
                ComponentId.KB, None, key,
                _all_of(SpanKind.ADDED, f"{key}: {section.value}")))

    for old_idx, new_idx in _pair_logic(old.logic, new.logic):
        if old_idx is None:
            rule = new.logic[new_idx]
            changes.append(ElementChange(
                ComponentId.LOGIC, None, rule.ordinal,
                _all_of(SpanKind.ADDED, rule.text)))
        elif new_idx is None:
            rule = old.logic[old_idx]
            changes.append(ElementChange(
                ComponentId.LOGIC, rule.ordinal, None,
                _all_of(SpanKind.REMOVED, rule.text)))
        else:
            old_rule = old.logic[old_idx]
            new_rule = new.logic[new_idx]
            if old_rule.text != new_rule.text:
                changes.append(ElementChange(
                    ComponentId.LOGIC, old_rule.ordinal, new_rule.ordinal,
                    tuple(diff_text(old_rule.text, new_rule.text))))

    old_vars = {v.name: v for v in old.variables}
    new_vars = {v.name: v for v in new.variables}
    for name, var in old_vars.items():
        if name not in new_vars:
            line = serialize_component(ComponentId.VARIABLES, [var])
            changes.append(ElementChange(
                ComponentId.VARIABLES, name, None, _all_of(SpanKind.REMOVED, line)))
        elif new_vars[name] != var:
            changes.append(ElementChange(
                ComponentId.VARIABLES, name, name,
                tuple(diff_text(_variable_def(var), _variable_def(new_vars[name])))))
    for name, var in new_vars.items():
        if name not in old_vars:
            line = serialize_component(ComponentId.VARIABLES, [var])
            changes.append(ElementChange(
                ComponentId.VARIABLES, None, name, _all_of(SpanKind.ADDED, line)))

    order = {ComponentId.KB: 0, ComponentId.LOGIC: 1, ComponentId.VARIABLES: 2}
    changes.sort(key=lambda c: (order[c.component],
                                c.new_ref is None,
                                str(c.new_ref if c.new_ref is not None else c.old_ref)))
    return RepresentationDelta(tuple(changes))


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

_ANSI_ADD = "\x1b[1;32m{}\x1b[0m"      # bold green
_ANSI_REMOVE = "\x1b[9;95m{}\x1b[0m"   # strikethrough bright magenta


def _render_spans(spans: Sequence[DiffSpan], style: RenderStyle) -> str:
    pieces: list[str] = []
    previous: SpanKind | None = None
    for span in spans:
        text = " ".join(span.tokens)
        if span.kind is SpanKind.ADDED:
            if style is RenderStyle.PLAIN:
                piece = "{+" + text + "+}"
            elif style is RenderStyle.ANSI:
                piece = _ANSI_ADD.format(text)
            else:
                piece = f'<span class="diff-added">{html.escape(text)}</span>'
        elif span.kind is SpanKind.REMOVED:
            if style is RenderStyle.PLAIN:
                piece = "[-" + text + "-]"
            elif style is RenderStyle.ANSI:
                piece = _ANSI_REMOVE.format(text)
            else:
                piece = f'<span class="diff-removed">{html.escape(text)}</span>'
        else:
            piece = html.escape(text) if style is RenderStyle.HTML else text
        # A removal directly replaced by an addition reads as one edit:
        # "[-20-]{+5+}" rather than "[-20-] {+5+}".
        if pieces and not (previous is SpanKind.REMOVED and span.kind is SpanKind.ADDED):
            pieces.append(" ")
        pieces.append(piece)
        previous = span.kind
    return "".join(pieces)


def _change_label(change: ElementChange) -> str:
    if change.is_insertion:
        return f"{change.component.value} +{change.new_ref}"
    if change.is_deletion:
        return f"{change.component.value} -{change.old_ref}"
    if change.old_ref != change.new_ref:
        return f"{change.component.value} {change.old_ref}->{change.new_ref}"
    return f"{change.component.value} {change.old_ref}"


def render_delta(delta: RepresentationDelta, style: RenderStyle = RenderStyle.PLAIN) -> str:
    """One line per changed element; empty string for an empty delta."""
    lines = []
    for change in delta.changes:
        label = _change_label(change)
        if style is RenderStyle.HTML:
            label = html.escape(label)
        lines.append(f"{label}: {_render_spans(change.spans, style)}")
    return "\n".join(lines)


def delta_to_json(delta: RepresentationDelta) -> list[dict]:
    return [
        {
            "component": c.component.value,
            "old_ref": c.old_ref,
            "new_ref": c.new_ref,
            "spans": [{"kind": s.kind.value, "tokens": list(s.tokens)} for s in c.spans],
        }
        for c in delta.changes
    ]
