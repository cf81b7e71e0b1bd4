"""Bot representation: knowledge base sections, numbered logic rules, variables.

A representation is the explicit, user-visible statement of what the system
currently believes the bot under construction should know and do.  It has
exactly three components:

* ``KB`` - keyed sections of free-form knowledge text,
* ``LOGIC`` - an ordered, numbered list of behavior rules,
* ``VARIABLES`` - named conversational-state holders, each with an
  initialization rule and an update rule written in plain language.

Every component has a canonical, line-oriented text form that is both shown
to users for editing and parsed back:

    KB         blocks separated by blank lines; each block starts
               ``key: first value line`` with optional continuation lines
    LOGIC      one rule per line, ``1. <text>``
    VARIABLES  one per line,
               ``name: initial {Initial value: <rule>, Update rule: <rule>}``

``parse`` and ``serialize`` are exact inverses on valid values; trailing
whitespace on input lines is insignificant.  The whole-representation
document form wraps the three component texts under ``[KB]``, ``[Logic]``
and ``[Variables]`` header lines.

Everything here is a pure function over immutable values; no I/O, no
provider calls.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources
from typing import Iterable, Sequence


class ComponentId(Enum):
    KB = "KB"
    LOGIC = "LOGIC"
    VARIABLES = "VARIABLES"


# grammar.json is the shared grammar description; the browser client
# compiles the same patterns for its pre-submit validation.
GRAMMAR = json.loads(
    resources.files("chatwright").joinpath("grammar.json").read_text("utf-8"))

DOCUMENT_HEADERS = {
    ComponentId[name]: header
    for name, header in GRAMMAR["document_headers"].items()
}
_HEADER_LINES = frozenset(DOCUMENT_HEADERS.values())

_VARIABLE_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_LOGIC_LINE_RE = re.compile(GRAMMAR["logic_line"])
_VARIABLE_LINE_RE = re.compile(GRAMMAR["variable_line"])
_KB_HEAD_RE = re.compile(GRAMMAR["kb_head_line"])
# Tokens that look like code-style identifiers (camelCase or snake_case).
# Plain lowercase words are never treated as variable references.
_REFERENCE_TOKEN_RE = re.compile(
    r"\b(?:[a-z][a-z0-9]*(?:[A-Z][A-Za-z0-9]*)+|[a-z][a-z0-9]*(?:_[a-z0-9]+)+)\b"
)


class RepresentationError(Exception):
    """Base for all representation-layer failures."""


class ParseError(RepresentationError):
    """A component text does not match the canonical grammar."""

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


class ValidationFailure(RepresentationError):
    """A structurally parseable value violates representation invariants."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations) or "invalid"
        super().__init__(detail)


@dataclass(frozen=True)
class Violation:
    component: ComponentId | None
    location: str
    message: str

    def __str__(self) -> str:
        where = self.component.value if self.component else "REPRESENTATION"
        return f"{where}[{self.location}]: {self.message}"


@dataclass(frozen=True)
class KbSection:
    key: str
    value: str


@dataclass(frozen=True)
class LogicRule:
    ordinal: int
    text: str


@dataclass(frozen=True)
class VariableSpec:
    name: str
    initial_value: str
    init_rule: str
    update_rule: str


@dataclass(frozen=True)
class Representation:
    kb: tuple[KbSection, ...] = ()
    logic: tuple[LogicRule, ...] = ()
    variables: tuple[VariableSpec, ...] = ()

    @staticmethod
    def build(
        kb: Iterable[tuple[str, str]] = (),
        logic: Iterable[str] = (),
        variables: Iterable[tuple[str, str, str, str]] = (),
    ) -> "Representation":
        """Convenience constructor; logic rules are numbered 1..N in order."""
        return Representation(
            kb=tuple(KbSection(k, v) for k, v in kb),
            logic=tuple(LogicRule(i + 1, t) for i, t in enumerate(logic)),
            variables=tuple(VariableSpec(*v) for v in variables),
        )

    def component(self, which: ComponentId):
        if which is ComponentId.KB:
            return self.kb
        if which is ComponentId.LOGIC:
            return self.logic
        return self.variables

    def with_component(self, which: ComponentId, value) -> "Representation":
        value = tuple(value)
        if which is ComponentId.KB:
            return replace(self, kb=value)
        if which is ComponentId.LOGIC:
            return replace(self, logic=value)
        return replace(self, variables=value)


@dataclass(frozen=True)
class DirectEdit:
    """A user's literal replacement of one component's full text."""

    component: ComponentId
    new_component_text: str


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _check_single_line(text: str) -> str | None:
    if "\n" in text or "\r" in text:
        return "must be a single line"
    return None


def _validate_kb(kb: Sequence[KbSection]) -> list[Violation]:
    out: list[Violation] = []
    seen: set[str] = set()
    for i, section in enumerate(kb):
        loc = f"section {i + 1}"
        key = section.key
        if not key:
            out.append(Violation(ComponentId.KB, loc, "empty key"))
        elif key != key.strip():
            out.append(Violation(ComponentId.KB, loc, "key has surrounding whitespace"))
        if ":" in key:
            out.append(Violation(ComponentId.KB, loc, "key contains ':'"))
        if _check_single_line(key):
            out.append(Violation(ComponentId.KB, loc, "key spans multiple lines"))
        if key in seen:
            out.append(Violation(ComponentId.KB, loc, f"duplicate key {key!r}"))
        seen.add(key)

        value = section.value
        if "\r" in value:
            out.append(Violation(ComponentId.KB, loc, "value contains carriage return"))
        if "\n\n" in value or value.startswith("\n") or value.endswith("\n"):
            out.append(Violation(ComponentId.KB, loc, "value contains a blank line"))
        for line in value.split("\n"):
            if line in _HEADER_LINES:
                out.append(Violation(ComponentId.KB, loc,
                                     f"value line collides with header {line!r}"))
            if line != line.rstrip():
                out.append(Violation(ComponentId.KB, loc,
                                     "value line has trailing whitespace"))
        if key in _HEADER_LINES:
            out.append(Violation(ComponentId.KB, loc,
                                 f"key collides with header {key!r}"))
    return out


def _validate_logic(logic: Sequence[LogicRule]) -> list[Violation]:
    out: list[Violation] = []
    for i, rule in enumerate(logic):
        expected = i + 1
        loc = f"rule {rule.ordinal}"
        if rule.ordinal < 1:
            out.append(Violation(ComponentId.LOGIC, loc, "ordinal must be positive"))
        elif rule.ordinal > expected:
            out.append(Violation(ComponentId.LOGIC, f"rule {expected}",
                                 f"gap at {expected}"))
        elif rule.ordinal < expected:
            out.append(Violation(ComponentId.LOGIC, loc,
                                 f"ordinal out of order (expected {expected})"))
        if not rule.text.strip():
            out.append(Violation(ComponentId.LOGIC, loc, "empty rule text"))
        elif rule.text != rule.text.strip():
            out.append(Violation(ComponentId.LOGIC, loc,
                                 "rule text has surrounding whitespace"))
        if _check_single_line(rule.text):
            out.append(Violation(ComponentId.LOGIC, loc, "rule text spans multiple lines"))
    return out


def _validate_variables(variables: Sequence[VariableSpec]) -> list[Violation]:
    out: list[Violation] = []
    seen: set[str] = set()
    for i, var in enumerate(variables):
        loc = f"variable {var.name or i + 1}"
        if not _VARIABLE_NAME_RE.match(var.name):
            out.append(Violation(ComponentId.VARIABLES, loc,
                                 f"name {var.name!r} is not identifier-like"))
        if var.name in seen:
            out.append(Violation(ComponentId.VARIABLES, loc,
                                 f"duplicate name {var.name!r}"))
        seen.add(var.name)
        if not var.initial_value:
            out.append(Violation(ComponentId.VARIABLES, loc, "empty initial value"))
        for label, text in (("initial value", var.initial_value),
                            ("init rule", var.init_rule),
                            ("update rule", var.update_rule)):
            if _check_single_line(text):
                out.append(Violation(ComponentId.VARIABLES, loc,
                                     f"{label} spans multiple lines"))
            if text != text.strip():
                out.append(Violation(ComponentId.VARIABLES, loc,
                                     f"{label} has surrounding whitespace"))
        # Delimiter literals would make the line ambiguous to re-parse.
        if " {Initial value: " in var.initial_value:
            out.append(Violation(ComponentId.VARIABLES, loc,
                                 "initial value contains the '{Initial value:' delimiter"))
        if ", Update rule: " in var.init_rule:
            out.append(Violation(ComponentId.VARIABLES, loc,
                                 "init rule contains the ', Update rule:' delimiter"))
    return out


def validate(rep: Representation) -> list[Violation]:
    """Report every invariant violation; an empty list means valid.

    Total: never raises, regardless of how malformed the value is.
    """
    out = _validate_kb(rep.kb)
    out += _validate_logic(rep.logic)
    out += _validate_variables(rep.variables)

    # Weak referential check: identifier-looking tokens inside update rules
    # must name declared variables.  Plain words are never flagged.
    declared = {v.name for v in rep.variables}
    for var in rep.variables:
        for token in _REFERENCE_TOKEN_RE.findall(var.update_rule):
            if token not in declared:
                out.append(Violation(
                    ComponentId.VARIABLES, f"variable {var.name}",
                    f"update rule references undeclared variable {token!r}"))
    return out


def require_valid(rep: Representation) -> Representation:
    violations = validate(rep)
    if violations:
        raise ValidationFailure(violations)
    return rep


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def serialize_component(which: ComponentId, value) -> str:
    if which is ComponentId.KB:
        blocks = []
        for section in value:
            head = f"{section.key}: {section.value}" if section.value else f"{section.key}:"
            blocks.append(head)
        return "\n\n".join(blocks)
    if which is ComponentId.LOGIC:
        return "\n".join(f"{r.ordinal}. {r.text}" for r in value)
    return "\n".join(
        f"{v.name}: {v.initial_value} "
        f"{{Initial value: {v.init_rule}, Update rule: {v.update_rule}}}"
        for v in value
    )


def serialize(rep: Representation) -> dict[ComponentId, str]:
    """Canonical text of each component; rejects invalid representations."""
    require_valid(rep)
    return {c: serialize_component(c, rep.component(c)) for c in ComponentId}


def serialize_document(rep: Representation) -> str:
    """Whole-representation text form used for version files and prompts."""
    texts = serialize(rep)
    parts = []
    for component in (ComponentId.KB, ComponentId.LOGIC, ComponentId.VARIABLES):
        body = texts[component]
        header = DOCUMENT_HEADERS[component]
        parts.append(f"{header}\n{body}" if body else header)
    return "\n\n".join(parts) + "\n"


def canonical_hash(rep: Representation) -> str:
    """Stable content hash of a representation (over its document form)."""
    return hashlib.sha256(serialize_document(rep).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _parse_kb(lines: list[str]) -> tuple[KbSection, ...]:
    sections: list[KbSection] = []
    block: list[tuple[int, str]] = []

    def flush():
        if not block:
            return
        line_no, head = block[0]
        m = _KB_HEAD_RE.match(head)
        if not m:
            raise ParseError(line_no, f"expected 'key: value', got {head!r}")
        key, rest = m.group(1), m.group(2)
        value_lines = [rest[1:] if rest.startswith(" ") else rest]
        value_lines += [text for _, text in block[1:]]
        value = "\n".join(value_lines)
        if value_lines == [""]:
            value = ""
        sections.append(KbSection(key, value))
        block.clear()

    for idx, raw in enumerate(lines, start=1):
        line = raw.rstrip()
        if not line:
            flush()
        else:
            block.append((idx, line))
    flush()

    dupes = _validate_kb(sections)
    if any("duplicate" in v.message for v in dupes):
        raise ValidationFailure([v for v in dupes if "duplicate" in v.message])
    return tuple(sections)


def _parse_logic(lines: list[str]) -> tuple[LogicRule, ...]:
    rules: list[LogicRule] = []
    for idx, raw in enumerate(lines, start=1):
        line = raw.rstrip()
        if not line:
            continue
        m = _LOGIC_LINE_RE.match(line)
        if not m:
            raise ParseError(idx, f"expected '<n>. <rule>', got {line!r}")
        rules.append(LogicRule(int(m.group(1)), m.group(2)))
    return tuple(rules)


def _parse_variables(lines: list[str]) -> tuple[VariableSpec, ...]:
    variables: list[VariableSpec] = []
    for idx, raw in enumerate(lines, start=1):
        line = raw.rstrip()
        if not line:
            continue
        m = _VARIABLE_LINE_RE.match(line)
        if not m:
            raise ParseError(
                idx,
                "expected 'name: value {Initial value: ..., Update rule: ...}', "
                f"got {line!r}")
        variables.append(VariableSpec(*m.groups()))
    seen: set[str] = set()
    for var in variables:
        if var.name in seen:
            raise ValidationFailure([Violation(
                ComponentId.VARIABLES, f"variable {var.name}",
                f"duplicate name {var.name!r}")])
        seen.add(var.name)
    return tuple(variables)


def parse(which: ComponentId, text: str):
    """Parse canonical component text back into structured values.

    Inverse of ``serialize_component`` on valid values.  Raises
    ``ParseError`` with a line number for grammar violations and
    ``ValidationFailure`` for duplicates.
    """
    lines = text.split("\n")
    if which is ComponentId.KB:
        return _parse_kb(lines)
    if which is ComponentId.LOGIC:
        return _parse_logic(lines)
    return _parse_variables(lines)


def parse_document(text: str) -> Representation:
    """Parse the whole-representation document form."""
    bodies: dict[ComponentId, list[str]] = {}
    current: list[str] | None = None
    header_to_component = {v: k for k, v in DOCUMENT_HEADERS.items()}
    for idx, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip()
        if line in header_to_component:
            component = header_to_component[line]
            if component in bodies:
                raise ParseError(idx, f"duplicate section {line}")
            current = bodies.setdefault(component, [])
        elif current is not None:
            current.append(raw)
        elif line:
            raise ParseError(idx, f"text before first section header: {line!r}")
    missing = [c for c in ComponentId if c not in bodies]
    if missing:
        raise ParseError(1, "missing sections: " +
                         ", ".join(DOCUMENT_HEADERS[c] for c in missing))

    def body_text(component: ComponentId) -> str:
        lines = bodies[component]
        while lines and not lines[0].strip():
            lines.pop(0)
        while lines and not lines[-1].strip():
            lines.pop()
        return "\n".join(lines)

    return Representation(
        kb=_parse_kb(body_text(ComponentId.KB).split("\n")),
        logic=_parse_logic(body_text(ComponentId.LOGIC).split("\n")),
        variables=_parse_variables(body_text(ComponentId.VARIABLES).split("\n")),
    )


# ---------------------------------------------------------------------------
# Edits
# ---------------------------------------------------------------------------

def normalize_logic(rules: Iterable[LogicRule]) -> tuple[LogicRule, ...]:
    """Renumber rules 1..N, preserving order."""
    return tuple(LogicRule(i + 1, r.text) for i, r in enumerate(rules))


def apply_direct_edit(rep: Representation, edit: DirectEdit):
    """Apply a user's literal one-component edit.

    Returns ``(new_rep, delta)``.  The other two components are untouched;
    logic ordinals are renumbered 1..N.  A malformed or invariant-breaking
    edit raises without producing a new representation.
    """
    parsed = parse(edit.component, edit.new_component_text)
    if edit.component is ComponentId.LOGIC:
        parsed = normalize_logic(parsed)
    new_rep = require_valid(rep.with_component(edit.component, parsed))

    from chatwright.diffing import diff_representation  # avoids an import cycle

    return new_rep, diff_representation(rep, new_rep)
