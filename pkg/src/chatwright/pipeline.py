"""Dev-bot pipeline: utterances and direct edits become new representation versions.

An utterance runs a fixed call plan against the provider:

1. *update* - produce the revised full representation,
2. *consistency* - audit the logic rules and apply any resolutions
   (skipped when fewer than two rules exist),
3. *summary* - produce the comprehension text shown to the builder.

A direct edit applies the user's literal component replacement, asks the
provider to revise the *other two* components for coherence (the edited
component is preserved verbatim), then runs the consistency audit.  An
edit whose text changes nothing is committed as-is with no provider calls.

Mutations are atomic per project: any provider or parse failure leaves the
version history untouched.  A FIFO gate serializes mutations per project;
independent projects proceed in parallel.
"""

from __future__ import annotations

import json
import logging
import threading
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from chatwright.diffing import (
    EMPTY_DELTA,
    RenderStyle,
    RepresentationDelta,
    diff_representation,
    render_delta,
)
from chatwright.promptlib import PromptLibrary, extract_fenced
from chatwright.providers import (
    CompletionProvider,
    CompletionRequest,
    ProgressSink,
    ProviderError,
    Purpose,
)
from chatwright.representation import (
    ComponentId,
    DirectEdit,
    KbSection,
    LogicRule,
    ParseError,
    Representation,
    ValidationFailure,
    apply_direct_edit,
    normalize_logic,
    parse_document,
    serialize_component,
    serialize_document,
    validate,
)
from chatwright.templates import Template
from chatwright.versions import Provenance, ProvenanceKind, VersionStore

logger = logging.getLogger("chatwright.pipeline")

CONSISTENCY_SYSTEM_PROMPT = (
    "You audit chatbot rule sets for contradictions, overlaps, and stale "
    "references, and report findings as JSON."
)


class UtteranceRejected(ValueError):
    """Empty or whitespace-only utterance; rejected before any provider call."""


class EditRejected(ValueError):
    """Direct edit failed to parse or validate; nothing was committed."""


class PipelineError(RuntimeError):
    """Provider or response-format failure; the project is unchanged."""


class FindingKind(Enum):
    CONTRADICTION = "CONTRADICTION"
    OVERLAP = "OVERLAP"
    STALE_REFERENCE = "STALE_REFERENCE"
    # Used only for surfaced warnings when the audit itself failed.
    NO_ACTION = "NO_ACTION"


class FindingResolution(Enum):
    DELETE_BOTH = "DELETE_BOTH"
    REWRITE = "REWRITE"
    NO_ACTION = "NO_ACTION"


@dataclass(frozen=True)
class ConsistencyFinding:
    kind: FindingKind
    resolution: FindingResolution
    rule_ordinals: tuple[int, ...]
    explanation: str
    rewrites: tuple[tuple[int, str], ...] = ()


@dataclass(frozen=True)
class DevResponse:
    comprehension: str
    change_summary: str
    new_version_index: int
    delta: RepresentationDelta
    findings: tuple[ConsistencyFinding, ...] = ()


class FindingParseFailure(ValueError):
    pass


def parse_findings(text: str) -> tuple[ConsistencyFinding, ...]:
    """Decode the consistency call's JSON findings array."""
    raw = text.strip()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError:
        start, end = raw.find("["), raw.rfind("]")
        if start < 0 or end <= start:
            raise FindingParseFailure(f"no JSON array in: {raw[:80]!r}") from None
        try:
            data = json.loads(raw[start:end + 1])
        except json.JSONDecodeError as exc:
            raise FindingParseFailure(str(exc)) from None
    if not isinstance(data, list):
        raise FindingParseFailure("findings must be a JSON array")

    findings = []
    for item in data:
        try:
            kind = FindingKind(item["kind"])
            resolution = FindingResolution(item["resolution"])
            ordinals = tuple(int(o) for o in item["ordinals"])
            rewrites = tuple(sorted(
                (int(k), str(v)) for k, v in item.get("rewrites", {}).items()))
            explanation = str(item.get("explanation", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise FindingParseFailure(f"bad finding {item!r}: {exc}") from None
        if kind is FindingKind.CONTRADICTION and len(ordinals) < 2:
            raise FindingParseFailure(
                "a CONTRADICTION finding must name at least two ordinals")
        findings.append(ConsistencyFinding(kind, resolution, ordinals,
                                           explanation, rewrites))
    return tuple(findings)


class _FifoGate:
    """Mutual exclusion whose waiters proceed strictly in arrival order."""

    def __init__(self):
        self._mutex = threading.Lock()
        self._queue: deque[threading.Event] = deque()

    @contextmanager
    def hold(self):
        ticket = threading.Event()
        with self._mutex:
            self._queue.append(ticket)
            if len(self._queue) == 1:
                ticket.set()
        ticket.wait()
        try:
            yield
        finally:
            with self._mutex:
                self._queue.popleft()
                if self._queue:
                    self._queue[0].set()


class DevBotEngine:
    def __init__(self, store: VersionStore, provider: CompletionProvider,
                 prompts: PromptLibrary,
                 template_resolver: Callable[[str], Template]):
        self.store = store
        self.provider = provider
        self.prompts = prompts
        self._template_of = template_resolver
        self._gates: dict[str, _FifoGate] = {}
        self._gates_lock = threading.Lock()

    def _gate(self, project_id: str) -> _FifoGate:
        with self._gates_lock:
            return self._gates.setdefault(project_id, _FifoGate())

    # -- provider plumbing ---------------------------------------------------

    def _call(self, req: CompletionRequest, progress: ProgressSink | None) -> str:
        try:
            return self.provider.complete(req, progress)
        except ProviderError as exc:
            raise PipelineError(f"provider failure: {exc}") from exc

    def _parse_representation_response(self, text: str) -> Representation:
        try:
            rep = parse_document(extract_fenced(text))
        except (ParseError, ValidationFailure) as exc:
            raise PipelineError(f"provider returned an unparseable representation: {exc}") from exc
        rep = rep.with_component(ComponentId.LOGIC, normalize_logic(rep.logic))
        violations = validate(rep)
        if violations:
            raise PipelineError(
                "provider returned an invalid representation: "
                + "; ".join(str(v) for v in violations))
        return rep

    # -- operations ------------------------------------------------------------

    def handle_utterance(self, project_id: str, utterance: str,
                         event_id: str | None = None,
                         progress: ProgressSink | None = None) -> DevResponse:
        if not utterance.strip():
            raise UtteranceRejected("utterance is empty")
        template = self._template_of(project_id)
        with self._gate(project_id).hold():
            base = self.store.current(project_id)
            doc = _document(base)

            prompt = self.prompts.render("dev_update",
                                         representation=doc, utterance=utterance)
            update_req = CompletionRequest(
                system_prompt=template.hidden_system_prompt,
                messages=(("user", prompt),),
                purpose_tag=Purpose.DEV_UPDATE)
            updated = self._parse_representation_response(
                self._call(update_req, progress))

            final, findings = self.enforce_consistency(updated, progress)

            summary_prompt = self.prompts.render(
                "summary", representation=_document(final), utterance=utterance)
            summary_req = CompletionRequest(
                system_prompt=template.hidden_system_prompt,
                messages=(("user", summary_prompt),),
                purpose_tag=Purpose.SUMMARY)
            comprehension = self._call(summary_req, progress).strip()

            delta = diff_representation(base, final)
            version = self.store.commit(
                project_id, final,
                Provenance(ProvenanceKind.DEV_UTTERANCE, event_id))
            return DevResponse(comprehension, render_delta(delta, RenderStyle.PLAIN),
                               version.index, delta, findings)

    def enforce_consistency(self, rep: Representation,
                            progress: ProgressSink | None = None,
                            ) -> tuple[Representation, tuple[ConsistencyFinding, ...]]:
        """Audit logic rules via the provider and apply the resolutions.

        On audit failure the representation is returned unchanged with a
        single surfaced warning finding.
        """
        if len(rep.logic) < 2:
            return rep, ()
        req = CompletionRequest(
            system_prompt=CONSISTENCY_SYSTEM_PROMPT,
            messages=(("user", self.prompts.render(
                "consistency", representation=_document(rep))),),
            purpose_tag=Purpose.CONSISTENCY)
        try:
            text = self.provider.complete(req, progress)
            findings = parse_findings(text)
        except (ProviderError, FindingParseFailure) as exc:
            logger.warning("consistency audit skipped: %s", exc)
            return rep, (_audit_warning(str(exc)),)
        if not findings:
            return rep, ()

        doomed: set[int] = set()
        rewrites: dict[int, str] = {}
        for finding in findings:
            if finding.resolution is FindingResolution.DELETE_BOTH:
                doomed.update(finding.rule_ordinals)
            elif finding.resolution is FindingResolution.REWRITE:
                rewrites.update(dict(finding.rewrites))

        new_rules = normalize_logic(
            LogicRule(r.ordinal, rewrites.get(r.ordinal, r.text))
            for r in rep.logic if r.ordinal not in doomed)
        resolved = rep.with_component(ComponentId.LOGIC, new_rules)
        if validate(resolved):
            logger.warning("consistency resolutions produced an invalid "
                           "representation; keeping the original")
            return rep, (_audit_warning("resolutions were not applicable"),)
        return resolved, findings

    def propagate_edit(self, project_id: str, edit: DirectEdit,
                       event_id: str | None = None,
                       progress: ProgressSink | None = None,
                       provenance_kind: ProvenanceKind = ProvenanceKind.DIRECT_EDIT,
                       ) -> DevResponse:
        with self._gate(project_id).hold():
            base = self.store.current(project_id)
            try:
                edited, initial_delta = apply_direct_edit(base, edit)
            except (ParseError, ValidationFailure) as exc:
                raise EditRejected(str(exc)) from exc

            if initial_delta.is_empty:
                # Nothing changed; record the event as a version anyway, but
                # don't bother the provider about it.
                version = self.store.commit(
                    project_id, edited, Provenance(provenance_kind, event_id))
                return DevResponse("", "", version.index, EMPTY_DELTA, ())

            prompt = self.prompts.render(
                "propagate_edit", representation=_document(edited),
                component=edit.component.value)
            req = CompletionRequest(
                system_prompt=self._template_of(project_id).hidden_system_prompt,
                messages=(("user", prompt),),
                purpose_tag=Purpose.DEV_UPDATE)
            revised = self._parse_representation_response(self._call(req, progress))
            # The user's edit is final; the provider only adjusts the others.
            revised = revised.with_component(
                edit.component, edited.component(edit.component))

            final, findings = self.enforce_consistency(revised, progress)
            delta = diff_representation(base, final)
            version = self.store.commit(
                project_id, final, Provenance(provenance_kind, event_id))
            return DevResponse("", render_delta(delta, RenderStyle.PLAIN),
                               version.index, delta, findings)

    def attach_sections(self, project_id: str, sections: list[tuple[str, str]],
                        event_id: str | None = None,
                        progress: ProgressSink | None = None) -> DevResponse:
        """Merge document sections into the KB (replacing same-keyed ones)."""
        base = self.store.current(project_id)
        merged = {s.key: s.value for s in base.kb}
        merged.update(dict(sections))
        kb_text = serialize_component(
            ComponentId.KB, [KbSection(k, v) for k, v in merged.items()])
        return self.propagate_edit(
            project_id, DirectEdit(ComponentId.KB, kb_text),
            event_id=event_id, progress=progress,
            provenance_kind=ProvenanceKind.ATTACHMENT)


def _document(rep: Representation) -> str:
    return serialize_document(rep)


def _audit_warning(reason: str) -> ConsistencyFinding:
    return ConsistencyFinding(
        kind=FindingKind.NO_ACTION,
        resolution=FindingResolution.NO_ACTION,
        rule_ordinals=(),
        explanation=f"consistency audit unavailable: {reason}")
