"""Shared fixtures: scripted providers and ready-made workbenches."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from chatwright.providers import (
    MockProvider,
    Purpose,
    ScriptRule,
    ScriptedPolicy,
)
from chatwright.representation import Representation, serialize_document
from chatwright.service import Workbench

FIXTURES = Path(__file__).parent / "fixtures"
FIG1_CASSETTE = FIXTURES / "cassettes" / "fig1.cassette"
FIG1_SCRIPT = FIXTURES / "scripts" / "fig1.script"
FIG1_SESSION_SCRIPT = FIXTURES / "scripts" / "fig1_session.script"


def fenced(rep: Representation) -> str:
    return "<<<\n" + serialize_document(rep) + ">>>"


def dev_update_rule(utterance: str, result: Representation) -> ScriptRule:
    """Scripted dev-update: responds to exactly this builder utterance."""
    return ScriptRule(
        respond=fenced(result),
        purpose=Purpose.DEV_UPDATE,
        when_contains=(f"The builder just said:\n{utterance}",),
    )


def propagation_rule(marker: str, result: Representation) -> ScriptRule:
    """Scripted edit propagation: fires when the edited text contains marker."""
    return ScriptRule(
        respond=fenced(result),
        purpose=Purpose.DEV_UPDATE,
        when_contains=(marker,),
    )


def consistency_rule(markers: tuple[str, ...], findings: list[dict]) -> ScriptRule:
    return ScriptRule(
        respond=json.dumps(findings),
        purpose=Purpose.CONSISTENCY,
        when_contains=markers,
    )


@pytest.fixture
def scripted_workbench(tmp_path):
    """Factory: a workbench on a fresh data dir with the given script rules."""

    def make(rules=(), data_dir=None) -> Workbench:
        return Workbench(data_dir or tmp_path / "data",
                         MockProvider(ScriptedPolicy(rules)))

    return make


@pytest.fixture
def echo_workbench(tmp_path):
    return Workbench(tmp_path / "data", MockProvider())


@pytest.fixture
def nochange_workbench(tmp_path):
    return Workbench(tmp_path / "data", MockProvider(ScriptedPolicy()))
