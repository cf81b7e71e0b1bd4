"""Prompt templates, shipped as plain-text data files.

Templates live in ``chatwright/prompts/*.txt`` and may use the named
placeholders ``{representation}``, ``{utterance}``, ``{conversation}``,
``{component}`` and ``{state}``.  The placeholder set is a compatibility
contract: custom template files may rely on exactly these names.
Placeholders are substituted literally (no format-spec machinery), so any
other braces in a template are passed through untouched.
"""

from __future__ import annotations

from importlib import resources
from typing import Iterable

PLACEHOLDERS = ("representation", "utterance", "conversation", "component", "state")


class PromptLibrary:
    def __init__(self):
        self._cache: dict[str, str] = {}

    def _template(self, name: str) -> str:
        if name not in self._cache:
            path = resources.files("chatwright").joinpath(f"prompts/{name}.txt")
            self._cache[name] = path.read_text("utf-8")
        return self._cache[name]

    def render(self, name: str, **values: str) -> str:
        unknown = set(values) - set(PLACEHOLDERS)
        if unknown:
            raise KeyError(f"unknown placeholders: {sorted(unknown)}")
        text = self._template(name)
        for key, value in values.items():
            text = text.replace("{" + key + "}", value)
        return text


def render_conversation(history: Iterable[tuple[str, str]]) -> str:
    """History as readable turns, for templates using {conversation}."""
    lines = []
    for role, text in history:
        speaker = "Bot" if role in ("bot", "assistant") else "User"
        lines.append(f"{speaker}: {text}")
    return "\n".join(lines)


def extract_fenced(text: str) -> str:
    """Body of the last complete <<< ... >>> fence, or the text unchanged."""
    lines = text.split("\n")
    start = end = None
    for i, line in enumerate(lines):
        stripped = line.strip()
        if stripped == "<<<":
            start = i
            end = None
        elif stripped == ">>>" and start is not None and end is None:
            end = i
    if start is not None and end is not None:
        return "\n".join(lines[start + 1:end])
    return text
