"""Built-in project templates.

Each template pairs a hidden system prompt (never shown in the builder UI)
with the representation a fresh project starts from.
"""

from __future__ import annotations

from dataclasses import dataclass

from chatwright.representation import Representation

QUIZ_HIDDEN_PROMPT = (
    "You are a bot designed to develop a chat-based game defined by a "
    "knowledge base [KB] and a set of logical rules [Logic]. [Logic] governs "
    "the behavior of the bot. The logic uses variables defined in "
    "[Variables]. We want to ensure that the set of rules do not contradict "
    "each other. Treat every builder instruction as a change to the game's "
    "knowledge, rules, or variables."
)

KNOWLEDGE_HIDDEN_PROMPT = (
    "You are a bot designed to develop an informational assistant defined by "
    "a knowledge base [KB], a set of logical rules [Logic], and state "
    "variables [Variables]. The assistant answers questions from its "
    "knowledge base sections rather than from general knowledge. We want to "
    "ensure that the set of rules do not contradict each other. Treat every "
    "builder instruction as a change to the assistant's knowledge, rules, or "
    "variables."
)


@dataclass(frozen=True)
class Template:
    name: str
    description: str
    hidden_system_prompt: str
    initial_representation: Representation


TEMPLATES: dict[str, Template] = {
    "quiz": Template(
        name="quiz",
        description="Interactive quiz game: questions, answers, scoring.",
        hidden_system_prompt=QUIZ_HIDDEN_PROMPT,
        initial_representation=Representation.build(
            kb=[("Quiz Bot",
                 "A chat-based quiz game. The bot asks questions, checks "
                 "answers, and keeps score.")],
            logic=[
                "Greet the player and explain the rules before asking the first question.",
                "Ask one question at a time and wait for the player's answer.",
                "Tell the player whether their answer was correct before moving on.",
            ],
            variables=[
                ("score", "0", "0",
                 "Increase by the points awarded for a correct answer."),
                ("questionNumber", "1", "1",
                 "Increase by 1 after each question is answered."),
            ],
        ),
    ),
    "knowledge": Template(
        name="knowledge",
        description="Informational bot answering from a custom knowledge base.",
        hidden_system_prompt=KNOWLEDGE_HIDDEN_PROMPT,
        initial_representation=Representation.build(
            kb=[],
            logic=[
                "Answer the user's questions using only the knowledge base sections.",
                "Say so plainly when the knowledge base does not cover a question.",
            ],
            variables=[],
        ),
    ),
}


class UnknownTemplate(KeyError):
    pass


def get_template(name: str) -> Template:
    try:
        return TEMPLATES[name]
    except KeyError:
        raise UnknownTemplate(name) from None


def list_templates() -> list[Template]:
    return list(TEMPLATES.values())
