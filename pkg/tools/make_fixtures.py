#!/usr/bin/env python3
"""Regenerates the recorded walkthrough cassette in tests/fixtures/.

The history-quiz walkthrough is authored here as explicit representation
states, dev-bot summaries, and test-bot replies with STATE trailers.  The
script drives the real pipeline against a scripted mock wrapped in a
recorder, so the cassette contains exactly the requests the pipeline will
issue again at replay time.

Rerun after changing prompt templates, the quiz template, or canonical
serialization - any of those invalidates the recorded fingerprints:

    python3 tools/make_fixtures.py
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

from chatwright.providers import (
    MockProvider,
    Purpose,
    RecordingProvider,
    ScriptRule,
    ScriptedPolicy,
)
from chatwright.representation import Representation, serialize_document
from chatwright.scripts import run_script
from chatwright.service import Workbench

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
CASSETTE = FIXTURES / "cassettes" / "fig1.cassette"
SESSION_SCRIPT = FIXTURES / "scripts" / "fig1_session.script"

BASE_KB_SUFFIX = "The bot asks questions, checks answers, and keeps score."

UTTERANCES = [
    "Build a quiz game where you ask 20 questions about History.",
    "Give 10 points for each correct answer.",
    "Start questions with difficulty level 1.",
    "If the user gets two consecutive questions correct, increase the "
    "difficulty level of subsequent questions by 1.",
    "Instead of awarding 10 points for each correct answer, award points "
    "valued at 10 times the difficulty level.",
]

STATES = [
    # after U0
    Representation.build(
        kb=[("Quiz Bot",
             f"A chat-based quiz game with 20 questions about History. {BASE_KB_SUFFIX}")],
        logic=[
            "Greet the player and explain the rules before asking the first question.",
            "Ask the player 20 questions about History, one at a time, and wait for each answer.",
            "Tell the player whether their answer was correct before moving on.",
            "End the game and announce the final score after question 20 is answered.",
        ],
        variables=[
            ("score", "0", "0", "Increase by the points awarded for a correct answer."),
            ("questionNumber", "1", "1", "Increase by 1 after each question is answered."),
        ],
    ),
    # after U1
    Representation.build(
        kb=[("Quiz Bot",
             f"A chat-based quiz game with 20 questions about History. {BASE_KB_SUFFIX}")],
        logic=[
            "Greet the player and explain the rules before asking the first question.",
            "Ask the player 20 questions about History, one at a time, and wait for each answer.",
            "Tell the player whether their answer was correct before moving on.",
            "Give 10 points for each correct answer.",
            "End the game and announce the final score after question 20 is answered.",
        ],
        variables=[
            ("score", "0", "0", "Increase by 10 for each correct answer."),
            ("questionNumber", "1", "1", "Increase by 1 after each question is answered."),
        ],
    ),
    # after U2
    Representation.build(
        kb=[("Quiz Bot",
             f"A chat-based quiz game with 20 questions about History. {BASE_KB_SUFFIX}")],
        logic=[
            "Greet the player and explain the rules before asking the first question.",
            "Ask the player 20 questions about History, one at a time, and wait for each answer.",
            "Tell the player whether their answer was correct before moving on.",
            "Give 10 points for each correct answer.",
            "Start questions at difficulty level 1.",
            "End the game and announce the final score after question 20 is answered.",
        ],
        variables=[
            ("score", "0", "0", "Increase by 10 for each correct answer."),
            ("questionNumber", "1", "1", "Increase by 1 after each question is answered."),
            ("difficulty", "1", "1", "Hold at 1 until a rule increases it."),
        ],
    ),
    # after U3
    Representation.build(
        kb=[("Quiz Bot",
             f"A chat-based quiz game with 20 questions about History. {BASE_KB_SUFFIX}")],
        logic=[
            "Greet the player and explain the rules before asking the first question.",
            "Ask the player 20 questions about History, one at a time, and wait for each answer.",
            "Tell the player whether their answer was correct before moving on.",
            "Give 10 points for each correct answer.",
            "Start questions at difficulty level 1.",
            "If the player answers two consecutive questions correctly, increase "
            "the difficulty level of subsequent questions by 1.",
            "End the game and announce the final score after question 20 is answered.",
        ],
        variables=[
            ("score", "0", "0", "Increase by 10 for each correct answer."),
            ("questionNumber", "1", "1", "Increase by 1 after each question is answered."),
            ("difficulty", "1", "1",
             "Increase by 1 when the player answers two consecutive questions correctly."),
        ],
    ),
    # after U4
    Representation.build(
        kb=[("Quiz Bot",
             f"A chat-based quiz game with 20 questions about History. {BASE_KB_SUFFIX}")],
        logic=[
            "Greet the player and explain the rules before asking the first question.",
            "Ask the player 20 questions about History, one at a time, and wait for each answer.",
            "Tell the player whether their answer was correct before moving on.",
            "Award points valued at 10 times the difficulty level for each correct answer.",
            "Start questions at difficulty level 1.",
            "If the player answers two consecutive questions correctly, increase "
            "the difficulty level of subsequent questions by 1.",
            "End the game and announce the final score after question 20 is answered.",
        ],
        variables=[
            ("score", "0", "0",
             "Increase by 10 times the difficulty level for each correct answer."),
            ("questionNumber", "1", "1", "Increase by 1 after each question is answered."),
            ("difficulty", "1", "1",
             "Increase by 1 when the player answers two consecutive questions correctly."),
        ],
    ),
]

SUMMARIES = [
    "I understood you want a quiz game that asks the player 20 History "
    "questions, one at a time, and tracks their progress.",
    "Correct answers are now worth 10 points each.",
    "Questions will now start at difficulty level 1.",
    "I understood that after two consecutive correct answers, later "
    "questions get one level harder.",
    "Correct answers now award points worth 10 times the current difficulty "
    "level instead of a flat 10.",
]

# (user message, bot reply including STATE trailer)
SESSION_TURNS = [
    ("I'm ready to play.",
     "Welcome to the History quiz! 20 questions, and the difficulty rises "
     "while you streak. Question 1 (difficulty 1): Who was the first "
     "President of the United States?\n\nSTATE:\nscore=0\nquestionNumber=1\ndifficulty=1"),
    ("George Washington",
     "Correct! +10 points. Question 2 (difficulty 1): In which year did the "
     "French Revolution begin?\n\nSTATE:\nscore=10\nquestionNumber=2\ndifficulty=1"),
    ("1789",
     "Correct! +10 points. Two in a row - difficulty rises to 2. Question 3 "
     "(difficulty 2): Which empire built the Colosseum?\n\nSTATE:\nscore=20\nquestionNumber=3\ndifficulty=2"),
    ("Rome",
     "Correct! +20 points. Question 4 (difficulty 2): Which civilization "
     "wrote in cuneiform?\n\nSTATE:\nscore=40\nquestionNumber=4\ndifficulty=2"),
    ("I don't know",
     "Not quite - the answer was the Sumerians. Question 5 (difficulty 2): "
     "Who crowned himself Emperor of the French in 1804?\n\nSTATE:\nscore=40\nquestionNumber=5\ndifficulty=2"),
    ("Napoleon",
     "Correct! +20 points. Question 6 (difficulty 2): In which year was the "
     "Magna Carta sealed?\n\nSTATE:\nscore=60\nquestionNumber=6\ndifficulty=2"),
    ("1215",
     "Correct! +20 points. Two in a row - difficulty rises to 3. Question 7 "
     "(difficulty 3): Which wall fell in 1989?\n\nSTATE:\nscore=80\nquestionNumber=7\ndifficulty=3"),
    ("The Berlin Wall",
     "Correct! +30 points. Question 8 (difficulty 3): Who was the last "
     "active pharaoh of ancient Egypt?\n\nSTATE:\nscore=110\nquestionNumber=8\ndifficulty=3"),
    ("Cleopatra",
     "Correct! +30 points. Two more in a row - difficulty rises to 4. "
     "Question 9 (difficulty 4): Which treaty ended the First World "
     "War?\n\nSTATE:\nscore=140\nquestionNumber=9\ndifficulty=4"),
    ("What's my score?",
     "You're at 140 points after 8 answered questions, playing at "
     "difficulty 4. Question 9 is still waiting: Which treaty ended the "
     "First World War?\n\nSTATE:\nscore=140\nquestionNumber=9\ndifficulty=4"),
]


def fenced(rep: Representation) -> str:
    return "<<<\n" + serialize_document(rep) + ">>>"


def walkthrough_policy() -> ScriptedPolicy:
    rules = []
    for utterance, state, summary in zip(UTTERANCES, STATES, SUMMARIES):
        rules.append(ScriptRule(
            respond=fenced(state),
            purpose=Purpose.DEV_UPDATE,
            when_contains=(f"The builder just said:\n{utterance}",),
        ))
        rules.append(ScriptRule(
            respond=summary,
            purpose=Purpose.SUMMARY,
            when_contains=(f"The builder of a chatbot just said:\n{utterance}",),
        ))
    for message, reply in SESSION_TURNS:
        rules.append(ScriptRule(
            respond=reply,
            purpose=Purpose.TEST_REPLY,
            when_last_contains=(message,),
        ))
    return ScriptedPolicy(rules)


def main() -> int:
    CASSETTE.parent.mkdir(parents=True, exist_ok=True)
    if CASSETTE.exists():
        CASSETTE.unlink()
    provider = RecordingProvider(MockProvider(walkthrough_policy()), CASSETTE)
    with tempfile.TemporaryDirectory() as tmp:
        workbench = Workbench(tmp, provider)
        project = workbench.create_project("dev", "quiz", "fig1-recording")
        report = run_script(workbench, project, SESSION_SCRIPT)
        sys.stdout.write(report.text())
        if report.failures:
            print("recording run had expectation failures; cassette NOT trusted",
                  file=sys.stderr)
            return 1
    print(f"recorded {CASSETTE}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
