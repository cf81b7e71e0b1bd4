"""Acceptance suite: one test per release criterion, offline providers only.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.
"""

from __future__ import annotations

import json
import random
import socket
import time
from contextlib import contextmanager

import pytest
from fastapi.testclient import TestClient

from chatwright.api import create_app
from chatwright.diffing import (
    SpanKind,
    diff_representation,
    diff_text,
    edit_distance,
)
from chatwright.diffing.kernel import KERNEL_BACKEND
from chatwright.events import EventKind, EventLog, compute_stats
from chatwright.providers import CompletionRequest, ReplayProvider
from chatwright.representation import (
    ComponentId,
    Representation,
    canonical_hash,
    parse,
    parse_document,
    serialize_component,
    serialize_document,
    validate,
)
from chatwright.scripts import parse_script, run_script
from chatwright.service import Workbench
from chatwright.versions import Provenance, ProvenanceKind, VersionStore
from conftest import (
    FIG1_CASSETTE,
    FIG1_SCRIPT,
    FIG1_SESSION_SCRIPT,
    consistency_rule,
    dev_update_rule,
    propagation_rule,
)
from test_events_stats import brute_force_stats


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE FAIL - {name}")
        raise
    print(f"\nACCEPTANCE PASS - {name}")


def replay_workbench(tmp_path, tag: str) -> Workbench:
    return Workbench(tmp_path / f"data-{tag}", ReplayProvider(FIG1_CASSETTE))


# ---------------------------------------------------------------------------
# 1. Recorded walkthrough replay
# ---------------------------------------------------------------------------

def test_fig1_walkthrough_replay(tmp_path):
    with criterion("walkthrough replay: final scoring rule, removal side, "
                   "deterministic 3 runs, <5s"):
        started = time.monotonic()
        utterances = [s.arg for s in parse_script(FIG1_SCRIPT.read_text("utf-8"))
                      if s.op == "UTTER"]
        final_hashes = []
        report_bytes = []
        last_deltas = []
        for run in range(3):
            wb = replay_workbench(tmp_path, f"run{run}")
            project = wb.create_project("dev", "quiz", "fig1")
            responses = [wb.utter(project.id, text) for text in utterances]
            final_hashes.append(canonical_hash(wb.store.current(project.id)))
            report = run_script(
                wb, wb.create_project("dev", "quiz", "fig1-script"),
                FIG1_SCRIPT)
            assert report.exit_status == 0
            report_bytes.append(report.text().encode())
            last_deltas.append(responses[-1].delta)

        assert len(set(final_hashes)) == 1
        assert len(set(report_bytes)) == 1

        wb = replay_workbench(tmp_path, "inspect")
        project = wb.create_project("dev", "quiz", "fig1")
        for text in utterances:
            resp = wb.utter(project.id, text)
        logic_text = serialize_component(
            ComponentId.LOGIC, wb.store.current(project.id).logic)
        assert "points valued at 10 times the difficulty level" in logic_text

        removed = " ".join(
            token
            for change in last_deltas[0].changes
            for span in change.spans if span.kind is SpanKind.REMOVED
            for token in span.tokens)
        assert "10 points" in removed
        assert time.monotonic() - started < 5.0


# ---------------------------------------------------------------------------
# 2. Consistency enforcement
# ---------------------------------------------------------------------------

def test_contradiction_resolution(scripted_workbench):
    with criterion("contradictory coin rules deleted, ordinals renumbered, "
                   "validation clean"):
        rules = [
            "Ask an animal question each turn.",
            "Offer a hint when the player is stuck.",
            "Keep questions suitable for all ages.",
            "Alternate between mammals, birds, and reptiles.",
            "Let the player skip one question per game.",
            "Congratulate streaks of three correct answers.",
            "Never repeat a question within a game.",
            "Use simple language for younger players.",
            "Award 30 coins for an answer.",
            "Display an animal made of symbols after three correct answers "
            "in a row.",
            "Award 10 coins for every correct answer and a message saying "
            "'Fantastic Job!'",
        ]
        finding = {"kind": "CONTRADICTION", "ordinals": [9, 11],
                   "resolution": "DELETE_BOTH",
                   "explanation": "The two rules award different coins."}
        engine = scripted_workbench([
            consistency_rule(("Award 30 coins", "Award 10 coins"), [finding]),
        ]).engine
        rep = Representation.build(logic=rules)
        resolved, findings = engine.enforce_consistency(rep)
        assert [f.resolution.value for f in findings] == ["DELETE_BOTH"]
        texts = [r.text for r in resolved.logic]
        assert len(texts) == 9
        assert not any("coins" in t for t in texts)
        assert [r.ordinal for r in resolved.logic] == list(range(1, 10))
        assert validate(resolved) == []


# ---------------------------------------------------------------------------
# 3. Edit propagation
# ---------------------------------------------------------------------------

def test_edit_propagation_updates_variables(scripted_workbench):
    with criterion("logic edit propagates scripted variable update, one new "
                   "version, KB untouched"):
        edited_rule = (
            "If the user is able to get the first question correctly, reward "
            "them with 100 points, after that increase the scores assigned "
            "by 100 with each subsequent question. So, if the user gets the "
            "second question correct, the user gets 200 score, 300 for third "
            "question, and so on.")
        base = Representation.build(
            kb=[("Maths Quiz", "Mental arithmetic practice.")],
            logic=["Ask an arithmetic question each turn.",
                   "Increase score by 100 points for the first question, then "
                   "increase by 200 points for each subsequent question."],
            variables=[
                ("score", "0", "0", "Increase by 100 for the first correct answer."),
                ("questionNumber", "1", "1",
                 "Increase by 1 after each question is answered."),
            ])
        propagated = Representation.build(
            kb=[("Maths Quiz", "Mental arithmetic practice.")],
            logic=["Ask an arithmetic question each turn.", edited_rule],
            variables=[
                ("score", "0", "0",
                 "Increment by 100 * questionNumber after answering the "
                 "questionNumber correctly."),
                ("questionNumber", "1", "1",
                 "Increase by 1 after each question is answered."),
            ])
        wb = scripted_workbench([
            dev_update_rule("stage the maths quiz", base),
            propagation_rule("increase the scores assigned by 100", propagated),
        ])
        project = wb.create_project("dev", "quiz", "p6")
        wb.utter(project.id, "stage the maths quiz")
        before = len(wb.versions(project.id))

        wb.direct_edit(project.id, ComponentId.LOGIC,
                       serialize_component(ComponentId.LOGIC, propagated.logic))

        assert len(wb.versions(project.id)) == before + 1
        current = wb.store.current(project.id)
        score = next(v for v in current.variables if v.name == "score")
        assert "Increment by 100 * questionNumber" in score.update_rule
        assert current.kb == base.kb


# ---------------------------------------------------------------------------
# 4. Dual-component rewrite
# ---------------------------------------------------------------------------

def test_dual_component_rewrite(scripted_workbench):
    with criterion("one utterance rewrites theme in KB and logic, delta has "
                   "exactly two element changes"):
        themed = Representation.build(
            kb=[("Quiz Bot", "A quiz bot with 10 questions in total, themed "
                             "around Indian history.")],
            logic=["Greet the player before the first question.",
                   "The quiz bot should interact like a quizmaster, "
                   "challenging the player with questions about Indian "
                   "history."],
            variables=[("score", "0", "0", "Increase by 10 per correct answer.")])
        retimed = parse_document(
            serialize_document(themed).replace("Indian history",
                                               "Friends sitcom"))
        wb = scripted_workbench([
            dev_update_rule("stage the history quiz", themed),
            dev_update_rule("Make it a friends sitcom quiz", retimed),
        ])
        project = wb.create_project("dev", "quiz", "p2")
        wb.utter(project.id, "stage the history quiz")
        version_before = wb.store.head(project.id)
        resp = wb.utter(project.id, "Make it a friends sitcom quiz")
        assert resp.new_version_index == version_before + 1

        delta = diff_representation(
            wb.store.snapshot(project.id, version_before),
            wb.store.current(project.id))
        assert len(delta.changes) == 2
        assert {c.component for c in delta.changes} == \
            {ComponentId.KB, ComponentId.LOGIC}
        for change in delta.changes:
            removed = " ".join(t for s in change.spans
                               if s.kind is SpanKind.REMOVED for t in s.tokens)
            added = " ".join(t for s in change.spans
                             if s.kind is SpanKind.ADDED for t in s.tokens)
            assert "Indian history" in removed
            assert "Friends sitcom" in added


# ---------------------------------------------------------------------------
# 5. Diff oracle equivalence
# ---------------------------------------------------------------------------

def _all_strings(alphabet: int, max_len: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = [()]
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(max_len):
        frontier = [s + (c,) for s in frontier for c in range(alphabet)]
        out.extend(frontier)
    return out


def _oracle_matrix(strings):
    """LCS lengths for every string pair via one vectorized DP (numpy)."""
    import numpy as np

    ids = {s: i for i, s in enumerate(strings)}
    n = len(strings)
    heads = np.array([s[0] if s else -1 for s in strings], dtype=np.int32)
    tails = np.array([ids[s[1:]] if s else 0 for s in strings], dtype=np.int32)
    by_len: dict[int, list[int]] = {}
    for s, i in ids.items():
        by_len.setdefault(len(s), []).append(i)
    groups = {l: np.array(v, dtype=np.int32) for l, v in by_len.items()}
    max_len = max(by_len)

    L = np.zeros((n, n), dtype=np.int8)
    for total in range(2, 2 * max_len + 1):
        for la in range(1, max_len + 1):
            lb = total - la
            if not 1 <= lb <= max_len:
                continue
            sa, sb = groups[la], groups[lb]
            ta, tb = tails[sa], tails[sb]
            eq = heads[sa][:, None] == heads[sb][None, :]
            match = L[np.ix_(ta, tb)] + 1
            keep = np.maximum(L[np.ix_(ta, sb)], L[np.ix_(sa, tb)])
            L[np.ix_(sa, sb)] = np.where(eq, match, keep)
    return ids, L


def _canonical_splits(alphabet: int, max_len: int):
    """Every (a, b) pair, canonical under symbol renaming of a+b.

    ``diff_text`` interns tokens by first occurrence, so each renaming
    orbit maps to a single kernel input; enumerating one representative
    per orbit covers every pair exactly.
    """
    def sequences(n: int):
        seq = [0] * n

        def rec(i: int, used: int):
            if i == n:
                yield tuple(seq)
                return
            for v in range(min(used + 1, alphabet)):
                seq[i] = v
                yield from rec(i + 1, max(used, v + 1))

        if n == 0:
            yield ()
        else:
            yield from rec(0, 0)

    for la in range(max_len + 1):
        for lb in range(max_len + 1):
            for seq in sequences(la + lb):
                yield seq[:la], seq[la:]


def test_diff_oracle_equivalence():
    np = pytest.importorskip("numpy")
    with criterion("diff distance equals DP oracle: 500 random pairs and "
                   "exhaustive 4-token alphabet up to length 6, <30s"):
        started = time.monotonic()

        # Independent textbook oracle for the random half.
        def oracle_lcs(a, b):
            prev = [0] * (len(b) + 1)
            for x in a:
                cur = [0]
                for j, y in enumerate(b):
                    cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
                prev = cur
            return prev[len(b)]

        words = [f"token{i}" for i in range(9)]
        rng = random.Random(170823)
        for _ in range(500):
            a = [rng.choice(words) for _ in range(rng.randint(0, 15))]
            b = [rng.choice(words) for _ in range(rng.randint(0, 15))]
            got = edit_distance(diff_text(" ".join(a), " ".join(b)))
            want = len(a) + len(b) - 2 * oracle_lcs(a, b)
            assert got == want

        # Exhaustive half: all strings over a 4-token alphabet, length <= 6.
        strings = _all_strings(4, 6)
        assert len(strings) == 5461
        ids, L = _oracle_matrix(strings)

        # The vectorized matrix must itself agree with the textbook oracle.
        for _ in range(2000):
            a = strings[rng.randrange(len(strings))]
            b = strings[rng.randrange(len(strings))]
            assert int(L[ids[a], ids[b]]) == oracle_lcs(a, b)

        vocab = ["north", "south", "east", "west"]
        checked = 0
        for a, b in _canonical_splits(4, 6):
            got = edit_distance(diff_text(
                " ".join(vocab[s] for s in a), " ".join(vocab[s] for s in b)))
            want = len(a) + len(b) - 2 * int(L[ids[a], ids[b]])
            assert got == want, (a, b, got, want)
            checked += 1
        assert checked == 1_246_654  # orbits of the 5461^2 raw pairs

        # With the compiled kernel active, also push every raw pair
        # (29.8M) through the production walk in one C loop.
        if KERNEL_BACKEND == "c":
            from chatwright.diffing._kernel_c import pairwise_distances

            symbols = np.array([c for s in strings for c in s], dtype=np.int32)
            offsets = np.zeros(len(strings) + 1, dtype=np.int32)
            np.cumsum([len(s) for s in strings], out=offsets[1:])
            out = np.empty((len(strings), len(strings)), dtype=np.uint8)
            pairwise_distances(symbols, offsets, out)
            lens = offsets[1:] - offsets[:-1]
            want = lens[:, None] + lens[None, :] - 2 * L.astype(np.int32)
            assert np.array_equal(out.astype(np.int32), want)

        elapsed = time.monotonic() - started
        print(f"\n  diff oracle: {checked} canonical pairs"
              f"{' + 29.8M raw pairs' if KERNEL_BACKEND == 'c' else ''}"
              f" in {elapsed:.1f}s ({KERNEL_BACKEND} kernel)")
        assert elapsed < 30.0


# ---------------------------------------------------------------------------
# 6. Round-trip property
# ---------------------------------------------------------------------------

def _random_representation(rng: random.Random) -> Representation:
    def phrase(max_words=6):
        pool = ["ask", "score", "answer", "player", "question", "hint",
                "round", "game", "topic", "bonus", "23", "level."]
        return " ".join(rng.choice(pool)
                        for _ in range(rng.randint(1, max_words)))

    kb = []
    for i in range(rng.randint(0, 4)):
        lines = [phrase() for _ in range(rng.randint(1, 3))]
        kb.append((f"Section {i} {rng.choice('ABC')}", "\n".join(lines)))
    logic = [phrase() for _ in range(rng.randint(0, 6))]
    variables = []
    for i in range(rng.randint(0, 4)):
        variables.append((f"var{i}", phrase(2), phrase(3), phrase(5)))
    return Representation.build(kb=kb, logic=logic, variables=variables)


def test_roundtrip_200_generated_representations():
    with criterion("parse(serialize(rep)) == rep for 200 generated "
                   "representations"):
        rng = random.Random(91)
        for _ in range(200):
            rep = _random_representation(rng)
            assert validate(rep) == []
            for component in ComponentId:
                text = serialize_component(component, rep.component(component))
                assert parse(component, text) == rep.component(component)
            assert parse_document(serialize_document(rep)) == rep


# ---------------------------------------------------------------------------
# 7. Version laws
# ---------------------------------------------------------------------------

def test_version_laws(tmp_path):
    with criterion("append-only across 1000 mixed ops, checkout identity, "
                   "rollback forks, restart bit-exact"):
        store = VersionStore(tmp_path / "versions")
        store.init_project("laws")
        variants = [Representation.build(logic=[f"variant {i} of the rule"])
                    for i in range(10)]
        rng = random.Random(5)
        hashes: dict[int, str] = {}
        length = 0
        for i in range(1000):
            if i % 7 == 3 and length > 1:
                target = rng.randrange(length)
                restored = store.checkout("laws", target)
                assert canonical_hash(restored) == hashes[target]
                committed = store.commit(
                    "laws", restored,
                    Provenance(ProvenanceKind.DIRECT_EDIT))
                assert committed.index == length  # fork grew history
            else:
                rep = variants[rng.randrange(len(variants))]
                committed = store.commit(
                    "laws", rep, Provenance(ProvenanceKind.DEV_UTTERANCE))
                assert canonical_hash(store.snapshot("laws", committed.index)) \
                    == canonical_hash(rep)
            hashes[committed.index] = canonical_hash(committed.snapshot)
            length = committed.index + 1

        assert [v.index for v in store.list("laws")] == list(range(length))
        sample = rng.sample(sorted(hashes), 100)
        for index in sample:
            assert canonical_hash(store.snapshot("laws", index)) == hashes[index]

        reloaded = VersionStore(tmp_path / "versions")
        assert [v.index for v in reloaded.list("laws")] == list(range(length))
        assert reloaded.head("laws") == store.head("laws")
        for index in sample:
            assert canonical_hash(reloaded.snapshot("laws", index)) == hashes[index]


# ---------------------------------------------------------------------------
# 8. Test-session laws
# ---------------------------------------------------------------------------

def test_session_laws(tmp_path):
    with criterion("restart equals fresh start, history +2 per message, "
                   "stable key set, deterministic over 2 replayed runs"):
        steps = parse_script(FIG1_SESSION_SCRIPT.read_text("utf-8"))
        utterances = [s.arg for s in steps if s.op == "UTTER"]
        messages = [s.arg for s in steps if s.op == "TEST"]
        assert len(messages) == 10

        final_states = []
        for run in range(2):
            wb = replay_workbench(tmp_path, f"session{run}")
            project = wb.create_project("dev", "quiz", "fig1")
            for text in utterances:
                wb.utter(project.id, text)
            session = wb.start_session(project.id)
            initial_state = dict(session.variable_state)
            keys = set(initial_state)
            for n, text in enumerate(messages, start=1):
                wb.send_test_message(session.session_id, text)
                live = wb.sessions.get(session.session_id)
                assert set(live.variable_state) == keys
                assert len(live.history) == 2 * n
            final = dict(wb.sessions.get(session.session_id).variable_state)
            final_states.append(final)

            fresh = wb.restart_session(session.session_id)
            assert fresh.history == []
            assert fresh.variable_state == initial_state
            assert fresh.version_index == session.version_index

        assert final_states[0] == final_states[1]
        assert final_states[0]["score"] == "140"
        # Difficulty-2 correct answer pays prior + 20.
        assert final_states[0]["difficulty"] == "4"


def test_session_script_expectations(tmp_path):
    with criterion("scripted walkthrough with play session passes its "
                   "EXPECT steps"):
        wb = replay_workbench(tmp_path, "script")
        project = wb.create_project("dev", "quiz", "fig1")
        report = run_script(wb, project, FIG1_SESSION_SCRIPT)
        assert report.exit_status == 0, report.text()


# ---------------------------------------------------------------------------
# 9. Analytics oracle
# ---------------------------------------------------------------------------

def test_analytics_oracle(tmp_path):
    with criterion("usage stats equal independent recomputation; "
                   "mean 21.0, population sd 9.42"):
        (tmp_path / "projects" / "p").mkdir(parents=True)
        log = EventLog(tmp_path)
        for n in (10, 20, 33):
            log.append("p", EventKind.DEV_MSG, " ".join(["w"] * n))
        log.append("p", EventKind.REP_CLICK, "LOGIC")
        log.append("p", EventKind.TEST_MSG, "one two")
        log.append("p", EventKind.TEST_MSG, "three")
        log.append("p", EventKind.REP_EDIT, "LOGIC\n1. x")

        stats = compute_stats({"p": log.events("p")}, "project:p")
        assert stats.word_mean["DEV_MSG"] == pytest.approx(21.0, abs=1e-9)
        assert stats.word_sd["DEV_MSG"] == pytest.approx(9.42, abs=0.01)

        expected = brute_force_stats(tmp_path / "projects" / "p" / "events.log")
        assert stats.message_counts == expected["counts"]
        assert stats.word_mean == pytest.approx(expected["mean"])
        assert stats.word_sd == pytest.approx(expected["sd"])
        assert stats.pair_counts == expected["pairs"]


# ---------------------------------------------------------------------------
# 10. Provider defaults
# ---------------------------------------------------------------------------

def test_provider_defaults(tmp_path, monkeypatch):
    with criterion("temperature defaults to 0.3; replay mode touches no "
                   "network"):
        assert CompletionRequest("s", (("user", "m"),)).temperature == 0.3
        assert CompletionRequest("s", (("user", "m"),),
                                 temperature=0.9).temperature == 0.9

        def trap(*args, **kwargs):
            raise AssertionError("network access attempted in replay mode")

        monkeypatch.setattr(socket, "socket", trap)
        monkeypatch.setattr(socket, "create_connection", trap)
        wb = replay_workbench(tmp_path, "guarded")
        project = wb.create_project("dev", "quiz", "fig1")
        report = run_script(wb, project, FIG1_SCRIPT)
        assert report.exit_status == 0


# ---------------------------------------------------------------------------
# 11. API/CLI parity
# ---------------------------------------------------------------------------

def test_api_cli_parity(tmp_path):
    with criterion("walkthrough via CLI and via HTTP yields identical final "
                   "version hashes"):
        utterances = [s.arg for s in parse_script(FIG1_SCRIPT.read_text("utf-8"))
                      if s.op == "UTTER"]

        cli_wb = replay_workbench(tmp_path, "cli")
        project = cli_wb.create_project("dev", "quiz", "fig1")
        report = run_script(cli_wb, project, FIG1_SCRIPT)
        assert report.exit_status == 0
        cli_hash = canonical_hash(cli_wb.store.current(project.id))
        cli_versions = len(cli_wb.versions(project.id))

        api_wb = replay_workbench(tmp_path, "api")
        client = TestClient(create_app(api_wb), raise_server_exceptions=False)
        pid = client.post("/projects", json={
            "template": "quiz", "name": "fig1"}).json()["id"]
        for text in utterances:
            with client.stream("POST", f"/projects/{pid}/utterances",
                               json={"text": text}) as response:
                body = response.read().decode()
                assert "event: result" in body
        api_hash = canonical_hash(api_wb.store.current(pid))

        assert api_hash == cli_hash
        assert len(api_wb.versions(pid)) == cli_versions == 6
