"""Event log and usage statistics, checked against brute-force recomputation."""

from __future__ import annotations

import json
import math
from pathlib import Path

import pytest

from chatwright.events import EventKind, EventLog, compute_stats


@pytest.fixture
def log(tmp_path) -> EventLog:
    (tmp_path / "projects" / "p1").mkdir(parents=True)
    (tmp_path / "projects" / "p2").mkdir(parents=True)
    return EventLog(tmp_path)


def words(n: int) -> str:
    return " ".join(f"w{i}" for i in range(n))


class TestAppend:
    def test_word_count_is_whitespace_token_count(self, log):
        event = log.append(
            "p1", EventKind.DEV_MSG,
            "Build a quiz game where you ask 20 questions about History.")
        assert event.word_count == 11

    def test_click_payload_counts_one(self, log):
        assert log.append("p1", EventKind.REP_CLICK, "VARIABLES").word_count == 1

    def test_ids_are_contiguous_and_survive_restart(self, log, tmp_path):
        for i in range(3):
            log.append("p1", EventKind.DEV_MSG, f"m {i}")
        reloaded = EventLog(tmp_path)
        event = reloaded.append("p1", EventKind.DEV_MSG, "after restart")
        assert event.event_id == "00000003"
        assert [e.event_id for e in reloaded.events("p1")] == [
            "00000000", "00000001", "00000002", "00000003"]

    def test_unknown_project_rejected(self, log):
        from chatwright.events import UnknownProject

        with pytest.raises(UnknownProject):
            log.append("ghost", EventKind.DEV_MSG, "x")


class TestQuery:
    def test_bulk_insert_and_range_query(self, log):
        inserted = []
        for i in range(2000):
            event = log.append("p1", EventKind.TEST_MSG, f"m{i}",
                               timestamp=1000.0 + i)
            inserted.append(event.event_id)
        got = log.events("p1", kinds={EventKind.TEST_MSG},
                         start=1500.0, end=1999.0)
        assert [e.event_id for e in got] == inserted[500:1000]

    def test_kind_filter(self, log):
        log.append("p1", EventKind.DEV_MSG, "a")
        log.append("p1", EventKind.REP_CLICK, "LOGIC")
        log.append("p1", EventKind.DEV_MSG, "b")
        assert len(log.events("p1", kinds={EventKind.DEV_MSG})) == 2


class TestComputeStats:
    def test_hand_checked_mean_and_population_sd(self, log):
        for n in (10, 20, 33):
            log.append("p1", EventKind.DEV_MSG, words(n))
        stats = compute_stats({"p1": log.events("p1")}, "project:p1")
        assert stats.message_counts["DEV_MSG"] == 3
        assert stats.word_mean["DEV_MSG"] == pytest.approx(21.0)
        assert stats.word_sd["DEV_MSG"] == pytest.approx(
            math.sqrt(266 / 3), abs=1e-9)

    def test_empty_log_counts_zero_means_absent(self, log):
        stats = compute_stats({"p1": []}, "project:p1")
        assert all(count == 0 for count in stats.message_counts.values())
        assert stats.word_mean == {} and stats.word_sd == {}
        assert stats.direct_edit_count == 0 and stats.tab_click_count == 0
        assert all(count == 0 for count in stats.pair_counts.values())

    def test_consecutive_dev_pairs(self, log):
        # Two runs of three DEV_MSG in a row -> 4 dev->dev pairs; the
        # separating test message contributes dev->test and test->dev.
        for _ in range(2):
            for i in range(3):
                log.append("p1", EventKind.DEV_MSG, "m")
            log.append("p1", EventKind.TEST_MSG, "t")
        stats = compute_stats({"p1": log.events("p1")}, "project:p1")
        assert stats.pair_counts["DEV_MSG->DEV_MSG"] == 4
        assert stats.pair_counts["DEV_MSG->TEST_MSG"] == 2
        assert stats.pair_counts["TEST_MSG->DEV_MSG"] == 1

    def test_pairs_do_not_cross_projects(self, log):
        log.append("p1", EventKind.DEV_MSG, "a")
        log.append("p2", EventKind.DEV_MSG, "b")
        stats = compute_stats(
            {"p1": log.events("p1"), "p2": log.events("p2")}, "global")
        assert stats.pair_counts["DEV_MSG->DEV_MSG"] == 0

    def test_non_pair_kinds_not_in_stream(self, log):
        log.append("p1", EventKind.DEV_MSG, "a")
        log.append("p1", EventKind.REP_EDIT, "LOGIC\n1. x")
        log.append("p1", EventKind.DEV_MSG, "b")
        stats = compute_stats({"p1": log.events("p1")}, "project:p1")
        # The edit is invisible to the dev->dev adjacency.
        assert stats.pair_counts["DEV_MSG->DEV_MSG"] == 1

    def test_matches_independent_recomputation(self, log, tmp_path):
        mixed = [
            (EventKind.DEV_MSG, words(4)), (EventKind.DEV_MSG, words(9)),
            (EventKind.REP_CLICK, "LOGIC"), (EventKind.TEST_MSG, words(2)),
            (EventKind.TEST_MSG, words(7)), (EventKind.REP_EDIT, "LOGIC\n1. a"),
            (EventKind.DEV_MSG, words(5)), (EventKind.REP_CLICK, "KB"),
            (EventKind.RESTART, ""), (EventKind.TEST_MSG, words(1)),
        ]
        for kind, payload in mixed:
            log.append("p1", kind, payload)
        stats = compute_stats({"p1": log.events("p1")}, "project:p1")
        expected = brute_force_stats(tmp_path / "projects" / "p1" / "events.log")
        assert stats.message_counts == expected["counts"]
        assert stats.word_mean == pytest.approx(expected["mean"])
        assert stats.word_sd == pytest.approx(expected["sd"])
        assert stats.pair_counts == expected["pairs"]
        assert stats.direct_edit_count == expected["counts"]["REP_EDIT"]
        assert stats.tab_click_count == expected["counts"]["REP_CLICK"]


def brute_force_stats(log_file: Path) -> dict:
    """Independent recomputation straight from the persisted JSONL file."""
    kinds = ["DEV_MSG", "DEV_RESP", "TEST_MSG", "TEST_RESP", "REP_EDIT",
             "REP_CLICK", "RESTART", "VERSION_SELECT"]
    counts = {k: 0 for k in kinds}
    words_by_kind: dict[str, list[int]] = {k: [] for k in kinds}
    stream = []
    for line in log_file.read_text("utf-8").splitlines():
        raw = json.loads(line)
        kind = raw["kind"]
        counts[kind] += 1
        words_by_kind[kind].append(len(raw["payload"].split()))
        if kind in ("DEV_MSG", "REP_CLICK", "TEST_MSG"):
            stream.append(kind)
    mean = {}
    sd = {}
    for kind, xs in words_by_kind.items():
        if xs:
            m = sum(xs) / len(xs)
            mean[kind] = m
            sd[kind] = math.sqrt(sum((x - m) ** 2 for x in xs) / len(xs))
    pair_kinds = ("DEV_MSG", "REP_CLICK", "TEST_MSG")
    pairs = {f"{a}->{b}": 0 for a in pair_kinds for b in pair_kinds}
    for a, b in zip(stream, stream[1:]):
        pairs[f"{a}->{b}"] += 1
    return {"counts": counts, "mean": mean, "sd": sd, "pairs": pairs}
