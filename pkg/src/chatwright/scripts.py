"""Session scripts: scripted builder/tester sessions for headless replay.

A script is a line-oriented fixture; fixtures live in the repo and get
read by reviewers, so the format favors plain text diffs:

    # comment
    UTTER <dev-bot utterance>
    EDIT <KB|LOGIC|VARIABLES> <<END
    ...full replacement component text...
    END
    TEST <test-bot message>
    CHECKOUT <version index>
    RESTART
    EXPECT_LOGIC_CONTAINS <substring of the current logic text>
    EXPECT_STATE <name>=<value>

EXPECT steps check the current project/session context; failures are
collected (the run continues) and make the exit status 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from chatwright.diffing import RenderStyle, render_delta
from chatwright.representation import ComponentId, serialize_component
from chatwright.service import Project, Workbench

OPS = ("UTTER", "EDIT", "TEST", "CHECKOUT", "RESTART",
       "EXPECT_LOGIC_CONTAINS", "EXPECT_STATE")


class ScriptError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class Step:
    line: int
    op: str
    arg: str = ""
    component: ComponentId | None = None


def parse_script(text: str) -> list[Step]:
    steps: list[Step] = []
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        line_no = i + 1
        line = lines[i].rstrip()
        i += 1
        if not line or line.lstrip().startswith("#"):
            continue
        op, _, rest = line.partition(" ")
        rest = rest.strip()
        if op not in OPS:
            raise ScriptError(line_no, f"unknown step {op!r}")

        if op == "EDIT":
            component_name, _, marker = rest.partition(" ")
            try:
                component = ComponentId(component_name)
            except ValueError:
                raise ScriptError(line_no,
                                  f"unknown component {component_name!r}") from None
            marker = marker.strip()
            if not marker.startswith("<<"):
                raise ScriptError(line_no, "EDIT needs a heredoc, e.g. '<<END'")
            terminator = marker[2:] or "END"
            body: list[str] = []
            while i < len(lines) and lines[i].rstrip() != terminator:
                body.append(lines[i])
                i += 1
            if i >= len(lines):
                raise ScriptError(line_no, f"unterminated heredoc {terminator!r}")
            i += 1
            steps.append(Step(line_no, op, "\n".join(body), component))
        elif op in ("UTTER", "TEST", "EXPECT_LOGIC_CONTAINS"):
            if not rest:
                raise ScriptError(line_no, f"{op} needs text")
            steps.append(Step(line_no, op, rest))
        elif op == "EXPECT_STATE":
            if "=" not in rest:
                raise ScriptError(line_no, "EXPECT_STATE needs name=value")
            steps.append(Step(line_no, op, rest))
        elif op == "CHECKOUT":
            if not rest.isdigit():
                raise ScriptError(line_no, "CHECKOUT needs a version index")
            steps.append(Step(line_no, op, rest))
        else:  # RESTART
            steps.append(Step(line_no, op))
    return steps


@dataclass
class ScriptReport:
    lines: list[str] = field(default_factory=list)
    failures: int = 0

    @property
    def exit_status(self) -> int:
        return 1 if self.failures else 0

    def text(self) -> str:
        return "\n".join(self.lines) + ("\n" if self.lines else "")


class ScriptRunner:
    def __init__(self, workbench: Workbench, project: Project):
        self.workbench = workbench
        self.project = project
        self._session_id: str | None = None

    def _session(self) -> str:
        if self._session_id is None:
            session = self.workbench.start_session(self.project.id)
            self._session_id = session.session_id
        return self._session_id

    def run(self, steps: list[Step]) -> ScriptReport:
        report = ScriptReport()
        for n, step in enumerate(steps, start=1):
            prefix = f"[{n:03d}] {step.op}"
            if step.op == "UTTER":
                resp = self.workbench.utter(self.project.id, step.arg)
                report.lines.append(f"{prefix} {step.arg} -> v{resp.new_version_index}")
                report.lines.extend(
                    "      " + line
                    for line in render_delta(resp.delta, RenderStyle.PLAIN).splitlines())
            elif step.op == "EDIT":
                assert step.component is not None
                resp = self.workbench.direct_edit(
                    self.project.id, step.component, step.arg)
                report.lines.append(
                    f"{prefix} {step.component.value} -> v{resp.new_version_index}")
                report.lines.extend(
                    "      " + line
                    for line in render_delta(resp.delta, RenderStyle.PLAIN).splitlines())
            elif step.op == "TEST":
                reply = self.workbench.send_test_message(self._session(), step.arg)
                first = reply.splitlines()[0] if reply else ""
                report.lines.append(f"{prefix} {step.arg} -> {first}")
            elif step.op == "CHECKOUT":
                self.workbench.checkout(self.project.id, int(step.arg))
                report.lines.append(f"{prefix} -> v{step.arg}")
            elif step.op == "RESTART":
                session = self.workbench.restart_session(self._session())
                self._session_id = session.session_id
                report.lines.append(f"{prefix} -> fresh session")
            elif step.op == "EXPECT_LOGIC_CONTAINS":
                _, rep, _ = self.workbench.representation(self.project.id)
                logic_text = serialize_component(ComponentId.LOGIC, rep.logic)
                ok = step.arg in logic_text
                report.lines.append(f"{prefix} {step.arg} {'ok' if ok else 'FAIL'}")
                report.failures += 0 if ok else 1
            elif step.op == "EXPECT_STATE":
                name, _, expected = step.arg.partition("=")
                session = self.workbench.sessions.get(self._session())
                actual = session.variable_state.get(name)
                ok = actual == expected
                suffix = "ok" if ok else f"FAIL (actual {actual!r})"
                report.lines.append(f"{prefix} {step.arg} {suffix}")
                report.failures += 0 if ok else 1
        return report


def run_script(workbench: Workbench, project: Project,
               path: str | Path) -> ScriptReport:
    steps = parse_script(Path(path).read_text("utf-8"))
    return ScriptRunner(workbench, project).run(steps)
