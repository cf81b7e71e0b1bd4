"""Headless command-line driver.

Shares the service layer with the HTTP API, so a script replayed here and
the same steps driven over HTTP produce identical version history.

Exit codes: 0 success, 1 expectation failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from chatwright import __version__
from chatwright.config import ConfigError, build_provider, load_config
from chatwright.diffing import RenderStyle, diff_representation, render_delta
from chatwright.representation import serialize_document
from chatwright.scripts import ScriptError, run_script
from chatwright.service import Workbench
from chatwright.versions import UnknownProject, UnknownVersion

USAGE_ERROR = 2


def _build_workbench(args) -> Workbench:
    cfg = load_config(
        args.config,
        data_dir=args.data_dir,
        provider=args.provider,
        cassette=args.cassette,
        mock_policy=args.mock_policy,
        mock_script=args.mock_script,
    )
    return Workbench(cfg.data_dir, build_provider(cfg))


def _cmd_run(args) -> int:
    workbench = _build_workbench(args)
    try:
        project = workbench.find_project(args.project)
    except UnknownProject:
        project = workbench.create_project(
            "dev", args.template, args.project)
    try:
        report = run_script(workbench, project, args.script)
    except ScriptError as exc:
        print(f"script error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FileNotFoundError as exc:
        print(f"script error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    if args.format == "json":
        print(json.dumps({
            "project": project.id,
            "failures": report.failures,
            "lines": report.lines,
        }, indent=2))
    else:
        sys.stdout.write(report.text())
    return report.exit_status


def _cmd_show(args) -> int:
    workbench = _build_workbench(args)
    try:
        project = workbench.find_project(args.project)
    except UnknownProject:
        print(f"unknown project {args.project!r}", file=sys.stderr)
        return USAGE_ERROR

    what = args.what
    try:
        if what == "rep":
            _, rep, _ = workbench.representation(project.id)
            out = serialize_document(rep)
            print(json.dumps({"document": out}) if args.format == "json"
                  else out, end="")
        elif what == "versions":
            infos = workbench.versions(project.id)
            if args.format == "json":
                print(json.dumps([
                    {"index": v.index, "provenance": v.provenance.kind.value,
                     "event_id": v.provenance.event_id,
                     "created_at": v.created_at}
                    for v in infos], indent=2))
            else:
                for v in infos:
                    print(f"v{v.index}  {v.provenance.kind.value}")
        elif what == "stats":
            stats = workbench.stats(f"project:{project.id}")
            if args.format == "json":
                print(json.dumps(asdict(stats), indent=2))
            else:
                for kind, count in sorted(stats.message_counts.items()):
                    if count:
                        print(f"{kind:15} {count}")
                for pair, count in sorted(stats.pair_counts.items()):
                    if count:
                        print(f"{pair:28} {count}")
        elif what == "diff":
            old = workbench.store.snapshot(project.id, args.old)
            new = workbench.store.snapshot(project.id, args.new)
            delta = diff_representation(old, new)
            style = RenderStyle.ANSI if args.color else RenderStyle.PLAIN
            text = render_delta(delta, style)
            if args.format == "json":
                from chatwright.diffing import delta_to_json

                print(json.dumps(delta_to_json(delta), indent=2))
            elif text:
                print(text)
    except UnknownVersion as exc:
        print(f"unknown version: {exc}", file=sys.stderr)
        return USAGE_ERROR
    return 0


def _cmd_templates(args) -> int:
    workbench = _build_workbench(args)
    for t in workbench.templates():
        print(f"{t.name:12} {t.description}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from chatwright.api import create_app

    cfg = load_config(
        args.config,
        data_dir=args.data_dir,
        provider=args.provider,
        cassette=args.cassette,
        mock_policy=args.mock_policy,
        mock_script=args.mock_script,
    )
    workbench = Workbench(cfg.data_dir, build_provider(cfg))
    app = create_app(workbench, auth_token=cfg.auth_token)
    if args.ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=args.ui_dir, html=True), name="ui")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chatwright",
        description="Build chatbots by talking to a dev-bot; inspect and "
                    "edit what it understood; run the result.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--data-dir", help="project data directory")
    parser.add_argument("--provider", choices=["live", "replay", "mock"])
    parser.add_argument("--cassette", help="cassette path for replay/recording")
    parser.add_argument("--mock-policy", choices=["echo", "no-change", "scripted"])
    parser.add_argument("--mock-script", help="rule table for --mock-policy scripted")
    parser.add_argument("--format", choices=["plain", "json"], default="plain")

    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay a session script")
    run.add_argument("script")
    run.add_argument("--project", default="scripted",
                     help="project name (created when missing)")
    run.add_argument("--template", default="quiz")
    run.set_defaults(func=_cmd_run)

    show = sub.add_parser("show", help="print project state")
    show.add_argument("project", help="project name or id")
    show_sub = show.add_subparsers(dest="what", required=True)
    for simple in ("rep", "versions", "stats"):
        p = show_sub.add_parser(simple)
        p.set_defaults(func=_cmd_show, what=simple)
    diff = show_sub.add_parser("diff")
    diff.add_argument("old", type=int)
    diff.add_argument("new", type=int)
    diff.add_argument("--color", action="store_true")
    diff.set_defaults(func=_cmd_show, what="diff")

    templates = sub.add_parser("templates", help="list available templates")
    templates.set_defaults(func=_cmd_templates)

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8321)
    serve.add_argument("--ui-dir", help="serve the browser workbench from here")
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
