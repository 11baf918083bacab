"""Command line entry points: serve, parse, metrics, simulate, config.

The configuration path comes from --config or the SRLENGINE_CONFIG
environment variable; with neither, the built-in default study applies.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import urllib.request

from .config import StudyConfig, default_config, load_config
from .metrics import evaluate, read_reference_file
from .model import RawTraceEvent
from .pipeline import run_offline
from .processes import ProcessEvent
from .simulator import ARCHETYPES, archetype_profile, generate_session, load_profile

ENV_CONFIG = "SRLENGINE_CONFIG"


def _load_config(path: str | None) -> StudyConfig:
    path = path or os.environ.get(ENV_CONFIG)
    return load_config(path) if path else default_config()


def _read_events(path: str) -> list[RawTraceEvent]:
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                events.append(RawTraceEvent.from_wire(json.loads(line)))
    return events


def _write_jsonl(path: str | None, docs) -> None:
    out = open(path, "w", encoding="utf-8") if path else sys.stdout
    try:
        for doc in docs:
            out.write(json.dumps(doc, sort_keys=True) + "\n")
    finally:
        if path:
            out.close()


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import ServiceCore, serve

    config = _load_config(args.config)
    core = ServiceCore(config, args.db)
    print(f"serving on http://{args.host}:{args.port} (db: {args.db})")
    try:
        serve(core, host=args.host, port=args.port, assets_dir=args.assets)
    except KeyboardInterrupt:
        pass
    finally:
        core.close()
    return 0


def cmd_parse(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    events = _read_events(args.events)
    sessions: dict[str, list[RawTraceEvent]] = {}
    for event in events:
        sessions.setdefault(event.session_id, []).append(event)
    processes = []
    actions = []
    for session_events in sessions.values():
        pipeline = run_offline(session_events, config, session_end=args.session_end)
        processes.extend(p.to_wire() for p in pipeline.processes)
        actions.extend(a.to_wire() for a in pipeline.actions)
    _write_jsonl(args.out, processes)
    if args.actions_out:
        _write_jsonl(args.actions_out, actions)
    print(f"parsed {len(events)} events -> {len(actions)} actions, "
          f"{len(processes)} process events", file=sys.stderr)
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    reference = read_reference_file(args.reference)
    with open(args.parsed, "r", encoding="utf-8") as fh:
        processes = [ProcessEvent.from_wire(json.loads(line))
                     for line in fh if line.strip()]
    actions = None
    if args.actions:
        from .actions import ActionRecord
        with open(args.actions, "r", encoding="utf-8") as fh:
            actions = [ActionRecord.from_wire(json.loads(line))
                       for line in fh if line.strip()]
    result = evaluate(reference, processes, actions)
    if args.format == "json":
        print(json.dumps(result.to_document(), indent=2, sort_keys=True))
    else:
        print(result.render_table(), end="")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    if args.profile in ARCHETYPES:
        profile = archetype_profile(args.profile, seed=args.seed)
    else:
        profile = load_profile(args.profile)
        if args.seed is not None:
            from dataclasses import replace
            profile = replace(profile, seed=args.seed)
    events = generate_session(profile, config)

    if args.mode == "http":
        batch, seq, sent = [], 0, 0
        for event in events:
            batch.append(event.to_wire())
            if len(batch) >= args.batch_size:
                seq += 1
                sent += _post_batch(args.url, events[0].session_id, seq, batch)
                batch = []
        if batch:
            seq += 1
            sent += _post_batch(args.url, events[0].session_id, seq, batch)
        print(f"sent {sent} events in {seq} batches to {args.url}", file=sys.stderr)
    else:
        pipeline = run_offline(events, config)
        print(f"simulated {len(events)} events -> {len(pipeline.actions)} actions, "
              f"{len(pipeline.processes)} process events", file=sys.stderr)
        if args.out:
            _write_jsonl(args.out, (e.to_wire() for e in events))
        return 0
    if args.out:
        _write_jsonl(args.out, (e.to_wire() for e in events))
    return 0


def _post_batch(url: str, session_id: str, sequence: int, events: list[dict]) -> int:
    body = json.dumps({
        "session_id": session_id,
        "client_sequence": sequence,
        "events": events,
    }).encode("utf-8")
    request = urllib.request.Request(
        url.rstrip("/") + "/api/events", data=body,
        headers={"Content-Type": "application/json"}, method="POST",
    )
    with urllib.request.urlopen(request) as response:
        ack = json.loads(response.read())
    return int(ack.get("accepted_count", 0))


def cmd_config(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    print(json.dumps(config.to_document(), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="srlengine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the ingest/scaffold/log HTTP service")
    p.add_argument("--config", help=f"config document path (or ${ENV_CONFIG})")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8430)
    p.add_argument("--db", default="srlengine.db")
    p.add_argument("--assets", help="static asset directory served at /app/")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("parse", help="offline parse: raw events file -> process events")
    p.add_argument("--events", required=True, help="raw events (jsonl)")
    p.add_argument("--config")
    p.add_argument("--out", help="process events output (jsonl; default stdout)")
    p.add_argument("--actions-out", help="also write action records (jsonl)")
    p.add_argument("--session-end", type=int, help="session end in ms for trailing gaps")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("metrics", help="agreement report: reference + parsed")
    p.add_argument("--reference", required=True, help="reference segments (csv/tsv)")
    p.add_argument("--parsed", required=True, help="process events (jsonl)")
    p.add_argument("--actions", help="action records for trace coverage (jsonl)")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("simulate", help="generate a deterministic synthetic session")
    p.add_argument("--profile", default="average",
                   help="archetype (good/average/poor) or profile fixture path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("inprocess", "http"), default="inprocess")
    p.add_argument("--url", default="http://127.0.0.1:8430")
    p.add_argument("--batch-size", type=int, default=200)
    p.add_argument("--config")
    p.add_argument("--out", help="write generated events (jsonl)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("config", help="print the effective configuration document")
    p.add_argument("--config")
    p.set_defaults(func=cmd_config)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
