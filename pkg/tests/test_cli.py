from __future__ import annotations

import json

from srlengine.cli import main


def test_config_dump_prints_document(capsys, cfg):
    assert main(["config"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc == cfg.to_document()


def test_simulate_parse_metrics_round_trip(tmp_path, capsys):
    events_path = tmp_path / "events.jsonl"
    assert main(["simulate", "--profile", "average", "--seed", "4",
                 "--out", str(events_path)]) == 0
    lines = events_path.read_text().strip().splitlines()
    assert lines

    processes_path = tmp_path / "processes.jsonl"
    actions_path = tmp_path / "actions.jsonl"
    assert main(["parse", "--events", str(events_path),
                 "--out", str(processes_path),
                 "--actions-out", str(actions_path)]) == 0
    processes = [json.loads(line) for line in
                 processes_path.read_text().strip().splitlines()]
    assert processes

    # a reference that mirrors the parsed output scores a perfect match rate
    reference_path = tmp_path / "reference.csv"
    with open(reference_path, "w", encoding="utf-8") as fh:
        fh.write("session_id,label,start_ms,end_ms,source\n")
        cursor = {}
        for p in sorted(processes, key=lambda p: (p["session_id"], p["start"])):
            start = max(p["start"], cursor.get(p["session_id"], 0))
            end = max(p["end"], start)
            if end <= cursor.get(p["session_id"], 0):
                continue
            cursor[p["session_id"]] = end
            fh.write(f"{p['session_id']},{p['label']},{start},{end},synthetic\n")

    capsys.readouterr()
    assert main(["metrics", "--reference", str(reference_path),
                 "--parsed", str(processes_path),
                 "--actions", str(actions_path), "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["segments"] > 0
    assert 0.0 <= report["match_rate"] <= 1.0
    assert "trace_coverage" in report


def test_metrics_table_output(tmp_path, capsys):
    reference_path = tmp_path / "ref.csv"
    reference_path.write_text(
        "session_id,label,start_ms,end_ms,source\n"
        "s1,MC.Monitoring,0,5000,synthetic\n", encoding="utf-8")
    parsed_path = tmp_path / "parsed.jsonl"
    parsed_path.write_text(json.dumps({
        "session_id": "s1", "label": "MC.Monitoring", "rule_id": "MC.M.1",
        "start": 1000, "end": 1000, "matched_action_ids": ["s1:a1"],
    }) + "\n", encoding="utf-8")
    assert main(["metrics", "--reference", str(reference_path),
                 "--parsed", str(parsed_path)]) == 0
    out = capsys.readouterr().out
    assert "match_rate: 1.0000" in out
