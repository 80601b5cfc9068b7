"""Replays the shipped session through the CLI twice and checks the summary."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def run(cli, *args, stdout=None):
    subprocess.run([cli, *args], check=True, stdout=stdout)


def summary(cli, data, workdir):
    replay = data / "replay"
    log = workdir / "run.jsonl"
    common = ["--problems", str(replay / "problems"), "--replay", str(replay / "session.jsonl")]
    run(cli, "generate", "--strategy", "instruction", "--k", "50", "--out", str(log), *common)
    run(cli, "repair", "--log", str(log), "--detail", "cause", "--max-candidates", "2",
        "--max-iterations", "3", *common)
    out = workdir / "summary.json"
    with out.open("wb") as f:
        run(cli, "report", "--log", str(log), "--format", "json", stdout=f)
    return out.read_bytes()


def main():
    cli, data = sys.argv[1], pathlib.Path(sys.argv[2])
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        first = summary(cli, data, pathlib.Path(a))
        second = summary(cli, data, pathlib.Path(b))
    failures = []
    if first != second:
        failures.append("repeated runs produced different summaries")
    expected = (data / "replay" / "expected_summary.json").read_bytes()
    if first != expected:
        failures.append("summary differs from expected_summary.json")
    schema = json.loads((data / "schema" / "report.schema.json").read_text())
    try:
        jsonschema.validate(json.loads(first), schema)
    except jsonschema.ValidationError as e:
        failures.append(f"schema: {e.message}")
    for f in failures:
        print("FAIL:", f)
    if not failures:
        print("replay summary reproduced,", len(first), "bytes")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
