#!/usr/bin/env python3
"""Rebuilds solutions.jsonl by running every fixture candidate through
`loopinv verify`. Usage: make_solutions.py [path/to/loopinv]"""
import json
import os
import re
import subprocess
import sys

here = os.path.dirname(os.path.abspath(__file__))
root = os.path.join(here, "..", "..")
binary = sys.argv[1] if len(sys.argv) > 1 else os.path.join(root, "build", "tools", "loopinv")
with open(os.path.join(root, "data", "candidates.json")) as f:
    candidates = json.load(f)

lines = []
for pid in sorted(candidates):
    for body in candidates[pid]:
        if body in ("true", "false"):
            continue
        out = subprocess.run(
            [binary, "verify", "--problem", os.path.join(here, pid + ".sl"), "--invariant", "-"],
            input=body, capture_output=True, text=True, check=True).stdout.strip()
        entry = {"problem": pid, "invariant": body}
        if out == "Valid":
            entry["status"] = "valid"
        else:
            m = re.match(r"Violated\((\w+)\)", out)
            if not m:
                raise SystemExit(f"{pid}: unexpected verdict {out!r}")
            entry.update(status="violated", condition=m.group(1).lower(),
                         reason=f"fails {m.group(1).lower()}")
        lines.append(json.dumps(entry, sort_keys=True))

with open(os.path.join(here, "solutions.jsonl"), "w") as f:
    f.write("\n".join(lines) + "\n")
