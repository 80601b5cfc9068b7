#!/usr/bin/env python3
"""Writes script.json: canned model answers keyed by request tag.

The session file next to it is recorded from this script with
`loopinv generate --script script.json --record session.jsonl` followed by
`loopinv repair ...`; see regenerate.sh.
"""
import json
import os

K = 50


def fun(params, body):
    return f"(define-fun inv_fun {params} Bool {body})"


XY = "((x Int) (y Int))"
X = "((x Int))"


def fig1():
    wrong = [
        fun(XY, "(>= x y)"),
        "code Bool (>= x 1)",
        "The invariant is (and (>= x 0) (>= y 0))",
        fun(XY, "(and (>= x y) (>= z 0))"),
        "I cannot determine an invariant for this loop.",
        fun("((a Int) (b Int))", "(>= a b)"),
        "```smt2\n" + fun(XY, "(= y 0)") + "\n```",
        fun(XY, "(and (>= x 1) (>= y 0)"),
    ]
    out = [wrong[i % len(wrong)] for i in range(K)]
    valid = "```lisp\n" + fun(XY, "(and (>= x 1) (>= y 0) (>= x y))") + "\n```"
    out[12] = valid
    out[41] = valid
    return out


def count_down():
    wrong = [fun(X, "(= x 5)"), fun(X, "(<= x 5)"), "true", "(> x 0)"]
    out = [wrong[(i - 1) % len(wrong)] for i in range(K)]
    for i in (0, 7, 20):
        out[i] = fun(X, "(and (>= x 0) (<= x 5))")
    return out


def transfer():
    wrong = [
        fun(XY, "(= (+ x y) 3)"),
        fun(XY, "(= y 0)"),
        fun(XY, "(>= x 0)"),
        "true",
        "Here is my answer:\n(and (<= x 3) (>= y 0))",
    ]
    return [wrong[i % len(wrong)] for i in range(K)]


script = {
    "p02_fig1/instruction": fig1(),
    "p04_count_down/instruction": count_down(),
    "p11_transfer/instruction": transfer(),
    # fig1, seed 0 never gets repaired within three attempts.
    "p02_fig1/instruction/0/repair/1": [fun(XY, "(and (>= x y) (>= z 0))")],
    "p02_fig1/instruction/0/repair/2": [fun(XY, "(>= x 0)")],
    "p02_fig1/instruction/0/repair/3": [fun(XY, "(= x 1)")],
    "p02_fig1/instruction/1/repair/1": [fun(XY, "(and (>= x 1) (>= y 0) (>= x y))")],
    "p04_count_down/instruction/1/repair/1": [fun(X, "(>= x 0)")],
    "p04_count_down/instruction/2/repair/1": [fun(X, "(> x 0)")],
    "p04_count_down/instruction/2/repair/2": [fun(X, "(and (>= x 0) (<= x 5))")],
    # transfer, seed 0: I1 -> I2 -> I1 is cut off as a cycle.
    "p11_transfer/instruction/0/repair/1": [fun(XY, "(>= x 0)")],
    "p11_transfer/instruction/0/repair/2": [fun(XY, "(= (+ x y) 3)")],
    "p11_transfer/instruction/1/repair/1": [fun(XY, "(and (= (+ x y) 3) (>= x 0))")],
}

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "script.json"), "w") as f:
    json.dump(script, f, indent=1, sort_keys=True)
    f.write("\n")
