#!/usr/bin/env python3
"""Minimal evaluator for the line protocol.

Reads one JSON request per line, answers with {"id", "value"}. The value
function here is v(x) = x0 * x1 + sin(x2), which has a single pairwise
interaction plus a main effect.
"""
import json
import math
import sys

for line in sys.stdin:
    if not line.strip():
        continue
    req = json.loads(line)
    x = [s if bit == "1" else b for s, b, bit in zip(req["sample"], req["baseline"], req["mask"])]
    value = x[0] * x[1] + math.sin(x[2])
    sys.stdout.write(json.dumps({"id": req["id"], "value": value}) + "\n")
    sys.stdout.flush()
