#!/usr/bin/env python3
# Copyright 2026 The VisRef Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the synthetic EMB1 and JSON fixtures used by the test suites.

Usage: tools/make_fixtures.py [output_dir]   (default: tests/fixtures)
"""

import json
import math
import struct
import sys
from pathlib import Path

import numpy as np


def write_emb1(path: Path, m) -> None:
    m = np.asarray(m, dtype="<f4")
    assert m.ndim == 2 and np.all(np.isfinite(m))
    with open(path, "wb") as f:
        f.write(struct.pack("<4sII", b"EMB1", m.shape[0], m.shape[1]))
        f.write(np.ascontiguousarray(m).tobytes())


def write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def entropy(p) -> float:
    return -sum(x * math.log(x) for x in p if x > 0)


def distribution_with_entropy(target: float, labels) -> dict:
    """One dominant label, the rest uniform; bisect on the dominant mass."""
    k = len(labels)
    assert 0 < target < math.log(k)

    def h(top):
        rest = (1 - top) / (k - 1)
        return entropy([top] + [rest] * (k - 1))

    lo, hi = 1.0 / k, 1.0  # h decreases from log k to 0 on this interval
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) > target:
            lo = mid
        else:
            hi = mid
    top = 0.5 * (lo + hi)
    rest = (1 - top) / (k - 1)
    probs = [top] + [rest] * (k - 1)
    return dict(zip(labels, probs))


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "tests" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20260418)

    # Orthonormal basis: V = I3, Z = e1, so A = (1, 0, 0)^T.
    write_emb1(out / "orthonormal_visual.emb", np.eye(3))
    write_emb1(out / "orthonormal_text.emb", np.eye(3)[:1])

    # Seeded small instance: N=8, d=4, T=3.
    write_emb1(out / "seeded_visual.emb", rng.uniform(-1, 1, size=(8, 4)))
    write_emb1(out / "seeded_text.emb", rng.uniform(-1, 1, size=(3, 4)))

    # Mutually orthogonal factor rows: V = diag(1, 2, 3), Z = I3.
    write_emb1(out / "orthogonal_visual.emb", np.diag([1.0, 2.0, 3.0]))
    write_emb1(out / "orthogonal_text.emb", np.eye(3))

    # Token 1 duplicates token 0.
    dup = rng.uniform(-1, 1, size=(4, 5))
    dup[1] = dup[0]
    write_emb1(out / "duplicate_visual.emb", dup)
    write_emb1(out / "duplicate_text.emb", rng.uniform(-1, 1, size=(3, 5)))

    write_json(out / "dist_onehot.json", {"schema": "visref-dist/1", "probabilities": {"A": 1.0}})
    write_json(out / "dist_uniform4.json",
               {"schema": "visref-dist/1", "probabilities": {k: 0.25 for k in "ABCD"}})
    write_json(out / "dist_skewed.json", {"schema": "visref-dist/1", "probabilities": {"A": 0.9, "B": 0.1}})
    write_json(out / "dist_samples.json", {"schema": "visref-dist/1", "samples": ["A", "B", "A", "A"]})

    labels = ["A", "B", "C", "D", "E"]
    outcomes = [
        {"chain_id": i, "answer": labels[int(rng.integers(0, 5))], "tokens_used": int(rng.integers(50, 800))}
        for i in range(1000)
    ]
    write_json(out / "outcomes_1000.json", {"schema": "visref-outcomes/1", "outcomes": outcomes})
    write_json(out / "outcomes_small.json", {"schema": "visref-outcomes/1", "outcomes": [
        {"chain_id": 1, "answer": "A", "tokens_used": 400},
        {"chain_id": 2, "answer": "B", "tokens_used": 400},
        {"chain_id": 3, "answer": "B", "tokens_used": 400},
    ]})

    write_json(out / "policy_default.json", {"schema": "visref-policy/1", "delta_entropy": 0.25, "k_max": 10})

    # Recorded 3-step trace with entropies 1.2, 0.8, 0.1.
    replay = out / "replay"
    replay.mkdir(exist_ok=True)
    write_emb1(replay / "visual.emb", rng.uniform(-1, 1, size=(20, 8)))
    steps = []
    for k, h in enumerate([1.2, 0.8, 0.1], start=1):
        write_emb1(replay / f"step{k}.emb", rng.uniform(-1, 1, size=(4, 8)))
        dist = distribution_with_entropy(h, ["A", "B", "C", "D"])
        steps.append({"text": f"step{k}.emb", "distribution": dist, "entropy": entropy(dist.values())})
    write_json(replay / "trace.json",
               {"schema": "visref-trace/1", "visual": "visual.emb", "steps": steps, "final_answer": "A"})


if __name__ == "__main__":
    main()
