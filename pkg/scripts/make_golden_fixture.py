"""Regenerates the golden observation-stream fixture.

The fixture pins, for one deterministic stream, the snapshot the service
must report after every observation. The Python service test replays it
over HTTP; the browser client's tests drive their session state from the
same file. Run from the repository root:

    python scripts/make_golden_fixture.py
"""

import json
from pathlib import Path

from evstream import BlockDesign, EvidenceProcess, model_from_config

CONFIG = {
    "n_a": 1,
    "n_b": 1,
    "alpha": 0.05,
    "model": {
        "type": "restricted",
        "divergence": "difference",
        "delta": 0.00318,
        "control_rate": 0.0001,
    },
}

# one/one blocks; the fifth group-b event crosses 1/alpha = 20
BLOCKS = [(0, 0), (0, 1), (0, 1), (0, 0), (0, 1), (0, 1), (0, 1)]


def main() -> None:
    process = EvidenceProcess.start(
        BlockDesign(CONFIG["n_a"], CONFIG["n_b"]),
        model_from_config(CONFIG["model"]),
    )
    observations = []
    snapshots = []
    for y_a, y_b in BLOCKS:
        for group, y in (("a", y_a), ("b", y_b)):
            observations.append({"group": group, "y": y})
            process = process.observe(group, y)
            decision = process.decide(CONFIG["alpha"])
            snapshots.append(
                {
                    "e_value": decision.e_value,
                    "log_e": process.log_e,
                    "blocks_completed": process.blocks_completed,
                    "pending": {
                        "a": len(process.pending_a),
                        "b": len(process.pending_b),
                    },
                    "reject": decision.reject,
                    "threshold": decision.threshold,
                }
            )
    assert snapshots[-1]["reject"], "fixture must end at the stop signal"
    assert not any(s["reject"] for s in snapshots[:-1])

    fixture = {
        "config": CONFIG,
        "observations": observations,
        "snapshots": snapshots,
    }
    payload = json.dumps(fixture, indent=2, sort_keys=True) + "\n"
    root = Path(__file__).resolve().parent.parent
    for target in (
        root / "tests" / "data" / "golden_stream.json",
        root / "frontend" / "test" / "fixtures" / "golden_stream.json",
    ):
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(payload)
        print(f"wrote {target}")


if __name__ == "__main__":
    main()
