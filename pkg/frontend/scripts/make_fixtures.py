"""Regenerate the committed UI test fixtures from a live service session.

Drives the conflict scenario through the real service: replays the
authoring transcript, lets a conflict arise, deletes a zone so a rule
gets disabled, and dumps the resulting event stream.  Run from the
repository root:

    python3 frontend/scripts/make_fixtures.py
"""

import json
import pathlib

from fastapi.testclient import TestClient

from workcell.scenario import fixture_dir
from workcell.service import ServiceConfig, create_app

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main() -> None:
    client = TestClient(create_app(ServiceConfig(auto_tick=False,
                                                 stepped=True)))
    session_id = client.post("/sessions", json={"scenario": "conflict"}) \
        .json()["session_id"]

    transcript = fixture_dir("transcripts") / "conflict.jsonl"
    with client.websocket_connect(f"/sessions/{session_id}/ws") as ws:
        ws.receive_json()  # hello
        ws.receive_json()  # snapshot
        for line in transcript.read_text().splitlines():
            ws.send_json(json.loads(line))
            ws.receive_json()  # ack
    client.post(f"/sessions/{session_id}/tick", json={"count": 1})

    with client.websocket_connect(f"/sessions/{session_id}/ws") as ws:
        ws.receive_json()
        ws.receive_json()
        ws.send_json({"kind": "DeleteZone", "request_id": "drop-blue",
                      "zone_id": "blue"})
        ws.receive_json()
    client.post(f"/sessions/{session_id}/tick", json={"count": 2})

    events = client.get(f"/sessions/{session_id}/events").json()
    catalog = client.get(f"/sessions/{session_id}/catalog").json()

    # a sorting session provides the catalog the wizard tests pick from
    sorting_id = client.post("/sessions", json={"scenario": "sorting"}) \
        .json()["session_id"]
    sorting_transcript = fixture_dir("transcripts") / "sorting.jsonl"
    with client.websocket_connect(f"/sessions/{sorting_id}/ws") as ws:
        ws.receive_json()
        ws.receive_json()
        for line in sorting_transcript.read_text().splitlines():
            frame = json.loads(line)
            if frame["kind"] == "CreateZone":
                ws.send_json(frame)
                ws.receive_json()
    client.post(f"/sessions/{sorting_id}/tick", json={"count": 1})
    sorting_catalog = client.get(f"/sessions/{sorting_id}/catalog").json()

    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "session_events.json").write_text(
        json.dumps(events, indent=2, sort_keys=True) + "\n")
    (OUT / "catalog.json").write_text(
        json.dumps(catalog, indent=2, sort_keys=True) + "\n")
    (OUT / "catalog_sorting.json").write_text(
        json.dumps(sorting_catalog, indent=2, sort_keys=True) + "\n")
    print(f"wrote {OUT / 'session_events.json'}"
          f" ({len(events['events'])} events)")
    print(f"wrote {OUT / 'catalog.json'}")
    print(f"wrote {OUT / 'catalog_sorting.json'}")


if __name__ == "__main__":
    main()
