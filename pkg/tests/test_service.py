import json

import pytest
from fastapi.testclient import TestClient

from corpus_fixtures import build_manifest, build_model
from phonaudit.alignment import CostModel
from phonaudit.features import default_table
from phonaudit.pipeline import (
    Choice,
    compile_report,
    load_records,
    load_tasks,
    sample_tasks,
    save_tasks,
)
from phonaudit.preference_test import PreferenceTestConfig
from phonaudit.service import create_app

N_TASKS = 5


@pytest.fixture()
def campaign(tmp_path):
    """A campaign directory with 5 blind tasks, keys, and audio files."""
    cost = CostModel.from_table(default_table())
    manifest = build_manifest({"bb": 2})
    model = build_model("m1", manifest, {"bb": 2})
    tasks = sample_tasks(manifest, "bb", model, N_TASKS, seed=7, cost=cost)

    campaign_dir = tmp_path / "campaign"
    campaign_dir.mkdir()
    tasks_path = campaign_dir / "tasks.jsonl"
    keys_path = campaign_dir / "keys.jsonl"
    save_tasks(tasks, tasks_path, keys_path)

    audio_dir = tmp_path / "audio"
    audio_dir.mkdir()
    for e in manifest.entries:
        (tmp_path / e.audio_path).write_bytes(e.utterance_id.encode() * 40)

    return {
        "dir": campaign_dir,
        "tasks_path": tasks_path,
        "keys_path": keys_path,
        "audio_root": tmp_path,
        "tasks": tasks,
    }


@pytest.fixture()
def client(campaign):
    app = create_app(campaign["dir"])
    with TestClient(app) as c:
        resp = c.post("/campaign", json={
            "tasks_path": str(campaign["tasks_path"]),
            "annotators": ["ann1"],
            "audio_root": str(campaign["audio_root"]),
        })
        assert resp.status_code == 200, resp.text
        yield c


def submit(client, task_id: str, choice: str = "prefer_a", words=(),
           speeds=(1.0,)):
    return client.post("/session/ann1/submit", json={
        "task_id": task_id,
        "choice": choice,
        "influential_words": list(words),
        "timestamp": "2026-08-23T00:00:00+00:00",
        "playback_speeds": list(speeds),
    })


def test_campaign_load(client) -> None:
    resp = client.post("/campaign", json={
        "tasks_path": str(client.app.state.store.dir / "tasks.jsonl"),
        "annotators": ["ann1", "ann2"],
    })
    assert resp.status_code == 200
    body = resp.json()
    assert body["n_tasks"] == N_TASKS
    assert [s["session_id"] for s in body["sessions"]] == ["ann1", "ann2"]


def test_campaign_validation(client, campaign) -> None:
    assert client.post("/campaign", json={
        "tasks_path": str(campaign["tasks_path"]), "annotators": [],
    }).status_code == 422
    assert client.post("/campaign", json={
        "tasks_path": str(campaign["tasks_path"]),
        "annotators": ["a", "a"],
    }).status_code == 422
    assert client.post("/campaign", json={
        "tasks_path": str(campaign["dir"] / "nope.jsonl"),
        "annotators": ["a"],
    }).status_code == 422


def test_full_annotation_flow(client) -> None:
    for i in range(N_TASKS):
        body = client.get("/session/ann1/next").json()
        assert body["task"]["index"] == i
        assert body["task"]["total"] == N_TASKS
        assert body["record"] is None
        choice = "prefer_a" if i % 2 == 0 else "tie_good"
        words = (0,) if choice == "prefer_a" else ()
        resp = submit(client, body["task"]["task_id"], choice, words)
        assert resp.status_code == 200
        assert resp.json()["index"] == i + 1

    assert client.get("/session/ann1/next").status_code == 409
    progress = client.get("/session/ann1/progress").json()
    assert progress["complete"] is True
    assert progress["submitted"] == N_TASKS


def test_fresh_session_starts_at_first_task(client, campaign) -> None:
    body = client.get("/session/ann1/next").json()
    assert body["task"]["task_id"] == campaign["tasks"][0].task_id
    assert body["record"] is None


def test_back_navigation_returns_saved_record(client) -> None:
    first = client.get("/session/ann1/next").json()["task"]
    submit(client, first["task_id"], "prefer_b")
    second = client.get("/session/ann1/next").json()["task"]
    assert second["task_id"] != first["task_id"]

    revisited = client.get("/session/ann1/next", params={"index": 0}).json()
    assert revisited["task"]["task_id"] == first["task_id"]
    assert revisited["record"]["choice"] == "prefer_b"


def test_resubmission_overwrites_without_advancing(client) -> None:
    first = client.get("/session/ann1/next").json()["task"]
    submit(client, first["task_id"], "prefer_b")
    assert client.get("/session/ann1/progress").json()["index"] == 1

    resp = submit(client, first["task_id"], "tie_poor")
    assert resp.status_code == 200
    assert resp.json()["index"] == 1  # cursor unchanged
    revisited = client.get("/session/ann1/next", params={"index": 0}).json()
    assert revisited["record"]["choice"] == "tie_poor"


def test_identical_resubmission_is_idempotent(client, campaign) -> None:
    first = client.get("/session/ann1/next").json()["task"]
    submit(client, first["task_id"], "prefer_a", (1,))
    submit(client, first["task_id"], "prefer_a", (1,))
    rows = [json.loads(line) for line in
            (campaign["dir"] / "records.jsonl").read_text().splitlines()]
    assert len([r for r in rows if r["task_id"] == first["task_id"]]) == 1


def test_submit_future_task_is_stale(client, campaign) -> None:
    future = campaign["tasks"][3].task_id
    assert submit(client, future).status_code == 409


def test_unknown_task_and_session(client) -> None:
    assert submit(client, "ghost").status_code == 404
    assert client.get("/session/nobody/next").status_code == 404
    assert client.get("/session/nobody/progress").status_code == 404


def test_index_beyond_cursor_rejected(client) -> None:
    assert client.get("/session/ann1/next",
                      params={"index": 3}).status_code == 409
    assert client.get("/session/ann1/next",
                      params={"index": -1}).status_code == 409


def test_invalid_choice_rejected(client) -> None:
    task = client.get("/session/ann1/next").json()["task"]
    assert submit(client, task["task_id"], "prefer_c").status_code == 422
    assert submit(client, task["task_id"], "tie_good", (0,)).status_code == 422
    assert client.get("/session/ann1/progress").json()["submitted"] == 0


def test_no_response_contains_resolution_key(client) -> None:
    payloads = []
    for i in range(N_TASKS):
        body = client.get("/session/ann1/next").json()
        payloads.append(body)
        payloads.append(submit(client, body["task"]["task_id"]).json())
        payloads.append(client.get("/session/ann1/progress").json())

    def keys_of(obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                yield k
                yield from keys_of(v)
        elif isinstance(obj, list):
            for v in obj:
                yield from keys_of(v)

    for payload in payloads:
        for key in keys_of(payload):
            assert "gold" not in key and key != "model_id", payload


def test_records_survive_restart(client, campaign) -> None:
    for _ in range(2):
        task = client.get("/session/ann1/next").json()["task"]
        submit(client, task["task_id"], "prefer_b")

    reborn = TestClient(create_app(campaign["dir"]))
    progress = reborn.get("/session/ann1/progress").json()
    assert progress["index"] == 2  # first unsubmitted task
    assert progress["submitted"] == 2
    nxt = reborn.get("/session/ann1/next").json()
    assert nxt["task"]["index"] == 2
    revisited = reborn.get("/session/ann1/next", params={"index": 0}).json()
    assert revisited["record"]["choice"] == "prefer_b"


def test_wal_is_append_only(client, campaign) -> None:
    wal = campaign["dir"] / "wal.jsonl"
    task = client.get("/session/ann1/next").json()["task"]
    submit(client, task["task_id"], "prefer_a")
    first_content = wal.read_bytes()
    submit(client, task["task_id"], "tie_poor")
    second_content = wal.read_bytes()
    assert second_content.startswith(first_content)
    assert len(second_content.splitlines()) == 2


def test_audio_served_with_ranges(client, campaign) -> None:
    uid = campaign["tasks"][0].utterance_id
    full = (campaign["audio_root"] / f"audio/{uid}.wav").read_bytes()

    resp = client.get(f"/audio/{uid}")
    assert resp.status_code == 200
    assert resp.content == full
    assert resp.headers["accept-ranges"] == "bytes"

    part = client.get(f"/audio/{uid}", headers={"Range": "bytes=10-19"})
    assert part.status_code == 206
    assert part.content == full[10:20]
    assert part.headers["content-range"] == f"bytes 10-19/{len(full)}"

    tail = client.get(f"/audio/{uid}", headers={"Range": "bytes=-5"})
    assert tail.status_code == 206
    assert tail.content == full[-5:]

    open_ended = client.get(f"/audio/{uid}", headers={"Range": "bytes=100-"})
    assert open_ended.status_code == 206
    assert open_ended.content == full[100:]

    assert client.get(f"/audio/{uid}",
                      headers={"Range": f"bytes={len(full)}-"}).status_code == 416
    assert client.get("/audio/ghost").status_code == 404


def test_records_flow_into_report(client, campaign) -> None:
    choices = ["prefer_a", "prefer_b", "prefer_a", "tie_good", "prefer_b"]
    for choice in choices:
        task = client.get("/session/ann1/next").json()["task"]
        words = (0,) if choice.startswith("prefer") else ()
        submit(client, task["task_id"], choice, words)

    records = load_records(campaign["dir"] / "records.jsonl")
    assert len(records) == N_TASKS
    assert all(r.annotator_id == "ann1" for r in records)

    tasks = load_tasks(campaign["tasks_path"], campaign["keys_path"])
    config = PreferenceTestConfig(min_decided=1)
    report = compile_report(tasks, records, config)
    audit = report.per_language["bb"]
    assert audit.n_annotated == N_TASKS
    assert audit.abstain_good == 1
    assert audit.gold_preferred + audit.model_preferred == 4

    by_key = {t.task_id: t.a_is_gold for t in tasks}
    want_gold = sum(
        1 for r in records
        if (r.choice is Choice.PREFER_A) == by_key[r.task_id]
        and r.choice in (Choice.PREFER_A, Choice.PREFER_B)
    )
    assert audit.gold_preferred == want_gold
